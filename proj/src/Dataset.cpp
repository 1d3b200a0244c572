#include "Dataset.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "Exceptions.h"
#include "Rng.h"

namespace mdi {

namespace {

constexpr const char* kRuleNegative = "negative";
constexpr const char* kRuleAgeRange = "age-range";
constexpr const char* kRuleFatherAge = "father-age";
constexpr const char* kRuleGravidityParity = "gravidity-parity";
constexpr const char* kRuleEducationMax = "education-max";
constexpr const char* kRuleRange = "range";

int bitWidthFor(int categoryCount) {
    int width = 0;
    while ((1 << width) < categoryCount) ++width;
    return width;
}

std::string trimmed(const std::string& s) {
    size_t begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    size_t end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

Schema::Schema(std::vector<VariableSpec> variables) : variables_(std::move(variables)) {
    if (variables_.empty()) throw ConfigError("schema needs at least one variable");
    std::set<std::string> seen;
    offsets_.reserve(variables_.size());
    for (const VariableSpec& spec : variables_) {
        if (spec.name.empty()) throw ConfigError("variable name must be nonempty");
        if (!seen.insert(spec.name).second)
            throw ConfigError("duplicate variable name: " + spec.name);
        if (spec.lower > spec.upper)
            throw ConfigError("variable " + spec.name + ": lower bound exceeds upper bound");
        switch (spec.kind) {
            case VariableKind::Binary:
                if (spec.lower != 0 || spec.upper != 1)
                    throw ConfigError("variable " + spec.name + ": binary range must be {0,1}");
                if (spec.codeWidth != 0)
                    throw ConfigError("variable " + spec.name + ": code width only applies to categorical");
                break;
            case VariableKind::Ordinal:
                if (spec.codeWidth != 0)
                    throw ConfigError("variable " + spec.name + ": code width only applies to categorical");
                break;
            case VariableKind::Categorical:
                if (spec.codeWidth != bitWidthFor(spec.categoryCount()))
                    throw ConfigError("variable " + spec.name + ": code width must cover the category count");
                break;
        }
        offsets_.push_back(encodedWidth_);
        int width = spec.encodedWidth();
        for (int i = 0; i < width; ++i)
            columnVariable_.push_back(static_cast<int>(offsets_.size()) - 1);
        encodedWidth_ += width;
    }
}

Schema Schema::survey() {
    return Schema({
        {"Province", VariableKind::Categorical, 1, 9, 4},
        {"Age", VariableKind::Ordinal, 12, 50, 0},
        {"Edu", VariableKind::Ordinal, 0, 13, 0},
        {"Gra", VariableKind::Ordinal, 1, 12, 0},
        {"Par", VariableKind::Ordinal, 0, 9, 0},
        {"FathAge", VariableKind::Ordinal, 12, 90, 0},
        {"HIV", VariableKind::Binary, 0, 1, 0},
        {"RPR", VariableKind::Binary, 0, 1, 0},
        {"Race", VariableKind::Categorical, 0, 5, 3},
    });
}

int Schema::indexOf(const std::string& name) const {
    for (size_t i = 0; i < variables_.size(); ++i)
        if (variables_[i].name == name) return static_cast<int>(i);
    return -1;
}

int Schema::require(const std::string& name) const {
    int idx = indexOf(name);
    if (idx < 0) throw ConfigError("unknown variable: " + name);
    return idx;
}

bool Schema::operator==(const Schema& other) const {
    if (variables_.size() != other.variables_.size()) return false;
    for (size_t i = 0; i < variables_.size(); ++i) {
        const VariableSpec& a = variables_[i];
        const VariableSpec& b = other.variables_[i];
        if (a.name != b.name || a.kind != b.kind || a.lower != b.lower || a.upper != b.upper ||
            a.codeWidth != b.codeWidth)
            return false;
    }
    return true;
}

Dataset::Dataset(Schema schema, int rows) : schema_(std::move(schema)), rows_(rows) {
    if (rows < 0) throw ConfigError("row count must be non-negative");
    size_t cells = static_cast<size_t>(rows) * static_cast<size_t>(schema_.variableCount());
    values_.assign(cells, 0);
    missing_.assign(cells, 1);
}

void Dataset::set(int row, int var, int value) {
    values_[index(row, var)] = value;
    missing_[index(row, var)] = 0;
}

void Dataset::setMissing(int row, int var) {
    values_[index(row, var)] = 0;
    missing_[index(row, var)] = 1;
}

int64_t Dataset::missingCellCount() const {
    return std::count(missing_.begin(), missing_.end(), uint8_t{1});
}

std::vector<int> Dataset::completeRows() const {
    std::vector<int> rows;
    int vars = schema_.variableCount();
    for (int r = 0; r < rows_; ++r) {
        bool complete = true;
        for (int v = 0; v < vars && complete; ++v) complete = !missing(r, v);
        if (complete) rows.push_back(r);
    }
    return rows;
}

bool Dataset::isComplete() const { return missingCellCount() == 0; }

Dataset Dataset::selectRows(std::span<const int> rowIndices) const {
    Dataset out(schema_, static_cast<int>(rowIndices.size()));
    for (size_t i = 0; i < rowIndices.size(); ++i) {
        int r = rowIndices[i];
        if (r < 0 || r >= rows_) throw DataError("row index out of range");
        for (int v = 0; v < schema_.variableCount(); ++v)
            if (!missing(r, v)) out.set(static_cast<int>(i), v, value(r, v));
    }
    return out;
}

std::vector<RuleViolation> validateRecord(std::span<const int> record,
                                          std::span<const uint8_t> observed,
                                          const Schema& schema) {
    size_t arity = static_cast<size_t>(schema.variableCount());
    if (record.size() != arity || observed.size() != arity)
        throw DataError("record arity does not match schema");
    std::vector<RuleViolation> violations;
    int ageVar = schema.indexOf("Age");
    int eduVar = schema.indexOf("Edu");
    int graVar = schema.indexOf("Gra");
    int parVar = schema.indexOf("Par");
    int fathVar = schema.indexOf("FathAge");
    for (int v = 0; v < schema.variableCount(); ++v) {
        if (!observed[static_cast<size_t>(v)]) continue;
        int value = record[static_cast<size_t>(v)];
        const VariableSpec& spec = schema.variable(v);
        // One rule per bad cell; the most specific condition names it.
        if (value < 0) {
            violations.push_back({kRuleNegative, {v}});
        } else if (v == ageVar && (value < 12 || value > 50)) {
            violations.push_back({kRuleAgeRange, {v}});
        } else if (v == fathVar && value <= 12) {
            violations.push_back({kRuleFatherAge, {v}});
        } else if (v == eduVar && value > 13) {
            violations.push_back({kRuleEducationMax, {v}});
        } else if (value < spec.lower || value > spec.upper) {
            violations.push_back({kRuleRange, {v}});
        }
    }
    if (graVar >= 0 && parVar >= 0 && observed[static_cast<size_t>(graVar)] &&
        observed[static_cast<size_t>(parVar)] &&
        record[static_cast<size_t>(graVar)] < record[static_cast<size_t>(parVar)]) {
        violations.push_back({kRuleGravidityParity, {graVar, parVar}});
    }
    return violations;
}

std::vector<RuleViolation> validateRecord(const Dataset& dataset, int row) {
    int vars = dataset.variableCount();
    std::vector<int> record(static_cast<size_t>(vars));
    std::vector<uint8_t> observed(static_cast<size_t>(vars));
    for (int v = 0; v < vars; ++v) {
        record[static_cast<size_t>(v)] = dataset.value(row, v);
        observed[static_cast<size_t>(v)] = dataset.missing(row, v) ? 0 : 1;
    }
    return validateRecord(record, observed, dataset.schema());
}

Dataset cleanDataset(const Dataset& dataset, CleaningSummary& summary) {
    Dataset out = dataset;
    summary = CleaningSummary{};
    for (int r = 0; r < dataset.rowCount(); ++r) {
        // Rules only fire on observed cells, so one pass reaches the fixpoint.
        std::vector<RuleViolation> violations = validateRecord(dataset, r);
        if (violations.empty()) continue;
        std::set<int> cells;
        for (const RuleViolation& violation : violations)
            cells.insert(violation.variables.begin(), violation.variables.end());
        for (int v : cells) out.setMissing(r, v);
        summary.cellsFlagged += static_cast<int64_t>(cells.size());
        summary.rowsAffected += 1;
    }
    return out;
}

Dataset cleanDataset(const Dataset& dataset) {
    CleaningSummary summary;
    return cleanDataset(dataset, summary);
}

void encodeValue(const Schema& schema, int var, int value, std::span<double> encodedRow) {
    const VariableSpec& spec = schema.variable(var);
    int offset = schema.encodedOffset(var);
    if (spec.kind == VariableKind::Categorical) {
        int code = value - spec.lower;
        for (int j = 0; j < spec.codeWidth; ++j)
            encodedRow[static_cast<size_t>(offset + j)] =
                static_cast<double>((code >> (spec.codeWidth - 1 - j)) & 1);
    } else if (spec.lower == spec.upper) {
        encodedRow[static_cast<size_t>(offset)] = 0.0;
    } else {
        encodedRow[static_cast<size_t>(offset)] =
            static_cast<double>(value - spec.lower) / static_cast<double>(spec.upper - spec.lower);
    }
}

int decodeValue(const Schema& schema, int var, std::span<const double> encodedRow) {
    const VariableSpec& spec = schema.variable(var);
    int offset = schema.encodedOffset(var);
    if (spec.kind == VariableKind::Categorical) {
        // Nearest declared code; on real-valued bits the L1 distance reduces
        // to Hamming distance for exact bit patterns. Ties pick the smallest
        // category.
        int best = spec.lower;
        double bestDistance = std::numeric_limits<double>::infinity();
        for (int value = spec.lower; value <= spec.upper; ++value) {
            int code = value - spec.lower;
            double distance = 0.0;
            for (int j = 0; j < spec.codeWidth; ++j) {
                double bit = static_cast<double>((code >> (spec.codeWidth - 1 - j)) & 1);
                distance += std::abs(encodedRow[static_cast<size_t>(offset + j)] - bit);
            }
            if (distance < bestDistance) {
                bestDistance = distance;
                best = value;
            }
        }
        return best;
    }
    double x = encodedRow[static_cast<size_t>(offset)];
    double raw = static_cast<double>(spec.lower) + x * static_cast<double>(spec.upper - spec.lower);
    int value = static_cast<int>(std::lround(raw));
    return std::clamp(value, spec.lower, spec.upper);
}

EncodedMatrix encodeDataset(const Dataset& dataset) {
    const Schema& schema = dataset.schema();
    EncodedMatrix out;
    out.schema = schema;
    out.rows = dataset.rowCount();
    out.width = schema.encodedWidth();
    size_t cells = static_cast<size_t>(out.rows) * static_cast<size_t>(out.width);
    out.values.assign(cells, 0.0);
    out.missing.assign(cells, 0);
    for (int r = 0; r < out.rows; ++r) {
        std::span<double> row = out.row(r);
        for (int v = 0; v < schema.variableCount(); ++v) {
            const VariableSpec& spec = schema.variable(v);
            int offset = schema.encodedOffset(v);
            int width = spec.encodedWidth();
            if (dataset.missing(r, v)) {
                for (int j = 0; j < width; ++j)
                    out.missing[static_cast<size_t>(r) * static_cast<size_t>(out.width) +
                                static_cast<size_t>(offset + j)] = 1;
                continue;
            }
            int value = dataset.value(r, v);
            if (value < spec.lower || value > spec.upper) {
                throw DataError("row " + std::to_string(r) + ": " + spec.name + "=" +
                                std::to_string(value) + " outside declared range [" +
                                std::to_string(spec.lower) + "," + std::to_string(spec.upper) + "]");
            }
            encodeValue(schema, v, value, row);
        }
    }
    return out;
}

Dataset decodeMatrix(const EncodedMatrix& encoded) {
    Dataset out(encoded.schema, encoded.rows);
    const Schema& schema = encoded.schema;
    for (int r = 0; r < encoded.rows; ++r) {
        std::span<const double> row = encoded.row(r);
        for (int v = 0; v < schema.variableCount(); ++v) {
            int offset = schema.encodedOffset(v);
            int width = schema.variable(v).encodedWidth();
            bool anyMissing = false;
            for (int j = 0; j < width; ++j)
                anyMissing = anyMissing || encoded.missingAt(r, offset + j);
            if (!anyMissing) out.set(r, v, decodeValue(schema, v, row));
        }
    }
    return out;
}

Dataset injectMissing(const Dataset& dataset, const MissingnessPlan& plan, uint64_t seed,
                      int64_t* removedCount) {
    if (!(plan.rate > 0.0 && plan.rate < 1.0))
        throw ConfigError("missingness rate must lie strictly between 0 and 1");
    if (plan.targetVariables.empty()) throw ConfigError("missingness plan needs target variables");
    const Schema& schema = dataset.schema();
    std::vector<uint8_t> isTarget(static_cast<size_t>(schema.variableCount()), 0);
    for (const std::string& name : plan.targetVariables)
        isTarget[static_cast<size_t>(schema.require(name))] = 1;

    // MAR multiplier per row: normalized average rank of the driver value,
    // in [0,1]; rows with a missing driver get the neutral 0.5.
    std::vector<double> multiplier;
    if (plan.mechanism == MissingnessMechanism::MAR) {
        if (plan.marDriver.empty()) throw ConfigError("MAR plan needs a driver variable");
        int driver = schema.require(plan.marDriver);
        if (isTarget[static_cast<size_t>(driver)])
            throw ConfigError("MAR driver cannot be a target variable");
        multiplier.assign(static_cast<size_t>(dataset.rowCount()), 0.5);
        std::vector<std::pair<int, int>> observedValues;  // (value, row)
        for (int r = 0; r < dataset.rowCount(); ++r)
            if (!dataset.missing(r, driver)) observedValues.push_back({dataset.value(r, driver), r});
        size_t n = observedValues.size();
        if (n > 1) {
            std::sort(observedValues.begin(), observedValues.end());
            size_t i = 0;
            while (i < n) {
                size_t j = i;
                while (j < n && observedValues[j].first == observedValues[i].first) ++j;
                double averageRank = (static_cast<double>(i) + static_cast<double>(j - 1)) / 2.0;
                double normalized = averageRank / static_cast<double>(n - 1);
                for (size_t k = i; k < j; ++k)
                    multiplier[static_cast<size_t>(observedValues[k].second)] = normalized;
                i = j;
            }
        }
    }

    Dataset out = dataset;
    Rng rng(seed);
    int64_t removed = 0;
    for (int r = 0; r < dataset.rowCount(); ++r) {
        for (int v = 0; v < schema.variableCount(); ++v) {
            if (!isTarget[static_cast<size_t>(v)] || dataset.missing(r, v)) continue;
            double p = plan.rate;
            if (plan.mechanism == MissingnessMechanism::MAR)
                p *= multiplier[static_cast<size_t>(r)];
            if (rng.uniform() < p) {
                out.setMissing(r, v);
                ++removed;
            }
        }
    }
    if (removedCount != nullptr) *removedCount = removed;
    return out;
}

FourWaySplit splitDataset(const Dataset& dataset, const SplitFractions& fractions, uint64_t seed) {
    const double parts[4] = {fractions.train, fractions.validation, fractions.test,
                             fractions.experiment};
    double sum = 0.0;
    int positive = 0;
    for (double f : parts) {
        if (f < 0.0) throw ConfigError("split fractions must be non-negative");
        if (f > 0.0) ++positive;
        sum += f;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("split fractions must sum to 1");
    int n = dataset.rowCount();
    if (n < positive) throw DataError("fewer rows than requested partitions");

    // Largest-remainder apportionment; remainder ties go to the earlier set.
    int64_t counts[4];
    double remainders[4];
    int64_t assigned = 0;
    for (int i = 0; i < 4; ++i) {
        double quota = static_cast<double>(n) * parts[i];
        counts[i] = static_cast<int64_t>(std::floor(quota));
        remainders[i] = quota - static_cast<double>(counts[i]);
        assigned += counts[i];
    }
    int order[4] = {0, 1, 2, 3};
    std::stable_sort(order, order + 4,
                     [&](int a, int b) { return remainders[a] > remainders[b]; });
    for (int64_t leftover = n - assigned, i = 0; leftover > 0; --leftover, ++i)
        counts[order[i]] += 1;

    std::vector<int> rows(static_cast<size_t>(n));
    std::iota(rows.begin(), rows.end(), 0);
    Rng rng(seed);
    rng.shuffle(rows);

    FourWaySplit split;
    Dataset* sets[4] = {&split.train, &split.validation, &split.test, &split.experiment};
    size_t cursor = 0;
    for (int i = 0; i < 4; ++i) {
        std::span<const int> slice(rows.data() + cursor, static_cast<size_t>(counts[i]));
        *sets[i] = dataset.selectRows(slice);
        cursor += static_cast<size_t>(counts[i]);
    }
    return split;
}

Dataset readCsv(const std::string& path, const Schema& schema) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty file, header expected");
    {
        std::stringstream header(trimmed(line));
        std::string field;
        int v = 0;
        while (std::getline(header, field, ',')) {
            if (v >= schema.variableCount() || trimmed(field) != schema.variable(v).name)
                throw DataError(path + ": header does not match schema");
            ++v;
        }
        if (v != schema.variableCount()) throw DataError(path + ": header does not match schema");
    }
    std::vector<std::vector<std::pair<int, bool>>> parsedRows;
    int lineNumber = 1;
    while (std::getline(in, line)) {
        ++lineNumber;
        std::string row = trimmed(line);
        if (row.empty()) continue;
        std::vector<std::pair<int, bool>> parsed;
        size_t begin = 0;
        while (true) {
            size_t comma = row.find(',', begin);
            std::string field = trimmed(row.substr(
                begin, comma == std::string::npos ? std::string::npos : comma - begin));
            if (field == "NA") {
                parsed.push_back({0, false});
            } else {
                int value = 0;
                auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
                if (ec != std::errc{} || ptr != field.data() + field.size())
                    throw DataError(path + " line " + std::to_string(lineNumber) +
                                    ": cannot parse '" + field + "' as integer");
                parsed.push_back({value, true});
            }
            if (comma == std::string::npos) break;
            begin = comma + 1;
        }
        if (static_cast<int>(parsed.size()) != schema.variableCount())
            throw DataError(path + " line " + std::to_string(lineNumber) + ": expected " +
                            std::to_string(schema.variableCount()) + " fields, got " +
                            std::to_string(parsed.size()));
        parsedRows.push_back(std::move(parsed));
    }
    Dataset out(schema, static_cast<int>(parsedRows.size()));
    for (size_t r = 0; r < parsedRows.size(); ++r)
        for (int v = 0; v < schema.variableCount(); ++v)
            if (parsedRows[r][static_cast<size_t>(v)].second)
                out.set(static_cast<int>(r), v, parsedRows[r][static_cast<size_t>(v)].first);
    return out;
}

void writeCsv(const Dataset& dataset, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    const Schema& schema = dataset.schema();
    for (int v = 0; v < schema.variableCount(); ++v) {
        if (v > 0) out << ',';
        out << schema.variable(v).name;
    }
    out << '\n';
    for (int r = 0; r < dataset.rowCount(); ++r) {
        for (int v = 0; v < schema.variableCount(); ++v) {
            if (v > 0) out << ',';
            if (dataset.missing(r, v)) {
                out << "NA";
            } else {
                out << dataset.value(r, v);
            }
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

namespace {

const char* kindName(VariableKind kind) {
    switch (kind) {
        case VariableKind::Ordinal: return "ordinal";
        case VariableKind::Categorical: return "categorical";
        case VariableKind::Binary: return "binary";
    }
    return "ordinal";
}

VariableKind kindFromName(const std::string& name) {
    if (name == "ordinal") return VariableKind::Ordinal;
    if (name == "categorical") return VariableKind::Categorical;
    if (name == "binary") return VariableKind::Binary;
    throw ConfigError("unknown variable kind: " + name);
}

}  // namespace

nlohmann::json missingnessPlanToJson(const MissingnessPlan& plan) {
    nlohmann::json doc{{"mechanism", plan.mechanism == MissingnessMechanism::MAR ? "mar" : "mcar"},
                       {"variables", plan.targetVariables},
                       {"rate", plan.rate}};
    if (plan.mechanism == MissingnessMechanism::MAR) doc["driver"] = plan.marDriver;
    return doc;
}

MissingnessPlan missingnessPlanFromJson(const nlohmann::json& doc) {
    MissingnessPlan plan;
    try {
        std::string mechanism = doc.value("mechanism", "mcar");
        if (mechanism == "mcar") {
            plan.mechanism = MissingnessMechanism::MCAR;
        } else if (mechanism == "mar") {
            plan.mechanism = MissingnessMechanism::MAR;
        } else {
            throw ConfigError("unknown missingness mechanism: " + mechanism);
        }
        plan.targetVariables = doc.at("variables").get<std::vector<std::string>>();
        plan.rate = doc.value("rate", 0.1);
        plan.marDriver = doc.value("driver", std::string());
        if (plan.mechanism == MissingnessMechanism::MAR && plan.marDriver.empty())
            throw ConfigError("a MAR plan needs a driver variable");
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("missingness plan: ") + e.what());
    }
    return plan;
}

nlohmann::json schemaToJson(const Schema& schema) {
    nlohmann::json variables = nlohmann::json::array();
    for (const VariableSpec& spec : schema.variables()) {
        nlohmann::json v{{"name", spec.name},
                         {"kind", kindName(spec.kind)},
                         {"lower", spec.lower},
                         {"upper", spec.upper}};
        if (spec.kind == VariableKind::Categorical) v["code_width"] = spec.codeWidth;
        variables.push_back(std::move(v));
    }
    return variables;
}

Schema schemaFromJson(const nlohmann::json& doc) {
    if (!doc.is_array()) throw ConfigError("schema document must be an array of variables");
    std::vector<VariableSpec> variables;
    try {
        for (const nlohmann::json& v : doc) {
            VariableSpec spec;
            spec.name = v.at("name").get<std::string>();
            spec.kind = kindFromName(v.at("kind").get<std::string>());
            spec.lower = v.at("lower").get<int>();
            spec.upper = v.at("upper").get<int>();
            spec.codeWidth = v.value("code_width", 0);
            variables.push_back(std::move(spec));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("schema document: ") + e.what());
    }
    return Schema(std::move(variables));
}

}  // namespace mdi
