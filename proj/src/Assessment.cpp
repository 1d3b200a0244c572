#include "Assessment.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "Exceptions.h"

namespace mdi {

namespace {

constexpr int kSerializationVersion = 1;
constexpr int kCellWidth = 14;
constexpr int kLabelWidth = 34;

// Encoded columns of every variable except the target, ascending.
std::vector<int> classifierInputColumns(const Schema& schema, int targetVariable) {
    std::vector<int> cols;
    for (int c = 0; c < schema.encodedWidth(); ++c)
        if (schema.variableOfColumn(c) != targetVariable) cols.push_back(c);
    return cols;
}

std::vector<double> classifierFeatureRow(const EncodedMatrix& encoded,
                                         std::span<const int> cols, int row) {
    std::vector<double> x(cols.size());
    for (size_t i = 0; i < cols.size(); ++i) x[i] = encoded.at(row, cols[i]);
    return x;
}

int requireBinaryTarget(const Schema& schema, const std::string& name) {
    int target = schema.require(name);
    if (schema.variable(target).kind != VariableKind::Binary)
        throw ConfigError("classification target " + name + " is not binary");
    return target;
}

void requireComplete(const Dataset& data, const char* what) {
    if (!data.isComplete())
        throw DataError(std::string(what) + " contains missing cells");
}

std::vector<double> column(const Dataset& data, int variable) {
    std::vector<double> values(static_cast<size_t>(data.rowCount()));
    for (int r = 0; r < data.rowCount(); ++r)
        values[static_cast<size_t>(r)] = static_cast<double>(data.value(r, variable));
    return values;
}

std::string cell(double value) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(3) << value;
    return out.str();
}

std::string cell(const std::optional<double>& value) {
    return value ? cell(*value) : std::string("n/a");
}

void appendRow(std::ostringstream& out, const std::string& rowLabel,
               const std::vector<std::string>& cells) {
    out << std::left << std::setw(kLabelWidth) << rowLabel;
    for (const std::string& c : cells) out << std::right << std::setw(kCellWidth) << c;
    out << '\n';
}

std::string columnLabel(const StatAssessment& a) {
    return a.label.empty() ? a.strategy : a.label;
}

}  // namespace

StatAssessment assessStats(const Dataset& target, const ImputedSet& imputed) {
    if (!(target.schema() == imputed.data.schema()))
        throw DataError("reference schema does not match the completed set");
    if (target.rowCount() != imputed.data.rowCount())
        throw DataError("reference row count does not match the completed set");
    const Schema& schema = target.schema();

    StatAssessment out;
    out.label = imputed.label;
    out.strategy = strategyName(imputed.strategy);

    std::vector<int> patternVars;
    for (const std::string& name : imputed.pattern) patternVars.push_back(schema.require(name));

    std::vector<std::vector<int>> cellRows(static_cast<size_t>(schema.variableCount()));
    for (const auto& [r, v] : imputed.imputedCells) cellRows[static_cast<size_t>(v)].push_back(r);

    std::vector<double> pooledTarget;
    std::vector<double> pooledImputed;
    std::vector<double> pooledCellTarget;
    std::vector<double> pooledCellImputed;
    for (int v : patternVars) {
        for (int r = 0; r < target.rowCount(); ++r)
            if (target.missing(r, v))
                throw DataError("reference column " + schema.variable(v).name +
                                " has missing cells");
        StatVariableAssessment entry;
        entry.variable = schema.variable(v).name;
        std::vector<double> t = column(target, v);
        std::vector<double> p = column(imputed.data, v);
        entry.target = statImpact(t, t);
        entry.imputed = statImpact(t, p);
        const std::vector<int>& rows = cellRows[static_cast<size_t>(v)];
        entry.imputedCellCount = static_cast<int>(rows.size());
        double sum = 0.0;
        for (int r : rows) {
            double d = t[static_cast<size_t>(r)] - p[static_cast<size_t>(r)];
            sum += d * d;
            pooledCellTarget.push_back(t[static_cast<size_t>(r)]);
            pooledCellImputed.push_back(p[static_cast<size_t>(r)]);
        }
        entry.imputedCellsMse = rows.empty() ? 0.0 : sum / static_cast<double>(rows.size());
        pooledTarget.insert(pooledTarget.end(), t.begin(), t.end());
        pooledImputed.insert(pooledImputed.end(), p.begin(), p.end());
        out.variables.push_back(std::move(entry));
    }

    out.combinedWholeMse =
        pooledTarget.empty() ? 0.0 : meanSquaredError(pooledTarget, pooledImputed);
    out.combinedImputedCells = static_cast<int>(pooledCellTarget.size());
    out.combinedImputedMse =
        pooledCellTarget.empty() ? 0.0 : meanSquaredError(pooledCellTarget, pooledCellImputed);
    if (!patternVars.empty()) {
        Matrix t(target.rowCount(), static_cast<int>(patternVars.size()));
        Matrix p(target.rowCount(), static_cast<int>(patternVars.size()));
        for (int r = 0; r < target.rowCount(); ++r) {
            for (size_t j = 0; j < patternVars.size(); ++j) {
                t.at(r, static_cast<int>(j)) = static_cast<double>(target.value(r, patternVars[j]));
                p.at(r, static_cast<int>(j)) =
                    static_cast<double>(imputed.data.value(r, patternVars[j]));
            }
        }
        out.multivariateMahalanobis = pairedMahalanobis(t, p);
    }
    return out;
}

nlohmann::json BinaryClassifier::toJson() const {
    return nlohmann::json{{"version", kSerializationVersion},
                          {"kind", "binary-classifier"},
                          {"schema", schemaToJson(schema)},
                          {"target", target},
                          {"forest", forest.toJson()}};
}

BinaryClassifier BinaryClassifier::fromJson(const nlohmann::json& doc) {
    try {
        if (!doc.is_object() || doc.value("kind", "") != "binary-classifier")
            throw ConfigError("document is not a binary-classifier model");
        if (doc.at("version").get<int>() != kSerializationVersion)
            throw ConfigError("unsupported binary-classifier version");
        BinaryClassifier model;
        model.schema = schemaFromJson(doc.at("schema"));
        model.target = doc.at("target").get<std::string>();
        requireBinaryTarget(model.schema, model.target);
        model.forest = RandomForest::fromJson(doc.at("forest"));
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("binary-classifier document: ") + e.what());
    }
}

BinaryClassifier fitBinaryClassifier(const Dataset& train, const std::string& targetVariable,
                                     const ForestParams& params, uint64_t seed) {
    int target = requireBinaryTarget(train.schema(), targetVariable);
    if (train.rowCount() == 0) throw DataError("classifier needs training rows");
    requireComplete(train, "classifier training data");

    EncodedMatrix encoded = encodeDataset(train);
    std::vector<int> cols = classifierInputColumns(train.schema(), target);
    FeatureMatrix features(encoded.rows, std::vector<FeatureInfo>(cols.size()));
    for (size_t i = 0; i < cols.size(); ++i)
        for (int r = 0; r < encoded.rows; ++r)
            features.set(r, static_cast<int>(i), encoded.at(r, cols[i]));
    std::vector<int> labels(static_cast<size_t>(encoded.rows));
    for (int r = 0; r < encoded.rows; ++r) labels[static_cast<size_t>(r)] = train.value(r, target);

    BinaryClassifier model;
    model.schema = train.schema();
    model.target = targetVariable;
    model.forest = fitClassificationForest(features, labels, 2, params, seed);
    return model;
}

std::vector<int> classifyAll(const BinaryClassifier& model, const Dataset& data) {
    if (!(data.schema() == model.schema)) throw DataError("dataset schema does not match the classifier");
    requireComplete(data, "classification input");
    int target = model.schema.require(model.target);
    EncodedMatrix encoded = encodeDataset(data);
    std::vector<int> cols = classifierInputColumns(model.schema, target);
    std::vector<int> predicted(static_cast<size_t>(encoded.rows));
    for (int r = 0; r < encoded.rows; ++r)
        predicted[static_cast<size_t>(r)] =
            model.forest.predictClass(classifierFeatureRow(encoded, cols, r));
    return predicted;
}

ClassificationAssessment assessClassification(const BinaryClassifier& model, const Dataset& data,
                                              const std::string& label) {
    std::vector<int> predicted = classifyAll(model, data);
    int target = model.schema.require(model.target);
    std::vector<int> actual(static_cast<size_t>(data.rowCount()));
    for (int r = 0; r < data.rowCount(); ++r) actual[static_cast<size_t>(r)] = data.value(r, target);
    ClassificationAssessment out;
    out.label = label;
    out.confusion = confusion(predicted, actual);
    out.metrics = metricsOf(out.confusion);
    return out;
}

nlohmann::json LrClassifier::toJson() const {
    return nlohmann::json{{"version", kSerializationVersion},
                          {"kind", "lr-classifier"},
                          {"schema", schemaToJson(schema)},
                          {"target", target},
                          {"coefficients", model.coefficients},
                          {"converged", model.converged},
                          {"separation_warning", model.separationWarning},
                          {"iterations", model.iterations},
                          {"final_gradient_norm", model.finalGradientNorm}};
}

LrClassifier LrClassifier::fromJson(const nlohmann::json& doc) {
    try {
        if (!doc.is_object() || doc.value("kind", "") != "lr-classifier")
            throw ConfigError("document is not an lr-classifier model");
        if (doc.at("version").get<int>() != kSerializationVersion)
            throw ConfigError("unsupported lr-classifier version");
        LrClassifier model;
        model.schema = schemaFromJson(doc.at("schema"));
        model.target = doc.at("target").get<std::string>();
        requireBinaryTarget(model.schema, model.target);
        model.model.coefficients = doc.at("coefficients").get<std::vector<double>>();
        model.model.converged = doc.at("converged").get<bool>();
        model.model.separationWarning = doc.at("separation_warning").get<bool>();
        model.model.iterations = doc.at("iterations").get<int>();
        model.model.finalGradientNorm = doc.at("final_gradient_norm").get<double>();
        int target = model.schema.require(model.target);
        size_t arity =
            1 + classifierInputColumns(model.schema, target).size();
        if (model.model.coefficients.size() != arity)
            throw ConfigError("lr-classifier coefficient arity mismatch");
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("lr-classifier document: ") + e.what());
    }
}

LrClassifier fitLrClassifier(const Dataset& train, const std::string& targetVariable,
                             const LrConfig& config) {
    int target = requireBinaryTarget(train.schema(), targetVariable);
    requireComplete(train, "regression training data");
    EncodedMatrix encoded = encodeDataset(train);
    std::vector<int> cols = classifierInputColumns(train.schema(), target);
    Matrix features(encoded.rows, static_cast<int>(cols.size()));
    for (int r = 0; r < encoded.rows; ++r)
        for (size_t i = 0; i < cols.size(); ++i)
            features.at(r, static_cast<int>(i)) = encoded.at(r, cols[i]);
    std::vector<int> labels(static_cast<size_t>(encoded.rows));
    for (int r = 0; r < encoded.rows; ++r) labels[static_cast<size_t>(r)] = train.value(r, target);

    LrClassifier out;
    out.schema = train.schema();
    out.target = targetVariable;
    out.model = fitLogistic(features, labels, config);
    return out;
}

std::vector<double> lrProbabilities(const LrClassifier& model, const Dataset& data) {
    if (!(data.schema() == model.schema))
        throw DataError("dataset schema does not match the regression model");
    requireComplete(data, "regression input");
    int target = model.schema.require(model.target);
    EncodedMatrix encoded = encodeDataset(data);
    std::vector<int> cols = classifierInputColumns(model.schema, target);
    std::vector<double> probabilities(static_cast<size_t>(encoded.rows));
    for (int r = 0; r < encoded.rows; ++r)
        probabilities[static_cast<size_t>(r)] =
            lrPredictProbability(model.model, classifierFeatureRow(encoded, cols, r));
    return probabilities;
}

LrImpactReport lrImpact(const LrClassifier& model, const Dataset& target,
                        const Dataset& comparison, const std::string& label) {
    if (target.rowCount() != comparison.rowCount())
        throw DataError("reference and comparison row counts differ");
    std::vector<double> targetPct = lrProbabilities(model, target);
    std::vector<double> comparisonPct = lrProbabilities(model, comparison);
    for (double& p : targetPct) p *= 100.0;
    for (double& p : comparisonPct) p *= 100.0;

    LrImpactReport out;
    out.label = label;
    out.q1 = quantile(comparisonPct, 0.25);
    out.median = quantile(comparisonPct, 0.5);
    out.q3 = quantile(comparisonPct, 0.75);
    out.mean = mean(comparisonPct);
    out.variance = variance(comparisonPct);
    std::optional<double> r = pearsonCorrelation(targetPct, comparisonPct);
    if (r) out.correlationPercent = 100.0 * *r;
    out.ks = ksStatistic(targetPct, comparisonPct);
    out.mse = meanSquaredError(targetPct, comparisonPct);
    return out;
}

nlohmann::json statImpactToJson(const StatImpactReport& report) {
    nlohmann::json doc{{"mean", report.mean},
                       {"q1", report.q1},
                       {"median", report.median},
                       {"q3", report.q3},
                       {"standard_deviation", report.standardDeviation},
                       {"variance", report.variance},
                       {"mse", report.mse},
                       {"max_percentage_deviation", report.maxPercentageDeviation},
                       {"max_deviation_guard", report.maxDeviationGuard}};
    doc["mahalanobis"] =
        report.mahalanobis ? nlohmann::json(*report.mahalanobis) : nlohmann::json();
    doc["correlation_percent"] =
        report.correlationPercent ? nlohmann::json(*report.correlationPercent) : nlohmann::json();
    return doc;
}

nlohmann::json statAssessmentToJson(const StatAssessment& assessment) {
    nlohmann::json variables = nlohmann::json::array();
    for (const StatVariableAssessment& v : assessment.variables) {
        variables.push_back(nlohmann::json{{"variable", v.variable},
                                           {"target", statImpactToJson(v.target)},
                                           {"imputed", statImpactToJson(v.imputed)},
                                           {"imputed_cells_mse", v.imputedCellsMse},
                                           {"imputed_cell_count", v.imputedCellCount}});
    }
    nlohmann::json combined{{"whole_mse", assessment.combinedWholeMse},
                            {"imputed_mse", assessment.combinedImputedMse},
                            {"imputed_cell_count", assessment.combinedImputedCells}};
    combined["mahalanobis"] = assessment.multivariateMahalanobis
                                  ? nlohmann::json(*assessment.multivariateMahalanobis)
                                  : nlohmann::json();
    return nlohmann::json{{"label", assessment.label},
                          {"strategy", assessment.strategy},
                          {"variables", variables},
                          {"combined", combined}};
}

nlohmann::json classificationAssessmentToJson(const ClassificationAssessment& assessment) {
    return nlohmann::json{
        {"label", assessment.label},
        {"confusion",
         {{"tn", assessment.confusion.tn},
          {"fp", assessment.confusion.fp},
          {"fn", assessment.confusion.fn},
          {"tp", assessment.confusion.tp}}},
        {"metrics",
         {{"accuracy", assessment.metrics.accuracy},
          {"sensitivity", assessment.metrics.sensitivity},
          {"specificity", assessment.metrics.specificity},
          {"precision", assessment.metrics.precision},
          {"f_measure", assessment.metrics.fMeasure}}},
        {"actual_negative_error", assessment.confusion.actualNegativeErrorRate()},
        {"actual_positive_error", assessment.confusion.actualPositiveErrorRate()}};
}

nlohmann::json lrImpactToJson(const LrImpactReport& report) {
    nlohmann::json doc{{"label", report.label}, {"q1", report.q1},
                       {"median", report.median}, {"q3", report.q3},
                       {"mean", report.mean},     {"variance", report.variance},
                       {"ks", report.ks},         {"mse", report.mse}};
    doc["correlation_percent"] =
        report.correlationPercent ? nlohmann::json(*report.correlationPercent) : nlohmann::json();
    return doc;
}

nlohmann::json rangeAccuracyToJson(const RangeAccuracyReport& report) {
    nlohmann::json entries = nlohmann::json::array();
    for (const RangeAccuracyEntry& entry : report.entries) {
        entries.push_back(nlohmann::json{{"variable", entry.variable},
                                         {"ranges", entry.ranges},
                                         {"fractions", entry.fractions},
                                         {"cell_count", entry.cellCount}});
    }
    return nlohmann::json{{"entries", entries}};
}

std::string statTable(const std::vector<StatAssessment>& sets) {
    if (sets.empty()) return "";
    std::ostringstream out;

    std::vector<std::string> order;
    for (const StatAssessment& set : sets)
        for (const StatVariableAssessment& v : set.variables)
            if (std::find(order.begin(), order.end(), v.variable) == order.end())
                order.push_back(v.variable);

    auto find = [](const StatAssessment& set,
                   const std::string& variable) -> const StatVariableAssessment* {
        for (const StatVariableAssessment& v : set.variables)
            if (v.variable == variable) return &v;
        return nullptr;
    };

    std::vector<std::string> header{"Target"};
    for (const StatAssessment& set : sets) header.push_back(columnLabel(set));

    bool guardSeen = false;
    for (const std::string& variable : order) {
        const StatVariableAssessment* reference = nullptr;
        for (const StatAssessment& set : sets)
            if ((reference = find(set, variable))) break;
        out << "Variable: " << variable << '\n';
        appendRow(out, "Measure", header);
        auto row = [&](const std::string& rowLabel, auto pick) {
            std::vector<std::string> cells{pick(reference->target)};
            for (const StatAssessment& set : sets) {
                const StatVariableAssessment* v = find(set, variable);
                cells.push_back(v ? pick(v->imputed) : std::string("n/a"));
            }
            appendRow(out, rowLabel, cells);
        };
        row("Mean", [](const StatImpactReport& r) { return cell(r.mean); });
        row("1st Quartile", [](const StatImpactReport& r) { return cell(r.q1); });
        row("Median", [](const StatImpactReport& r) { return cell(r.median); });
        row("3rd Quartile", [](const StatImpactReport& r) { return cell(r.q3); });
        row("Standard Deviation",
            [](const StatImpactReport& r) { return cell(r.standardDeviation); });
        row("Variance", [](const StatImpactReport& r) { return cell(r.variance); });
        row("MSE (whole column)", [](const StatImpactReport& r) { return cell(r.mse); });
        {
            std::vector<std::string> cells{cell(0.0)};
            for (const StatAssessment& set : sets) {
                const StatVariableAssessment* v = find(set, variable);
                cells.push_back(v ? cell(v->imputedCellsMse) : std::string("n/a"));
            }
            appendRow(out, "MSE (imputed cells)", cells);
        }
        row("Mean Mahalanobis Distance",
            [](const StatImpactReport& r) { return cell(r.mahalanobis); });
        row("Linear Correlation (%)",
            [](const StatImpactReport& r) { return cell(r.correlationPercent); });
        row("Maximum Percentage Deviation (%)", [&](const StatImpactReport& r) {
            guardSeen = guardSeen || r.maxDeviationGuard;
            return cell(r.maxPercentageDeviation) + (r.maxDeviationGuard ? "*" : "");
        });
        out << '\n';
    }

    out << "Combined over pattern variables\n";
    appendRow(out, "Measure", header);
    {
        std::vector<std::string> whole{cell(0.0)}, cellsOnly{cell(0.0)}, maha{cell(0.0)};
        for (const StatAssessment& set : sets) {
            whole.push_back(cell(set.combinedWholeMse));
            cellsOnly.push_back(cell(set.combinedImputedMse));
            maha.push_back(cell(set.multivariateMahalanobis));
        }
        appendRow(out, "Combined MSE (whole columns)", whole);
        appendRow(out, "Combined MSE (imputed cells)", cellsOnly);
        appendRow(out, "Mean Mahalanobis Distance", maha);
    }
    if (guardSeen) out << "\n* deviation denominator floored at 1\n";
    return out.str();
}

std::string classificationTable(const std::vector<ClassificationAssessment>& sets) {
    if (sets.empty()) return "";
    std::ostringstream out;
    std::vector<std::string> header;
    for (const ClassificationAssessment& set : sets) header.push_back(set.label);
    appendRow(out, "Measure", header);
    auto row = [&](const std::string& rowLabel, auto pick) {
        std::vector<std::string> cells;
        for (const ClassificationAssessment& set : sets) cells.push_back(pick(set));
        appendRow(out, rowLabel, cells);
    };
    row("True Negatives",
        [](const ClassificationAssessment& a) { return std::to_string(a.confusion.tn); });
    row("False Positives",
        [](const ClassificationAssessment& a) { return std::to_string(a.confusion.fp); });
    row("False Negatives",
        [](const ClassificationAssessment& a) { return std::to_string(a.confusion.fn); });
    row("True Positives",
        [](const ClassificationAssessment& a) { return std::to_string(a.confusion.tp); });
    row("Accuracy (%)",
        [](const ClassificationAssessment& a) { return cell(100.0 * a.metrics.accuracy); });
    row("Sensitivity (%)",
        [](const ClassificationAssessment& a) { return cell(100.0 * a.metrics.sensitivity); });
    row("Specificity (%)",
        [](const ClassificationAssessment& a) { return cell(100.0 * a.metrics.specificity); });
    row("Precision (%)",
        [](const ClassificationAssessment& a) { return cell(100.0 * a.metrics.precision); });
    row("F Measure", [](const ClassificationAssessment& a) { return cell(a.metrics.fMeasure); });
    row("Actual Negative Error (%)", [](const ClassificationAssessment& a) {
        return cell(100.0 * a.confusion.actualNegativeErrorRate());
    });
    row("Actual Positive Error (%)", [](const ClassificationAssessment& a) {
        return cell(100.0 * a.confusion.actualPositiveErrorRate());
    });
    return out.str();
}

std::string lrImpactTable(const std::vector<LrImpactReport>& sets) {
    if (sets.empty()) return "";
    std::ostringstream out;
    std::vector<std::string> header;
    for (const LrImpactReport& set : sets) header.push_back(set.label);
    appendRow(out, "Measure", header);
    auto row = [&](const std::string& rowLabel, auto pick) {
        std::vector<std::string> cells;
        for (const LrImpactReport& set : sets) cells.push_back(pick(set));
        appendRow(out, rowLabel, cells);
    };
    row("1st Quartile (%)", [](const LrImpactReport& r) { return cell(r.q1); });
    row("Median (%)", [](const LrImpactReport& r) { return cell(r.median); });
    row("3rd Quartile (%)", [](const LrImpactReport& r) { return cell(r.q3); });
    row("Mean (%)", [](const LrImpactReport& r) { return cell(r.mean); });
    row("Variance", [](const LrImpactReport& r) { return cell(r.variance); });
    row("Linear Correlation (%)",
        [](const LrImpactReport& r) { return cell(r.correlationPercent); });
    row("KS Statistic", [](const LrImpactReport& r) { return cell(r.ks); });
    row("Mean Squared Error", [](const LrImpactReport& r) { return cell(r.mse); });
    return out.str();
}

std::string rangeAccuracyTable(
    const std::vector<std::pair<std::string, RangeAccuracyReport>>& sets) {
    if (sets.empty()) return "";
    std::ostringstream out;

    std::vector<std::string> order;
    for (const auto& [label, report] : sets)
        for (const RangeAccuracyEntry& entry : report.entries)
            if (std::find(order.begin(), order.end(), entry.variable) == order.end())
                order.push_back(entry.variable);

    auto find = [](const RangeAccuracyReport& report,
                   const std::string& variable) -> const RangeAccuracyEntry* {
        for (const RangeAccuracyEntry& entry : report.entries)
            if (entry.variable == variable) return &entry;
        return nullptr;
    };

    for (const std::string& variable : order) {
        const RangeAccuracyEntry* reference = nullptr;
        for (const auto& [label, report] : sets)
            if ((reference = find(report, variable))) break;
        out << "Variable: " << variable << " (% within range)\n";
        std::vector<std::string> header;
        for (int range : reference->ranges) header.push_back("<=" + std::to_string(range));
        appendRow(out, "Set", header);
        for (const auto& [label, report] : sets) {
            const RangeAccuracyEntry* entry = find(report, variable);
            std::vector<std::string> cells;
            for (int range : reference->ranges) {
                std::string value = "n/a";
                if (entry) {
                    auto it = std::find(entry->ranges.begin(), entry->ranges.end(), range);
                    if (it != entry->ranges.end())
                        value = cell(100.0 *
                                     entry->fractions[static_cast<size_t>(
                                         std::distance(entry->ranges.begin(), it))]);
                }
                cells.push_back(value);
            }
            appendRow(out, label, cells);
        }
        out << '\n';
    }
    return out.str();
}

void writeQqCsv(std::span<const double> a, std::span<const double> b, int points,
                const std::string& path) {
    std::vector<std::pair<double, double>> pairs = qqPoints(a, b, points);
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "quantile_a,quantile_b\n";
    out << std::setprecision(17);
    for (const auto& [qa, qb] : pairs) out << qa << ',' << qb << '\n';
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace mdi
