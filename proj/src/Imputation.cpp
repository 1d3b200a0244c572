#include "Imputation.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <utility>

#include "Exceptions.h"
#include "Parallel.h"
#include "Rng.h"

namespace mdi {

namespace {

// RF-AANN-GA confines the GA to this distance around the forest prediction.
constexpr double kRfBoxHalfWidth = 0.05;

constexpr int kSerializationVersion = 1;

// Column means over observed cells; columns with nothing observed fall back
// to the encoded midpoint.
std::vector<double> observedColumnMeans(const EncodedMatrix& encoded) {
    std::vector<double> means(static_cast<size_t>(encoded.width), 0.5);
    for (int c = 0; c < encoded.width; ++c) {
        double sum = 0.0;
        int n = 0;
        for (int r = 0; r < encoded.rows; ++r) {
            if (encoded.missingAt(r, c)) continue;
            sum += encoded.at(r, c);
            ++n;
        }
        if (n > 0) means[static_cast<size_t>(c)] = sum / static_cast<double>(n);
    }
    return means;
}

std::vector<std::string> patternOf(const Dataset& data) {
    std::vector<std::string> pattern;
    for (int v = 0; v < data.variableCount(); ++v) {
        bool any = false;
        for (int r = 0; r < data.rowCount() && !any; ++r) any = data.missing(r, v);
        if (any) pattern.push_back(data.schema().variable(v).name);
    }
    return pattern;
}

// Nudges imputed cells off the survey consistency rules. Observed cells are
// left alone; decoded values are already inside the schema ranges, so only
// the father's-age floor and the gravidity/parity order need attention.
void repairImputedRow(Dataset& completed, const Dataset& incomplete, int row) {
    const Schema& schema = completed.schema();
    int fath = schema.indexOf("FathAge");
    if (fath >= 0 && incomplete.missing(row, fath) && completed.value(row, fath) <= 12)
        completed.set(row, fath, 13);
    int gra = schema.indexOf("Gra");
    int par = schema.indexOf("Par");
    if (gra >= 0 && par >= 0 && completed.value(row, gra) < completed.value(row, par)) {
        if (incomplete.missing(row, par))
            completed.set(row, par, completed.value(row, gra));
        else if (incomplete.missing(row, gra))
            completed.set(row, gra, completed.value(row, par));
    }
}

ImputedSet finishImputation(const Dataset& incomplete, EncodedMatrix completed,
                            ImputeStrategy strategy, std::string label,
                            nlohmann::json provenance) {
    std::fill(completed.missing.begin(), completed.missing.end(), uint8_t{0});
    Dataset decoded = decodeMatrix(completed);
    ImputedSet out;
    out.label = std::move(label);
    out.strategy = strategy;
    out.pattern = patternOf(incomplete);
    for (int r = 0; r < incomplete.rowCount(); ++r) {
        for (int v = 0; v < incomplete.variableCount(); ++v) {
            if (incomplete.missing(r, v)) {
                out.imputedCells.push_back({r, v});
            } else {
                decoded.set(r, v, incomplete.value(r, v));
            }
        }
        repairImputedRow(decoded, incomplete, r);
    }
    out.data = std::move(decoded);
    out.provenance = std::move(provenance);
    return out;
}

}  // namespace

Matrix completeEncodedRows(const Dataset& data, const std::string& partition) {
    std::vector<int> rows = data.completeRows();
    if (rows.empty())
        throw DataError(partition + " partition has no complete rows for network training");
    EncodedMatrix encoded = encodeDataset(data.selectRows(rows));
    Matrix out(encoded.rows, encoded.width);
    for (int r = 0; r < encoded.rows; ++r)
        for (int c = 0; c < encoded.width; ++c) out.at(r, c) = encoded.at(r, c);
    return out;
}

std::string strategyName(ImputeStrategy strategy) {
    switch (strategy) {
        case ImputeStrategy::Rf: return "rf";
        case ImputeStrategy::AannGa: return "aann-ga";
        case ImputeStrategy::RfAannGa: return "rf-aann-ga";
        case ImputeStrategy::AannGaRf: return "aann-ga-rf";
        case ImputeStrategy::Random: return "random";
        case ImputeStrategy::Mean: return "mean";
    }
    return "rf";
}

ImputeStrategy strategyFromName(const std::string& name) {
    if (name == "rf") return ImputeStrategy::Rf;
    if (name == "aann-ga") return ImputeStrategy::AannGa;
    if (name == "rf-aann-ga") return ImputeStrategy::RfAannGa;
    if (name == "aann-ga-rf") return ImputeStrategy::AannGaRf;
    if (name == "random") return ImputeStrategy::Random;
    if (name == "mean") return ImputeStrategy::Mean;
    throw ConfigError("unknown imputation strategy: " + name);
}

const std::vector<std::string>& batterySetLabels() {
    static const std::vector<std::string> labels{"1A", "1B", "1C", "2A", "3A", "4A"};
    return labels;
}

std::vector<std::string> setLabelVariables(const std::string& label) {
    if (label == "1A") return {"Age"};
    if (label == "1B") return {"Edu"};
    if (label == "1C") return {"Gra"};
    if (label == "2A") return {"Age", "FathAge"};
    if (label == "3A") return {"Age", "Edu", "FathAge"};
    if (label == "4A") return {"Age", "Edu", "FathAge", "Gra"};
    throw ConfigError("unknown experiment set label: " + label);
}

void RfImputer::setRounds(int rounds) {
    if (rounds < 1) throw ConfigError("imputation needs at least one round");
    rounds_ = rounds;
}

const RandomForest& RfImputer::forest(int variable) const {
    if (variable < 0 || variable >= static_cast<int>(forests_.size()))
        throw ConfigError("no forest for variable index " + std::to_string(variable));
    return forests_[static_cast<size_t>(variable)];
}

std::vector<int> RfImputer::inputColumns(int variable) const {
    int hiv = excludeHiv_ ? schema_.indexOf("HIV") : -1;
    std::vector<int> cols;
    for (int c = 0; c < schema_.encodedWidth(); ++c) {
        int owner = schema_.variableOfColumn(c);
        if (owner == variable || owner == hiv) continue;
        cols.push_back(c);
    }
    return cols;
}

void RfImputer::predictInto(int variable, std::span<double> encodedRow) const {
    const RandomForest& model = forest(variable);
    std::vector<int> cols = inputColumns(variable);
    std::vector<double> x(cols.size());
    for (size_t i = 0; i < cols.size(); ++i) x[i] = encodedRow[static_cast<size_t>(cols[i])];
    const VariableSpec& spec = schema_.variable(variable);
    if (model.task() == ForestTask::Regression) {
        encodedRow[static_cast<size_t>(schema_.encodedOffset(variable))] = model.predict(x);
    } else {
        encodeValue(schema_, variable, spec.lower + model.predictClass(x), encodedRow);
    }
}

nlohmann::json RfImputer::toJson() const {
    nlohmann::json forests = nlohmann::json::array();
    for (const RandomForest& model : forests_) forests.push_back(model.toJson());
    return nlohmann::json{{"version", kSerializationVersion},
                          {"kind", "rf-imputer"},
                          {"schema", schemaToJson(schema_)},
                          {"params", forestParamsToJson(params_)},
                          {"seed", seed_},
                          {"exclude_hiv", excludeHiv_},
                          {"rounds", rounds_},
                          {"column_means", columnMeans_},
                          {"forests", forests}};
}

RfImputer RfImputer::fromJson(const nlohmann::json& doc) {
    try {
        if (!doc.is_object() || doc.value("kind", "") != "rf-imputer")
            throw ConfigError("document is not an rf-imputer model");
        if (doc.at("version").get<int>() != kSerializationVersion)
            throw ConfigError("unsupported rf-imputer version");
        RfImputer imputer;
        imputer.schema_ = schemaFromJson(doc.at("schema"));
        imputer.params_ = forestParamsFromJson(doc.at("params"));
        imputer.seed_ = doc.at("seed").get<uint64_t>();
        imputer.excludeHiv_ = doc.at("exclude_hiv").get<bool>();
        imputer.rounds_ = doc.at("rounds").get<int>();
        if (imputer.rounds_ < 1) throw ConfigError("rf-imputer rounds must be positive");
        imputer.columnMeans_ = doc.at("column_means").get<std::vector<double>>();
        if (static_cast<int>(imputer.columnMeans_.size()) != imputer.schema_.encodedWidth())
            throw ConfigError("rf-imputer column means do not cover the encoded width");
        for (const nlohmann::json& forest : doc.at("forests"))
            imputer.forests_.push_back(RandomForest::fromJson(forest));
        if (static_cast<int>(imputer.forests_.size()) != imputer.schema_.variableCount())
            throw ConfigError("rf-imputer needs one forest per schema variable");
        return imputer;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("rf-imputer document: ") + e.what());
    }
}

RfImputer fitRfImputer(const Dataset& train, const ForestParams& params, uint64_t seed,
                       bool excludeHiv) {
    if (train.rowCount() == 0) throw DataError("imputer needs training rows");
    if (!train.isComplete())
        throw DataError("imputer training data has " + std::to_string(train.missingCellCount()) +
                        " missing cells");
    RfImputer imputer;
    imputer.schema_ = train.schema();
    imputer.params_ = params;
    imputer.seed_ = seed;
    imputer.excludeHiv_ = excludeHiv;

    EncodedMatrix encoded = encodeDataset(train);
    imputer.columnMeans_.assign(static_cast<size_t>(encoded.width), 0.0);
    for (int c = 0; c < encoded.width; ++c) {
        double sum = 0.0;
        for (int r = 0; r < encoded.rows; ++r) sum += encoded.at(r, c);
        imputer.columnMeans_[static_cast<size_t>(c)] = sum / static_cast<double>(encoded.rows);
    }

    const Schema& schema = imputer.schema_;
    for (int v = 0; v < schema.variableCount(); ++v) {
        std::vector<int> cols = imputer.inputColumns(v);
        if (cols.empty())
            throw ConfigError("variable " + schema.variable(v).name + " has no input columns");
        FeatureMatrix features(encoded.rows, std::vector<FeatureInfo>(cols.size()));
        for (size_t i = 0; i < cols.size(); ++i)
            for (int r = 0; r < encoded.rows; ++r)
                features.set(r, static_cast<int>(i), encoded.at(r, cols[i]));
        const VariableSpec& spec = schema.variable(v);
        uint64_t forestSeed = deriveSeed(seed, "variable", static_cast<uint64_t>(v));
        if (spec.kind == VariableKind::Ordinal) {
            std::vector<double> targets(static_cast<size_t>(encoded.rows));
            int offset = schema.encodedOffset(v);
            for (int r = 0; r < encoded.rows; ++r)
                targets[static_cast<size_t>(r)] = encoded.at(r, offset);
            imputer.forests_.push_back(fitRegressionForest(features, targets, params, forestSeed));
        } else {
            std::vector<int> targets(static_cast<size_t>(encoded.rows));
            for (int r = 0; r < encoded.rows; ++r)
                targets[static_cast<size_t>(r)] = train.value(r, v) - spec.lower;
            imputer.forests_.push_back(
                fitClassificationForest(features, targets, spec.categoryCount(), params,
                                        forestSeed));
        }
    }
    return imputer;
}

EncodedMatrix rfCompleteEncoded(const RfImputer& imputer, const Dataset& incomplete) {
    if (!(incomplete.schema() == imputer.schema()))
        throw DataError("dataset schema does not match the imputer");
    EncodedMatrix encoded = encodeDataset(incomplete);
    const std::vector<double>& means = imputer.columnMeans();
    for (int r = 0; r < encoded.rows; ++r)
        for (int c = 0; c < encoded.width; ++c)
            if (encoded.missingAt(r, c)) encoded.at(r, c) = means[static_cast<size_t>(c)];

    const Schema& schema = imputer.schema();
    for (int round = 0; round < imputer.rounds(); ++round) {
        for (int v = 0; v < schema.variableCount(); ++v) {
            std::vector<int> rows;
            for (int r = 0; r < incomplete.rowCount(); ++r)
                if (incomplete.missing(r, v)) rows.push_back(r);
            if (rows.empty()) continue;
            parallelFor(rows.size(),
                        [&](size_t i) { imputer.predictInto(v, encoded.row(rows[i])); });
        }
    }
    std::fill(encoded.missing.begin(), encoded.missing.end(), uint8_t{0});
    return encoded;
}

ImputedSet imputeRf(const RfImputer& imputer, const Dataset& incomplete,
                    const std::string& label) {
    EncodedMatrix completed = rfCompleteEncoded(imputer, incomplete);
    nlohmann::json provenance{{"strategy", strategyName(ImputeStrategy::Rf)},
                              {"seed", imputer.seed()},
                              {"rounds", imputer.rounds()},
                              {"exclude_hiv", imputer.excludeHiv()},
                              {"forest_params", forestParamsToJson(imputer.params())}};
    nlohmann::json rowsFromMeans = nlohmann::json::array();
    for (int r = 0; r < incomplete.rowCount(); ++r) {
        bool allMissing = incomplete.variableCount() > 0;
        for (int v = 0; v < incomplete.variableCount() && allMissing; ++v)
            allMissing = incomplete.missing(r, v);
        if (allMissing) rowsFromMeans.push_back(r);
    }
    // Rows with nothing observed start from the column means like any other
    // gap; they are called out so downstream reports can flag them.
    if (!rowsFromMeans.empty()) provenance["rows_from_means"] = rowsFromMeans;
    return finishImputation(incomplete, std::move(completed), ImputeStrategy::Rf, label,
                            std::move(provenance));
}

std::vector<double> imputeAannGaRecord(const Autoencoder& network, const GaConfig& config,
                                       std::span<const double> known,
                                       std::span<const uint8_t> missingMask,
                                       std::span<const double> columnMeans,
                                       const SearchBox* boxOverride) {
    size_t width = known.size();
    if (missingMask.size() != width || columnMeans.size() != width)
        throw DataError("record, mask, and column means must share one width");
    if (network.inputSize() != static_cast<int>(width))
        throw DataError("record width does not match the network input");
    std::vector<size_t> gaps;
    for (size_t i = 0; i < width; ++i)
        if (missingMask[i]) gaps.push_back(i);
    std::vector<double> completed(known.begin(), known.end());
    if (gaps.empty()) {
        reconstructionError(network, known, {}, missingMask);
        return completed;
    }
    if (gaps.size() == width) throw DataError("record has no known elements");

    std::vector<double> meanCandidate(gaps.size());
    for (size_t i = 0; i < gaps.size(); ++i) meanCandidate[i] = columnMeans[gaps[i]];
    SearchBox box = boxOverride ? *boxOverride : SearchBox::unit(gaps.size());
    if (box.size() != gaps.size())
        throw ConfigError("search box arity does not match the number of gaps");
    GaObjective objective = [&](std::span<const double> candidate) {
        return reconstructionError(network, known, candidate, missingMask);
    };
    GaResult result = runGa(objective, box, config, {meanCandidate});
    for (size_t i = 0; i < gaps.size(); ++i) completed[gaps[i]] = result.best[i];
    return completed;
}

ImputedSet imputeAannGa(const Autoencoder& network, const GaConfig& config,
                        const Dataset& incomplete, uint64_t seed, const std::string& label,
                        EncodedMatrix* completedEncoded) {
    EncodedMatrix encoded = encodeDataset(incomplete);
    if (network.inputSize() != encoded.width)
        throw DataError("network input width " + std::to_string(network.inputSize()) +
                        " does not match the encoded width " + std::to_string(encoded.width));
    for (int r = 0; r < incomplete.rowCount(); ++r) {
        bool allMissing = incomplete.variableCount() > 0;
        for (int v = 0; v < incomplete.variableCount() && allMissing; ++v)
            allMissing = incomplete.missing(r, v);
        if (allMissing)
            throw DataError("row " + std::to_string(r) + " has no known elements");
    }
    std::vector<double> means = observedColumnMeans(encoded);

    EncodedMatrix completed = encoded;
    size_t width = static_cast<size_t>(encoded.width);
    parallelFor(static_cast<size_t>(encoded.rows), [&](size_t r) {
        std::span<const uint8_t> mask{encoded.missing.data() + r * width, width};
        if (std::find(mask.begin(), mask.end(), uint8_t{1}) == mask.end()) return;
        GaConfig rowConfig = config;
        rowConfig.seed = deriveSeed(seed, "row", r);
        std::vector<double> done =
            imputeAannGaRecord(network, rowConfig, encoded.row(static_cast<int>(r)), mask, means);
        std::copy(done.begin(), done.end(), completed.row(static_cast<int>(r)).begin());
    });
    if (completedEncoded) {
        *completedEncoded = completed;
        std::fill(completedEncoded->missing.begin(), completedEncoded->missing.end(), uint8_t{0});
    }
    nlohmann::json provenance{{"strategy", strategyName(ImputeStrategy::AannGa)},
                              {"seed", seed},
                              {"ga", gaConfigToJson(config)},
                              {"network", {{"input", network.inputSize()},
                                           {"hidden", network.hiddenSize()}}}};
    return finishImputation(incomplete, std::move(completed), ImputeStrategy::AannGa, label,
                            std::move(provenance));
}

ImputedSet imputeRfAannGa(const RfImputer& imputer, const Autoencoder& network,
                          const GaConfig& config, const Dataset& incomplete, uint64_t seed,
                          const std::string& label, EncodedMatrix* completedEncoded) {
    EncodedMatrix encoded = encodeDataset(incomplete);
    if (network.inputSize() != encoded.width)
        throw DataError("network input width " + std::to_string(network.inputSize()) +
                        " does not match the encoded width " + std::to_string(encoded.width));
    EncodedMatrix rfCompleted = rfCompleteEncoded(imputer, incomplete);
    std::vector<double> means = observedColumnMeans(encoded);

    EncodedMatrix completed = encoded;
    size_t width = static_cast<size_t>(encoded.width);
    parallelFor(static_cast<size_t>(encoded.rows), [&](size_t r) {
        std::span<const uint8_t> mask{encoded.missing.data() + r * width, width};
        SearchBox box;
        for (size_t c = 0; c < width; ++c) {
            if (!mask[c]) continue;
            double p = rfCompleted.at(static_cast<int>(r), static_cast<int>(c));
            box.lower.push_back(std::max(0.0, p - kRfBoxHalfWidth));
            box.upper.push_back(std::min(1.0, p + kRfBoxHalfWidth));
        }
        if (box.size() == 0) return;
        GaConfig rowConfig = config;
        rowConfig.seed = deriveSeed(seed, "row", r);
        std::vector<double> done = imputeAannGaRecord(
            network, rowConfig, encoded.row(static_cast<int>(r)), mask, means, &box);
        std::copy(done.begin(), done.end(), completed.row(static_cast<int>(r)).begin());
    });
    if (completedEncoded) {
        *completedEncoded = completed;
        std::fill(completedEncoded->missing.begin(), completedEncoded->missing.end(), uint8_t{0});
    }
    nlohmann::json provenance{{"strategy", strategyName(ImputeStrategy::RfAannGa)},
                              {"seed", seed},
                              {"ga", gaConfigToJson(config)},
                              {"box_half_width", kRfBoxHalfWidth},
                              {"forest_params", forestParamsToJson(imputer.params())},
                              {"network", {{"input", network.inputSize()},
                                           {"hidden", network.hiddenSize()}}}};
    return finishImputation(incomplete, std::move(completed), ImputeStrategy::RfAannGa, label,
                            std::move(provenance));
}

AannGaRfResult imputeAannGaRf(Autoencoder network, const TrainConfig& trainConfig,
                              const GaConfig& gaConfig, const ForestParams& forestParams,
                              const FourWaySplit& sets, const MissingnessPlan& plan,
                              uint64_t seed) {
    const Dataset* parts[4] = {&sets.train, &sets.validation, &sets.test, &sets.experiment};
    const char* names[4] = {"train", "validation", "test", "experiment"};
    for (int i = 0; i < 4; ++i)
        if (parts[i]->rowCount() == 0)
            throw DataError(std::string("empty ") + names[i] + " partition");
    const Schema& schema = sets.train.schema();
    for (int i = 1; i < 4; ++i)
        if (!(parts[i]->schema() == schema)) throw DataError("partitions use different schemas");
    if (network.inputSize() != schema.encodedWidth())
        throw DataError("network input width does not match the encoded schema width");

    Matrix trainMat = completeEncodedRows(sets.train, "train");
    Matrix validMat = completeEncodedRows(sets.validation, "validation");
    TrainTrace trace = train(network, trainMat, validMat, trainConfig);

    int64_t removedTest = 0;
    int64_t removedExperiment = 0;
    Dataset injectedTest =
        injectMissing(sets.test, plan, deriveSeed(seed, "inject-test"), &removedTest);
    Dataset injectedExperiment = injectMissing(sets.experiment, plan,
                                               deriveSeed(seed, "inject-experiment"),
                                               &removedExperiment);

    EncodedMatrix testEncoded;
    ImputedSet testCompleted = imputeAannGa(network, gaConfig, injectedTest,
                                            deriveSeed(seed, "aann-test"), "", &testEncoded);
    EncodedMatrix experimentEncoded;
    ImputedSet uncorrected =
        imputeAannGa(network, gaConfig, injectedExperiment, deriveSeed(seed, "aann-experiment"),
                     "", &experimentEncoded);

    std::vector<int> planVars;
    for (const std::string& name : plan.targetVariables) planVars.push_back(schema.require(name));
    std::sort(planVars.begin(), planVars.end());
    planVars.erase(std::unique(planVars.begin(), planVars.end()), planVars.end());

    int width = schema.encodedWidth();
    int vars = schema.variableCount();
    // Completed encoded record plus one injected-gap flag per variable.
    auto featureRow = [&](const EncodedMatrix& completed, const Dataset& injected, int r) {
        std::vector<double> x(static_cast<size_t>(width + vars));
        for (int c = 0; c < width; ++c) x[static_cast<size_t>(c)] = completed.at(r, c);
        for (int v = 0; v < vars; ++v)
            x[static_cast<size_t>(width + v)] = injected.missing(r, v) ? 1.0 : 0.0;
        return x;
    };

    EncodedMatrix corrected = experimentEncoded;
    nlohmann::json forestInfo = nlohmann::json::array();
    for (int v : planVars) {
        const VariableSpec& spec = schema.variable(v);
        std::vector<int> trainRows;
        for (int r = 0; r < injectedTest.rowCount(); ++r)
            if (injectedTest.missing(r, v) && !sets.test.missing(r, v)) trainRows.push_back(r);
        if (trainRows.empty()) {
            forestInfo.push_back({{"variable", spec.name}, {"training_rows", 0},
                                  {"skipped", true}});
            continue;
        }
        FeatureMatrix features(static_cast<int>(trainRows.size()),
                               std::vector<FeatureInfo>(static_cast<size_t>(width + vars)));
        for (size_t i = 0; i < trainRows.size(); ++i) {
            std::vector<double> x = featureRow(testEncoded, injectedTest, trainRows[i]);
            for (int c = 0; c < width + vars; ++c)
                features.set(static_cast<int>(i), c, x[static_cast<size_t>(c)]);
        }
        uint64_t forestSeed = deriveSeed(seed, "correct", static_cast<uint64_t>(v));
        bool regression = spec.kind == VariableKind::Ordinal;
        RandomForest model;
        if (regression) {
            std::vector<double> scratch(static_cast<size_t>(width), 0.0);
            std::vector<double> targets(trainRows.size());
            for (size_t i = 0; i < trainRows.size(); ++i) {
                encodeValue(schema, v, sets.test.value(trainRows[i], v), scratch);
                targets[i] = scratch[static_cast<size_t>(schema.encodedOffset(v))];
            }
            model = fitRegressionForest(features, targets, forestParams, forestSeed);
        } else {
            std::vector<int> targets(trainRows.size());
            for (size_t i = 0; i < trainRows.size(); ++i)
                targets[i] = sets.test.value(trainRows[i], v) - spec.lower;
            model = fitClassificationForest(features, targets, spec.categoryCount(),
                                            forestParams, forestSeed);
        }
        for (int r = 0; r < injectedExperiment.rowCount(); ++r) {
            if (!injectedExperiment.missing(r, v)) continue;
            std::vector<double> x = featureRow(experimentEncoded, injectedExperiment, r);
            if (regression) {
                corrected.at(r, schema.encodedOffset(v)) = model.predict(x);
            } else {
                encodeValue(schema, v, spec.lower + model.predictClass(x), corrected.row(r));
            }
        }
        forestInfo.push_back({{"variable", spec.name},
                              {"training_rows", trainRows.size()},
                              {"task", regression ? "regression" : "classification"}});
    }

    nlohmann::json provenance{{"strategy", strategyName(ImputeStrategy::AannGaRf)},
                              {"seed", seed},
                              {"ga", gaConfigToJson(gaConfig)},
                              {"forest_params", forestParamsToJson(forestParams)},
                              {"plan", missingnessPlanToJson(plan)}};
    AannGaRfResult out;
    out.corrected = finishImputation(injectedExperiment, std::move(corrected),
                                     ImputeStrategy::AannGaRf, "", provenance);
    out.uncorrected = std::move(uncorrected);
    out.testCompleted = std::move(testCompleted);
    out.networkTrace = trace;
    out.summary = nlohmann::json{{"selected_cycle", trace.selectedCycle},
                                 {"test_cells_injected", removedTest},
                                 {"experiment_cells_injected", removedExperiment},
                                 {"correction_forests", forestInfo}};
    return out;
}

ImputedSet imputeRandom(const Dataset& train, const Dataset& incomplete, uint64_t seed,
                        const std::string& label) {
    if (!(train.schema() == incomplete.schema()))
        throw DataError("training and target schemas differ");
    const Schema& schema = incomplete.schema();
    int graVar = schema.indexOf("Gra");
    int parVar = schema.indexOf("Par");
    int fathVar = schema.indexOf("FathAge");

    ImputedSet out;
    out.label = label;
    out.strategy = ImputeStrategy::Random;
    out.pattern = patternOf(incomplete);
    Dataset completed = incomplete;
    Rng rng(seed);
    for (int r = 0; r < incomplete.rowCount(); ++r) {
        for (int v = 0; v < schema.variableCount(); ++v) {
            if (!incomplete.missing(r, v)) continue;
            const VariableSpec& spec = schema.variable(v);
            int lo = spec.lower;
            int hi = spec.upper;
            // Draws stay inside the consistency rules: father's age starts at
            // 13 and gravidity/parity respect whichever of the pair is fixed.
            if (v == fathVar) lo = std::max(lo, 13);
            if (v == graVar && parVar >= 0 && !completed.missing(r, parVar))
                lo = std::max(lo, completed.value(r, parVar));
            if (v == parVar && graVar >= 0 && !completed.missing(r, graVar))
                hi = std::min(hi, completed.value(r, graVar));
            lo = std::min(lo, hi);
            completed.set(r, v, rng.uniformInt(lo, hi));
            out.imputedCells.push_back({r, v});
        }
    }
    out.data = std::move(completed);
    out.provenance = nlohmann::json{{"strategy", strategyName(ImputeStrategy::Random)},
                                    {"seed", seed}};
    return out;
}

ImputedSet imputeMean(const Dataset& train, const Dataset& incomplete, const std::string& label) {
    if (!(train.schema() == incomplete.schema()))
        throw DataError("training and target schemas differ");
    if (train.rowCount() == 0) throw DataError("mean imputation needs training rows");
    const Schema& schema = incomplete.schema();
    EncodedMatrix trainEncoded = encodeDataset(train);
    std::vector<double> means(static_cast<size_t>(trainEncoded.width), 0.0);
    for (int c = 0; c < trainEncoded.width; ++c) {
        double sum = 0.0;
        int n = 0;
        for (int r = 0; r < trainEncoded.rows; ++r) {
            if (trainEncoded.missingAt(r, c)) continue;
            sum += trainEncoded.at(r, c);
            ++n;
        }
        if (n == 0)
            throw DataError("training column " + std::to_string(c) + " has no observed values");
        means[static_cast<size_t>(c)] = sum / static_cast<double>(n);
    }
    std::vector<int> meanValue(static_cast<size_t>(schema.variableCount()));
    for (int v = 0; v < schema.variableCount(); ++v)
        meanValue[static_cast<size_t>(v)] = decodeValue(schema, v, means);

    ImputedSet out;
    out.label = label;
    out.strategy = ImputeStrategy::Mean;
    out.pattern = patternOf(incomplete);
    Dataset completed = incomplete;
    for (int r = 0; r < incomplete.rowCount(); ++r) {
        for (int v = 0; v < schema.variableCount(); ++v) {
            if (!incomplete.missing(r, v)) continue;
            completed.set(r, v, meanValue[static_cast<size_t>(v)]);
            out.imputedCells.push_back({r, v});
        }
        repairImputedRow(completed, incomplete, r);
    }
    out.data = std::move(completed);
    out.provenance = nlohmann::json{{"strategy", strategyName(ImputeStrategy::Mean)},
                                    {"decoded_means", meanValue}};
    return out;
}

std::vector<int> defaultAccuracyRanges(const VariableSpec& spec) {
    if (spec.kind != VariableKind::Ordinal) return {0};
    if (spec.name == "Age" || spec.name == "FathAge") return {1, 2, 4, 6, 10};
    return {0, 1, 2, 3, 5};
}

RangeAccuracyReport rangeAccuracy(const ImputedSet& imputed, const Dataset& truth,
                                  const std::map<std::string, std::vector<int>>& ranges) {
    if (!(imputed.data.schema() == truth.schema()))
        throw DataError("truth schema does not match the imputed set");
    if (imputed.data.rowCount() != truth.rowCount())
        throw DataError("truth row count does not match the imputed set");
    const Schema& schema = truth.schema();
    std::vector<std::vector<int>> rowsOf(static_cast<size_t>(schema.variableCount()));
    for (const auto& [r, v] : imputed.imputedCells) {
        if (r < 0 || r >= truth.rowCount() || v < 0 || v >= schema.variableCount())
            throw DataError("imputed cell index out of range");
        if (truth.missing(r, v))
            throw DataError("truth is missing the imputed cell at row " + std::to_string(r) +
                            ", variable " + schema.variable(v).name);
        rowsOf[static_cast<size_t>(v)].push_back(r);
    }
    RangeAccuracyReport report;
    for (int v = 0; v < schema.variableCount(); ++v) {
        const std::vector<int>& rows = rowsOf[static_cast<size_t>(v)];
        if (rows.empty()) continue;
        const VariableSpec& spec = schema.variable(v);
        RangeAccuracyEntry entry;
        entry.variable = spec.name;
        auto it = ranges.find(spec.name);
        entry.ranges = it != ranges.end() ? it->second : defaultAccuracyRanges(spec);
        if (entry.ranges.empty()) throw ConfigError("empty range list for " + spec.name);
        for (int r : entry.ranges)
            if (r < 0) throw ConfigError("accuracy ranges must be non-negative");
        std::sort(entry.ranges.begin(), entry.ranges.end());
        entry.cellCount = static_cast<int>(rows.size());
        for (int range : entry.ranges) {
            int within = 0;
            for (int r : rows)
                if (std::abs(imputed.data.value(r, v) - truth.value(r, v)) <= range) ++within;
            entry.fractions.push_back(static_cast<double>(within) /
                                      static_cast<double>(rows.size()));
        }
        report.entries.push_back(std::move(entry));
    }
    return report;
}

void writeImputedSet(const ImputedSet& set, const std::string& csvPath,
                     const std::string& sidecarPath) {
    writeCsv(set.data, csvPath);
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& [r, v] : set.imputedCells) cells.push_back({r, v});
    nlohmann::json sidecar{{"label", set.label},
                           {"strategy", strategyName(set.strategy)},
                           {"pattern", set.pattern},
                           {"imputed_cells", cells},
                           {"provenance", set.provenance}};
    std::ofstream out(sidecarPath);
    if (!out) throw IoError("cannot open " + sidecarPath + " for writing");
    out << sidecar.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + sidecarPath);
}

ImputedSet readImputedSet(const std::string& csvPath, const std::string& sidecarPath,
                          const Schema& schema) {
    ImputedSet set;
    set.data = readCsv(csvPath, schema);
    if (!set.data.isComplete())
        throw DataError(csvPath + ": an imputed set must not contain missing cells");
    std::ifstream in(sidecarPath);
    if (!in) throw IoError("cannot open " + sidecarPath);
    nlohmann::json sidecar;
    try {
        in >> sidecar;
        set.label = sidecar.at("label").get<std::string>();
        set.strategy = strategyFromName(sidecar.at("strategy").get<std::string>());
        set.pattern = sidecar.at("pattern").get<std::vector<std::string>>();
        for (const nlohmann::json& cell : sidecar.at("imputed_cells")) {
            int r = cell.at(0).get<int>();
            int v = cell.at(1).get<int>();
            if (r < 0 || r >= set.data.rowCount() || v < 0 || v >= schema.variableCount())
                throw DataError(sidecarPath + ": imputed cell out of range");
            set.imputedCells.push_back({r, v});
        }
        set.provenance = sidecar.value("provenance", nlohmann::json::object());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(sidecarPath + ": " + e.what());
    }
    return set;
}

}  // namespace mdi
