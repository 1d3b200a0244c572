#include "Pipeline.h"

#include <openssl/evp.h>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <utility>

#include "Assessment.h"
#include "Autoencoder.h"
#include "Dataset.h"
#include "Exceptions.h"
#include "GeneticOptimizer.h"
#include "Imputation.h"
#include "LogisticRegression.h"
#include "RandomForest.h"
#include "Rng.h"
#include "SyntheticGenerator.h"

namespace mdi {

namespace {

constexpr int kManifestVersion = 1;

void ensureParentDir(const std::string& path) {
    std::filesystem::path parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
}

void writeTextFile(const std::string& path, const std::string& content) {
    ensureParentDir(path);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << content;
    if (!out) throw IoError("write to " + path + " failed");
}

void writeJsonFile(const std::string& path, const nlohmann::json& doc) {
    writeTextFile(path, doc.dump(2) + "\n");
}

nlohmann::json readJsonFile(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

// Typed view over a command's parameter object. Getters mark keys as
// consumed; finish() rejects whatever was not recognized.
class Params {
public:
    Params(const nlohmann::json& doc, std::string command)
        : command_(std::move(command)), doc_(doc) {
        if (!doc_.is_object())
            throw ConfigError(command_ + ": parameters must be a JSON object");
    }

    bool has(const std::string& key) const { return doc_.contains(key); }

    nlohmann::json take(const std::string& key) {
        seen_.insert(key);
        return doc_.at(key);
    }

    std::string requireString(const std::string& key) {
        requirePresent(key);
        return get<std::string>(key, "a string");
    }
    std::string stringOr(const std::string& key, const std::string& fallback) {
        return has(key) ? get<std::string>(key, "a string") : fallback;
    }

    int requireInt(const std::string& key) {
        requirePresent(key);
        return get<int>(key, "an integer");
    }
    int intOr(const std::string& key, int fallback) {
        return has(key) ? get<int>(key, "an integer") : fallback;
    }

    uint64_t requireSeed() {
        requirePresent("seed");
        return get<uint64_t>("seed", "an unsigned integer");
    }

    bool boolOr(const std::string& key, bool fallback) {
        return has(key) ? get<bool>(key, "a boolean") : fallback;
    }

    nlohmann::json objectOr(const std::string& key) {
        if (!has(key)) return nlohmann::json::object();
        nlohmann::json value = take(key);
        if (!value.is_object())
            throw ConfigError(command_ + ": parameter '" + key + "' must be an object");
        return value;
    }

    nlohmann::json requireObject(const std::string& key) {
        requirePresent(key);
        nlohmann::json value = take(key);
        if (!value.is_object())
            throw ConfigError(command_ + ": parameter '" + key + "' must be an object");
        return value;
    }

    nlohmann::json arrayOr(const std::string& key, nlohmann::json fallback) {
        if (!has(key)) return fallback;
        nlohmann::json value = take(key);
        if (!value.is_array())
            throw ConfigError(command_ + ": parameter '" + key + "' must be an array");
        return value;
    }

    void finish() const {
        for (const auto& [key, value] : doc_.items())
            if (!seen_.count(key))
                throw ConfigError(command_ + ": unknown parameter '" + key + "'");
    }

    const std::string& command() const { return command_; }

private:
    void requirePresent(const std::string& key) const {
        if (!has(key))
            throw ConfigError(command_ + ": missing required parameter '" + key + "'");
    }

    template <typename T>
    T get(const std::string& key, const char* what) {
        try {
            return take(key).get<T>();
        } catch (const nlohmann::json::exception&) {
            throw ConfigError(command_ + ": parameter '" + key + "' must be " +
                              std::string(what));
        }
    }

    std::string command_;
    nlohmann::json doc_;
    std::set<std::string> seen_;
};

// Every command accepts an optional "schema" override; the default is the
// nine-variable survey layout.
struct SchemaChoice {
    Schema schema;
    std::optional<nlohmann::json> explicitJson;
};

SchemaChoice schemaFor(Params& p) {
    SchemaChoice choice;
    if (p.has("schema")) {
        nlohmann::json doc = p.take("schema");
        choice.schema = schemaFromJson(doc);
        choice.explicitJson = schemaToJson(choice.schema);
    } else {
        choice.schema = Schema::survey();
    }
    return choice;
}

void addSchema(nlohmann::json& resolved, const SchemaChoice& choice) {
    if (choice.explicitJson) resolved["schema"] = *choice.explicitJson;
}

std::vector<Activation> parseActivations(Params& p) {
    nlohmann::json doc = p.arrayOr("activations", nlohmann::json::array({"tanh", "linear"}));
    if (doc.size() != 2)
        throw ConfigError(p.command() +
                          ": activations must list exactly two names (hidden, output)");
    std::vector<Activation> out;
    for (const nlohmann::json& item : doc) {
        if (!item.is_string())
            throw ConfigError(p.command() + ": activations entries must be strings");
        out.push_back(activationFromName(item.get<std::string>()));
    }
    return out;
}

nlohmann::json activationsJson(const std::vector<Activation>& activations) {
    nlohmann::json out = nlohmann::json::array();
    for (Activation a : activations) out.push_back(activationName(a));
    return out;
}

std::string labelOf(const ImputedSet& set) {
    return set.label.empty() ? strategyName(set.strategy) : set.label;
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
    int n = 0;
    uint64_t seed = 0;
    std::string out;
    std::string sidecar;
    GeneratorParams params;
};

GenerateArgs parseGenerate(const nlohmann::json& doc) {
    Params p(doc, "generate");
    GenerateArgs a;
    a.n = p.requireInt("n");
    if (a.n < 1) throw ConfigError("generate: n must be at least 1");
    a.seed = p.requireSeed();
    a.out = p.requireString("out");
    a.sidecar = p.stringOr("sidecar", a.out + ".json");
    a.params = generatorParamsFromJson(p.objectOr("params"));
    p.finish();
    return a;
}

nlohmann::json resolveGenerate(const GenerateArgs& a) {
    return nlohmann::json{{"n", a.n},
                          {"seed", a.seed},
                          {"out", a.out},
                          {"sidecar", a.sidecar},
                          {"params", generatorParamsToJson(a.params)}};
}

void executeGenerate(const GenerateArgs& a) {
    SyntheticOutput generated = generateSynthetic(a.n, a.seed, a.params);
    writeCsv(generated.data, a.out);
    writeJsonFile(a.sidecar,
                  nlohmann::json{{"rows", a.n},
                                 {"seed", a.seed},
                                 {"implied_prevalence", generated.impliedPrevalence},
                                 {"hiv_model",
                                  {{"features", generated.hivFeatures},
                                   {"coefficients", generated.hivCoefficients}}},
                                 {"params", generatorParamsToJson(a.params)}});
}

// ------------------------------------------------------------------- clean

struct CleanArgs {
    std::string in;
    std::string out;
    std::string sidecar;
    SchemaChoice schema;
};

CleanArgs parseClean(const nlohmann::json& doc) {
    Params p(doc, "clean");
    CleanArgs a;
    a.in = p.requireString("in");
    a.out = p.requireString("out");
    a.sidecar = p.stringOr("sidecar", a.out + ".json");
    a.schema = schemaFor(p);
    p.finish();
    return a;
}

nlohmann::json resolveClean(const CleanArgs& a) {
    nlohmann::json resolved{{"in", a.in}, {"out", a.out}, {"sidecar", a.sidecar}};
    addSchema(resolved, a.schema);
    return resolved;
}

void executeClean(const CleanArgs& a) {
    Dataset data = readCsv(a.in, a.schema.schema);
    CleaningSummary summary;
    Dataset cleaned = cleanDataset(data, summary);
    writeCsv(cleaned, a.out);
    writeJsonFile(a.sidecar, nlohmann::json{{"rows", cleaned.rowCount()},
                                            {"cells_flagged", summary.cellsFlagged},
                                            {"rows_affected", summary.rowsAffected}});
}

// ------------------------------------------------------------------- split

struct SplitArgs {
    std::string in;
    uint64_t seed = 0;
    SplitFractions fractions;
    std::string outTrain, outValidation, outTest, outExperiment;
    std::string sidecar;
    SchemaChoice schema;
};

SplitFractions parseFractions(Params& p) {
    SplitFractions f;
    nlohmann::json doc = p.objectOr("fractions");
    for (const auto& [key, value] : doc.items()) {
        double v;
        try {
            v = value.get<double>();
        } catch (const nlohmann::json::exception&) {
            throw ConfigError("split: fraction '" + key + "' must be a number");
        }
        if (key == "train") {
            f.train = v;
        } else if (key == "validation") {
            f.validation = v;
        } else if (key == "test") {
            f.test = v;
        } else if (key == "experiment") {
            f.experiment = v;
        } else {
            throw ConfigError("split: unknown fraction '" + key + "'");
        }
    }
    return f;
}

SplitArgs parseSplit(const nlohmann::json& doc) {
    Params p(doc, "split");
    SplitArgs a;
    a.in = p.requireString("in");
    a.seed = p.requireSeed();
    a.fractions = parseFractions(p);
    a.outTrain = p.requireString("out_train");
    a.outValidation = p.requireString("out_validation");
    a.outTest = p.requireString("out_test");
    a.outExperiment = p.requireString("out_experiment");
    a.sidecar = p.stringOr("sidecar", a.outTrain + ".json");
    a.schema = schemaFor(p);
    p.finish();
    return a;
}

nlohmann::json resolveSplit(const SplitArgs& a) {
    nlohmann::json resolved{{"in", a.in},
                            {"seed", a.seed},
                            {"fractions",
                             {{"train", a.fractions.train},
                              {"validation", a.fractions.validation},
                              {"test", a.fractions.test},
                              {"experiment", a.fractions.experiment}}},
                            {"out_train", a.outTrain},
                            {"out_validation", a.outValidation},
                            {"out_test", a.outTest},
                            {"out_experiment", a.outExperiment},
                            {"sidecar", a.sidecar}};
    addSchema(resolved, a.schema);
    return resolved;
}

void executeSplit(const SplitArgs& a) {
    Dataset data = readCsv(a.in, a.schema.schema);
    FourWaySplit split = splitDataset(data, a.fractions, a.seed);
    writeCsv(split.train, a.outTrain);
    writeCsv(split.validation, a.outValidation);
    writeCsv(split.test, a.outTest);
    writeCsv(split.experiment, a.outExperiment);
    writeJsonFile(a.sidecar, nlohmann::json{{"seed", a.seed},
                                            {"rows",
                                             {{"train", split.train.rowCount()},
                                              {"validation", split.validation.rowCount()},
                                              {"test", split.test.rowCount()},
                                              {"experiment", split.experiment.rowCount()}}}});
}

// ------------------------------------------------------------------ inject

struct InjectArgs {
    std::string in;
    MissingnessPlan plan;
    uint64_t seed = 0;
    std::string out;
    std::string sidecar;
    SchemaChoice schema;
};

InjectArgs parseInject(const nlohmann::json& doc) {
    Params p(doc, "inject");
    InjectArgs a;
    a.in = p.requireString("in");
    a.plan = missingnessPlanFromJson(p.requireObject("plan"));
    a.seed = p.requireSeed();
    a.out = p.requireString("out");
    a.sidecar = p.stringOr("sidecar", a.out + ".json");
    a.schema = schemaFor(p);
    p.finish();
    return a;
}

nlohmann::json resolveInject(const InjectArgs& a) {
    nlohmann::json resolved{{"in", a.in},
                            {"plan", missingnessPlanToJson(a.plan)},
                            {"seed", a.seed},
                            {"out", a.out},
                            {"sidecar", a.sidecar}};
    addSchema(resolved, a.schema);
    return resolved;
}

void executeInject(const InjectArgs& a) {
    Dataset data = readCsv(a.in, a.schema.schema);
    int64_t removed = 0;
    Dataset injected = injectMissing(data, a.plan, a.seed, &removed);
    writeCsv(injected, a.out);
    writeJsonFile(a.sidecar, nlohmann::json{{"seed", a.seed},
                                            {"plan", missingnessPlanToJson(a.plan)},
                                            {"removed_cells", removed},
                                            {"missing_cells_total", injected.missingCellCount()}});
}

// ------------------------------------------------------------------- train

struct TrainArgs {
    std::string model;
    std::string in;
    std::string out;
    uint64_t seed = 0;
    bool seedGiven = false;
    SchemaChoice schema;
    // rf-imputer
    ForestParams forest;
    int rounds = 2;
    bool excludeHiv = false;
    // autoencoder
    std::string validation;
    int hidden = 11;
    std::vector<Activation> activations;
    TrainConfig trainConfig;
    std::string trace;
    // classifier / lr
    std::string target = "HIV";
    LrConfig lrConfig;
};

TrainArgs parseTrain(const nlohmann::json& doc) {
    Params p(doc, "train");
    TrainArgs a;
    a.model = p.requireString("model");
    a.in = p.requireString("in");
    a.out = p.requireString("out");
    a.schema = schemaFor(p);
    if (a.model == "rf-imputer") {
        a.seed = p.requireSeed();
        a.seedGiven = true;
        a.forest = forestParamsFromJson(p.objectOr("forest"));
        a.rounds = p.intOr("rounds", 2);
        if (a.rounds < 1) throw ConfigError("train: rounds must be at least 1");
        a.excludeHiv = p.boolOr("exclude_hiv", false);
    } else if (a.model == "autoencoder") {
        a.seed = p.requireSeed();
        a.seedGiven = true;
        a.validation = p.requireString("validation");
        a.hidden = p.intOr("hidden", 11);
        if (a.hidden < 1) throw ConfigError("train: hidden must be at least 1");
        a.activations = parseActivations(p);
        a.trainConfig = trainConfigFromJson(p.objectOr("train_config"));
        a.trace = p.stringOr("trace", a.out + ".trace.json");
    } else if (a.model == "classifier") {
        a.seed = p.requireSeed();
        a.seedGiven = true;
        a.target = p.stringOr("target", "HIV");
        a.forest = forestParamsFromJson(p.objectOr("forest"));
    } else if (a.model == "lr") {
        a.target = p.stringOr("target", "HIV");
        a.lrConfig = lrConfigFromJson(p.objectOr("lr_config"));
        if (p.has("seed")) {
            a.seed = p.requireSeed();
            a.seedGiven = true;
        }
    } else {
        throw ConfigError("train: unknown model kind '" + a.model +
                          "' (expected rf-imputer, autoencoder, classifier, or lr)");
    }
    p.finish();
    return a;
}

nlohmann::json resolveTrain(const TrainArgs& a) {
    nlohmann::json resolved{{"model", a.model}, {"in", a.in}, {"out", a.out}};
    addSchema(resolved, a.schema);
    if (a.seedGiven) resolved["seed"] = a.seed;
    if (a.model == "rf-imputer") {
        resolved["forest"] = forestParamsToJson(a.forest);
        resolved["rounds"] = a.rounds;
        resolved["exclude_hiv"] = a.excludeHiv;
    } else if (a.model == "autoencoder") {
        resolved["validation"] = a.validation;
        resolved["hidden"] = a.hidden;
        resolved["activations"] = activationsJson(a.activations);
        resolved["train_config"] = trainConfigToJson(a.trainConfig);
        resolved["trace"] = a.trace;
    } else if (a.model == "classifier") {
        resolved["target"] = a.target;
        resolved["forest"] = forestParamsToJson(a.forest);
    } else {
        resolved["target"] = a.target;
        resolved["lr_config"] = lrConfigToJson(a.lrConfig);
    }
    return resolved;
}

void executeTrain(const TrainArgs& a) {
    Dataset data = readCsv(a.in, a.schema.schema);
    if (a.model == "rf-imputer") {
        RfImputer imputer = fitRfImputer(data, a.forest, a.seed, a.excludeHiv);
        imputer.setRounds(a.rounds);
        writeJsonFile(a.out, imputer.toJson());
    } else if (a.model == "autoencoder") {
        Dataset validation = readCsv(a.validation, a.schema.schema);
        Matrix trainSet = completeEncodedRows(data, "train");
        Matrix validationSet = completeEncodedRows(validation, "validation");
        int width = a.schema.schema.encodedWidth();
        Autoencoder network =
            initNetwork({width, a.hidden, width}, a.activations, deriveSeed(a.seed, "init-network"));
        TrainConfig config = a.trainConfig;
        config.seed = deriveSeed(a.seed, "train");
        TrainTrace trace = train(network, trainSet, validationSet, config);
        writeJsonFile(a.out, network.toJson());
        writeJsonFile(a.trace, nlohmann::json{{"train_loss", trace.trainLoss},
                                              {"validation_loss", trace.validationLoss},
                                              {"selected_cycle", trace.selectedCycle}});
    } else if (a.model == "classifier") {
        BinaryClassifier model = fitBinaryClassifier(data, a.target, a.forest, a.seed);
        writeJsonFile(a.out, model.toJson());
    } else {
        LrClassifier model = fitLrClassifier(data, a.target, a.lrConfig);
        writeJsonFile(a.out, model.toJson());
    }
}

// ------------------------------------------------------------------ impute

struct ImputeArgs {
    ImputeStrategy strategy = ImputeStrategy::Rf;
    std::string label;
    std::vector<std::string> pattern;
    bool patternGiven = false;
    std::string in;
    std::string out;
    std::string sidecar;
    uint64_t seed = 0;
    bool seedGiven = false;
    SchemaChoice schema;
    std::string imputerPath;
    std::string networkPath;
    std::string trainCsv;
    GaConfig ga;
    // aann-ga-rf
    std::string validationCsv, testCsv, experimentCsv;
    MissingnessPlan plan;
    int hidden = 11;
    std::vector<Activation> activations;
    TrainConfig trainConfig;
    ForestParams forest;
    std::string outUncorrected;
    std::string outTest;
};

// A label of the form RF<set> or R<set> pins both the strategy and the
// variable pattern of the experiment set it names.
std::optional<std::pair<ImputeStrategy, std::vector<std::string>>> definedSetLabel(
    const std::string& label) {
    for (const std::string& code : batterySetLabels()) {
        if (label == "RF" + code) return {{ImputeStrategy::Rf, setLabelVariables(code)}};
        if (label == "R" + code) return {{ImputeStrategy::Random, setLabelVariables(code)}};
    }
    return std::nullopt;
}

ImputeArgs parseImpute(const nlohmann::json& doc) {
    Params p(doc, "impute");
    ImputeArgs a;
    a.strategy = strategyFromName(p.requireString("strategy"));
    a.label = p.stringOr("label", "");
    a.out = p.requireString("out");
    a.sidecar = p.stringOr("sidecar", a.out + ".json");
    a.schema = schemaFor(p);

    if (p.has("pattern")) {
        nlohmann::json patternDoc = p.take("pattern");
        if (!patternDoc.is_array())
            throw ConfigError("impute: parameter 'pattern' must be an array of variable names");
        for (const nlohmann::json& item : patternDoc) {
            if (!item.is_string())
                throw ConfigError("impute: pattern entries must be variable names");
            a.pattern.push_back(item.get<std::string>());
        }
        a.patternGiven = true;
    }

    if (auto defined = definedSetLabel(a.label)) {
        if (a.strategy != defined->first)
            throw ConfigError("impute: label '" + a.label + "' implies strategy '" +
                              strategyName(defined->first) + "'");
        if (a.patternGiven) {
            std::vector<std::string> got = a.pattern;
            std::vector<std::string> want = defined->second;
            std::sort(got.begin(), got.end());
            std::sort(want.begin(), want.end());
            if (got != want)
                throw ConfigError("impute: pattern does not match the variables of set label '" +
                                  a.label + "'");
        } else {
            a.pattern = defined->second;
            a.patternGiven = true;
        }
    }
    for (const std::string& name : a.pattern)
        if (a.schema.schema.indexOf(name) < 0)
            throw ConfigError("impute: pattern references unknown variable: " + name);

    switch (a.strategy) {
        case ImputeStrategy::Rf:
            a.in = p.requireString("in");
            a.imputerPath = p.requireString("imputer");
            break;
        case ImputeStrategy::AannGa:
            a.in = p.requireString("in");
            a.seed = p.requireSeed();
            a.seedGiven = true;
            a.networkPath = p.requireString("network");
            a.ga = gaConfigFromJson(p.objectOr("ga"));
            break;
        case ImputeStrategy::RfAannGa:
            a.in = p.requireString("in");
            a.seed = p.requireSeed();
            a.seedGiven = true;
            a.imputerPath = p.requireString("imputer");
            a.networkPath = p.requireString("network");
            a.ga = gaConfigFromJson(p.objectOr("ga"));
            break;
        case ImputeStrategy::AannGaRf:
            a.seed = p.requireSeed();
            a.seedGiven = true;
            a.trainCsv = p.requireString("train");
            a.validationCsv = p.requireString("validation");
            a.testCsv = p.requireString("test");
            a.experimentCsv = p.requireString("experiment");
            a.plan = missingnessPlanFromJson(p.requireObject("plan"));
            a.hidden = p.intOr("hidden", 11);
            if (a.hidden < 1) throw ConfigError("impute: hidden must be at least 1");
            a.activations = parseActivations(p);
            a.trainConfig = trainConfigFromJson(p.objectOr("train_config"));
            a.ga = gaConfigFromJson(p.objectOr("ga"));
            a.forest = forestParamsFromJson(p.objectOr("forest"));
            a.outUncorrected = p.stringOr("out_uncorrected", "");
            a.outTest = p.stringOr("out_test", "");
            break;
        case ImputeStrategy::Random:
            a.in = p.requireString("in");
            a.seed = p.requireSeed();
            a.seedGiven = true;
            a.trainCsv = p.requireString("train");
            break;
        case ImputeStrategy::Mean:
            a.in = p.requireString("in");
            a.trainCsv = p.requireString("train");
            break;
    }
    p.finish();
    return a;
}

nlohmann::json resolveImpute(const ImputeArgs& a) {
    nlohmann::json resolved{{"strategy", strategyName(a.strategy)},
                            {"out", a.out},
                            {"sidecar", a.sidecar}};
    addSchema(resolved, a.schema);
    if (!a.label.empty()) resolved["label"] = a.label;
    if (a.patternGiven) resolved["pattern"] = a.pattern;
    if (a.seedGiven) resolved["seed"] = a.seed;
    if (!a.in.empty()) resolved["in"] = a.in;
    switch (a.strategy) {
        case ImputeStrategy::Rf:
            resolved["imputer"] = a.imputerPath;
            break;
        case ImputeStrategy::AannGa:
            resolved["network"] = a.networkPath;
            resolved["ga"] = gaConfigToJson(a.ga);
            break;
        case ImputeStrategy::RfAannGa:
            resolved["imputer"] = a.imputerPath;
            resolved["network"] = a.networkPath;
            resolved["ga"] = gaConfigToJson(a.ga);
            break;
        case ImputeStrategy::AannGaRf:
            resolved["train"] = a.trainCsv;
            resolved["validation"] = a.validationCsv;
            resolved["test"] = a.testCsv;
            resolved["experiment"] = a.experimentCsv;
            resolved["plan"] = missingnessPlanToJson(a.plan);
            resolved["hidden"] = a.hidden;
            resolved["activations"] = activationsJson(a.activations);
            resolved["train_config"] = trainConfigToJson(a.trainConfig);
            resolved["ga"] = gaConfigToJson(a.ga);
            resolved["forest"] = forestParamsToJson(a.forest);
            if (!a.outUncorrected.empty()) resolved["out_uncorrected"] = a.outUncorrected;
            if (!a.outTest.empty()) resolved["out_test"] = a.outTest;
            break;
        case ImputeStrategy::Random:
        case ImputeStrategy::Mean:
            resolved["train"] = a.trainCsv;
            break;
    }
    return resolved;
}

void checkRealizedPattern(const ImputeArgs& a, const ImputedSet& set) {
    if (!a.patternGiven) return;
    std::set<std::string> declared(a.pattern.begin(), a.pattern.end());
    for (const std::string& name : set.pattern)
        if (!declared.count(name))
            throw DataError("impute: variable '" + name +
                            "' has missing cells but is not part of the declared pattern");
}

void executeImpute(const ImputeArgs& a) {
    const Schema& schema = a.schema.schema;
    if (a.strategy == ImputeStrategy::AannGaRf) {
        FourWaySplit sets{readCsv(a.trainCsv, schema), readCsv(a.validationCsv, schema),
                          readCsv(a.testCsv, schema), readCsv(a.experimentCsv, schema)};
        int width = schema.encodedWidth();
        Autoencoder network = initNetwork({width, a.hidden, width}, a.activations,
                                          deriveSeed(a.seed, "init-network"));
        TrainConfig config = a.trainConfig;
        config.seed = deriveSeed(a.seed, "train");
        AannGaRfResult result =
            imputeAannGaRf(network, config, a.ga, a.forest, sets, a.plan, a.seed);
        result.corrected.label = a.label;
        result.corrected.provenance["run_summary"] = result.summary;
        checkRealizedPattern(a, result.corrected);
        writeImputedSet(result.corrected, a.out, a.sidecar);
        if (!a.outUncorrected.empty()) {
            if (!a.label.empty()) result.uncorrected.label = a.label + "-uncorrected";
            writeImputedSet(result.uncorrected, a.outUncorrected, a.outUncorrected + ".json");
        }
        if (!a.outTest.empty()) {
            if (!a.label.empty()) result.testCompleted.label = a.label + "-test";
            writeImputedSet(result.testCompleted, a.outTest, a.outTest + ".json");
        }
        return;
    }

    Dataset data = readCsv(a.in, schema);
    ImputedSet set;
    switch (a.strategy) {
        case ImputeStrategy::Rf: {
            RfImputer imputer = RfImputer::fromJson(readJsonFile(a.imputerPath));
            set = imputeRf(imputer, data, a.label);
            break;
        }
        case ImputeStrategy::AannGa: {
            Autoencoder network = Autoencoder::fromJson(readJsonFile(a.networkPath));
            set = imputeAannGa(network, a.ga, data, a.seed, a.label);
            break;
        }
        case ImputeStrategy::RfAannGa: {
            RfImputer imputer = RfImputer::fromJson(readJsonFile(a.imputerPath));
            Autoencoder network = Autoencoder::fromJson(readJsonFile(a.networkPath));
            set = imputeRfAannGa(imputer, network, a.ga, data, a.seed, a.label);
            break;
        }
        case ImputeStrategy::Random:
            set = imputeRandom(readCsv(a.trainCsv, schema), data, a.seed, a.label);
            break;
        case ImputeStrategy::Mean:
            set = imputeMean(readCsv(a.trainCsv, schema), data, a.label);
            break;
        case ImputeStrategy::AannGaRf:
            break;  // handled above
    }
    checkRealizedPattern(a, set);
    writeImputedSet(set, a.out, a.sidecar);
}

// ------------------------------------------------------------------ assess

struct SetRef {
    std::string csv;
    std::string sidecar;
};

struct AssessArgs {
    std::string kind;
    std::string target;
    std::string modelPath;
    std::vector<SetRef> sets;
    std::string outJson;
    std::string outText;
    SchemaChoice schema;
    std::map<std::string, std::vector<int>> ranges;
    // qq
    std::string aPath, bPath, outCsv, variable;
    int points = 100;
    bool useModel = false;
};

std::vector<SetRef> parseSets(Params& p, bool required) {
    if (!p.has("sets")) {
        if (required) throw ConfigError("assess: missing required parameter 'sets'");
        return {};
    }
    nlohmann::json doc = p.take("sets");
    if (!doc.is_array()) throw ConfigError("assess: parameter 'sets' must be an array");
    std::vector<SetRef> refs;
    for (const nlohmann::json& item : doc) {
        if (item.is_string()) {
            std::string csv = item.get<std::string>();
            refs.push_back({csv, csv + ".json"});
        } else if (item.is_object()) {
            std::string csv, sidecar;
            for (const auto& [key, value] : item.items()) {
                if (key == "csv") {
                    csv = value.get<std::string>();
                } else if (key == "sidecar") {
                    sidecar = value.get<std::string>();
                } else {
                    throw ConfigError("assess: unknown sets key '" + key + "'");
                }
            }
            if (csv.empty()) throw ConfigError("assess: sets entries need a 'csv' path");
            refs.push_back({csv, sidecar.empty() ? csv + ".json" : sidecar});
        } else {
            throw ConfigError("assess: sets entries must be paths or {csv, sidecar} objects");
        }
    }
    if (required && refs.empty()) throw ConfigError("assess: sets must not be empty");
    return refs;
}

AssessArgs parseAssess(const nlohmann::json& doc) {
    Params p(doc, "assess");
    AssessArgs a;
    a.kind = p.requireString("kind");
    a.schema = schemaFor(p);
    if (a.kind == "stats" || a.kind == "range-accuracy") {
        a.target = p.requireString("target");
        a.sets = parseSets(p, true);
        a.outJson = p.requireString("out_json");
        a.outText = p.stringOr("out_text", a.outJson + ".txt");
        if (a.kind == "range-accuracy" && p.has("ranges")) {
            nlohmann::json rangesDoc = p.take("ranges");
            if (!rangesDoc.is_object())
                throw ConfigError("assess: parameter 'ranges' must map variables to arrays");
            for (const auto& [name, values] : rangesDoc.items()) {
                if (a.schema.schema.indexOf(name) < 0)
                    throw ConfigError("assess: ranges references unknown variable: " + name);
                std::vector<int> ladder;
                try {
                    ladder = values.get<std::vector<int>>();
                } catch (const nlohmann::json::exception&) {
                    throw ConfigError("assess: ranges for '" + name +
                                      "' must be an array of integers");
                }
                a.ranges[name] = std::move(ladder);
            }
        }
    } else if (a.kind == "classify" || a.kind == "lr") {
        a.modelPath = p.requireString("model");
        a.target = p.requireString("target");
        a.sets = parseSets(p, false);
        a.outJson = p.requireString("out_json");
        a.outText = p.stringOr("out_text", a.outJson + ".txt");
    } else if (a.kind == "qq") {
        a.aPath = p.requireString("a");
        a.bPath = p.requireString("b");
        a.outCsv = p.requireString("out");
        a.points = p.intOr("points", 100);
        if (a.points < 1) throw ConfigError("assess: points must be at least 1");
        bool hasVariable = p.has("variable");
        bool hasModel = p.has("model");
        if (hasVariable == hasModel)
            throw ConfigError("assess: qq needs exactly one of 'variable' or 'model'");
        if (hasVariable) {
            a.variable = p.requireString("variable");
            if (a.schema.schema.indexOf(a.variable) < 0)
                throw ConfigError("assess: qq references unknown variable: " + a.variable);
        } else {
            a.modelPath = p.requireString("model");
            a.useModel = true;
        }
    } else {
        throw ConfigError("assess: unknown kind '" + a.kind +
                          "' (expected stats, classify, lr, range-accuracy, or qq)");
    }
    p.finish();
    return a;
}

nlohmann::json resolveAssess(const AssessArgs& a) {
    nlohmann::json resolved{{"kind", a.kind}};
    addSchema(resolved, a.schema);
    if (a.kind == "qq") {
        resolved["a"] = a.aPath;
        resolved["b"] = a.bPath;
        resolved["out"] = a.outCsv;
        resolved["points"] = a.points;
        if (a.useModel) {
            resolved["model"] = a.modelPath;
        } else {
            resolved["variable"] = a.variable;
        }
        return resolved;
    }
    resolved["target"] = a.target;
    resolved["out_json"] = a.outJson;
    resolved["out_text"] = a.outText;
    if (!a.modelPath.empty()) resolved["model"] = a.modelPath;
    nlohmann::json sets = nlohmann::json::array();
    for (const SetRef& ref : a.sets)
        sets.push_back({{"csv", ref.csv}, {"sidecar", ref.sidecar}});
    resolved["sets"] = sets;
    if (!a.ranges.empty()) {
        nlohmann::json ranges = nlohmann::json::object();
        for (const auto& [name, ladder] : a.ranges) ranges[name] = ladder;
        resolved["ranges"] = ranges;
    }
    return resolved;
}

// Observed cells of one variable as doubles, for distribution comparisons.
std::vector<double> observedColumn(const Dataset& data, int var) {
    std::vector<double> values;
    for (int r = 0; r < data.rowCount(); ++r)
        if (!data.missing(r, var)) values.push_back(static_cast<double>(data.value(r, var)));
    return values;
}

void executeAssess(const AssessArgs& a) {
    const Schema& schema = a.schema.schema;
    if (a.kind == "qq") {
        Dataset first = readCsv(a.aPath, schema);
        Dataset second = readCsv(a.bPath, schema);
        std::vector<double> left, right;
        if (a.useModel) {
            LrClassifier model = LrClassifier::fromJson(readJsonFile(a.modelPath));
            left = lrProbabilities(model, first);
            right = lrProbabilities(model, second);
            for (double& v : left) v *= 100.0;
            for (double& v : right) v *= 100.0;
        } else {
            int var = schema.require(a.variable);
            left = observedColumn(first, var);
            right = observedColumn(second, var);
            if (left.empty())
                throw DataError("assess: no observed values of '" + a.variable + "' in " +
                                a.aPath);
            if (right.empty())
                throw DataError("assess: no observed values of '" + a.variable + "' in " +
                                a.bPath);
        }
        ensureParentDir(a.outCsv);
        writeQqCsv(left, right, a.points, a.outCsv);
        return;
    }

    Dataset target = readCsv(a.target, schema);
    if (a.kind == "stats") {
        std::vector<StatAssessment> all;
        nlohmann::json sets = nlohmann::json::array();
        for (const SetRef& ref : a.sets) {
            ImputedSet set = readImputedSet(ref.csv, ref.sidecar, schema);
            all.push_back(assessStats(target, set));
            sets.push_back(statAssessmentToJson(all.back()));
        }
        writeJsonFile(a.outJson, nlohmann::json{{"kind", "stats"}, {"sets", sets}});
        writeTextFile(a.outText, statTable(all));
    } else if (a.kind == "classify") {
        BinaryClassifier model = BinaryClassifier::fromJson(readJsonFile(a.modelPath));
        std::vector<ClassificationAssessment> all{assessClassification(model, target, "T")};
        for (const SetRef& ref : a.sets) {
            ImputedSet set = readImputedSet(ref.csv, ref.sidecar, schema);
            all.push_back(assessClassification(model, set.data, labelOf(set)));
        }
        nlohmann::json sets = nlohmann::json::array();
        for (const ClassificationAssessment& entry : all)
            sets.push_back(classificationAssessmentToJson(entry));
        writeJsonFile(a.outJson, nlohmann::json{{"kind", "classify"}, {"sets", sets}});
        writeTextFile(a.outText, classificationTable(all));
    } else if (a.kind == "lr") {
        LrClassifier model = LrClassifier::fromJson(readJsonFile(a.modelPath));
        std::vector<LrImpactReport> all{lrImpact(model, target, target, "T")};
        for (const SetRef& ref : a.sets) {
            ImputedSet set = readImputedSet(ref.csv, ref.sidecar, schema);
            all.push_back(lrImpact(model, target, set.data, labelOf(set)));
        }
        nlohmann::json sets = nlohmann::json::array();
        for (const LrImpactReport& entry : all) sets.push_back(lrImpactToJson(entry));
        writeJsonFile(a.outJson, nlohmann::json{{"kind", "lr"}, {"sets", sets}});
        writeTextFile(a.outText, lrImpactTable(all));
    } else {  // range-accuracy
        std::vector<std::pair<std::string, RangeAccuracyReport>> all;
        nlohmann::json sets = nlohmann::json::array();
        for (const SetRef& ref : a.sets) {
            ImputedSet set = readImputedSet(ref.csv, ref.sidecar, schema);
            RangeAccuracyReport report = rangeAccuracy(set, target, a.ranges);
            sets.push_back(
                {{"label", labelOf(set)}, {"report", rangeAccuracyToJson(report)}});
            all.emplace_back(labelOf(set), std::move(report));
        }
        writeJsonFile(a.outJson, nlohmann::json{{"kind", "range-accuracy"}, {"sets", sets}});
        writeTextFile(a.outText, rangeAccuracyTable(all));
    }
}

// ---------------------------------------------------------------- dispatch

struct StepPlan {
    nlohmann::json params;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
};

StepPlan planStep(const std::string& command, const nlohmann::json& params) {
    StepPlan plan;
    if (command == "generate") {
        GenerateArgs a = parseGenerate(params);
        plan.params = resolveGenerate(a);
        plan.outputs = {a.out, a.sidecar};
    } else if (command == "clean") {
        CleanArgs a = parseClean(params);
        plan.params = resolveClean(a);
        plan.inputs = {a.in};
        plan.outputs = {a.out, a.sidecar};
    } else if (command == "split") {
        SplitArgs a = parseSplit(params);
        plan.params = resolveSplit(a);
        plan.inputs = {a.in};
        plan.outputs = {a.outTrain, a.outValidation, a.outTest, a.outExperiment, a.sidecar};
    } else if (command == "inject") {
        InjectArgs a = parseInject(params);
        plan.params = resolveInject(a);
        plan.inputs = {a.in};
        plan.outputs = {a.out, a.sidecar};
    } else if (command == "train") {
        TrainArgs a = parseTrain(params);
        plan.params = resolveTrain(a);
        plan.inputs = {a.in};
        plan.outputs = {a.out};
        if (a.model == "autoencoder") {
            plan.inputs.push_back(a.validation);
            plan.outputs.push_back(a.trace);
        }
    } else if (command == "impute") {
        ImputeArgs a = parseImpute(params);
        plan.params = resolveImpute(a);
        if (a.strategy == ImputeStrategy::AannGaRf) {
            plan.inputs = {a.trainCsv, a.validationCsv, a.testCsv, a.experimentCsv};
        } else {
            plan.inputs = {a.in};
            if (!a.imputerPath.empty()) plan.inputs.push_back(a.imputerPath);
            if (!a.networkPath.empty()) plan.inputs.push_back(a.networkPath);
            if (!a.trainCsv.empty()) plan.inputs.push_back(a.trainCsv);
        }
        plan.outputs = {a.out, a.sidecar};
        if (!a.outUncorrected.empty()) {
            plan.outputs.push_back(a.outUncorrected);
            plan.outputs.push_back(a.outUncorrected + ".json");
        }
        if (!a.outTest.empty()) {
            plan.outputs.push_back(a.outTest);
            plan.outputs.push_back(a.outTest + ".json");
        }
    } else if (command == "assess") {
        AssessArgs a = parseAssess(params);
        plan.params = resolveAssess(a);
        if (a.kind == "qq") {
            plan.inputs = {a.aPath, a.bPath};
            if (a.useModel) plan.inputs.push_back(a.modelPath);
            plan.outputs = {a.outCsv};
        } else {
            plan.inputs = {a.target};
            if (!a.modelPath.empty()) plan.inputs.push_back(a.modelPath);
            for (const SetRef& ref : a.sets) {
                plan.inputs.push_back(ref.csv);
                plan.inputs.push_back(ref.sidecar);
            }
            plan.outputs = {a.outJson, a.outText};
        }
    } else {
        throw ConfigError("unknown pipeline command: " + command);
    }
    return plan;
}

void executeStep(const std::string& command, const nlohmann::json& params) {
    if (command == "generate") {
        executeGenerate(parseGenerate(params));
    } else if (command == "clean") {
        executeClean(parseClean(params));
    } else if (command == "split") {
        executeSplit(parseSplit(params));
    } else if (command == "inject") {
        executeInject(parseInject(params));
    } else if (command == "train") {
        executeTrain(parseTrain(params));
    } else if (command == "impute") {
        executeImpute(parseImpute(params));
    } else if (command == "assess") {
        executeAssess(parseAssess(params));
    } else {
        throw ConfigError("unknown pipeline command: " + command);
    }
}

// Replaces string values equal to a mapped path, walking nested structures.
void remapPaths(nlohmann::json& node, const std::map<std::string, std::string>& own,
                const std::map<std::string, std::string>& prior) {
    if (node.is_string()) {
        const std::string value = node.get<std::string>();
        auto ownIt = own.find(value);
        if (ownIt != own.end()) {
            node = ownIt->second;
            return;
        }
        auto priorIt = prior.find(value);
        if (priorIt != prior.end()) node = priorIt->second;
        return;
    }
    if (node.is_object() || node.is_array())
        for (nlohmann::json& child : node) remapPaths(child, own, prior);
}

}  // namespace

std::string bytesSha256(const void* data, size_t length) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int digestLength = 0;
    if (EVP_Digest(data, length, digest, &digestLength, EVP_sha256(), nullptr) != 1)
        throw NumericError("SHA-256 digest failed");
    static const char* kHex = "0123456789abcdef";
    std::string out(static_cast<size_t>(digestLength) * 2, '0');
    for (unsigned int i = 0; i < digestLength; ++i) {
        out[2 * i] = kHex[digest[i] >> 4];
        out[2 * i + 1] = kHex[digest[i] & 0xf];
    }
    return out;
}

std::string fileSha256(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path + " for hashing");
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx) throw NumericError("SHA-256 context allocation failed");
    if (EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
        EVP_MD_CTX_free(ctx);
        throw NumericError("SHA-256 init failed");
    }
    char buffer[65536];
    while (in) {
        in.read(buffer, sizeof(buffer));
        std::streamsize got = in.gcount();
        if (got > 0 && EVP_DigestUpdate(ctx, buffer, static_cast<size_t>(got)) != 1) {
            EVP_MD_CTX_free(ctx);
            throw NumericError("SHA-256 update failed");
        }
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int digestLength = 0;
    if (EVP_DigestFinal_ex(ctx, digest, &digestLength) != 1) {
        EVP_MD_CTX_free(ctx);
        throw NumericError("SHA-256 final failed");
    }
    EVP_MD_CTX_free(ctx);
    static const char* kHex = "0123456789abcdef";
    std::string out(static_cast<size_t>(digestLength) * 2, '0');
    for (unsigned int i = 0; i < digestLength; ++i) {
        out[2 * i] = kHex[digest[i] >> 4];
        out[2 * i + 1] = kHex[digest[i] & 0xf];
    }
    return out;
}

nlohmann::json StepRecord::toJson() const {
    nlohmann::json in = nlohmann::json::array();
    for (const FileDigest& digest : inputs)
        in.push_back({{"path", digest.path}, {"sha256", digest.sha256}});
    nlohmann::json out = nlohmann::json::array();
    for (const FileDigest& digest : outputs)
        out.push_back({{"path", digest.path}, {"sha256", digest.sha256}});
    return nlohmann::json{{"command", command},
                          {"params", params},
                          {"params_sha256", paramsSha256},
                          {"inputs", in},
                          {"outputs", out}};
}

StepRecord StepRecord::fromJson(const nlohmann::json& doc) {
    try {
        StepRecord record;
        record.command = doc.at("command").get<std::string>();
        record.params = doc.at("params");
        record.paramsSha256 = doc.at("params_sha256").get<std::string>();
        for (const nlohmann::json& item : doc.at("inputs"))
            record.inputs.push_back(
                {item.at("path").get<std::string>(), item.at("sha256").get<std::string>()});
        for (const nlohmann::json& item : doc.at("outputs"))
            record.outputs.push_back(
                {item.at("path").get<std::string>(), item.at("sha256").get<std::string>()});
        return record;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed manifest step: ") + e.what());
    }
}

StepRecord runStep(const std::string& command, const nlohmann::json& params) {
    StepPlan plan = planStep(command, params);
    // A step that overwrites one of its own inputs (or writes one path
    // twice) cannot be replayed from digests; reject it up front.
    std::set<std::string> outputs;
    for (const std::string& path : plan.outputs) {
        if (!outputs.insert(path).second)
            throw ConfigError(command + ": output path written twice: " + path);
        if (std::find(plan.inputs.begin(), plan.inputs.end(), path) != plan.inputs.end())
            throw ConfigError(command + ": output path is also an input: " + path);
    }
    StepRecord record;
    record.command = command;
    record.params = plan.params;
    std::string dumped = record.params.dump();
    record.paramsSha256 = bytesSha256(dumped.data(), dumped.size());
    for (const std::string& path : plan.inputs) record.inputs.push_back({path, fileSha256(path)});
    for (const std::string& path : plan.outputs) ensureParentDir(path);
    executeStep(command, plan.params);
    for (const std::string& path : plan.outputs)
        record.outputs.push_back({path, fileSha256(path)});
    return record;
}

void appendToManifest(const std::string& path, const StepRecord& record) {
    nlohmann::json manifest;
    if (std::filesystem::exists(path)) {
        manifest = readManifest(path);
    } else {
        manifest = nlohmann::json{{"version", kManifestVersion},
                                  {"steps", nlohmann::json::array()}};
    }
    manifest.at("steps").push_back(record.toJson());
    writeJsonFile(path, manifest);
}

nlohmann::json readManifest(const std::string& path) {
    nlohmann::json doc = readJsonFile(path);
    try {
        if (!doc.is_object() || !doc.at("steps").is_array())
            throw ConfigError(path + ": not an experiment manifest");
        if (doc.at("version").get<int>() != kManifestVersion)
            throw ConfigError(path + ": unsupported manifest version");
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return doc;
}

ReplayReport replayManifest(const std::string& manifestPath, const std::string& stagingDir) {
    nlohmann::json manifest = readManifest(manifestPath);
    std::filesystem::create_directories(stagingDir);
    std::map<std::string, std::string> priorOutputs;  // original path -> staged path
    ReplayReport report;
    const nlohmann::json& steps = manifest.at("steps");
    for (size_t i = 0; i < steps.size(); ++i) {
        StepRecord record = StepRecord::fromJson(steps[i]);
        std::string dumped = record.params.dump();
        if (bytesSha256(dumped.data(), dumped.size()) != record.paramsSha256)
            throw ConfigError("manifest step " + std::to_string(i) +
                              " parameter hash mismatch; the manifest was modified");

        std::filesystem::path stepDir =
            std::filesystem::path(stagingDir) / ("step" + std::to_string(i));
        std::map<std::string, std::string> ownOutputs;
        std::set<std::string> usedNames;
        for (const FileDigest& out : record.outputs) {
            std::string name = std::filesystem::path(out.path).filename().string();
            if (!usedNames.insert(name).second)
                name = std::to_string(ownOutputs.size()) + "-" + name;
            ownOutputs[out.path] = (stepDir / name).string();
        }

        nlohmann::json remapped = record.params;
        remapPaths(remapped, ownOutputs, priorOutputs);

        for (const FileDigest& in : record.inputs) {
            auto staged = priorOutputs.find(in.path);
            const std::string& actualPath = staged == priorOutputs.end() ? in.path : staged->second;
            if (fileSha256(actualPath) != in.sha256)
                throw DataError("replay input '" + in.path +
                                "' digest differs from the manifest; the file changed since the"
                                " original run");
        }

        StepRecord replayed = runStep(record.command, remapped);
        std::map<std::string, std::string> replayedDigests;
        for (const FileDigest& out : replayed.outputs) replayedDigests[out.path] = out.sha256;
        for (const FileDigest& out : record.outputs) {
            const std::string& staged = ownOutputs.at(out.path);
            auto it = replayedDigests.find(staged);
            std::string actual = it == replayedDigests.end() ? "(not produced)" : it->second;
            if (actual != out.sha256) {
                report.mismatches.push_back(
                    {static_cast<int>(i), out.path, out.sha256, actual});
                report.ok = false;
            }
            priorOutputs[out.path] = staged;
        }
        ++report.stepsReplayed;
    }
    return report;
}

}  // namespace mdi
