// Thin command-line front end over the mdimpute C API. Every subcommand
// builds a JSON parameter object (config file plus flag overrides), hands it
// to mdi_run_step, and optionally appends the executed step record to an
// experiment manifest.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "mdimpute.h"

namespace {

// Exit contract: 0 success, 1 data problems, 2 configuration problems.
int exitCodeFor(mdi_status status) {
    switch (status) {
        case MDI_OK: return 0;
        case MDI_ERR_CONFIG:
        case MDI_ERR_INVALID_ARGUMENT: return 2;
        default: return 1;
    }
}

int failWith(mdi_status status) {
    std::cerr << "error: " << mdi_last_error() << "\n";
    return exitCodeFor(status);
}

struct CommonArgs {
    std::string config;
    std::string in;
    std::string out;
    std::string manifest;
    uint64_t seed = 0;
    int threads = 1;
    CLI::Option* seedOption = nullptr;

    bool hasSeed() const { return seedOption != nullptr && seedOption->count() > 0; }
};

void addCommonOptions(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config, "JSON file with the command's parameters");
    args.seedOption =
        cmd->add_option("--seed", args.seed, "Master seed; the step seed is derived from it");
    cmd->add_option("--in", args.in, "Input CSV path (overrides the config's \"in\")");
    cmd->add_option("--out", args.out, "Primary output path (overrides the config's output)");
    cmd->add_option("--threads", args.threads,
                    "Worker threads; outputs are identical for any value");
    cmd->add_option("--manifest", args.manifest, "Manifest file to append the executed step to");
}

nlohmann::json loadConfig(const std::string& path) {
    if (path.empty()) return nlohmann::json::object();
    std::ifstream in(path);
    if (!in) {
        std::cerr << "error: cannot open config file " << path << "\n";
        std::exit(2);
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << path << ": " << e.what() << "\n";
        std::exit(2);
    }
    if (!doc.is_object()) {
        std::cerr << "error: " << path << ": config must be a JSON object\n";
        std::exit(2);
    }
    return doc;
}

// Commands whose work is randomized carry a "seed" parameter; the rest
// (clean, assess, rf/mean imputation, logistic fits) are deterministic.
bool commandWantsSeed(const std::string& command, const nlohmann::json& params) {
    if (command == "generate" || command == "split" || command == "inject") return true;
    if (command == "train") return params.value("model", "") != "lr";
    if (command == "impute") {
        std::string strategy = params.value("strategy", "");
        return strategy != "rf" && strategy != "mean";
    }
    return false;
}

// Steps already recorded; used as the index when deriving the step seed so
// repeated commands in one experiment get distinct seeds.
uint64_t manifestStepCount(const std::string& path) {
    std::ifstream in(path);
    if (!in) return 0;
    try {
        nlohmann::json doc = nlohmann::json::parse(in);
        if (doc.is_object() && doc.contains("steps") && doc.at("steps").is_array())
            return doc.at("steps").size();
    } catch (const nlohmann::json::exception&) {
        // Leave the malformed file to the manifest append, which reports it.
    }
    return 0;
}

int runCommand(const std::string& command, const CommonArgs& common,
               const nlohmann::json& overrides) {
    mdi_status threadStatus = mdi_set_threads(common.threads);
    if (threadStatus != MDI_OK) return failWith(threadStatus);

    nlohmann::json params = loadConfig(common.config);
    for (const auto& [key, value] : overrides.items()) params[key] = value;
    if (!common.in.empty()) params["in"] = common.in;
    if (!common.out.empty()) {
        if (command == "assess" && params.value("kind", "") != "qq") {
            params["out_json"] = common.out;
        } else {
            params["out"] = common.out;
        }
    }
    if (commandWantsSeed(command, params) && !params.contains("seed")) {
        if (!common.hasSeed()) {
            std::cerr << "error: " << command << " needs --seed (or a \"seed\" config entry)\n";
            return 2;
        }
        uint64_t index = common.manifest.empty() ? 0 : manifestStepCount(common.manifest);
        params["seed"] = mdi_derive_seed(common.seed, command.c_str(), index);
    }

    char* record = nullptr;
    mdi_status status = mdi_run_step(command.c_str(), params.dump().c_str(), &record);
    if (status != MDI_OK) return failWith(status);

    nlohmann::json doc = nlohmann::json::parse(record);
    for (const nlohmann::json& output : doc.at("outputs"))
        std::cout << "wrote " << output.at("path").get<std::string>() << "\n";
    if (!common.manifest.empty()) {
        mdi_status appended = mdi_manifest_append(common.manifest.c_str(), record);
        if (appended != MDI_OK) {
            mdi_string_free(record);
            return failWith(appended);
        }
        std::cout << "recorded step in " << common.manifest << "\n";
    }
    mdi_string_free(record);
    return 0;
}

int runReplay(const std::string& manifest, const std::string& staging, int threads) {
    mdi_status threadStatus = mdi_set_threads(threads);
    if (threadStatus != MDI_OK) return failWith(threadStatus);
    char* report = nullptr;
    mdi_status status = mdi_replay(manifest.c_str(), staging.c_str(), &report);
    if (report != nullptr) {
        std::cout << report << "\n";
        mdi_string_free(report);
    }
    if (status != MDI_OK) return failWith(status);
    std::cout << "replay ok\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Survey missing-data imputation and impact-assessment pipeline"};
    app.set_version_flag("--version", mdi_version());
    app.require_subcommand(1);

    int exitCode = 0;

    CommonArgs generateArgs;
    CLI::App* generate = app.add_subcommand("generate", "Draw a synthetic survey population");
    addCommonOptions(generate, generateArgs);
    int rows = 0;
    CLI::Option* rowsOption = generate->add_option("--n", rows, "Number of rows");
    generate->callback([&] {
        nlohmann::json overrides = nlohmann::json::object();
        if (rowsOption->count() > 0) overrides["n"] = rows;
        exitCode = runCommand("generate", generateArgs, overrides);
    });

    CommonArgs cleanArgs;
    CLI::App* clean = app.add_subcommand("clean", "Re-flag rule-violating cells as missing");
    addCommonOptions(clean, cleanArgs);
    clean->callback(
        [&] { exitCode = runCommand("clean", cleanArgs, nlohmann::json::object()); });

    CommonArgs splitArgs;
    CLI::App* split =
        app.add_subcommand("split", "Partition into train/validation/test/experiment");
    addCommonOptions(split, splitArgs);
    split->callback(
        [&] { exitCode = runCommand("split", splitArgs, nlohmann::json::object()); });

    CommonArgs injectArgs;
    CLI::App* inject =
        app.add_subcommand("inject", "Remove observed cells per a missingness plan");
    addCommonOptions(inject, injectArgs);
    inject->callback(
        [&] { exitCode = runCommand("inject", injectArgs, nlohmann::json::object()); });

    CommonArgs trainArgs;
    CLI::App* trainCmd = app.add_subcommand("train", "Fit and serialize a model");
    addCommonOptions(trainCmd, trainArgs);
    std::string trainModel;
    trainCmd->add_option("--model", trainModel,
                         "Model kind: rf-imputer, autoencoder, classifier, lr");
    trainCmd->callback([&] {
        nlohmann::json overrides = nlohmann::json::object();
        if (!trainModel.empty()) overrides["model"] = trainModel;
        exitCode = runCommand("train", trainArgs, overrides);
    });

    CommonArgs imputeArgs;
    CLI::App* impute = app.add_subcommand("impute", "Complete a dataset's missing cells");
    addCommonOptions(impute, imputeArgs);
    std::string strategy;
    std::string label;
    impute->add_option("--strategy", strategy,
                       "rf, aann-ga, rf-aann-ga, aann-ga-rf, random, mean");
    impute->add_option("--label", label, "Set label, e.g. RF2A (pins strategy and pattern)");
    impute->callback([&] {
        nlohmann::json overrides = nlohmann::json::object();
        if (!strategy.empty()) overrides["strategy"] = strategy;
        if (!label.empty()) overrides["label"] = label;
        exitCode = runCommand("impute", imputeArgs, overrides);
    });

    CommonArgs assessArgs;
    CLI::App* assess = app.add_subcommand("assess", "Compare completed sets against a target");
    addCommonOptions(assess, assessArgs);
    std::string kind;
    assess->add_option("--kind", kind, "stats, classify, lr, range-accuracy, qq");
    assess->callback([&] {
        nlohmann::json overrides = nlohmann::json::object();
        if (!kind.empty()) overrides["kind"] = kind;
        exitCode = runCommand("assess", assessArgs, overrides);
    });

    CLI::App* replay = app.add_subcommand("replay", "Re-execute a manifest and verify digests");
    std::string replayManifestPath;
    std::string staging;
    int replayThreads = 1;
    replay->add_option("--manifest", replayManifestPath, "Manifest to replay")->required();
    replay->add_option("--staging", staging, "Directory for the replayed outputs")->required();
    replay->add_option("--threads", replayThreads,
                       "Worker threads; outputs are identical for any value");
    replay->callback([&] { exitCode = runReplay(replayManifestPath, staging, replayThreads); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    return exitCode;
}
