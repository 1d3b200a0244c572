// Pipeline step execution, manifest bookkeeping, and byte-exact replay.

#include <fstream>
#include <string>
#include <vector>

#include "../src/Assessment.h"
#include "../src/Dataset.h"
#include "../src/Exceptions.h"
#include "../src/Imputation.h"
#include "../src/Parallel.h"
#include "../src/Pipeline.h"
#include "TestHelpers.h"
#include "doctest.h"

using namespace mdi;

namespace {

nlohmann::json readJsonFile(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    return nlohmann::json::parse(in);
}

nlohmann::json tinyForest() {
    return nlohmann::json{{"tree_count", 5}, {"min_node_size", 5}, {"features_per_split", 3}};
}

// generate -> inject -> train -> impute fixture shared by several tests.
struct ImputeFixture {
    testutil::TempDir dir;
    std::string truthCsv;
    std::string injectedCsv;
    std::string imputerPath;

    ImputeFixture() {
        truthCsv = dir.path("truth.csv");
        runStep("generate", {{"n", 120}, {"seed", 3}, {"out", truthCsv}});
        injectedCsv = dir.path("injected.csv");
        runStep("inject",
                {{"in", truthCsv},
                 {"plan", {{"mechanism", "mcar"}, {"variables", {"Age"}}, {"rate", 0.2}}},
                 {"seed", 4},
                 {"out", injectedCsv}});
        imputerPath = dir.path("imputer.json");
        runStep("train", {{"model", "rf-imputer"},
                          {"in", truthCsv},
                          {"out", imputerPath},
                          {"seed", 5},
                          {"forest", tinyForest()}});
    }
};

}  // namespace

TEST_CASE("SHA-256 helpers match the reference vectors") {
    CHECK(bytesSha256("abc", 3) ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(bytesSha256("", 0) ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");

    testutil::TempDir dir;
    std::string path = dir.path("blob.bin");
    std::ofstream(path) << "abc";
    CHECK(fileSha256(path) == bytesSha256("abc", 3));
    CHECK_THROWS_WITH_AS(fileSha256(dir.path("absent.bin")),
                         doctest::Contains("for hashing"), IoError);
}

TEST_CASE("the generate step materializes defaults and records its outputs") {
    testutil::TempDir dir;
    std::string csv = dir.path("data.csv");
    std::string sidecar = dir.path("data.json");
    StepRecord record =
        runStep("generate", {{"n", 100}, {"seed", 11}, {"out", csv}, {"sidecar", sidecar}});

    CHECK(record.command == "generate");
    CHECK(record.params["n"] == 100);
    CHECK(record.params["seed"] == 11);
    CHECK(record.params["out"] == csv);
    // Every generator knob is pinned in the record, not left implicit.
    CHECK(record.params["params"]["age_mean"] == doctest::Approx(25.0));
    CHECK(record.params["params"]["hiv_intercept"] == doctest::Approx(-1.8));
    CHECK(record.paramsSha256 == bytesSha256(record.params.dump().data(),
                                             record.params.dump().size()));
    CHECK(record.inputs.empty());
    REQUIRE(record.outputs.size() == 2);
    for (const FileDigest& digest : record.outputs)
        CHECK(digest.sha256 == fileSha256(digest.path));

    Dataset data = readCsv(csv, Schema::survey());
    CHECK(data.rowCount() == 100);
    CHECK(data.isComplete());

    nlohmann::json meta = readJsonFile(sidecar);
    CHECK(meta["rows"] == 100);
    CHECK(meta["seed"] == 11);
    CHECK(meta["implied_prevalence"].is_number());
    CHECK(meta["hiv_model"]["features"].size() == 7);
    CHECK(meta["hiv_model"]["coefficients"].size() == 7);
    CHECK(meta["params"]["age_mean"] == doctest::Approx(25.0));

    // Same parameters, same bytes.
    std::string csv2 = dir.path("data2.csv");
    StepRecord again =
        runStep("generate", {{"n", 100}, {"seed", 11}, {"out", csv2}, {"sidecar", sidecar}});
    CHECK(fileSha256(csv2) == fileSha256(csv));

    CHECK_THROWS_WITH_AS(runStep("generate", {{"n", 10}, {"seed", 1}}),
                         "generate: missing required parameter 'out'", ConfigError);
    CHECK_THROWS_WITH_AS(
        runStep("generate", {{"n", 10}, {"seed", 1}, {"out", csv}, {"frobnicate", true}}),
        "generate: unknown parameter 'frobnicate'", ConfigError);
    CHECK_THROWS_AS(runStep("transmogrify", nlohmann::json::object()), ConfigError);

    // In-place steps cannot be replayed from digests and are rejected.
    CHECK_THROWS_WITH_AS(runStep("clean", {{"in", csv}, {"out", csv}}),
                         doctest::Contains("output path is also an input"), ConfigError);
    CHECK_THROWS_WITH_AS(
        runStep("clean", {{"in", csv}, {"out", csv2}, {"sidecar", csv2}}),
        doctest::Contains("output path written twice"), ConfigError);
}

TEST_CASE("the clean step flags rule violations and reports counts") {
    testutil::TempDir dir;
    std::string dirty = dir.path("dirty.csv");
    std::ofstream(dirty) << "Province,Age,Edu,Gra,Par,FathAge,HIV,RPR,Race\n"
                         << "3,25,-1,2,1,30,0,0,2\n"
                         << "3,25,8,1,4,30,0,0,2\n"
                         << "3,25,8,2,1,30,0,0,2\n";
    std::string out = dir.path("clean.csv");
    std::string sidecar = dir.path("clean.json");
    StepRecord record = runStep("clean", {{"in", dirty}, {"out", out}, {"sidecar", sidecar}});

    REQUIRE(record.inputs.size() == 1);
    CHECK(record.inputs[0].path == dirty);

    nlohmann::json meta = readJsonFile(sidecar);
    CHECK(meta["rows"] == 3);
    CHECK(meta["cells_flagged"] == 3);  // education cell plus the gravidity pair
    CHECK(meta["rows_affected"] == 2);

    Dataset cleaned = readCsv(out, Schema::survey());
    CHECK(cleaned.missing(0, 2));
    CHECK(cleaned.missing(1, 3));
    CHECK(cleaned.missing(1, 4));
    CHECK(cleaned.missingCellCount() == 3);
}

TEST_CASE("the split step writes four partitions with recorded sizes") {
    testutil::TempDir dir;
    std::string csv = dir.path("whole.csv");
    runStep("generate", {{"n", 103}, {"seed", 2}, {"out", csv}});

    nlohmann::json params{{"in", csv},           {"seed", 9},
                          {"out_train", dir.path("train.csv")},
                          {"out_validation", dir.path("validation.csv")},
                          {"out_test", dir.path("test.csv")},
                          {"out_experiment", dir.path("experiment.csv")},
                          {"sidecar", dir.path("split.json")}};
    StepRecord record = runStep("split", params);
    CHECK(record.params["fractions"]["train"] == doctest::Approx(0.25));

    nlohmann::json meta = readJsonFile(dir.path("split.json"));
    CHECK(meta["rows"]["train"] == 26);
    CHECK(meta["rows"]["validation"] == 26);
    CHECK(meta["rows"]["test"] == 26);
    CHECK(meta["rows"]["experiment"] == 25);

    CHECK(readCsv(dir.path("train.csv"), Schema::survey()).rowCount() == 26);
    CHECK(readCsv(dir.path("experiment.csv"), Schema::survey()).rowCount() == 25);
}

TEST_CASE("the inject step records how many cells it removed") {
    testutil::TempDir dir;
    std::string csv = dir.path("full.csv");
    runStep("generate", {{"n", 200}, {"seed", 21}, {"out", csv}});

    std::string out = dir.path("holey.csv");
    std::string sidecar = dir.path("holey.json");
    StepRecord record = runStep(
        "inject", {{"in", csv},
                   {"plan", {{"mechanism", "mcar"}, {"variables", {"Age", "Edu"}}, {"rate", 0.15}}},
                   {"seed", 22},
                   {"out", out},
                   {"sidecar", sidecar}});
    CHECK(record.params["plan"]["mechanism"] == "mcar");

    nlohmann::json meta = readJsonFile(sidecar);
    Dataset holey = readCsv(out, Schema::survey());
    CHECK(meta["seed"] == 22);
    CHECK(meta["removed_cells"].get<int64_t>() == holey.missingCellCount());
    CHECK(meta["missing_cells_total"].get<int64_t>() == holey.missingCellCount());
    CHECK(holey.missingCellCount() > 0);
}

TEST_CASE("model training steps persist reusable model documents") {
    testutil::TempDir dir;
    std::string csv = dir.path("train.csv");
    runStep("generate", {{"n", 150}, {"seed", 31}, {"out", csv}});

    SUBCASE("forest imputer with materialized defaults") {
        std::string out = dir.path("imputer.json");
        StepRecord record = runStep("train", {{"model", "rf-imputer"},
                                              {"in", csv},
                                              {"out", out},
                                              {"seed", 32},
                                              {"forest", tinyForest()}});
        CHECK(record.params["rounds"] == 2);
        CHECK(record.params["exclude_hiv"] == false);
        CHECK(record.params["forest"]["bootstrap"] == true);

        RfImputer imputer = RfImputer::fromJson(readJsonFile(out));
        CHECK(imputer.params().treeCount == 5);

        // Retraining with identical parameters reproduces the same bytes.
        std::string out2 = dir.path("imputer2.json");
        runStep("train", {{"model", "rf-imputer"},
                          {"in", csv},
                          {"out", out2},
                          {"seed", 32},
                          {"forest", tinyForest()}});
        CHECK(fileSha256(out2) == fileSha256(out));
    }

    SUBCASE("autoencoder with its training trace") {
        std::string validationCsv = dir.path("validation.csv");
        runStep("generate", {{"n", 50}, {"seed", 33}, {"out", validationCsv}});
        std::string out = dir.path("network.json");
        StepRecord record = runStep("train", {{"model", "autoencoder"},
                                              {"in", csv},
                                              {"validation", validationCsv},
                                              {"out", out},
                                              {"seed", 34},
                                              {"train_config", {{"max_cycles", 15}}}});
        CHECK(record.params["hidden"] == 11);
        CHECK(record.params["activations"] == nlohmann::json::array({"tanh", "linear"}));
        CHECK(record.params["train_config"]["beta1"] == doctest::Approx(0.9));
        CHECK(record.params["trace"] == out + ".trace.json");

        Autoencoder network = Autoencoder::fromJson(readJsonFile(out));
        CHECK(network.inputSize() == 14);
        CHECK(network.hiddenSize() == 11);

        nlohmann::json trace = readJsonFile(out + ".trace.json");
        CHECK(trace["train_loss"].is_array());
        CHECK(trace["validation_loss"].size() == trace["train_loss"].size());
        int selected = trace["selected_cycle"].get<int>();
        CHECK(selected >= 0);
        CHECK(static_cast<size_t>(selected) < trace["train_loss"].size());
    }

    SUBCASE("downstream classifiers") {
        std::string forestModel = dir.path("classifier.json");
        StepRecord record = runStep("train", {{"model", "classifier"},
                                              {"in", csv},
                                              {"out", forestModel},
                                              {"seed", 35},
                                              {"forest", tinyForest()}});
        CHECK(record.params["target"] == "HIV");
        BinaryClassifier classifier = BinaryClassifier::fromJson(readJsonFile(forestModel));
        CHECK(classifier.target == "HIV");

        std::string lrModel = dir.path("lr.json");
        runStep("train", {{"model", "lr"}, {"in", csv}, {"out", lrModel}});
        LrClassifier lr = LrClassifier::fromJson(readJsonFile(lrModel));
        CHECK(lr.model.coefficients.size() == 14);

        CHECK_THROWS_AS(runStep("train", {{"model", "perceptron"},
                                          {"in", csv},
                                          {"out", dir.path("x.json")}}),
                        ConfigError);
    }
}

TEST_CASE("the impute step enforces label and pattern consistency") {
    ImputeFixture fx;
    std::string out = fx.dir.path("completed.csv");

    StepRecord record = runStep("impute", {{"strategy", "rf"},
                                           {"label", "RF1A"},
                                           {"in", fx.injectedCsv},
                                           {"imputer", fx.imputerPath},
                                           {"out", out}});
    CHECK(record.params["sidecar"] == out + ".json");

    ImputedSet set = readImputedSet(out, out + ".json", Schema::survey());
    CHECK(set.label == "RF1A");
    CHECK(set.strategy == ImputeStrategy::Rf);
    CHECK(set.pattern == std::vector<std::string>{"Age"});
    CHECK(set.data.isComplete());

    // An RF-prefixed label pins the strategy; R-prefixed means random.
    CHECK_THROWS_WITH_AS(runStep("impute", {{"strategy", "mean"},
                                            {"label", "RF1A"},
                                            {"in", fx.injectedCsv},
                                            {"train", fx.truthCsv},
                                            {"out", out}}),
                         "impute: label 'RF1A' implies strategy 'rf'", ConfigError);

    // The label's variable set must cover the realized missingness.
    CHECK_THROWS_WITH_AS(
        runStep("impute", {{"strategy", "rf"},
                           {"label", "RF1B"},
                           {"in", fx.injectedCsv},
                           {"imputer", fx.imputerPath},
                           {"out", out}}),
        "impute: variable 'Age' has missing cells but is not part of the declared pattern",
        DataError);

    CHECK_THROWS_WITH_AS(runStep("impute", {{"strategy", "rf"},
                                            {"pattern", {"Weight"}},
                                            {"in", fx.injectedCsv},
                                            {"imputer", fx.imputerPath},
                                            {"out", out}}),
                         "impute: pattern references unknown variable: Weight", ConfigError);
}

TEST_CASE("baseline impute strategies run from a train partition") {
    ImputeFixture fx;

    std::string randomOut = fx.dir.path("random.csv");
    runStep("impute", {{"strategy", "random"},
                       {"label", "R1A"},
                       {"in", fx.injectedCsv},
                       {"train", fx.truthCsv},
                       {"seed", 6},
                       {"out", randomOut}});
    ImputedSet randomSet = readImputedSet(randomOut, randomOut + ".json", Schema::survey());
    CHECK(randomSet.strategy == ImputeStrategy::Random);
    CHECK(randomSet.data.isComplete());

    std::string meanOut = fx.dir.path("mean.csv");
    runStep("impute", {{"strategy", "mean"},
                       {"in", fx.injectedCsv},
                       {"train", fx.truthCsv},
                       {"out", meanOut}});
    ImputedSet meanSet = readImputedSet(meanOut, meanOut + ".json", Schema::survey());
    CHECK(meanSet.strategy == ImputeStrategy::Mean);
    CHECK(meanSet.data.isComplete());
}

TEST_CASE("the stats assessment step reads sets by path convention") {
    ImputeFixture fx;
    std::string out = fx.dir.path("completed.csv");
    runStep("impute", {{"strategy", "rf"},
                       {"label", "RF1A"},
                       {"in", fx.injectedCsv},
                       {"imputer", fx.imputerPath},
                       {"out", out}});

    std::string outJson = fx.dir.path("stats.json");
    StepRecord record = runStep("assess", {{"kind", "stats"},
                                           {"target", fx.truthCsv},
                                           {"sets", {out}},
                                           {"out_json", outJson}});
    CHECK(record.params["out_text"] == outJson + ".txt");
    // The set's sidecar participates in the digests.
    bool sidecarSeen = false;
    for (const FileDigest& input : record.inputs)
        sidecarSeen = sidecarSeen || input.path == out + ".json";
    CHECK(sidecarSeen);

    nlohmann::json doc = readJsonFile(outJson);
    CHECK(doc["kind"] == "stats");
    REQUIRE(doc["sets"].is_array());
    REQUIRE(doc["sets"].size() == 1);
    CHECK(doc["sets"][0]["label"] == "RF1A");
    CHECK(doc["sets"][0]["variables"][0]["variable"] == "Age");

    std::ifstream text(outJson + ".txt");
    REQUIRE(text.good());
    std::string rendered((std::istreambuf_iterator<char>(text)),
                         std::istreambuf_iterator<char>());
    CHECK(rendered.find("Variable: Age") != std::string::npos);
    CHECK(rendered.find("RF1A") != std::string::npos);
}

TEST_CASE("manifests accumulate records and round-trip through JSON") {
    testutil::TempDir dir;
    std::string manifest = dir.path("manifest.json");
    std::string csv = dir.path("a.csv");
    StepRecord record = runStep("generate", {{"n", 30}, {"seed", 1}, {"out", csv}});
    appendToManifest(manifest, record);

    nlohmann::json doc = readManifest(manifest);
    CHECK(doc["version"] == 1);
    REQUIRE(doc["steps"].size() == 1);

    StepRecord back = StepRecord::fromJson(doc["steps"][0]);
    CHECK(back.command == "generate");
    CHECK(back.paramsSha256 == record.paramsSha256);
    REQUIRE(back.outputs.size() == record.outputs.size());
    CHECK(back.outputs[0].sha256 == record.outputs[0].sha256);

    StepRecord more = runStep("generate", {{"n", 10}, {"seed", 2}, {"out", dir.path("b.csv")}});
    appendToManifest(manifest, more);
    CHECK(readManifest(manifest)["steps"].size() == 2);

    CHECK_THROWS_WITH_AS(StepRecord::fromJson(nlohmann::json{{"command", 7}}),
                         doctest::Contains("malformed manifest step"), ConfigError);

    std::string mangled = dir.path("mangled.json");
    std::ofstream(mangled) << "[]";
    CHECK_THROWS_AS(readManifest(mangled), ConfigError);
}

TEST_CASE("a recorded pipeline replays byte-identically at any thread count") {
    testutil::TempDir dir;
    std::string manifest = dir.path("manifest.json");

    std::string truthCsv = dir.path("truth.csv");
    appendToManifest(manifest,
                     runStep("generate", {{"n", 120}, {"seed", 51}, {"out", truthCsv}}));
    std::string injectedCsv = dir.path("injected.csv");
    appendToManifest(
        manifest,
        runStep("inject",
                {{"in", truthCsv},
                 {"plan", {{"mechanism", "mcar"}, {"variables", {"Age"}}, {"rate", 0.2}}},
                 {"seed", 52},
                 {"out", injectedCsv}}));
    std::string imputerPath = dir.path("imputer.json");
    appendToManifest(manifest, runStep("train", {{"model", "rf-imputer"},
                                                 {"in", truthCsv},
                                                 {"out", imputerPath},
                                                 {"seed", 53},
                                                 {"forest", tinyForest()}}));
    std::string completedCsv = dir.path("completed.csv");
    appendToManifest(manifest, runStep("impute", {{"strategy", "rf"},
                                                  {"label", "RF1A"},
                                                  {"in", injectedCsv},
                                                  {"imputer", imputerPath},
                                                  {"out", completedCsv}}));
    std::string statsJson = dir.path("stats.json");
    appendToManifest(manifest, runStep("assess", {{"kind", "stats"},
                                                  {"target", truthCsv},
                                                  {"sets", {completedCsv}},
                                                  {"out_json", statsJson}}));

    ReplayReport serial = replayManifest(manifest, dir.path("replay-serial"));
    CHECK(serial.stepsReplayed == 5);
    CHECK(serial.ok);
    CHECK(serial.mismatches.empty());

    setThreadCount(4);
    ReplayReport threaded = replayManifest(manifest, dir.path("replay-threaded"));
    setThreadCount(1);
    CHECK(threaded.ok);
    CHECK(threaded.stepsReplayed == 5);
}

TEST_CASE("replay detects tampered parameters, changed inputs, and drifted outputs") {
    testutil::TempDir dir;

    // Tampered parameters: the stored hash no longer matches.
    std::string manifest = dir.path("tampered.json");
    appendToManifest(manifest,
                     runStep("generate", {{"n", 20}, {"seed", 1}, {"out", dir.path("t.csv")}}));
    nlohmann::json doc = readManifest(manifest);
    doc["steps"][0]["params"]["n"] = 25;
    std::ofstream(manifest) << doc.dump(2);
    CHECK_THROWS_WITH_AS(replayManifest(manifest, dir.path("stage-a")),
                         doctest::Contains("parameter hash mismatch"), ConfigError);

    // An external input changed since the original run.
    std::string handwritten = dir.path("hand.csv");
    std::ofstream(handwritten) << "Province,Age,Edu,Gra,Par,FathAge,HIV,RPR,Race\n"
                               << "3,25,8,2,1,30,0,0,2\n";
    std::string manifest2 = dir.path("inputs.json");
    appendToManifest(manifest2, runStep("clean", {{"in", handwritten},
                                                  {"out", dir.path("hand-clean.csv")}}));
    std::ofstream(handwritten, std::ios::app) << "4,30,9,3,2,33,0,0,1\n";
    CHECK_THROWS_WITH_AS(replayManifest(manifest2, dir.path("stage-b")),
                         doctest::Contains("digest differs from the manifest"), DataError);

    // A forged output digest surfaces as a mismatch, not an exception.
    std::string manifest3 = dir.path("outputs.json");
    std::string csv = dir.path("o.csv");
    appendToManifest(manifest3, runStep("generate", {{"n", 20}, {"seed", 2}, {"out", csv}}));
    nlohmann::json doc3 = readManifest(manifest3);
    doc3["steps"][0]["outputs"][0]["sha256"] = std::string(64, '0');
    std::ofstream(manifest3) << doc3.dump(2);
    ReplayReport report = replayManifest(manifest3, dir.path("stage-c"));
    CHECK_FALSE(report.ok);
    REQUIRE_FALSE(report.mismatches.empty());
    CHECK(report.mismatches[0].step == 0);
    CHECK(report.mismatches[0].expected == std::string(64, '0'));
    CHECK(report.mismatches[0].actual != report.mismatches[0].expected);
}
