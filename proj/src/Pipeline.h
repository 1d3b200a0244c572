#ifndef MDIMPUTE_PIPELINE_H
#define MDIMPUTE_PIPELINE_H

#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"

namespace mdi {

// Hex-encoded SHA-256 digests; the manifest's notion of file identity.
std::string bytesSha256(const void* data, size_t length);
std::string fileSha256(const std::string& path);

struct FileDigest {
    std::string path;
    std::string sha256;
};

// One executed command: its fully resolved parameters (defaults
// materialized), a hash of those parameters, and the digest of every file it
// read or wrote. An ordered list of records is an experiment manifest.
struct StepRecord {
    std::string command;
    nlohmann::json params;
    std::string paramsSha256;
    std::vector<FileDigest> inputs;
    std::vector<FileDigest> outputs;

    nlohmann::json toJson() const;
    static StepRecord fromJson(const nlohmann::json& doc);
};

// Executes one pipeline command and returns its record. Commands:
//   generate  n, seed, out [, sidecar, params, schema]
//   clean     in, out [, sidecar, schema]
//   split     in, seed, out_train, out_validation, out_test, out_experiment
//             [, sidecar, fractions, schema]
//   inject    in, plan, seed, out [, sidecar, schema]
//   train     model (rf-imputer | autoencoder | classifier | lr), in, out,
//             seed [, model-specific options, schema]
//   impute    strategy, in, out, seed [, label, pattern, model paths,
//             strategy-specific options, sidecar, schema]
//   assess    kind (stats | classify | lr | range-accuracy | qq) plus
//             kind-specific inputs and outputs [, schema]
// Seeds recorded in params are the exact values used; thread counts are
// never recorded, so replays are thread-count independent.
StepRecord runStep(const std::string& command, const nlohmann::json& params);

// Appends a record to the manifest at `path`, creating the file when absent.
void appendToManifest(const std::string& path, const StepRecord& record);

nlohmann::json readManifest(const std::string& path);

struct ReplayMismatch {
    int step = 0;  // zero-based index into the manifest
    std::string path;
    std::string expected;
    std::string actual;
};

struct ReplayReport {
    int stepsReplayed = 0;
    bool ok = true;
    std::vector<ReplayMismatch> mismatches;
};

// Re-executes every step of the manifest inside `stagingDir` (outputs are
// rewritten to staged paths so the original files stay untouched) and
// compares the digests of the replayed outputs with the recorded ones. A
// params hash that does not match its parameters raises ConfigError; a
// changed external input raises DataError; output digest differences land in
// the report with ok=false.
ReplayReport replayManifest(const std::string& manifestPath, const std::string& stagingDir);

}  // namespace mdi

#endif
