#include "mdimpute.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>
#include <string>

#include "Dataset.h"
#include "Exceptions.h"
#include "Parallel.h"
#include "Pipeline.h"
#include "Rng.h"
#include "SyntheticGenerator.h"
#include "json.hpp"

namespace {

thread_local std::string gLastError;

char* copyString(const std::string& text) {
    char* out = static_cast<char*>(std::malloc(text.size() + 1));
    if (out) std::memcpy(out, text.c_str(), text.size() + 1);
    return out;
}

mdi_status failWith(const std::exception& e, mdi_status code) {
    gLastError = e.what();
    return code;
}

// Maps the library's exception taxonomy onto status codes.
template <class Fn>
mdi_status guard(Fn&& fn) {
    try {
        fn();
        return MDI_OK;
    } catch (const mdi::ConfigError& e) {
        return failWith(e, MDI_ERR_CONFIG);
    } catch (const mdi::IoError& e) {
        return failWith(e, MDI_ERR_IO);
    } catch (const mdi::DataError& e) {
        return failWith(e, MDI_ERR_DATA);
    } catch (const mdi::NumericError& e) {
        return failWith(e, MDI_ERR_DATA);
    } catch (const std::exception& e) {
        return failWith(e, MDI_ERR_INTERNAL);
    } catch (...) {
        gLastError = "unknown error";
        return MDI_ERR_INTERNAL;
    }
}

mdi_status invalidArgument(const char* message) {
    gLastError = message;
    return MDI_ERR_INVALID_ARGUMENT;
}

nlohmann::json parseJsonArgument(const char* text, const char* what) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw mdi::ConfigError(std::string(what) + ": " + e.what());
    }
}

}  // namespace

struct mdi_dataset {
    mdi::Dataset data;
};

extern "C" {

const char* mdi_version(void) { return "1.0.0"; }

const char* mdi_last_error(void) { return gLastError.c_str(); }

mdi_status mdi_set_threads(int threads) {
    if (threads < 1) return invalidArgument("threads must be at least 1");
    mdi::setThreadCount(threads);
    return MDI_OK;
}

int mdi_threads(void) { return mdi::threadCount(); }

uint64_t mdi_derive_seed(uint64_t seed, const char* step, uint64_t index) {
    return mdi::deriveSeed(seed, step ? step : "", index);
}

void mdi_string_free(char* text) { std::free(text); }

mdi_status mdi_dataset_read_csv(const char* path, mdi_dataset** out) {
    if (!path || !out) return invalidArgument("mdi_dataset_read_csv: null argument");
    *out = nullptr;
    return guard([&] {
        auto handle = std::make_unique<mdi_dataset>();
        handle->data = mdi::readCsv(path, mdi::Schema::survey());
        *out = handle.release();
    });
}

mdi_status mdi_dataset_generate(int64_t rows, uint64_t seed, mdi_dataset** out) {
    if (!out) return invalidArgument("mdi_dataset_generate: null argument");
    if (rows < 1) return invalidArgument("mdi_dataset_generate: rows must be at least 1");
    *out = nullptr;
    return guard([&] {
        auto handle = std::make_unique<mdi_dataset>();
        handle->data =
            mdi::generateSynthetic(static_cast<int>(rows), seed, mdi::GeneratorParams{}).data;
        *out = handle.release();
    });
}

mdi_status mdi_dataset_clean(const mdi_dataset* data, mdi_dataset** out) {
    if (!data || !out) return invalidArgument("mdi_dataset_clean: null argument");
    *out = nullptr;
    return guard([&] {
        auto handle = std::make_unique<mdi_dataset>();
        handle->data = mdi::cleanDataset(data->data);
        *out = handle.release();
    });
}

mdi_status mdi_dataset_write_csv(const mdi_dataset* data, const char* path) {
    if (!data || !path) return invalidArgument("mdi_dataset_write_csv: null argument");
    return guard([&] { mdi::writeCsv(data->data, path); });
}

int64_t mdi_dataset_rows(const mdi_dataset* data) { return data ? data->data.rowCount() : -1; }

int mdi_dataset_variables(const mdi_dataset* data) {
    return data ? data->data.variableCount() : -1;
}

int64_t mdi_dataset_missing_cells(const mdi_dataset* data) {
    return data ? data->data.missingCellCount() : -1;
}

void mdi_dataset_free(mdi_dataset* data) { delete data; }

mdi_status mdi_run_step(const char* command, const char* params_json, char** record_json) {
    if (!command || !params_json) return invalidArgument("mdi_run_step: null argument");
    if (record_json) *record_json = nullptr;
    return guard([&] {
        nlohmann::json params = parseJsonArgument(params_json, "step parameters");
        mdi::StepRecord record = mdi::runStep(command, params);
        if (record_json) *record_json = copyString(record.toJson().dump(2));
    });
}

mdi_status mdi_manifest_append(const char* manifest_path, const char* record_json) {
    if (!manifest_path || !record_json)
        return invalidArgument("mdi_manifest_append: null argument");
    return guard([&] {
        nlohmann::json doc = parseJsonArgument(record_json, "step record");
        mdi::appendToManifest(manifest_path, mdi::StepRecord::fromJson(doc));
    });
}

mdi_status mdi_replay(const char* manifest_path, const char* staging_dir, char** report_json) {
    if (!manifest_path || !staging_dir) return invalidArgument("mdi_replay: null argument");
    if (report_json) *report_json = nullptr;
    mdi_status failure = MDI_OK;
    mdi_status status = guard([&] {
        mdi::ReplayReport report = mdi::replayManifest(manifest_path, staging_dir);
        nlohmann::json mismatches = nlohmann::json::array();
        for (const mdi::ReplayMismatch& m : report.mismatches)
            mismatches.push_back({{"step", m.step},
                                  {"path", m.path},
                                  {"expected", m.expected},
                                  {"actual", m.actual}});
        nlohmann::json doc{{"steps_replayed", report.stepsReplayed},
                           {"ok", report.ok},
                           {"mismatches", mismatches}};
        if (report_json) *report_json = copyString(doc.dump(2));
        if (!report.ok) {
            gLastError = "replay outputs differ from the manifest on " +
                         std::to_string(report.mismatches.size()) + " file(s)";
            failure = MDI_ERR_DATA;
        }
    });
    return status == MDI_OK ? failure : status;
}

}  // extern "C"
