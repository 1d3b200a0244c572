#ifndef MDIMPUTE_H
#define MDIMPUTE_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes returned by every fallible call. On failure a thread-local
 * message is available through mdi_last_error(). */
typedef enum mdi_status {
    MDI_OK = 0,
    MDI_ERR_DATA = 1,    /* bad or inconsistent data, digest mismatch */
    MDI_ERR_CONFIG = 2,  /* invalid parameters, schemas, or model files */
    MDI_ERR_IO = 3,      /* missing or unwritable files */
    MDI_ERR_INVALID_ARGUMENT = 4, /* null pointer or out-of-range argument */
    MDI_ERR_INTERNAL = 5
} mdi_status;

/* Library version, e.g. "1.0.0". Static storage; do not free. */
const char* mdi_version(void);

/* Message describing the calling thread's most recent failure. Static
 * storage; valid until the next failing call on this thread. */
const char* mdi_last_error(void);

/* Worker threads used by the parallel regions (forest growing, per-row
 * imputation). Results never depend on this value. */
mdi_status mdi_set_threads(int threads);
int mdi_threads(void);

/* Deterministic seed derivation: hashes (seed, step, index) so every module
 * seed follows from one master seed. */
uint64_t mdi_derive_seed(uint64_t seed, const char* step, uint64_t index);

/* Frees strings returned through char** output parameters. */
void mdi_string_free(char* text);

/* Opaque handle over an integer survey table with a missingness mask. All
 * dataset calls use the nine-variable antenatal survey schema. */
typedef struct mdi_dataset mdi_dataset;

/* Reads a CSV with an NA token per missing cell. */
mdi_status mdi_dataset_read_csv(const char* path, mdi_dataset** out);

/* Draws a synthetic survey population with the default generator settings. */
mdi_status mdi_dataset_generate(int64_t rows, uint64_t seed, mdi_dataset** out);

/* Re-flags every cell that violates a survey consistency rule as missing. */
mdi_status mdi_dataset_clean(const mdi_dataset* data, mdi_dataset** out);

mdi_status mdi_dataset_write_csv(const mdi_dataset* data, const char* path);

/* Shape queries return -1 on a null handle. */
int64_t mdi_dataset_rows(const mdi_dataset* data);
int mdi_dataset_variables(const mdi_dataset* data);
int64_t mdi_dataset_missing_cells(const mdi_dataset* data);

void mdi_dataset_free(mdi_dataset* data);

/* Runs one pipeline command (generate, clean, split, inject, train, impute,
 * assess) with a JSON parameter object. On success *record_json receives the
 * executed step record: resolved parameters, their hash, and the SHA-256
 * digest of every file read or written. Free it with mdi_string_free. */
mdi_status mdi_run_step(const char* command, const char* params_json, char** record_json);

/* Appends a step record (JSON, as produced by mdi_run_step) to the manifest
 * at manifest_path, creating the file when absent. */
mdi_status mdi_manifest_append(const char* manifest_path, const char* record_json);

/* Re-executes every step of a manifest inside staging_dir and verifies that
 * the replayed outputs are byte-identical to the recorded digests. The JSON
 * report lands in *report_json; digest differences fill the report and
 * return MDI_ERR_DATA. A tampered manifest returns MDI_ERR_CONFIG. */
mdi_status mdi_replay(const char* manifest_path, const char* staging_dir, char** report_json);

#ifdef __cplusplus
}
#endif

#endif
