#ifndef MDIMPUTE_IMPUTATION_H
#define MDIMPUTE_IMPUTATION_H

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "Autoencoder.h"
#include "Dataset.h"
#include "GeneticOptimizer.h"
#include "RandomForest.h"
#include "json.hpp"

namespace mdi {

enum class ImputeStrategy { Rf, AannGa, RfAannGa, AannGaRf, Random, Mean };

std::string strategyName(ImputeStrategy strategy);
ImputeStrategy strategyFromName(const std::string& name);

// A completed dataset together with how it was completed. `pattern` lists the
// variables that carried missing cells; `imputedCells` the exact (row, var)
// pairs that were filled.
struct ImputedSet {
    std::string label;
    ImputeStrategy strategy = ImputeStrategy::Rf;
    Dataset data;
    std::vector<std::string> pattern;
    std::vector<std::pair<int, int>> imputedCells;
    nlohmann::json provenance;
};

// Experiment battery labels. 1A=Age, 1B=Edu, 1C=Gra, 2A=Age+FathAge,
// 3A=Age+Edu+FathAge, 4A=Age+Edu+FathAge+Gra.
const std::vector<std::string>& batterySetLabels();
std::vector<std::string> setLabelVariables(const std::string& label);

// Encoded matrix of the complete rows only, as network training input.
// `partition` names the data in the no-complete-rows error message.
Matrix completeEncodedRows(const Dataset& data, const std::string& partition);

// One forest per schema variable, each trained with that variable as target
// and the remaining encoded columns as inputs. Ordinal variables use
// regression on the [0,1] encoded scale; categorical and binary variables use
// classification over whole categories so decoded codes stay valid. With
// `excludeHiv` the HIV column never appears among any forest's inputs.
class RfImputer {
public:
    RfImputer() = default;

    const Schema& schema() const { return schema_; }
    const ForestParams& params() const { return params_; }
    uint64_t seed() const { return seed_; }
    bool excludeHiv() const { return excludeHiv_; }
    int rounds() const { return rounds_; }
    void setRounds(int rounds);

    const RandomForest& forest(int variable) const;
    const std::vector<double>& columnMeans() const { return columnMeans_; }

    // Input encoded columns feeding the forest of `variable`, ascending.
    std::vector<int> inputColumns(int variable) const;

    // Predicts `variable` from a fully valued encoded row and writes the
    // prediction back into the row's columns for that variable. Regression
    // writes the forest mean; classification writes the winning category's
    // exact code bits.
    void predictInto(int variable, std::span<double> encodedRow) const;

    nlohmann::json toJson() const;
    static RfImputer fromJson(const nlohmann::json& doc);

    friend RfImputer fitRfImputer(const Dataset& train, const ForestParams& params, uint64_t seed,
                                  bool excludeHiv);

private:
    Schema schema_;
    ForestParams params_;
    uint64_t seed_ = 0;
    bool excludeHiv_ = false;
    int rounds_ = 2;
    std::vector<double> columnMeans_;
    std::vector<RandomForest> forests_;
};

RfImputer fitRfImputer(const Dataset& train, const ForestParams& params, uint64_t seed,
                       bool excludeHiv = false);

// Mean-initializes every missing encoded cell, then runs the imputer's
// re-prediction rounds in schema order. Missing flags are cleared on return.
EncodedMatrix rfCompleteEncoded(const RfImputer& imputer, const Dataset& incomplete);

ImputedSet imputeRf(const RfImputer& imputer, const Dataset& incomplete,
                    const std::string& label = "");

// Completes one encoded record by searching its unknown coordinates with the
// GA, minimizing the network's reconstruction error. The column-mean
// candidate is injected into generation 0. `boxOverride`, when given, bounds
// the unknown coordinates (mask order); the default box is [0,1] per gene.
std::vector<double> imputeAannGaRecord(const Autoencoder& network, const GaConfig& config,
                                       std::span<const double> known,
                                       std::span<const uint8_t> missingMask,
                                       std::span<const double> columnMeans,
                                       const SearchBox* boxOverride = nullptr);

ImputedSet imputeAannGa(const Autoencoder& network, const GaConfig& config,
                        const Dataset& incomplete, uint64_t seed, const std::string& label = "",
                        EncodedMatrix* completedEncoded = nullptr);

// RF prediction first, then the GA search confined to [p-0.05, p+0.05]
// (clamped to [0,1]) around each predicted gene.
ImputedSet imputeRfAannGa(const RfImputer& imputer, const Autoencoder& network,
                          const GaConfig& config, const Dataset& incomplete, uint64_t seed,
                          const std::string& label = "",
                          EncodedMatrix* completedEncoded = nullptr);

struct AannGaRfResult {
    ImputedSet corrected;    // experiment set after forest correction
    ImputedSet uncorrected;  // experiment set straight from the AANN-GA
    ImputedSet testCompleted;
    TrainTrace networkTrace;
    nlohmann::json summary;
};

// Trains the network on train/validation, injects the plan's missingness into
// the test and experiment sets, completes both with the AANN-GA, then trains
// one correction forest per plan variable on the completed test set (inputs:
// completed encoded record plus per-variable missing flags; target: the true
// pre-injection value) and applies it to the experiment completions.
AannGaRfResult imputeAannGaRf(Autoencoder network, const TrainConfig& trainConfig,
                              const GaConfig& gaConfig, const ForestParams& forestParams,
                              const FourWaySplit& sets, const MissingnessPlan& plan,
                              uint64_t seed);

// Baselines. Random draws uniformly inside the variable's valid range,
// conditioned so the gravidity/parity and father's-age rules hold; mean fills
// with the decoded training-column mean.
ImputedSet imputeRandom(const Dataset& train, const Dataset& incomplete, uint64_t seed,
                        const std::string& label = "");
ImputedSet imputeMean(const Dataset& train, const Dataset& incomplete,
                      const std::string& label = "");

struct RangeAccuracyEntry {
    std::string variable;
    std::vector<int> ranges;
    std::vector<double> fractions;  // fraction of imputed cells within each range
    int cellCount = 0;
};

struct RangeAccuracyReport {
    std::vector<RangeAccuracyEntry> entries;
};

// Default tolerance ladder per variable: ages 1,2,4,6,10; education and
// gravidity/parity 0,1,2,3,5; categorical and binary exact match only.
std::vector<int> defaultAccuracyRanges(const VariableSpec& spec);

RangeAccuracyReport rangeAccuracy(const ImputedSet& imputed, const Dataset& truth,
                                  const std::map<std::string, std::vector<int>>& ranges = {});

// CSV of the completed data plus a JSON sidecar carrying label, strategy,
// pattern, imputed cells, and provenance.
void writeImputedSet(const ImputedSet& set, const std::string& csvPath,
                     const std::string& sidecarPath);
ImputedSet readImputedSet(const std::string& csvPath, const std::string& sidecarPath,
                          const Schema& schema);

}  // namespace mdi

#endif
