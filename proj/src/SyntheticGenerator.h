#ifndef MDIMPUTE_SYNTHETIC_GENERATOR_H
#define MDIMPUTE_SYNTHETIC_GENERATOR_H

#include <cstdint>
#include <string>
#include <vector>

#include "Dataset.h"
#include "json.hpp"

namespace mdi {

// Knobs of the planted-dependency survey generator. Every record it emits is
// valid under the survey schema rules.
struct GeneratorParams {
    double ageMean = 25.0;
    double ageSd = 6.5;

    // Education rises with age: edu = eduBase + eduAgeSlope*(age-12) + noise.
    double eduBase = 2.0;
    double eduAgeSlope = 0.25;
    double eduSd = 2.0;

    // Gravidity rises with age; parity = gravidity - drop, drop drawn from
    // parityDropProbs (index = drop size).
    double graBase = 1.0;
    double graAgeSlope = 0.16;
    double graSd = 1.0;
    std::vector<double> parityDropProbs = {0.60, 0.25, 0.15};

    // Father's age = mother's age + max(1, round(offset)), offset ~ normal.
    double fatherOffsetMean = 4.0;
    double fatherOffsetSd = 3.0;

    std::vector<double> provinceWeights = {0.20, 0.16, 0.14, 0.12, 0.10,
                                           0.08, 0.08, 0.07, 0.05};
    // With this probability race echoes the province ((province-1) mod 6),
    // otherwise uniform.
    double raceProvinceAffinity = 0.45;

    double rprBase = 0.08;
    double rprProvinceSlope = 0.015;

    // Logistic model for the HIV label over encoded age, education and the
    // four province bit columns.
    double hivIntercept = -1.8;
    double hivAgeWeight = 2.2;
    double hivEduWeight = -1.6;
    std::vector<double> hivProvinceWeights = {0.8, -0.6, 0.5, -0.4};
};

struct SyntheticOutput {
    Dataset data;
    // Order: intercept, Age, Edu, Province bits 0..3. Matches hivFeatures.
    std::vector<std::string> hivFeatures;
    std::vector<double> hivCoefficients;
    // Mean of the per-row label probabilities actually used.
    double impliedPrevalence = 0.0;
};

SyntheticOutput generateSynthetic(int n, uint64_t seed, const GeneratorParams& params);

nlohmann::json generatorParamsToJson(const GeneratorParams& params);
// Starts from defaults; present keys override. Unknown keys are rejected.
GeneratorParams generatorParamsFromJson(const nlohmann::json& config);

}  // namespace mdi

#endif
