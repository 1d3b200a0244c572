#include "SyntheticGenerator.h"

#include <algorithm>
#include <cmath>

#include "Exceptions.h"
#include "Rng.h"

namespace mdi {

namespace {

void checkWeights(const std::vector<double>& weights, size_t expected, const char* what) {
    if (weights.size() != expected)
        throw ConfigError(std::string(what) + ": expected " + std::to_string(expected) +
                          " entries, got " + std::to_string(weights.size()));
    double sum = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw ConfigError(std::string(what) + ": negative weight");
        sum += w;
    }
    if (sum <= 0.0) throw ConfigError(std::string(what) + ": weights sum to zero");
}

void checkParams(const GeneratorParams& p) {
    if (p.ageSd <= 0.0 || p.eduSd <= 0.0 || p.graSd <= 0.0 || p.fatherOffsetSd <= 0.0)
        throw ConfigError("generator standard deviations must be positive");
    checkWeights(p.provinceWeights, 9, "province weights");
    checkWeights(p.parityDropProbs, p.parityDropProbs.size(), "parity drop probabilities");
    if (p.parityDropProbs.empty()) throw ConfigError("parity drop probabilities must be nonempty");
    if (p.raceProvinceAffinity < 0.0 || p.raceProvinceAffinity > 1.0)
        throw ConfigError("race-province affinity must lie in [0,1]");
    for (int province = 1; province <= 9; ++province) {
        double rate = p.rprBase + p.rprProvinceSlope * static_cast<double>(province - 1);
        if (rate < 0.0 || rate > 1.0) throw ConfigError("RPR rate leaves [0,1] for some province");
    }
    if (p.hivProvinceWeights.size() != 4)
        throw ConfigError("HIV province weights: expected 4 entries");
}

int drawCategory(Rng& rng, const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = rng.uniform() * total;
    double cumulative = 0.0;
    for (size_t i = 0; i < weights.size(); ++i) {
        cumulative += weights[i];
        if (u < cumulative) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

SyntheticOutput generateSynthetic(int n, uint64_t seed, const GeneratorParams& params) {
    if (n < 1) throw ConfigError("generator needs n >= 1");
    checkParams(params);

    Schema schema = Schema::survey();
    const int province = schema.require("Province");
    const int age = schema.require("Age");
    const int edu = schema.require("Edu");
    const int gra = schema.require("Gra");
    const int par = schema.require("Par");
    const int fathAge = schema.require("FathAge");
    const int hiv = schema.require("HIV");
    const int rpr = schema.require("RPR");
    const int race = schema.require("Race");

    SyntheticOutput out;
    out.data = Dataset(schema, n);
    out.hivFeatures = {"intercept",   "Age",         "Edu",         "Province:b0",
                       "Province:b1", "Province:b2", "Province:b3"};
    out.hivCoefficients = {params.hivIntercept,          params.hivAgeWeight,
                           params.hivEduWeight,          params.hivProvinceWeights[0],
                           params.hivProvinceWeights[1], params.hivProvinceWeights[2],
                           params.hivProvinceWeights[3]};

    Rng rng(seed);
    std::vector<double> encodedRow(static_cast<size_t>(schema.encodedWidth()), 0.0);
    double probabilitySum = 0.0;
    for (int r = 0; r < n; ++r) {
        int provinceValue = 1 + drawCategory(rng, params.provinceWeights);

        int ageValue = std::clamp(
            static_cast<int>(std::lround(params.ageMean + params.ageSd * rng.normal())), 12, 50);

        int eduValue = std::clamp(
            static_cast<int>(std::lround(params.eduBase +
                                         params.eduAgeSlope * static_cast<double>(ageValue - 12) +
                                         params.eduSd * rng.normal())),
            0, 13);

        int graValue = std::clamp(
            static_cast<int>(std::lround(params.graBase +
                                         params.graAgeSlope * static_cast<double>(ageValue - 12) +
                                         params.graSd * rng.normal())),
            1, 12);

        int drop = drawCategory(rng, params.parityDropProbs);
        int parValue = std::clamp(graValue - drop, 0, 9);

        int offset = std::max(
            1, static_cast<int>(std::lround(params.fatherOffsetMean +
                                            params.fatherOffsetSd * rng.normal())));
        int fathValue = std::clamp(ageValue + offset, 13, 90);

        int raceValue = rng.uniform() < params.raceProvinceAffinity ? (provinceValue - 1) % 6
                                                                    : rng.uniformInt(0, 5);

        double rprRate =
            params.rprBase + params.rprProvinceSlope * static_cast<double>(provinceValue - 1);
        int rprValue = rng.uniform() < rprRate ? 1 : 0;

        encodeValue(schema, province, provinceValue, encodedRow);
        encodeValue(schema, age, ageValue, encodedRow);
        encodeValue(schema, edu, eduValue, encodedRow);
        double logit = params.hivIntercept +
                       params.hivAgeWeight * encodedRow[static_cast<size_t>(schema.encodedOffset(age))] +
                       params.hivEduWeight * encodedRow[static_cast<size_t>(schema.encodedOffset(edu))];
        int provinceOffset = schema.encodedOffset(province);
        for (int j = 0; j < 4; ++j)
            logit += params.hivProvinceWeights[static_cast<size_t>(j)] *
                     encodedRow[static_cast<size_t>(provinceOffset + j)];
        double probability = sigmoid(logit);
        probabilitySum += probability;
        int hivValue = rng.uniform() < probability ? 1 : 0;

        out.data.set(r, province, provinceValue);
        out.data.set(r, age, ageValue);
        out.data.set(r, edu, eduValue);
        out.data.set(r, gra, graValue);
        out.data.set(r, par, parValue);
        out.data.set(r, fathAge, fathValue);
        out.data.set(r, hiv, hivValue);
        out.data.set(r, rpr, rprValue);
        out.data.set(r, race, raceValue);
    }
    out.impliedPrevalence = probabilitySum / static_cast<double>(n);
    return out;
}

nlohmann::json generatorParamsToJson(const GeneratorParams& p) {
    return nlohmann::json{{"age_mean", p.ageMean},
                          {"age_sd", p.ageSd},
                          {"edu_base", p.eduBase},
                          {"edu_age_slope", p.eduAgeSlope},
                          {"edu_sd", p.eduSd},
                          {"gra_base", p.graBase},
                          {"gra_age_slope", p.graAgeSlope},
                          {"gra_sd", p.graSd},
                          {"parity_drop_probs", p.parityDropProbs},
                          {"father_offset_mean", p.fatherOffsetMean},
                          {"father_offset_sd", p.fatherOffsetSd},
                          {"province_weights", p.provinceWeights},
                          {"race_province_affinity", p.raceProvinceAffinity},
                          {"rpr_base", p.rprBase},
                          {"rpr_province_slope", p.rprProvinceSlope},
                          {"hiv_intercept", p.hivIntercept},
                          {"hiv_age_weight", p.hivAgeWeight},
                          {"hiv_edu_weight", p.hivEduWeight},
                          {"hiv_province_weights", p.hivProvinceWeights}};
}

GeneratorParams generatorParamsFromJson(const nlohmann::json& config) {
    if (!config.is_object()) throw ConfigError("generator config must be a JSON object");
    GeneratorParams p;
    nlohmann::json defaults = generatorParamsToJson(p);
    for (const auto& [key, value] : config.items()) {
        if (!defaults.contains(key)) throw ConfigError("unknown generator parameter: " + key);
        defaults[key] = value;
    }
    try {
        p.ageMean = defaults.at("age_mean").get<double>();
        p.ageSd = defaults.at("age_sd").get<double>();
        p.eduBase = defaults.at("edu_base").get<double>();
        p.eduAgeSlope = defaults.at("edu_age_slope").get<double>();
        p.eduSd = defaults.at("edu_sd").get<double>();
        p.graBase = defaults.at("gra_base").get<double>();
        p.graAgeSlope = defaults.at("gra_age_slope").get<double>();
        p.graSd = defaults.at("gra_sd").get<double>();
        p.parityDropProbs = defaults.at("parity_drop_probs").get<std::vector<double>>();
        p.fatherOffsetMean = defaults.at("father_offset_mean").get<double>();
        p.fatherOffsetSd = defaults.at("father_offset_sd").get<double>();
        p.provinceWeights = defaults.at("province_weights").get<std::vector<double>>();
        p.raceProvinceAffinity = defaults.at("race_province_affinity").get<double>();
        p.rprBase = defaults.at("rpr_base").get<double>();
        p.rprProvinceSlope = defaults.at("rpr_province_slope").get<double>();
        p.hivIntercept = defaults.at("hiv_intercept").get<double>();
        p.hivAgeWeight = defaults.at("hiv_age_weight").get<double>();
        p.hivEduWeight = defaults.at("hiv_edu_weight").get<double>();
        p.hivProvinceWeights = defaults.at("hiv_province_weights").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("generator config: ") + e.what());
    }
    checkParams(p);
    return p;
}

}  // namespace mdi
