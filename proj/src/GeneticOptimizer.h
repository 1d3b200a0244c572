#ifndef MDIMPUTE_GENETIC_OPTIMIZER_H
#define MDIMPUTE_GENETIC_OPTIMIZER_H

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "json.hpp"

namespace mdi {

struct GaConfig {
    int population = 60;
    int generations = 100;
    double crossoverRate = 0.8;
    double mutationRate = 0.05;
    // Mutation noise is uniform in +-(mutationScale * gene box width).
    double mutationScale = 0.1;
    int elitism = 1;
    uint64_t seed = 0;
};

nlohmann::json gaConfigToJson(const GaConfig& config);
GaConfig gaConfigFromJson(const nlohmann::json& doc);

struct SearchBox {
    std::vector<double> lower;
    std::vector<double> upper;

    size_t size() const { return lower.size(); }
    static SearchBox unit(size_t genes) {
        return {std::vector<double>(genes, 0.0), std::vector<double>(genes, 1.0)};
    }
};

struct GaResult {
    std::vector<double> best;
    double bestFitness = 0.0;
    // Best fitness of the population at generation 0 and after each
    // evolution step; monotone non-increasing with elitism >= 1.
    std::vector<double> trace;
};

using GaObjective = std::function<double(std::span<const double>)>;

// Minimizes the objective over the box: uniform initialization, tournament
// selection of size 2, per-gene blend crossover, additive bounded mutation,
// elitism. Candidates in `injected` are clamped into the box and placed into
// generation 0.
GaResult runGa(const GaObjective& objective, const SearchBox& box, const GaConfig& config,
               const std::vector<std::vector<double>>& injected = {});

}  // namespace mdi

#endif
