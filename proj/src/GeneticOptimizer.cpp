#include "GeneticOptimizer.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "Exceptions.h"
#include "Parallel.h"
#include "Rng.h"

namespace mdi {

namespace {

void checkConfig(const GaConfig& config) {
    if (config.population < 2) throw ConfigError("GA population must be at least 2");
    if (config.generations < 1) throw ConfigError("GA needs at least one generation");
    if (config.crossoverRate < 0.0 || config.crossoverRate > 1.0)
        throw ConfigError("crossover rate must lie in [0,1]");
    if (config.mutationRate < 0.0 || config.mutationRate > 1.0)
        throw ConfigError("mutation rate must lie in [0,1]");
    if (config.mutationScale < 0.0) throw ConfigError("mutation scale must be non-negative");
    if (config.elitism < 0 || config.elitism >= config.population)
        throw ConfigError("elitism must lie in [0, population)");
}

void checkBox(const SearchBox& box) {
    if (box.lower.empty() || box.lower.size() != box.upper.size())
        throw ConfigError("search box must be nonempty with matching bounds");
    for (size_t g = 0; g < box.lower.size(); ++g)
        if (box.lower[g] > box.upper[g]) throw ConfigError("search box has lower > upper");
}

std::string formatIndividual(std::span<const double> genes) {
    std::ostringstream out;
    out << '(';
    for (size_t g = 0; g < genes.size(); ++g) {
        if (g > 0) out << ", ";
        out << genes[g];
    }
    out << ')';
    return out.str();
}

}  // namespace

nlohmann::json gaConfigToJson(const GaConfig& c) {
    return nlohmann::json{{"population", c.population},   {"generations", c.generations},
                          {"crossover_rate", c.crossoverRate}, {"mutation_rate", c.mutationRate},
                          {"mutation_scale", c.mutationScale}, {"elitism", c.elitism}};
}

GaConfig gaConfigFromJson(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ConfigError("GA config must be a JSON object");
    GaConfig c;
    nlohmann::json defaults = gaConfigToJson(c);
    for (const auto& [key, value] : doc.items()) {
        if (!defaults.contains(key)) throw ConfigError("unknown GA parameter: " + key);
        defaults[key] = value;
    }
    try {
        c.population = defaults.at("population").get<int>();
        c.generations = defaults.at("generations").get<int>();
        c.crossoverRate = defaults.at("crossover_rate").get<double>();
        c.mutationRate = defaults.at("mutation_rate").get<double>();
        c.mutationScale = defaults.at("mutation_scale").get<double>();
        c.elitism = defaults.at("elitism").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("GA config: ") + e.what());
    }
    checkConfig(c);
    return c;
}

GaResult runGa(const GaObjective& objective, const SearchBox& box, const GaConfig& config,
               const std::vector<std::vector<double>>& injected) {
    checkConfig(config);
    checkBox(box);
    size_t genes = box.size();
    size_t population = static_cast<size_t>(config.population);
    Rng rng(config.seed);

    std::vector<std::vector<double>> current(population);
    for (size_t i = 0; i < population; ++i) {
        current[i].resize(genes);
        for (size_t g = 0; g < genes; ++g)
            current[i][g] = rng.uniform(box.lower[g], box.upper[g]);
    }
    for (size_t i = 0; i < injected.size() && i < population; ++i) {
        if (injected[i].size() != genes) throw ConfigError("injected candidate arity mismatch");
        for (size_t g = 0; g < genes; ++g)
            current[i][g] = std::clamp(injected[i][g], box.lower[g], box.upper[g]);
    }

    std::vector<double> fitness(population);
    auto evaluateAll = [&](const std::vector<std::vector<double>>& pop) {
        parallelFor(pop.size(), [&](size_t i) { fitness[i] = objective(pop[i]); });
        for (size_t i = 0; i < pop.size(); ++i)
            if (!std::isfinite(fitness[i]))
                throw NumericError("GA objective returned a non-finite value at " +
                                   formatIndividual(pop[i]));
    };
    evaluateAll(current);

    GaResult result;
    auto recordBest = [&] {
        size_t best = 0;
        for (size_t i = 1; i < population; ++i)
            if (fitness[i] < fitness[best]) best = i;
        if (result.trace.empty() || fitness[best] < result.bestFitness) {
            result.bestFitness = fitness[best];
            result.best = current[best];
        }
        result.trace.push_back(fitness[best]);
    };
    recordBest();

    std::vector<size_t> order(population);
    std::vector<std::vector<double>> next(population, std::vector<double>(genes));
    for (int generation = 0; generation < config.generations; ++generation) {
        for (size_t i = 0; i < population; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](size_t a, size_t b) { return fitness[a] < fitness[b]; });
        size_t filled = 0;
        for (; filled < static_cast<size_t>(config.elitism); ++filled)
            next[filled] = current[order[filled]];

        auto tournament = [&]() -> const std::vector<double>& {
            size_t a = rng.below(population);
            size_t b = rng.below(population);
            return current[fitness[a] <= fitness[b] ? a : b];
        };
        for (; filled < population; ++filled) {
            const std::vector<double>& parentA = tournament();
            const std::vector<double>& parentB = tournament();
            std::vector<double>& child = next[filled];
            if (rng.uniform() < config.crossoverRate) {
                for (size_t g = 0; g < genes; ++g) {
                    double u = rng.uniform();
                    child[g] = parentA[g] + u * (parentB[g] - parentA[g]);
                }
            } else {
                child = parentA;
            }
            for (size_t g = 0; g < genes; ++g) {
                if (rng.uniform() < config.mutationRate) {
                    double width = box.upper[g] - box.lower[g];
                    child[g] += rng.uniform(-1.0, 1.0) * config.mutationScale * width;
                }
                child[g] = std::clamp(child[g], box.lower[g], box.upper[g]);
            }
        }
        current.swap(next);
        evaluateAll(current);
        recordBest();
    }
    return result;
}

}  // namespace mdi
