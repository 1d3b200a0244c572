#ifndef MDIMPUTE_RNG_H
#define MDIMPUTE_RNG_H

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace mdi {

// Deterministic random source. std::mt19937_64 has a standardized bit-exact
// output sequence; the distribution helpers below are hand-rolled because the
// standard <random> distributions are implementation-defined and would break
// the cross-platform reproducibility contract.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t nextU64() { return engine_(); }

    // Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased integer in [0, n) via rejection sampling.
    uint64_t below(uint64_t n) {
        if (n <= 1) return 0;
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    // Inclusive integer range.
    int uniformInt(int lo, int hi) {
        return lo + static_cast<int>(below(static_cast<uint64_t>(hi - lo) + 1));
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Standard normal via Box-Muller, caching the spare deviate.
    double normal() {
        if (hasSpare_) {
            hasSpare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        hasSpare_ = true;
        return r * std::cos(theta);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    template <class T>
    void shuffle(std::vector<T>& values) {
        for (size_t i = values.size(); i > 1; --i) {
            const size_t j = static_cast<size_t>(below(i));
            std::swap(values[i - 1], values[j]);
        }
    }

    // First k elements of a random permutation of 0..n-1 (partial Fisher-Yates).
    std::vector<int> sampleWithoutReplacement(int n, int k) {
        std::vector<int> pool(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) pool[static_cast<size_t>(i)] = i;
        for (int i = 0; i < k; ++i) {
            const int j = i + static_cast<int>(below(static_cast<uint64_t>(n - i)));
            std::swap(pool[static_cast<size_t>(i)], pool[static_cast<size_t>(j)]);
        }
        pool.resize(static_cast<size_t>(k));
        return pool;
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool hasSpare_ = false;
};

namespace detail {
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}
}  // namespace detail

// Derives a child seed from (master, step-name, index). All module seeds flow
// through this so that serial and parallel execution, and independent CLI
// invocations, draw from the same per-unit streams.
inline uint64_t deriveSeed(uint64_t master, std::string_view step, uint64_t index = 0) {
    uint64_t h = 0xcbf29ce484222325ULL ^ detail::splitmix64(master);
    for (const char c : step) {
        h ^= static_cast<uint64_t>(static_cast<unsigned char>(c));
        h *= 0x100000001b3ULL;
    }
    h ^= detail::splitmix64(index + 0x9e3779b97f4a7c15ULL);
    return detail::splitmix64(h);
}

}  // namespace mdi

#endif
