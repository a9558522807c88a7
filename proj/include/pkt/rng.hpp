// Deterministic random number generation. All randomness in the library goes
// through this wrapper so that a (config, seed) pair reproduces bit-identical
// runs. Distribution helpers are hand-rolled: std:: distributions are
// implementation-defined and would break reproducibility across stdlibs.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "pkt/errors.hpp"

namespace pkt {

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(mix_seed(seed)) {}

    // Independent stream derived from (seed, stream). Used to decouple e.g.
    // parameter init from batch shuffling so adding one consumer does not
    // shift every other stream.
    static Rng derive(uint64_t seed, uint64_t stream) {
        uint64_t s = seed;
        uint64_t a = splitmix64(s);
        s ^= 0x517cc1b727220a95ULL * (stream + 1);
        uint64_t b = splitmix64(s);
        return Rng(a ^ (b + 0x2545f4914f6cdd1dULL * (stream + 1)));
    }

    uint64_t next_u64() { return eng_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller; caches the spare deviate.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    // Uniform integer in [lo, hi] inclusive.
    int64_t uniform_int(int64_t lo, int64_t hi) {
        if (hi < lo) throw contract_error("uniform_int: empty range");
        uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
        return lo + static_cast<int64_t>(next_u64() % span);
    }

    // Index into a nonnegative weight vector, proportional to weight.
    size_t weighted_index(const std::vector<double>& w) {
        double total = 0.0;
        for (double x : w) total += x;
        if (total <= 0.0) throw contract_error("weighted_index: weights sum to zero");
        double r = uniform() * total;
        double acc = 0.0;
        for (size_t i = 0; i < w.size(); ++i) {
            acc += w[i];
            if (r < acc) return i;
        }
        return w.size() - 1;
    }

    bool bernoulli(double p) { return uniform() < p; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(uniform_int(0, static_cast<int64_t>(i) - 1));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    static uint64_t mix_seed(uint64_t seed) {
        uint64_t s = seed;
        return splitmix64(s);
    }

    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace pkt
