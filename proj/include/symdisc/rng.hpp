#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace symdisc {

// Counter-based pseudo-random generator. Each draw hashes (key, counter),
// so streams can be split without sharing state: split(i) derives an
// independent key from the parent key and the index. Deterministic across
// runs for a fixed seed.
class Rng {
  public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(mix(mix(seed) ^ mix(stream + 0x9E3779B97F4A7C15ULL))), counter_(0) {}

    // Independent stream derived from (this key, index).
    Rng split(std::uint64_t index) const {
        Rng child(0);
        child.key_ = mix(key_ ^ mix(index + 0xD1B54A32D192ED03ULL));
        child.counter_ = 0;
        return child;
    }

    std::uint64_t next_u64() { return mix(key_ + 0x9E3779B97F4A7C15ULL * ++counter_); }

    // Uniform in [0, 1).
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in (0, 1); safe as a log argument.
    double uniform01_open() {
        double u;
        do {
            u = uniform01();
        } while (u <= 0.0);
        return u;
    }

    // Uniform integer in [0, n).
    std::uint64_t uniform_below(std::uint64_t n) {
        // Rejection sampling to avoid modulo bias.
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % n;
    }

    // Standard normal via Box-Muller (one value cached).
    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        const double u1 = uniform01_open();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        cached_ = r * std::sin(a);
        has_cached_ = true;
        return r * std::cos(a);
    }

    // Standard normal conditioned on [lo, hi], by rejection.
    double truncated_normal(double lo, double hi) {
        double x;
        do {
            x = normal();
        } while (x < lo || x > hi);
        return x;
    }

    // Standard Gumbel(0,1) via inverse CDF.
    double gumbel() { return -std::log(-std::log(uniform01_open())); }

  private:
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t key_;
    std::uint64_t counter_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

// Fisher-Yates shuffle of indices 0..n-1.
template <typename IndexVec>
void shuffle_indices(IndexVec& idx, Rng& rng) {
    for (std::size_t i = idx.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.uniform_below(i));
        std::swap(idx[i - 1], idx[j]);
    }
}

}  // namespace symdisc
