#pragma once

#include <cstdint>
#include <iterator>
#include <random>
#include <span>
#include <utility>

namespace teamform {

/// SplitMix64 finalizer. Used to derive independent stream seeds from a master seed.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed for sub-stream `stream` of `master`; stable across platforms and thread counts.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept;

/// Deterministic random source.
///
/// The engine (mt19937_64) is fully specified by the standard, but the standard
/// distributions are not, so every draw used by the library goes through the
/// helpers below. Results are therefore identical across compilers and standard
/// libraries for a given seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [0, bound). bound must be > 0.
    std::uint64_t below(std::uint64_t bound);

    /// Uniform integer in [lo, hi].
    int uniform_int(int lo, int hi);

    /// Uniform real in [0, 1) with 53 random bits.
    double uniform();

    bool bernoulli(double p) { return uniform() < p; }

    /// Standard normal via Box-Muller (one variate per call, no cached state).
    double normal();

    double normal(double mean, double sd) { return mean + sd * normal(); }

    /// Index drawn with probability proportional to weights[i].
    std::size_t categorical(std::span<const double> weights);

    template <typename RandomIt>
    void shuffle(RandomIt first, RandomIt last) {
        auto n = static_cast<std::uint64_t>(std::distance(first, last));
        for (std::uint64_t i = n; i > 1; --i) {
            auto j = below(i);
            using std::swap;
            swap(first[static_cast<std::ptrdiff_t>(i - 1)], first[static_cast<std::ptrdiff_t>(j)]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace teamform
