#pragma once

#include <cstdint>
#include <random>

namespace sdiv {

/// SplitMix64 finalizer, used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seedable 64-bit generator. mt19937_64 is fully specified by the standard,
/// and uniform() uses the top 53 bits directly, so streams are identical on
/// every conforming platform (std::uniform_real_distribution is not).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
};

/// Seed schedule for Monte-Carlo replicates.
///
/// The cell key depends only on the data-generating pair (n, theta), so a
/// given replicate index draws the same dataset for every (alpha, lambda, h,
/// beta) evaluated on it (common random numbers).
std::uint64_t data_cell_key(std::uint64_t n, double theta);
std::uint64_t replicate_seed(std::uint64_t base_seed, std::uint64_t cell_key, std::uint64_t replicate);

}  // namespace sdiv
