#pragma once

#include <cstdint>
#include <random>

namespace trstream {

/// Seeded 64-bit generator. split() derives an independent child stream, so
/// components never share hidden global state.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(mix(seed)) {}

    Rng split() { return Rng(mix(engine_() ^ 0x9e3779b97f4a7c15ULL)); }

    std::mt19937_64& engine() noexcept { return engine_; }

    double normal() { return normal_(engine_); }

    /// Uniform offset in [0, n).
    std::size_t uniform_index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_); }

    bool coin() { return (engine_() >> 63) != 0; }

private:
    // splitmix64 finalizer
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

} // namespace trstream
