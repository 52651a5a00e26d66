#pragma once

// Seedable generator with per-trajectory substreams. Uniform doubles are built
// from the top 53 bits so sequences are identical across standard libraries.

#include <cstdint>
#include <random>

namespace openchain {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    /// Substream for trajectory `index` of an ensemble seeded with `seed`.
    static Rng substream(std::uint64_t seed, std::uint64_t index) { return Rng(seed ^ index); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    /// Uniform in (0, 1], safe for logarithms.
    double uniform_positive() { return 1.0 - uniform(); }

  private:
    std::mt19937_64 engine_;
};

} // namespace openchain
