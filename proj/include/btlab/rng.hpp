#pragma once

#include <cstdint>
#include <random>

namespace btlab
{
    std::uint64_t splitmix64(std::uint64_t x);

    /// Seeded PRF over (seed, x); identical on every node.
    inline std::uint64_t prf(std::uint64_t seed, std::uint64_t x) { return splitmix64(splitmix64(seed) ^ x); }

    /// mt19937_64 with distribution helpers whose output does not depend on the
    /// standard library implementation.
    class Rng
    {
    public:
        explicit Rng(std::uint64_t seed) : eng_(seed) {}

        std::uint64_t next() { return eng_(); }
        /// Uniform on [lo, hi].
        std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi);
        /// Uniform on [0, 1).
        double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
        bool chance(double p) { return unit() < p; }
        /// An independent generator derived from this one's seed stream.
        Rng fork(std::uint64_t salt) { return Rng(prf(next(), salt)); }

    private:
        std::mt19937_64 eng_;
    };
}
