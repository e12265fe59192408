#include "btlab/rng.hpp"

#include <limits>

namespace btlab
{
    std::uint64_t splitmix64(std::uint64_t x)
    {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    std::uint64_t Rng::uniform(std::uint64_t lo, std::uint64_t hi)
    {
        if (hi <= lo)
            return lo;
        const std::uint64_t span = hi - lo;
        if (span == std::numeric_limits<std::uint64_t>::max())
            return next();
        const std::uint64_t range = span + 1;
        // Rejection sampling keeps the draw unbiased.
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % range;
        std::uint64_t x;
        do
            x = next();
        while (x >= limit);
        return lo + x % range;
    }
}
