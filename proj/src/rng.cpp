#include "fsard/rng.hpp"

#include <cmath>
#include <limits>

namespace fsard {

std::uint64_t splitmix64_next(std::uint64_t &state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t replication) {
    std::uint64_t state = seed;
    std::uint64_t out = 0;
    for (std::uint64_t r = 0; r <= replication; ++r) out = splitmix64_next(state);
    return out;
}

std::uint64_t generate_seed() {
    std::random_device device;
    return (static_cast<std::uint64_t>(device()) << 32) ^ device();
}

std::uint64_t Rng::below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % bound;
}

std::int64_t Rng::geometric(double p) {
    if (p >= 1.0) return 1;
    const double u = 1.0 - uniform(); // (0, 1]
    const double trials = std::floor(std::log(u) / std::log1p(-p));
    if (trials >= 4.0e18) return std::numeric_limits<std::int64_t>::max() / 4;
    return 1 + static_cast<std::int64_t>(trials);
}

} // namespace fsard
