#pragma once

#include <cstdint>
#include <random>

namespace fsard {

/// One output step of SplitMix64 applied to `state` (state advanced in place).
std::uint64_t splitmix64_next(std::uint64_t &state);

/// Seed of replication `replication` under master seed `seed`: the
/// (replication+1)-th output of a SplitMix64 stream started at `seed`.
std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t replication);

/// A fresh seed from the system entropy source.
std::uint64_t generate_seed();

/// Simulation random source: std::mt19937_64 with fixed, portable variate mappings
/// (the <random> distributions are implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return p >= 1.0 || uniform() < p; }

    /// Uniform integer in [0, bound), bound >= 1, by rejection.
    std::uint64_t below(std::uint64_t bound);

    /// Trials up to and including the first success, p in (0, 1].
    std::int64_t geometric(double p);

private:
    std::mt19937_64 engine_;
};

} // namespace fsard
