#pragma once

// Counter-based random streams. Every draw is a pure function of
// (seed, stream key, counters), so trajectories do not depend on call order,
// thread scheduling or how much tracing is enabled.

#include <cstdint>
#include <string_view>

namespace nsduel::rng {

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// FNV-1a over the stream name; used to key named streams.
std::uint64_t stream_key(std::string_view name);

/// Child seed for replication `index` of a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

class Stream {
public:
    Stream() = default;
    Stream(std::uint64_t seed, std::string_view name);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t key() const { return key_; }

    std::uint64_t bits(std::uint64_t c0, std::uint64_t c1 = 0,
                       std::uint64_t c2 = 0, std::uint64_t c3 = 0) const;

    /// Uniform in [0, 1) with 53 bits of resolution.
    double uniform(std::uint64_t c0, std::uint64_t c1 = 0,
                   std::uint64_t c2 = 0, std::uint64_t c3 = 0) const;

    bool bernoulli(double p, std::uint64_t c0, std::uint64_t c1 = 0,
                   std::uint64_t c2 = 0, std::uint64_t c3 = 0) const {
        return uniform(c0, c1, c2, c3) < p;
    }

private:
    std::uint64_t seed_ = 0;
    std::uint64_t key_ = 0;
};

/// The three independently keyed streams of one simulation.
struct Streams {
    Stream environment;
    Stream action;
    Stream replay;

    static Streams from_seed(std::uint64_t seed);
};

}  // namespace nsduel::rng
