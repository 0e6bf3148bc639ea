#pragma once

#include <cstdint>
#include <limits>

namespace mtoa {

/// Counter-based random stream.
///
/// The k-th output is a pure function of (key, k): the SplitMix64 finalizer
/// applied to a Weyl sequence offset by a per-stream key. Streams built from
/// different (seed, stream_id) pairs are independent for all practical
/// purposes, and a stream can be reconstructed at any position from its
/// counter alone. Satisfies UniformRandomBitGenerator.
class CounterStream {
public:
    using result_type = std::uint64_t;

    CounterStream() = default;
    CounterStream(std::uint64_t seed, std::uint64_t stream_id)
        : key_(mix(mix(seed) ^ (stream_id * kStreamMultiplier + kGolden))) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() { return next(); }

    result_type next() {
        ++counter_;
        return mix(key_ + counter_ * kGolden);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform double in (0, 1].
    double uniform_open_zero() { return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53; }

    /// Index in [0, bound) from exactly one draw (multiply-shift; bias below bound / 2^64).
    std::uint64_t below(std::uint64_t bound) {
        __extension__ using u128 = unsigned __int128;
        const auto wide = static_cast<u128>(next()) * bound;
        return static_cast<std::uint64_t>(wide >> 64);
    }

    /// Bernoulli(p) from one draw.
    bool bernoulli(double p) { return uniform() < p; }

    std::uint64_t counter() const noexcept { return counter_; }

private:
    static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
    static constexpr std::uint64_t kStreamMultiplier = 0xd1b54a32d192ed03ULL;

    static constexpr std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t key_{0};
    std::uint64_t counter_{0};
};

}  // namespace mtoa
