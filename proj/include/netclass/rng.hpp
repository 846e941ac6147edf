#pragma once

#include <cstdint>

namespace netclass {

// SplitMix64 finalizer. Used as the mixing function whenever integers
// (stream ids, class indices, sample indices) must be combined into a
// fresh seed or stream key. Bit-stable across platforms.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
    return mix64(mix64(a) ^ b);
}

constexpr std::uint64_t mix64(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return mix64(mix64(a, b), c);
}

// Counter-based PCG32 (setseq variant, O'Neill 2014). One instance per
// (seed, stream_id) pair; equal pairs replay the exact same sequence on
// every platform. Distinct stream ids select distinct LCG increments and
// therefore independent sequences, which is what the per-walk / per-sample
// parallelism relies on. Instances are single-owner: never share one
// across threads, derive substreams instead.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id)
        : seed_(seed), stream_id_(stream_id), inc_((mix64(stream_id) << 1u) | 1u) {
        state_ = 0u;
        next_u32();
        state_ += seed;
        next_u32();
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    // Same seed, mixed stream id. The canonical way to fan out independent
    // generators for walk i, epoch e, sample s, ...
    RngStream substream(std::uint64_t key) const {
        return RngStream(seed_, mix64(stream_id_, key));
    }

    std::uint32_t next_u32() {
        std::uint64_t old = state_;
        state_ = old * 6364136223846793005ULL + inc_;
        std::uint32_t xorshifted =
            static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
        std::uint32_t rot = static_cast<std::uint32_t>(old >> 59u);
        return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
    }

    std::uint64_t next_u64() {
        std::uint64_t hi = next_u32();
        std::uint64_t lo = next_u32();
        return (hi << 32) | lo;
    }

    // Uniform in [0,1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, bound). Rejection sampling, exactly unbiased.
    std::uint64_t next_below(std::uint64_t bound) {
        std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            std::uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    double next_uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t inc_;
    std::uint64_t state_;
};

}  // namespace netclass
