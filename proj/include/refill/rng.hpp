#pragma once

#include <cstdint>

namespace refill {

// Counter-based RNG. Every draw is a pure function of (key, counter), so
// streams can be split freely and replayed without storing state.
namespace rng {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline uint64_t mix(uint64_t a, uint64_t b) {
    return splitmix64(a ^ (0x9E3779B97F4A7C15ULL + splitmix64(b)));
}

// Uniform in [0,1) from the top 53 bits.
inline double to_unit(uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// One hashed uniform for a fixed (key, index) pair; used for per-(u,t)
// Bernoulli coins so that raising the success probability only ever adds
// events (threshold coupling).
inline double indexed_unit(uint64_t key, uint64_t index) {
    return to_unit(splitmix64(key + index * 0x9E3779B97F4A7C15ULL));
}

} // namespace rng

// Named sub-streams hanging off one master seed. Keeping them separate means
// e.g. swapping the policy never perturbs the refill sequence.
enum class Stream : uint64_t {
    policy = 1,
    refill = 2,
    edges = 3,
    adversary = 4,
    replicate = 5,
};

class RngStream {
public:
    explicit RngStream(uint64_t key) : key_(key) {}

    static RngStream derive(uint64_t master, Stream stream, uint64_t index = 0) {
        return RngStream(rng::mix(rng::mix(master, static_cast<uint64_t>(stream)), index));
    }

    uint64_t key() const { return key_; }

    uint64_t next_u64() { return rng::splitmix64(key_ + (ctr_++) * 0x9E3779B97F4A7C15ULL); }

    double uniform() { return rng::to_unit(next_u64()); }

    // Uniform integer in [0, n); n >= 1.
    uint64_t below(uint64_t n) {
        // Lemire's multiply-shift with a single rejection loop.
        uint64_t x = next_u64();
        __uint128_t m = static_cast<__uint128_t>(x) * n;
        uint64_t lo = static_cast<uint64_t>(m);
        if (lo < n) {
            uint64_t threshold = (0 - n) % n;
            while (lo < threshold) {
                x = next_u64();
                m = static_cast<__uint128_t>(x) * n;
                lo = static_cast<uint64_t>(m);
            }
        }
        return static_cast<uint64_t>(m >> 64);
    }

private:
    uint64_t key_;
    uint64_t ctr_ = 0;
};

} // namespace refill
