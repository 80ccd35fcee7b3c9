#pragma once

#include <cstdint>
#include <string_view>

namespace apesim {

// Deterministic random streams. Each consumer derives its own stream from the
// master seed and a stream name, so adding a consumer never perturbs the draws
// seen by the others. splitmix64 is fully portable: the same (seed, name)
// yields the same sequence on every platform.
class RngStream {
public:
    RngStream() = default;
    explicit RngStream(std::uint64_t state) : state_(state) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53-bit resolution.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, bound). Rejection keeps the result unbiased.
    std::uint64_t next_below(std::uint64_t bound) {
        if (bound == 0) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % bound;
    }

    std::int64_t next_in(std::int64_t lo, std::int64_t hi) { // inclusive range
        return lo + static_cast<std::int64_t>(next_below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

private:
    std::uint64_t state_ = 0;
};

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const char c : s) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

inline RngStream make_stream(std::uint64_t master_seed, std::string_view name) {
    // One scrambling round keeps streams with related names well separated.
    std::uint64_t z = master_seed ^ fnv1a64(name);
    z = (z ^ (z >> 33)) * 0xff51afd7ed558ccdull;
    z = (z ^ (z >> 33)) * 0xc4ceb9fe1a85ec53ull;
    return RngStream(z ^ (z >> 33));
}

inline RngStream make_stream(std::uint64_t master_seed, std::string_view name, std::uint64_t index) {
    std::uint64_t z = master_seed ^ fnv1a64(name) ^ (0x9e3779b97f4a7c15ull * (index + 1));
    z = (z ^ (z >> 33)) * 0xff51afd7ed558ccdull;
    z = (z ^ (z >> 33)) * 0xc4ceb9fe1a85ec53ull;
    return RngStream(z ^ (z >> 33));
}

} // namespace apesim
