#pragma once

#include <cmath>
#include <cstdint>

namespace bethe {

// Counter-based deterministic RNG.  Every logical stream is addressed by a
// 64-bit key derived from (seed, sample index, tree index, ...), and draws
// are pure functions of (key, counter).  Results are therefore identical for
// any worker count and any evaluation order of the streams.

inline uint64_t rng_mix(uint64_t x) {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
}

inline uint64_t rng_key(uint64_t seed) { return rng_mix(seed + 0x9E3779B97F4A7C15ULL); }

template <typename... Ids>
uint64_t rng_key(uint64_t seed, uint64_t id, Ids... rest) {
    uint64_t h = rng_mix(seed ^ (id * 0x9E3779B97F4A7C15ULL + 0xD1B54A32D192ED03ULL));
    return rng_key(h, rest...);
}

class RngStream {
  public:
    explicit RngStream(uint64_t key) : key_(key) {}

    uint64_t next_u64() { return rng_mix(key_ + (++ctr_) * 0x9E3779B97F4A7C15ULL); }

    // uniform on (0,1), never exactly 0 or 1
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53 + 0x1.0p-54;
    }

    // standard normal via Box-Muller; the pair partner is cached
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

  private:
    uint64_t key_;
    uint64_t ctr_ = 0;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

}  // namespace bethe
