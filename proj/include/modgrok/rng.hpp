#pragma once
// Deterministic, splittable randomness. Every consumer derives a named
// substream from the experiment seed; a substream is a keyed counter PRF
// (SplitMix64's finalizer), so adding a new consumer never shifts the values
// another consumer sees. Paired runs (e.g. the permuted-trajectory checks)
// share streams by sharing (seed, name).

#include <cstdint>
#include <string_view>

namespace mg {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
}

struct Prf {
    std::uint64_t key = 0;

    std::uint64_t bits(std::uint64_t ctr) const { return mix64(key + ctr * kGolden + kGolden); }
    // uniform in [0,1), 53-bit mantissa
    double u01(std::uint64_t ctr) const { return double(bits(ctr) >> 11) * 0x1.0p-53; }
};

// key = seed mixed with an FNV-1a hash of the stream name
Prf substream(std::uint64_t seed, std::string_view name);

struct RngStream {
    Prf prf;
    std::uint64_t ctr = 0;

    std::uint64_t next_bits() { return prf.bits(ctr++); }
    double next_u01() { return prf.u01(ctr++); }
    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_u01(); }
    // unbiased integer in [0, bound) via rejection
    std::uint64_t next_below(std::uint64_t bound);
};

inline RngStream stream(std::uint64_t seed, std::string_view name) { return RngStream{substream(seed, name), 0}; }

}  // namespace mg
