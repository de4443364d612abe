#include "modgrok/rng.hpp"

namespace mg {

Prf substream(std::uint64_t seed, std::string_view name) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a offset basis
    for (unsigned char c : name) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return Prf{mix64(seed ^ mix64(h))};
}

std::uint64_t RngStream::next_below(std::uint64_t bound) {
    // rejection sampling over the top multiple of bound keeps this exact
    std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % bound;
    std::uint64_t v;
    do {
        v = next_bits();
    } while (v >= limit);
    return v % bound;
}

}  // namespace mg
