#pragma once

// Counter-based random streams. Every stream is identified by a master seed
// plus a key tuple; identical keys replay the identical draw sequence on any
// platform, which is what makes replications and common-random-number
// experiments reproducible.

#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace fecsim {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ull;

// SplitMix64 finalizer.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

// FNV-1a, used to turn stream labels into key words.
inline constexpr std::uint64_t hash_label(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ull;
    }
    return h;
}

class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::initializer_list<std::uint64_t> key) {
        std::uint64_t s = mix64(master_seed + kGoldenGamma);
        for (std::uint64_t k : key)
            s = mix64(s ^ mix64(k + kGoldenGamma));
        state_ = s;
    }

    std::uint64_t next_u64() {
        state_ += kGoldenGamma;
        ++draws_;
        return mix64(state_);
    }

    // Uniform on the open interval (0,1); never returns an endpoint, so
    // log() and division are always safe.
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    std::uint64_t draw_count() const { return draws_; }

private:
    std::uint64_t state_ = 0;
    std::uint64_t draws_ = 0;
};

}  // namespace fecsim
