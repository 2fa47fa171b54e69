#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace knncp {

// All randomness in the library flows from a single 64-bit seed through
// derive_seed(), which mixes in stream tags (run index, fold index, role)
// with the splitmix64 finalizer. The generator itself is std::mt19937_64.
inline constexpr std::string_view kRngAlgorithm = "mt19937_64/splitmix64";

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Role tags keep independent random streams from colliding.
enum class SeedRole : std::uint64_t {
    KFold = 1,
    Calibration = 2,
    Holdout = 3,
    Synthetic = 4,
    Test = 17,
};

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t run,
                                 std::uint64_t fold, SeedRole role) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ (run + 0x0123456789abcdefULL));
    h = splitmix64(h ^ (fold + 0xfedcba9876543210ULL));
    h = splitmix64(h ^ static_cast<std::uint64_t>(role));
    return h;
}

inline std::mt19937_64 make_rng(std::uint64_t seed) {
    return std::mt19937_64(seed);
}

} // namespace knncp
