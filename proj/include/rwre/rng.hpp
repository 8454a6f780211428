#pragma once

#include <cstdint>
#include <random>

namespace rwre {

// splitmix64 finalizer; used as a keyed counter hash so that any quantity
// attached to an integer coordinate can be regenerated without storing it.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) noexcept {
    return mix64(a ^ mix64(b + 0x632be59bd9b4e019ULL));
}

template <typename... Rest>
constexpr std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b, Rest... rest) noexcept {
    return hash_combine(hash_combine(a, b), static_cast<std::uint64_t>(rest)...);
}

// 53-bit uniform in [0,1) from a 64-bit word.
constexpr double to_unit(std::uint64_t w) noexcept {
    return static_cast<double>(w >> 11) * 0x1.0p-53;
}

// Per-replica stream. The engine is the standard 64-bit Mersenne twister; the
// conversion to doubles is done by hand so that results do not depend on the
// library's distribution implementation.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(mix64(seed)) {}
    double uniform() { return to_unit(eng_()); }
    std::uint64_t next() { return eng_(); }

private:
    std::mt19937_64 eng_;
};

inline Rng replica_rng(std::uint64_t masterSeed, std::uint64_t replica) {
    return Rng(hash_combine(masterSeed, replica));
}

}  // namespace rwre
