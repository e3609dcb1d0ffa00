#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace sdsem::rng {

/// SplitMix64 finalizer; a bijective 64-bit mix.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Order-sensitive hash of a key tuple.
template <typename... Keys>
[[nodiscard]] constexpr std::uint64_t hash_key(std::uint64_t seed, Keys... keys) noexcept {
    std::uint64_t h = mix64(seed);
    ((h = mix64(h ^ static_cast<std::uint64_t>(keys))), ...);
    return h;
}

[[nodiscard]] inline std::uint64_t time_key(double t) noexcept {
    return std::bit_cast<std::uint64_t>(t == 0.0 ? 0.0 : t);  // fold -0 onto +0
}

/// Uniform in (0, 1); never returns 0 so it is safe under log().
[[nodiscard]] constexpr double to_open_unit(std::uint64_t bits) noexcept {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal draw that is a pure function of `key` (Box-Muller).
[[nodiscard]] inline double normal_from_key(std::uint64_t key) noexcept {
    const double u1 = to_open_unit(mix64(key ^ 0x5851f42d4c957f2dULL));
    const double u2 = to_open_unit(mix64(key ^ 0x14057b7ef767814fULL));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Sequential stream with portable draws (std distributions are
/// implementation-defined, so byte-identical output needs our own mapping).
class Stream {
public:
    explicit Stream(std::uint64_t seed) : engine_(mix64(seed)) {}

    [[nodiscard]] double uniform() { return to_open_unit(engine_()); }
    [[nodiscard]] double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    [[nodiscard]] bool bernoulli(double prob) { return uniform() < prob; }

    /// Uniform integer in [lo, hi] (inclusive).
    [[nodiscard]] std::int64_t integer(std::int64_t lo, std::int64_t hi) {
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(engine_() % span);
    }

    [[nodiscard]] double normal() { return normal_from_key(engine_()); }

private:
    std::mt19937_64 engine_;
};

}  // namespace sdsem::rng
