#pragma once

#include <cstdint>
#include <limits>

namespace healthroute {

/// SplitMix64 bit generator (Steele, Lea & Flood). The state is one word, so a fresh
/// generator per keyed substream costs nothing; that is what makes per-citizen and
/// per-cell streams affordable at 1.4M cells.
class SplitMix64 {
  public:
    using result_type = std::uint64_t;

    explicit constexpr SplitMix64(std::uint64_t state) noexcept : state_{state} {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept {
        return std::numeric_limits<result_type>::max();
    }

    constexpr result_type operator()() noexcept {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30U)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27U)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31U);
    }

  private:
    std::uint64_t state_;
};

/// Separates the random streams of the different generators sharing one seed.
enum class StreamDomain : std::uint64_t {
    population = 0x706f70ULL,
    rating_noise = 0x6e6f6973ULL,
    holdout = 0x686f6c64ULL,
};

/// SplitMix64 output function applied to a single value.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x = (x ^ (x >> 30U)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27U)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31U);
}

/// Independent generator keyed by (seed, domain, a, b). Pure function of its arguments,
/// so streams can be consumed in any order or from any thread.
constexpr SplitMix64 substream(std::uint64_t seed, StreamDomain domain, std::uint64_t a,
                               std::uint64_t b = 0) noexcept {
    std::uint64_t key = mix64(seed + 0x9e3779b97f4a7c15ULL);
    key = mix64(key ^ static_cast<std::uint64_t>(domain));
    key = mix64(key ^ (a * 0xd1b54a32d192ed03ULL));
    key = mix64(key ^ (b * 0xabc98388fb8fac03ULL));
    return SplitMix64{key};
}

} // namespace healthroute
