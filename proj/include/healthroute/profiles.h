#pragma once

#include "healthroute/population.h"

#include <cstddef>
#include <map>
#include <span>

namespace healthroute {

inline constexpr int kAgeBracketCount = 4;
inline constexpr int kProfileCount = 64;

/// Age bracket index for the right-inclusive boundaries 35, 50 and 65: 0 for ages up to 35,
/// 1 for 36..50, 2 for 51..65, 3 above 65.
int age_bracket_of(int age) noexcept;

/// One of the 64 (age bracket x disease combination) profiles. Mask bits follow the
/// Condition order: bit 0 visual, bit 1 respiratory, bit 2 mobility, bit 3 heart.
struct ProfileId {
    int age_bracket{0};
    int disease_mask{0};

    constexpr int packed() const noexcept { return age_bracket * 16 + disease_mask; }

    /// Throws std::out_of_range for ids outside 0..63.
    static ProfileId unpack(int packed);

    friend constexpr bool operator==(ProfileId, ProfileId) noexcept = default;
};

ProfileId classify(const Citizen &citizen) noexcept;

/// Histogram keyed by packed profile id. Only observed profiles appear.
using ProfileCensus = std::map<int, std::size_t>;

/// Throws std::invalid_argument for an empty population.
ProfileCensus profile_census(std::span<const Citizen> population);

} // namespace healthroute
