#include "healthroute/profiles.h"

#include <fmt/format.h>
#include <stdexcept>

namespace healthroute {

int age_bracket_of(int age) noexcept {
    if (age <= 35) {
        return 0;
    }
    if (age <= 50) {
        return 1;
    }
    if (age <= 65) {
        return 2;
    }
    return 3;
}

ProfileId ProfileId::unpack(int packed) {
    if (packed < 0 || packed >= kProfileCount) {
        throw std::out_of_range(fmt::format("profile id {} outside 0..63", packed));
    }
    return ProfileId{packed / 16, packed % 16};
}

ProfileId classify(const Citizen &citizen) noexcept {
    int mask = 0;
    for (auto condition : kAllConditions) {
        if (citizen.health[condition].present()) {
            mask |= 1 << static_cast<int>(condition);
        }
    }
    return ProfileId{age_bracket_of(citizen.age), mask};
}

ProfileCensus profile_census(std::span<const Citizen> population) {
    if (population.empty()) {
        throw std::invalid_argument("profile census of an empty population");
    }

    ProfileCensus census;
    for (const auto &citizen : population) {
        ++census[classify(citizen).packed()];
    }
    return census;
}

} // namespace healthroute
