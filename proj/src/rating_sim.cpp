#include "healthroute/rating_sim.h"

#include "healthroute/errors.h"
#include "healthroute/profiles.h"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <random>
#include <stdexcept>

namespace healthroute {

namespace {

bool non_positive(const Modifier &m) noexcept {
    return m.distance <= 0.0 && m.elevation <= 0.0 && m.pavement <= 0.0;
}

bool finite(const Modifier &m) noexcept {
    return std::isfinite(m.distance) && std::isfinite(m.elevation) && std::isfinite(m.pavement);
}

} // namespace

void ModifierTable::validate() const {
    for (std::size_t i = 0; i < age_brackets.size(); ++i) {
        if (!finite(age_brackets[i]) || !non_positive(age_brackets[i])) {
            throw ConfigError(fmt::format("age bracket {} modifiers must be finite and <= 0", i));
        }
        if (i > 0) {
            const auto &younger = age_brackets[i - 1];
            const auto &older = age_brackets[i];
            if (older.distance > younger.distance || older.elevation > younger.elevation ||
                older.pavement > younger.pavement) {
                throw ConfigError(fmt::format(
                    "age bracket {} modifiers must not be milder than bracket {}", i, i - 1));
            }
        }
    }
    for (auto condition : kAllConditions) {
        const auto &row = conditions[static_cast<std::size_t>(condition)];
        if (!finite(row) || !non_positive(row)) {
            throw ConfigError(fmt::format("{} modifiers must be finite and <= 0",
                                          condition_name(condition)));
        }
    }
}

void NoiseConfig::validate() const {
    if (!(std_dev >= 0.0) || !std::isfinite(std_dev)) {
        throw ConfigError(fmt::format("noise std_dev must be finite and >= 0, got {}", std_dev));
    }
}

Modifier citizen_modifiers(const Citizen &citizen, const ModifierTable &table) noexcept {
    Modifier total = table.age_brackets[static_cast<std::size_t>(age_bracket_of(citizen.age))];
    for (auto condition : kAllConditions) {
        const double severity = citizen.health[condition].value();
        const auto &row = table.conditions[static_cast<std::size_t>(condition)];
        total.distance += severity * row.distance;
        total.elevation += severity * row.elevation;
        total.pavement += severity * row.pavement;
    }
    return total;
}

double adjusted_feature_sum(const FeatureScores &scores, const Modifier &modifiers) noexcept {
    return std::clamp(scores.distance + modifiers.distance, 0.0, 5.0) +
           std::clamp(scores.elevation + modifiers.elevation, 0.0, 5.0) +
           std::clamp(scores.pavement + modifiers.pavement, 0.0, 5.0);
}

double deterministic_rating(const Citizen &citizen, const FeatureScores &scores,
                            const ModifierTable &table) noexcept {
    return adjusted_feature_sum(scores, citizen_modifiers(citizen, table)) * (10.0 / 15.0);
}

NoisyRating noisy_rating(double deterministic, const NoiseConfig &noise, SplitMix64 &engine) {
    double perturbed = deterministic;
    if (noise.enabled && noise.std_dev > 0.0) {
        std::normal_distribution<double> epsilon(0.0, noise.std_dev);
        perturbed += epsilon(engine);
    }
    const double clamped = std::clamp(perturbed, 0.0, 10.0);
    return NoisyRating{perturbed, clamped, static_cast<int>(std::lround(clamped))};
}

std::uint64_t route_key(std::string_view route_id) noexcept {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (char c : route_id) {
        hash ^= static_cast<unsigned char>(c);
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

GeneratedRatings generate_ratings(std::span<const Citizen> population,
                                  const RouteCatalog &catalog, const ModifierTable &table,
                                  const NoiseConfig &noise, std::uint64_t seed) {
    if (population.empty()) {
        throw std::invalid_argument("cannot generate ratings for an empty population");
    }
    table.validate();
    noise.validate();

    std::vector<int> user_ids;
    user_ids.reserve(population.size());
    for (const auto &citizen : population) {
        user_ids.push_back(citizen.id);
    }
    std::vector<std::string> route_ids;
    std::vector<std::uint64_t> route_keys;
    for (const auto &route : catalog.routes()) {
        route_ids.push_back(route.id);
        route_keys.push_back(route_key(route.id));
    }

    GeneratedRatings out{RatingsMatrix{user_ids, route_ids}, RatingsMatrix{user_ids, route_ids},
                         RatingsMatrix{user_ids, route_ids}};
    for (std::size_t u = 0; u < population.size(); ++u) {
        const auto &citizen = population[u];
        const Modifier modifiers = citizen_modifiers(citizen, table);
        for (std::size_t r = 0; r < catalog.size(); ++r) {
            const double deterministic =
                adjusted_feature_sum(catalog.scores(r), modifiers) * (10.0 / 15.0);
            auto engine = substream(seed, StreamDomain::rating_noise,
                                    static_cast<std::uint64_t>(citizen.id), route_keys[r]);
            const auto noisy = noisy_rating(deterministic, noise, engine);
            out.deterministic.set(u, r, deterministic);
            out.noisy.set(u, r, noisy.full_precision);
            out.stored.set(u, r, noisy.stored);
        }
    }
    return out;
}

} // namespace healthroute
