#pragma once

#include "healthroute/population.h"
#include "healthroute/ratings_matrix.h"
#include "healthroute/rng.h"
#include "healthroute/routes.h"

#include <array>
#include <cstdint>
#include <span>

namespace healthroute {

/// Per-feature adjustment; all entries are <= 0.
struct Modifier {
    double distance{0.0};
    double elevation{0.0};
    double pavement{0.0};

    friend bool operator==(const Modifier &, const Modifier &) = default;
};

/// Skill modifiers per age bracket (applied in full) and per condition (scaled by severity).
struct ModifierTable {
    std::array<Modifier, 4> age_brackets{
        Modifier{0, 0, 0}, Modifier{-1, -1, 0}, Modifier{-2, -2, 0}, Modifier{-3, -3, -1}};
    /// Indexed by Condition.
    std::array<Modifier, 4> conditions{
        Modifier{0, 0, -1},  // visual impairment
        Modifier{0, -1, 0},  // respiratory problems
        Modifier{-1, -1, -3}, // reduced mobility
        Modifier{-1, -2, 0}, // heart disease
    };

    /// Throws ConfigError if any entry is positive or older brackets are less severe.
    void validate() const;

    friend bool operator==(const ModifierTable &, const ModifierTable &) = default;
};

struct NoiseConfig {
    double std_dev{1.5};
    bool enabled{true};

    /// Throws ConfigError for a negative or non-finite std_dev.
    void validate() const;

    friend bool operator==(const NoiseConfig &, const NoiseConfig &) = default;
};

/// Age-bracket row plus the severity-weighted sum of the condition rows.
Modifier citizen_modifiers(const Citizen &citizen, const ModifierTable &table) noexcept;

/// Sum over features of clamp(score + modifier, 0, 5); always in [0, 15].
double adjusted_feature_sum(const FeatureScores &scores, const Modifier &modifiers) noexcept;

/// adjusted_feature_sum scaled by 10/15 onto [0, 10].
double deterministic_rating(const Citizen &citizen, const FeatureScores &scores,
                            const ModifierTable &table) noexcept;

struct NoisyRating {
    double perturbed;      ///< deterministic + noise, before clamping
    double full_precision; ///< clamped to [0, 10]
    int stored;            ///< full_precision rounded half away from zero
};

NoisyRating noisy_rating(double deterministic, const NoiseConfig &noise, SplitMix64 &engine);

/// Complete matrices from one generation run, rows in population order, columns in catalog order.
struct GeneratedRatings {
    RatingsMatrix stored;        ///< integer ratings, as written to the dataset
    RatingsMatrix noisy;         ///< full-precision clamped noisy ratings
    RatingsMatrix deterministic; ///< noise-free ratings (evaluation oracle)
};

/// FNV-1a of a route id; keys the per-cell noise stream independently of catalog order.
std::uint64_t route_key(std::string_view route_id) noexcept;

/// Cell (u, r) draws its noise from the substream keyed by (seed, citizen id, route id).
/// Throws std::invalid_argument for an empty population.
GeneratedRatings generate_ratings(std::span<const Citizen> population,
                                  const RouteCatalog &catalog, const ModifierTable &table,
                                  const NoiseConfig &noise, std::uint64_t seed);

} // namespace healthroute
