#pragma once

#include "healthroute/population.h"
#include "healthroute/rating_sim.h"
#include "healthroute/recommender.h"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

namespace healthroute {

/// Every tunable of a run. Defaults reproduce the published simulation parameters plus the
/// documented choices for what it leaves open (age pyramid, CF model, health filter).
struct RunConfig {
    AgePyramid pyramid{AgePyramid::default_pyramid()};
    PrevalenceConfig prevalence;
    ModifierTable modifiers;
    NoiseConfig noise;
    SimilarityModel model;
    HealthFilterConfig filter;

    /// Validates every section; throws ConfigError.
    void validate() const;

    friend bool operator==(const RunConfig &, const RunConfig &) = default;
};

/// Reads an INI-style file (`[section]`, `key = value`, `#` or `;` comments). Missing keys
/// keep their defaults; unknown sections or keys are rejected with ConfigError.
///
///   [pyramid]     brackets = 18-35:0.27, 36-50:0.29, 51-65:0.24, 66-90:0.20
///   [prevalence]  visual, respiratory, mobility, cardio, heart_age_threshold
///   [severity]    weights = ten relative weights for severities 0.1 .. 1.0
///   [modifiers]   age_0 .. age_3, visual, respiratory, mobility, heart = distance, elevation, pavement
///   [noise]       std_dev, enabled
///   [model]       metric (pearson|cosine), k_neighbors, min_overlap
///   [filter]      threshold, strict
RunConfig parse_config(std::istream &in);
RunConfig load_config(const std::filesystem::path &path);

/// Full config in the format parse_config reads.
std::string format_config(const RunConfig &config);

/// Canonical one-line renderings, used for manifest digests.
std::string canonical_text(const AgePyramid &pyramid);
std::string canonical_text(const PrevalenceConfig &prevalence);
std::string canonical_text(const ModifierTable &table);
std::string canonical_text(const NoiseConfig &noise);
std::string canonical_text(const SimilarityModel &model, const HealthFilterConfig &filter);

/// SHA-256 of each canonical rendering, keyed pyramid / prevalence / modifier_table / noise / model.
std::map<std::string, std::string> config_digests(const RunConfig &config);

} // namespace healthroute
