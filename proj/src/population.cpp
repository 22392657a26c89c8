#include "healthroute/population.h"

#include "healthroute/errors.h"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numeric>
#include <random>

namespace healthroute {

Severity Severity::from_tenths(int tenths) {
    if (tenths < 0 || tenths > 10) {
        throw ValidationError(fmt::format("severity must be 0..10 tenths, got {}", tenths));
    }

    Severity result;
    result.tenths_ = static_cast<std::uint8_t>(tenths);
    return result;
}

Severity Severity::from_value(double value) {
    const double scaled = value * 10.0;
    const double nearest = std::round(scaled);
    if (!std::isfinite(value) || std::abs(scaled - nearest) > 1e-9 || nearest < 0.0 ||
        nearest > 10.0) {
        throw ValidationError(
            fmt::format("severity {} is not a multiple of 0.1 in [0, 1]", value));
    }

    return from_tenths(static_cast<int>(nearest));
}

const char *condition_name(Condition condition) noexcept {
    switch (condition) {
    case Condition::visual:
        return "visual";
    case Condition::respiratory:
        return "respiratory";
    case Condition::mobility:
        return "mobility";
    case Condition::heart:
        return "heart";
    }
    return "unknown";
}

Severity HealthConditions::operator[](Condition condition) const noexcept {
    switch (condition) {
    case Condition::visual:
        return visual_impairment;
    case Condition::respiratory:
        return respiratory;
    case Condition::mobility:
        return reduced_mobility;
    case Condition::heart:
        break;
    }
    return heart_disease;
}

Severity &HealthConditions::operator[](Condition condition) noexcept {
    switch (condition) {
    case Condition::visual:
        return visual_impairment;
    case Condition::respiratory:
        return respiratory;
    case Condition::mobility:
        return reduced_mobility;
    case Condition::heart:
        break;
    }
    return heart_disease;
}

void validate_citizen(const Citizen &citizen, int heart_age_threshold) {
    if (citizen.age < kMinAge || citizen.age > kMaxAge) {
        throw ValidationError(fmt::format("citizen {}: age {} outside [{}, {}]", citizen.id,
                                          citizen.age, kMinAge, kMaxAge));
    }

    if (citizen.health.heart_disease.present() && citizen.age <= heart_age_threshold) {
        throw ValidationError(fmt::format("citizen {}: heart disease at age {} (<= {})",
                                          citizen.id, citizen.age, heart_age_threshold));
    }
}

double PrevalenceConfig::probability(Condition condition) const noexcept {
    switch (condition) {
    case Condition::visual:
        return p_visual;
    case Condition::respiratory:
        return p_respiratory;
    case Condition::mobility:
        return p_mobility;
    case Condition::heart:
        break;
    }
    return p_cardio;
}

void PrevalenceConfig::validate() const {
    for (auto condition : kAllConditions) {
        const double p = probability(condition);
        if (!(p >= 0.0 && p <= 1.0)) {
            throw ConfigError(fmt::format("prevalence of {} must be in [0, 1], got {}",
                                          condition_name(condition), p));
        }
    }

    if (heart_age_threshold < kMinAge - 1 || heart_age_threshold >= kMaxAge) {
        throw ConfigError(fmt::format("heart_age_threshold must be in [{}, {}), got {}",
                                      kMinAge - 1, kMaxAge, heart_age_threshold));
    }

    double total = 0.0;
    for (double w : severity_weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw ConfigError("severity weights must be finite and non-negative");
        }
        total += w;
    }
    if (total <= 0.0) {
        throw ConfigError("severity weights must have a positive total");
    }
}

AgePyramid::AgePyramid(std::vector<AgeBracket> brackets) : brackets_{std::move(brackets)} {
    if (brackets_.empty()) {
        throw ConfigError("age pyramid has no brackets");
    }

    int expected_min = kMinAge;
    for (const auto &bracket : brackets_) {
        if (bracket.min_age != expected_min) {
            throw ConfigError(fmt::format(
                "age pyramid bracket {}-{} leaves a gap or overlap: expected it to start at {}",
                bracket.min_age, bracket.max_age, expected_min));
        }
        if (bracket.max_age < bracket.min_age) {
            throw ConfigError(fmt::format("age pyramid bracket {}-{} is empty", bracket.min_age,
                                          bracket.max_age));
        }
        if (!(bracket.weight >= 0.0) || !std::isfinite(bracket.weight)) {
            throw ConfigError(fmt::format("age pyramid bracket {}-{} has invalid weight {}",
                                          bracket.min_age, bracket.max_age, bracket.weight));
        }
        total_weight_ += bracket.weight;
        expected_min = bracket.max_age + 1;
    }

    if (expected_min != kMaxAge + 1) {
        throw ConfigError(fmt::format("age pyramid must end at {}, ends at {}", kMaxAge,
                                      expected_min - 1));
    }
    if (total_weight_ <= 0.0) {
        throw ConfigError("age pyramid weights sum to zero");
    }
}

AgePyramid AgePyramid::default_pyramid() {
    return AgePyramid{{{18, 35, 0.27}, {36, 50, 0.29}, {51, 65, 0.24}, {66, 90, 0.20}}};
}

double AgePyramid::probability(std::size_t i) const {
    return brackets_.at(i).weight / total_weight_;
}

double AgePyramid::share_above(int threshold) const noexcept {
    double share = 0.0;
    for (const auto &bracket : brackets_) {
        const int width = bracket.max_age - bracket.min_age + 1;
        const int above = std::clamp(bracket.max_age - threshold, 0, width);
        share += (bracket.weight / total_weight_) * above / width;
    }
    return share;
}

int sample_age(const AgePyramid &pyramid, SplitMix64 &engine) {
    const auto &brackets = pyramid.brackets();
    std::vector<double> weights;
    weights.reserve(brackets.size());
    for (const auto &bracket : brackets) {
        weights.push_back(bracket.weight);
    }

    std::discrete_distribution<std::size_t> pick_bracket(weights.begin(), weights.end());
    const auto &bracket = brackets[pick_bracket(engine)];
    std::uniform_int_distribution<int> pick_age(bracket.min_age, bracket.max_age);
    return pick_age(engine);
}

double heart_conditional_probability(const AgePyramid &pyramid, const PrevalenceConfig &cfg) {
    if (cfg.p_cardio == 0.0) {
        return 0.0;
    }

    const double share = pyramid.share_above(cfg.heart_age_threshold);
    if (share <= 0.0 || cfg.p_cardio > share) {
        throw ConfigError(fmt::format(
            "cardiovascular prevalence {} cannot be reached: only {:.4f} of the pyramid is "
            "older than {}",
            cfg.p_cardio, share, cfg.heart_age_threshold));
    }
    return cfg.p_cardio / share;
}

ConditionSampler::ConditionSampler(const PrevalenceConfig &cfg, const AgePyramid &pyramid)
    : cfg_{cfg}, heart_probability_{0.0} {
    cfg_.validate();
    heart_probability_ = heart_conditional_probability(pyramid, cfg_);
}

HealthConditions ConditionSampler::operator()(int age, SplitMix64 &engine) const {
    std::discrete_distribution<int> pick_tenths(cfg_.severity_weights.begin(),
                                                cfg_.severity_weights.end());
    HealthConditions health;
    for (auto condition : kAllConditions) {
        double p = cfg_.probability(condition);
        if (condition == Condition::heart) {
            p = age > cfg_.heart_age_threshold ? heart_probability_ : 0.0;
        }

        // One uniform draw per condition regardless of outcome keeps the stream layout
        // independent of the configured probabilities.
        const double u = std::generate_canonical<double, 64>(engine);
        if (u < p) {
            health[condition] = Severity::from_tenths(pick_tenths(engine) + 1);
        }
    }
    return health;
}

HealthConditions sample_conditions(int age, const PrevalenceConfig &cfg,
                                   const AgePyramid &pyramid, SplitMix64 &engine) {
    return ConditionSampler{cfg, pyramid}(age, engine);
}

Citizen generate_citizen(int id, const AgePyramid &pyramid, const ConditionSampler &sampler,
                         std::uint64_t seed) {
    auto engine = substream(seed, StreamDomain::population, static_cast<std::uint64_t>(id));
    Citizen citizen;
    citizen.id = id;
    citizen.age = sample_age(pyramid, engine);
    citizen.health = sampler(citizen.age, engine);
    return citizen;
}

std::vector<Citizen> generate_population(std::size_t n, const AgePyramid &pyramid,
                                         const PrevalenceConfig &cfg, std::uint64_t seed) {
    if (n == 0) {
        throw ConfigError("population size must be at least 1");
    }

    const ConditionSampler sampler{cfg, pyramid};
    std::vector<Citizen> population;
    population.reserve(n);
    for (std::size_t i = 1; i <= n; ++i) {
        population.push_back(generate_citizen(static_cast<int>(i), pyramid, sampler, seed));
    }
    return population;
}

} // namespace healthroute
