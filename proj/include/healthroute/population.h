#pragma once

#include "healthroute/rng.h"

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace healthroute {

/// Condition severity on the grid {0.0, 0.1, ..., 1.0}, stored as an integer number
/// of tenths so grid membership is exact. Zero means the condition is absent.
class Severity {
  public:
    constexpr Severity() noexcept = default;

    /// Throws ValidationError outside 0..10.
    static Severity from_tenths(int tenths);

    /// Accepts only values within 1e-9 of a tenth in [0, 1]; throws ValidationError otherwise.
    static Severity from_value(double value);

    constexpr int tenths() const noexcept { return tenths_; }
    constexpr double value() const noexcept { return tenths_ / 10.0; }
    constexpr bool present() const noexcept { return tenths_ > 0; }

    friend constexpr auto operator<=>(Severity, Severity) noexcept = default;

  private:
    std::uint8_t tenths_{0};
};

/// Bit order of the four conditions; also the column order of the citizens file.
enum class Condition : int { visual = 0, respiratory = 1, mobility = 2, heart = 3 };

inline constexpr std::size_t kConditionCount = 4;
inline constexpr std::array<Condition, kConditionCount> kAllConditions{
    Condition::visual, Condition::respiratory, Condition::mobility, Condition::heart};

const char *condition_name(Condition condition) noexcept;

struct HealthConditions {
    Severity visual_impairment;
    Severity respiratory;
    Severity reduced_mobility;
    Severity heart_disease;

    Severity operator[](Condition condition) const noexcept;
    Severity &operator[](Condition condition) noexcept;

    friend bool operator==(const HealthConditions &, const HealthConditions &) = default;
};

inline constexpr int kMinAge = 18;
inline constexpr int kMaxAge = 90;

struct Citizen {
    int id{0};
    int age{kMinAge};
    HealthConditions health;

    friend bool operator==(const Citizen &, const Citizen &) = default;
};

/// Throws ValidationError unless 18 <= age <= 90 and heart disease implies age > threshold.
void validate_citizen(const Citizen &citizen, int heart_age_threshold = 45);

struct PrevalenceConfig {
    double p_visual{0.034};
    double p_respiratory{0.032};
    double p_mobility{0.02};
    double p_cardio{0.14};
    int heart_age_threshold{45};
    /// Relative weights of severities 0.1 .. 1.0 for a present condition (uniform by default).
    std::array<double, 10> severity_weights{1, 1, 1, 1, 1, 1, 1, 1, 1, 1};

    double probability(Condition condition) const noexcept;
    void validate() const;

    friend bool operator==(const PrevalenceConfig &, const PrevalenceConfig &) = default;
};

/// Inclusive integer age range with a relative weight.
struct AgeBracket {
    int min_age;
    int max_age;
    double weight;

    friend bool operator==(const AgeBracket &, const AgeBracket &) = default;
};

/// Age distribution over [18, 90]: pick a bracket by weight, then a uniform integer age in it.
class AgePyramid {
  public:
    /// Brackets must be sorted, contiguous and cover exactly [18, 90]; weights non-negative
    /// with a positive total. Throws ConfigError otherwise.
    explicit AgePyramid(std::vector<AgeBracket> brackets);

    /// (18,35] 27%, (35,50] 29%, (50,65] 24%, (65,90] 20%. The first bracket also holds 18.
    static AgePyramid default_pyramid();

    const std::vector<AgeBracket> &brackets() const noexcept { return brackets_; }

    /// Weight of bracket i after normalization to a total of 1.
    double probability(std::size_t i) const;

    /// P(age > threshold) under this pyramid.
    double share_above(int threshold) const noexcept;

    friend bool operator==(const AgePyramid &, const AgePyramid &) = default;

  private:
    std::vector<AgeBracket> brackets_;
    double total_weight_{0.0};
};

int sample_age(const AgePyramid &pyramid, SplitMix64 &engine);

/// Probability of heart disease for a citizen older than the threshold, rescaled so the
/// population-wide prevalence equals p_cardio. Throws ConfigError if it would exceed 1.
double heart_conditional_probability(const AgePyramid &pyramid, const PrevalenceConfig &cfg);

/// Draws conditions for one citizen. Stateless apart from the precomputed heart
/// probability, so one sampler can be shared across threads.
class ConditionSampler {
  public:
    ConditionSampler(const PrevalenceConfig &cfg, const AgePyramid &pyramid);

    HealthConditions operator()(int age, SplitMix64 &engine) const;

    double heart_probability() const noexcept { return heart_probability_; }

  private:
    PrevalenceConfig cfg_;
    double heart_probability_;
};

HealthConditions sample_conditions(int age, const PrevalenceConfig &cfg,
                                   const AgePyramid &pyramid, SplitMix64 &engine);

/// Citizen with the given id, drawn from the substream keyed by (seed, id).
Citizen generate_citizen(int id, const AgePyramid &pyramid, const ConditionSampler &sampler,
                         std::uint64_t seed);

/// n citizens with ids 1..n. Pure function of its arguments. Throws ConfigError for n == 0.
std::vector<Citizen> generate_population(std::size_t n, const AgePyramid &pyramid,
                                         const PrevalenceConfig &cfg, std::uint64_t seed);

} // namespace healthroute
