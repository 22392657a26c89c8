#pragma once

#include "healthroute/population.h"
#include "healthroute/rating_sim.h"
#include "healthroute/ratings_matrix.h"
#include "healthroute/routes.h"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace healthroute {

enum class SimilarityMetric { pearson, cosine };

/// "pearson" or "cosine", case-insensitive. Throws ConfigError otherwise.
SimilarityMetric parse_metric(std::string_view text);
std::string_view to_string(SimilarityMetric metric) noexcept;

struct SimilarityModel {
    SimilarityMetric metric{SimilarityMetric::pearson};
    std::size_t k_neighbors{30};
    /// Minimum number of co-rated routes for a similarity to be defined.
    std::size_t min_overlap{3};

    /// Throws ConfigError if k_neighbors or min_overlap is zero.
    void validate() const;

    friend bool operator==(const SimilarityModel &, const SimilarityModel &) = default;
};

/// Similarity of two rating rows over their co-rated cells (NaN marks unrated).
/// Pearson centres each row on its mean over the co-rated cells; cosine uses raw values.
/// Returns nullopt when fewer than min_overlap cells are co-rated or either side has zero
/// variance (Pearson) or zero norm (cosine). Values within 1e-12 of +-1 are snapped to +-1, so
/// perfectly (anti)correlated rows tie exactly whatever the rounding. Throws
/// std::invalid_argument on a length mismatch.
std::optional<double> similarity(std::span<const double> u, std::span<const double> v,
                                 const SimilarityModel &model);

struct HealthFilterConfig {
    double threshold{3.0};
    /// Also reject Caution routes for anyone with a condition.
    bool strict{false};

    friend bool operator==(const HealthFilterConfig &, const HealthFilterConfig &) = default;
};

struct HealthVerdict {
    double deterministic_rating{0.0};
    bool rating_ok{true};
    bool status_ok{true};

    bool pass() const noexcept { return rating_ok && status_ok; }
};

/// The route's noise-free rating for this citizen must reach the threshold; in strict mode
/// a Caution route additionally fails for any citizen with a present condition.
HealthVerdict assess_health(const Citizen &citizen, const Route &route, const RouteCatalog &catalog,
                            const ModifierTable &table, const HealthFilterConfig &config);

inline bool health_filter(const Citizen &citizen, const Route &route, const RouteCatalog &catalog,
                          const ModifierTable &table, const HealthFilterConfig &config) {
    return assess_health(citizen, route, catalog, table, config).pass();
}

/// Everything the health filter needs for one user's recommendations.
struct HealthContext {
    const Citizen &citizen;
    const RouteCatalog &catalog;
    const ModifierTable &table;
    HealthFilterConfig config;
};

struct Prediction {
    double value{0.0};
    /// Number of neighbours that contributed; 0 means the route-mean fallback was used.
    std::size_t support{0};
};

struct Recommendation {
    std::string route_id;
    double predicted{0.0};
    std::size_t support{0};
    /// Present when a health filter was applied.
    std::optional<HealthVerdict> health;
};

struct TopNOptions {
    /// Score routes the user already rated too (for complete generator matrices).
    bool include_rated{false};
};

/// User-based collaborative filtering over an immutable ratings snapshot.
///
/// A prediction for (u, r) takes the k users with the highest defined, strictly positive
/// similarity to u among those who rated r (ties broken by lower row index) and returns
///   mean(u) + sum(s_v * (r_v - mean(v))) / sum(|s_v|)
/// clamped to [0, 10], where the means run over each user's rated cells. With no eligible
/// neighbour the prediction falls back to the mean of column r (or the global mean when the
/// column is empty). All queries are const and safe to run concurrently.
class Recommender {
  public:
    /// Throws ConfigError for an invalid model.
    Recommender(RatingsMatrix matrix, SimilarityModel model);

    const RatingsMatrix &matrix() const noexcept { return matrix_; }
    const SimilarityModel &model() const noexcept { return model_; }

    /// Similarity of row `user` to every row (nullopt for itself and undefined pairs).
    std::vector<std::optional<double>> similarities(std::size_t user) const;

    /// Row indices of the neighbourhood used to predict (user, route).
    std::vector<std::size_t> neighbours(std::size_t user, std::size_t route,
                                        std::span<const std::optional<double>> sims) const;

    Prediction predict_at(std::size_t user, std::size_t route,
                          std::span<const std::optional<double>> sims) const;

    /// Throws std::out_of_range for an unknown user or route id.
    Prediction predict(int user_id, std::string_view route_id) const;

    /// Highest predictions first, ties by ascending route id. Candidates are the routes the
    /// user has not rated unless options.include_rated is set. Throws std::invalid_argument
    /// for n == 0 and std::out_of_range for an unknown user.
    std::vector<Recommendation> top_n(int user_id, std::size_t n,
                                      const TopNOptions &options = {}) const;

    /// As above, dropping candidates that fail the health filter.
    std::vector<Recommendation> top_n(int user_id, std::size_t n, const HealthContext &health,
                                      const TopNOptions &options = {}) const;

    double user_mean(std::size_t user) const noexcept { return user_means_[user]; }
    double fallback(std::size_t route) const noexcept { return route_means_[route]; }

  private:
    std::vector<Recommendation> rank(int user_id, std::size_t n, const HealthContext *health,
                                     const TopNOptions &options) const;

    RatingsMatrix matrix_;
    SimilarityModel model_;
    std::vector<double> user_means_;
    std::vector<double> route_means_;
};

} // namespace healthroute
