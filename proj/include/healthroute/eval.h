#pragma once

#include "healthroute/population.h"
#include "healthroute/ratings_matrix.h"
#include "healthroute/recommender.h"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace healthroute {

/// sigmas * sqrt(p (1 - p) / n).
double binomial_bound(double p, std::size_t n, double sigmas = 3.0);

struct PrevalenceCheck {
    Condition condition;
    double target;
    double empirical;
    double bound;
    std::size_t affected;
    bool pass;
};

/// Empirical share with severity > 0 per condition against its configured target, passing
/// when the difference is within the 3-sigma binomial bound. Throws std::invalid_argument
/// for an empty population.
std::vector<PrevalenceCheck> prevalence_report(std::span<const Citizen> population,
                                               const PrevalenceConfig &cfg);

struct CellRef {
    std::size_t user;
    std::size_t route;

    friend bool operator==(CellRef, CellRef) noexcept = default;
};

struct HoldoutSplit {
    RatingsMatrix train;
    std::vector<CellRef> test;
};

/// Hides each rated cell independently with probability `fraction`, keyed by
/// (seed, user id, attempt). A user left with fewer than two training ratings has all of
/// their cells redrawn. Throws std::invalid_argument unless 0 < fraction < 1, or when some
/// user has fewer than two ratings (or cannot keep two after repeated redraws).
HoldoutSplit holdout_split(const RatingsMatrix &matrix, double fraction, std::uint64_t seed);

struct Accuracy {
    double mae{0.0};
    double rmse{0.0};
    std::size_t count{0};
};

/// Throws std::invalid_argument when the spans differ in length, are empty, or a
/// prediction is missing (NaN).
Accuracy accuracy(std::span<const double> predictions, std::span<const double> truth);

/// Values of `source` at the given cells.
std::vector<double> cell_values(const RatingsMatrix &source, std::span<const CellRef> cells);

/// CF predictions for the cells; similarities are computed once per distinct user.
std::vector<double> predict_cells(const Recommender &recommender, std::span<const CellRef> cells);

/// E|e| for e ~ N(0, sigma^2): sigma * sqrt(2 / pi).
double gaussian_noise_floor(double sigma) noexcept;

/// Mean over users with held-out cells of |CF top-N ∩ oracle top-N| / min(N, |held-out|),
/// both rankings restricted to that user's held-out routes (ties by route id).
double precision_at_n(const Recommender &recommender, const RatingsMatrix &oracle,
                      std::span<const CellRef> test, std::size_t n);

struct EvaluationReport {
    std::size_t train_cells{0};
    std::size_t test_cells{0};
    Accuracy cf;
    /// Present when the deterministic ratings are available.
    std::optional<Accuracy> oracle;
    std::optional<double> precision_at_3;
    double noise_std{0.0};
    double noise_floor{0.0};
    /// True when the held-out truth is the full-precision noisy rating (not the rounded one).
    bool full_precision_truth{false};
    /// CF MAE within [floor - 0.1, floor + 0.6].
    bool cf_within_band{false};
};

/// Hold-out evaluation of the CF predictor. `noisy` supplies the full-precision truth and
/// `deterministic` the oracle baseline; either may be absent.
EvaluationReport evaluate_holdout(const RatingsMatrix &stored, const RatingsMatrix *noisy,
                                  const RatingsMatrix *deterministic, double fraction,
                                  std::uint64_t seed, const SimilarityModel &model,
                                  double noise_std);

} // namespace healthroute
