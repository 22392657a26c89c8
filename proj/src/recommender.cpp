#include "healthroute/recommender.h"

#include "healthroute/errors.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fmt/format.h>
#include <numeric>
#include <stdexcept>

namespace healthroute {

namespace {

constexpr double kUnitSnap = 1e-12;

} // namespace

SimilarityMetric parse_metric(std::string_view text) {
    std::string word;
    for (char c : text) {
        word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    if (word == "pearson") {
        return SimilarityMetric::pearson;
    }
    if (word == "cosine") {
        return SimilarityMetric::cosine;
    }
    throw ConfigError(fmt::format("unknown similarity metric '{}' (expected pearson or cosine)", text));
}

std::string_view to_string(SimilarityMetric metric) noexcept {
    return metric == SimilarityMetric::cosine ? "cosine" : "pearson";
}

void SimilarityModel::validate() const {
    if (k_neighbors == 0) {
        throw ConfigError("k_neighbors must be at least 1");
    }
    if (min_overlap == 0) {
        throw ConfigError("min_overlap must be at least 1");
    }
}

std::optional<double> similarity(std::span<const double> u, std::span<const double> v,
                                 const SimilarityModel &model) {
    if (u.size() != v.size()) {
        throw std::invalid_argument(
            fmt::format("rating rows differ in length ({} vs {})", u.size(), v.size()));
    }

    std::size_t overlap = 0;
    double sum_u = 0.0;
    double sum_v = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (!std::isnan(u[i]) && !std::isnan(v[i])) {
            ++overlap;
            sum_u += u[i];
            sum_v += v[i];
        }
    }
    if (overlap < model.min_overlap || overlap == 0) {
        return std::nullopt;
    }

    const bool centred = model.metric == SimilarityMetric::pearson;
    const double mean_u = centred ? sum_u / static_cast<double>(overlap) : 0.0;
    const double mean_v = centred ? sum_v / static_cast<double>(overlap) : 0.0;
    double dot = 0.0;
    double norm_u = 0.0;
    double norm_v = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (!std::isnan(u[i]) && !std::isnan(v[i])) {
            const double a = u[i] - mean_u;
            const double b = v[i] - mean_v;
            dot += a * b;
            norm_u += a * a;
            norm_v += b * b;
        }
    }
    if (norm_u <= 0.0 || norm_v <= 0.0) {
        return std::nullopt;
    }
    const double s = dot / std::sqrt(norm_u * norm_v);
    if (std::abs(s) >= 1.0 - kUnitSnap) {
        return std::copysign(1.0, s);
    }
    return s;
}

HealthVerdict assess_health(const Citizen &citizen, const Route &route, const RouteCatalog &catalog,
                            const ModifierTable &table, const HealthFilterConfig &config) {
    HealthVerdict verdict;
    verdict.deterministic_rating =
        deterministic_rating(citizen, catalog.scores(catalog.index_of(route.id)), table);
    verdict.rating_ok = verdict.deterministic_rating >= config.threshold;

    if (config.strict && route.status == RouteStatus::caution) {
        const bool any_condition =
            std::any_of(kAllConditions.begin(), kAllConditions.end(),
                        [&](Condition c) { return citizen.health[c].present(); });
        verdict.status_ok = !any_condition;
    }
    return verdict;
}

Recommender::Recommender(RatingsMatrix matrix, SimilarityModel model)
    : matrix_{std::move(matrix)}, model_{model} {
    model_.validate();

    const auto n_users = matrix_.n_users();
    const auto n_routes = matrix_.n_routes();
    user_means_.assign(n_users, RatingsMatrix::kUnrated);
    std::vector<double> column_sum(n_routes, 0.0);
    std::vector<std::size_t> column_count(n_routes, 0);
    double global_sum = 0.0;
    std::size_t global_count = 0;

    for (std::size_t u = 0; u < n_users; ++u) {
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t r = 0; r < n_routes; ++r) {
            const double x = matrix_.at(u, r);
            if (!std::isnan(x)) {
                sum += x;
                ++count;
                column_sum[r] += x;
                ++column_count[r];
            }
        }
        if (count > 0) {
            user_means_[u] = sum / static_cast<double>(count);
        }
        global_sum += sum;
        global_count += count;
    }

    const double global_mean =
        global_count > 0 ? global_sum / static_cast<double>(global_count) : 0.0;
    route_means_.resize(n_routes);
    for (std::size_t r = 0; r < n_routes; ++r) {
        route_means_[r] = column_count[r] > 0
                              ? column_sum[r] / static_cast<double>(column_count[r])
                              : global_mean;
    }
}

std::vector<std::optional<double>> Recommender::similarities(std::size_t user) const {
    std::vector<std::optional<double>> sims(matrix_.n_users());
    const auto row = matrix_.row(user);
    for (std::size_t v = 0; v < matrix_.n_users(); ++v) {
        if (v != user) {
            sims[v] = similarity(row, matrix_.row(v), model_);
        }
    }
    return sims;
}

std::vector<std::size_t>
Recommender::neighbours(std::size_t user, std::size_t route,
                        std::span<const std::optional<double>> sims) const {
    std::vector<std::size_t> pool;
    for (std::size_t v = 0; v < matrix_.n_users(); ++v) {
        if (v != user && sims[v] && *sims[v] > 0.0 && matrix_.rated(v, route)) {
            pool.push_back(v);
        }
    }

    const auto closer = [&](std::size_t a, std::size_t b) {
        if (*sims[a] != *sims[b]) {
            return *sims[a] > *sims[b];
        }
        return a < b;
    };
    const auto k = std::min(model_.k_neighbors, pool.size());
    std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k), pool.end(),
                      closer);
    pool.resize(k);
    return pool;
}

Prediction Recommender::predict_at(std::size_t user, std::size_t route,
                                   std::span<const std::optional<double>> sims) const {
    const auto chosen = neighbours(user, route, sims);
    if (chosen.empty()) {
        return Prediction{std::clamp(route_means_[route], 0.0, 10.0), 0};
    }

    double weighted = 0.0;
    double weight = 0.0;
    for (auto v : chosen) {
        weighted += *sims[v] * (matrix_.at(v, route) - user_means_[v]);
        weight += std::abs(*sims[v]);
    }
    return Prediction{std::clamp(user_means_[user] + weighted / weight, 0.0, 10.0),
                      chosen.size()};
}

Prediction Recommender::predict(int user_id, std::string_view route_id) const {
    const auto user = matrix_.user_index(user_id);
    const auto route = matrix_.route_index(route_id);
    const auto sims = similarities(user);
    return predict_at(user, route, sims);
}

std::vector<Recommendation> Recommender::top_n(int user_id, std::size_t n,
                                               const TopNOptions &options) const {
    return rank(user_id, n, nullptr, options);
}

std::vector<Recommendation> Recommender::top_n(int user_id, std::size_t n,
                                               const HealthContext &health,
                                               const TopNOptions &options) const {
    return rank(user_id, n, &health, options);
}

std::vector<Recommendation> Recommender::rank(int user_id, std::size_t n,
                                              const HealthContext *health,
                                              const TopNOptions &options) const {
    if (n == 0) {
        throw std::invalid_argument("top-N needs n >= 1");
    }
    const auto user = matrix_.user_index(user_id);
    const auto sims = similarities(user);

    std::vector<Recommendation> ranked;
    for (std::size_t r = 0; r < matrix_.n_routes(); ++r) {
        if (!options.include_rated && matrix_.rated(user, r)) {
            continue;
        }

        Recommendation rec;
        rec.route_id = matrix_.route_ids()[r];
        if (health != nullptr) {
            const auto &route = health->catalog.find(rec.route_id);
            rec.health = assess_health(health->citizen, route, health->catalog, health->table,
                                       health->config);
            if (!rec.health->pass()) {
                continue;
            }
        }
        const auto prediction = predict_at(user, r, sims);
        rec.predicted = prediction.value;
        rec.support = prediction.support;
        ranked.push_back(std::move(rec));
    }

    std::sort(ranked.begin(), ranked.end(), [](const Recommendation &a, const Recommendation &b) {
        if (a.predicted != b.predicted) {
            return a.predicted > b.predicted;
        }
        return a.route_id < b.route_id;
    });
    if (ranked.size() > n) {
        ranked.resize(n);
    }
    return ranked;
}

} // namespace healthroute
