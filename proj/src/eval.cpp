#include "healthroute/eval.h"

#include "healthroute/rating_sim.h"
#include "healthroute/rng.h"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numbers>
#include <random>
#include <stdexcept>

namespace healthroute {

namespace {

constexpr int kMaxRedraws = 1000;

std::vector<std::size_t> top_by(std::vector<std::size_t> routes, const RatingsMatrix &names,
                                std::size_t n, const auto &score) {
    std::sort(routes.begin(), routes.end(), [&](std::size_t a, std::size_t b) {
        const double sa = score(a);
        const double sb = score(b);
        if (sa != sb) {
            return sa > sb;
        }
        return names.route_ids()[a] < names.route_ids()[b];
    });
    routes.resize(std::min(n, routes.size()));
    return routes;
}

} // namespace

double binomial_bound(double p, std::size_t n, double sigmas) {
    if (n == 0) {
        throw std::invalid_argument("binomial bound needs n >= 1");
    }
    return sigmas * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

std::vector<PrevalenceCheck> prevalence_report(std::span<const Citizen> population,
                                               const PrevalenceConfig &cfg) {
    if (population.empty()) {
        throw std::invalid_argument("prevalence report of an empty population");
    }

    std::vector<PrevalenceCheck> report;
    for (auto condition : kAllConditions) {
        const auto affected = static_cast<std::size_t>(
            std::count_if(population.begin(), population.end(),
                          [&](const Citizen &c) { return c.health[condition].present(); }));
        PrevalenceCheck check{condition, cfg.probability(condition), 0.0, 0.0, affected, false};
        check.empirical = static_cast<double>(affected) / static_cast<double>(population.size());
        check.bound = binomial_bound(check.target, population.size());
        check.pass = std::abs(check.empirical - check.target) <= check.bound;
        report.push_back(check);
    }
    return report;
}

HoldoutSplit holdout_split(const RatingsMatrix &matrix, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw std::invalid_argument(fmt::format("hold-out fraction must be in (0, 1), got {}", fraction));
    }

    HoldoutSplit split{matrix, {}};
    std::vector<std::size_t> rated;
    std::vector<std::size_t> held;
    for (std::size_t u = 0; u < matrix.n_users(); ++u) {
        rated.clear();
        for (std::size_t r = 0; r < matrix.n_routes(); ++r) {
            if (matrix.rated(u, r)) {
                rated.push_back(r);
            }
        }
        const int user_id = matrix.user_ids()[u];
        if (rated.size() < 2) {
            throw std::invalid_argument(fmt::format(
                "user {} has {} ratings; a hold-out split needs at least 2 per user", user_id,
                rated.size()));
        }

        bool feasible = false;
        for (int attempt = 0; attempt < kMaxRedraws && !feasible; ++attempt) {
            auto engine = substream(seed, StreamDomain::holdout,
                                    static_cast<std::uint64_t>(user_id),
                                    static_cast<std::uint64_t>(attempt));
            held.clear();
            for (auto r : rated) {
                if (std::generate_canonical<double, 64>(engine) < fraction) {
                    held.push_back(r);
                }
            }
            feasible = rated.size() - held.size() >= 2;
        }
        if (!feasible) {
            throw std::invalid_argument(fmt::format(
                "fraction {} cannot leave user {} with two training ratings", fraction, user_id));
        }

        for (auto r : held) {
            split.train.clear(u, r);
            split.test.push_back(CellRef{u, r});
        }
    }
    return split;
}

Accuracy accuracy(std::span<const double> predictions, std::span<const double> truth) {
    if (predictions.size() != truth.size()) {
        throw std::invalid_argument(fmt::format("{} predictions for {} test cells",
                                                predictions.size(), truth.size()));
    }
    if (truth.empty()) {
        throw std::invalid_argument("accuracy over an empty test set");
    }

    double abs_sum = 0.0;
    double sq_sum = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (std::isnan(predictions[i])) {
            throw std::invalid_argument(fmt::format("test cell {} has no prediction", i));
        }
        const double err = predictions[i] - truth[i];
        abs_sum += std::abs(err);
        sq_sum += err * err;
    }
    const auto n = static_cast<double>(truth.size());
    return Accuracy{abs_sum / n, std::sqrt(sq_sum / n), truth.size()};
}

std::vector<double> cell_values(const RatingsMatrix &source, std::span<const CellRef> cells) {
    std::vector<double> values;
    values.reserve(cells.size());
    for (const auto &cell : cells) {
        values.push_back(source.at(cell.user, cell.route));
    }
    return values;
}

std::vector<double> predict_cells(const Recommender &recommender, std::span<const CellRef> cells) {
    std::vector<double> predictions(cells.size(), RatingsMatrix::kUnrated);
    std::vector<std::size_t> order(cells.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return cells[a].user < cells[b].user; });

    std::optional<std::size_t> current;
    std::vector<std::optional<double>> sims;
    for (auto i : order) {
        if (current != cells[i].user) {
            current = cells[i].user;
            sims = recommender.similarities(cells[i].user);
        }
        predictions[i] = recommender.predict_at(cells[i].user, cells[i].route, sims).value;
    }
    return predictions;
}

double gaussian_noise_floor(double sigma) noexcept {
    return sigma * std::sqrt(2.0 / std::numbers::pi);
}

double precision_at_n(const Recommender &recommender, const RatingsMatrix &oracle,
                      std::span<const CellRef> test, std::size_t n) {
    if (n == 0) {
        throw std::invalid_argument("precision@N needs N >= 1");
    }

    std::vector<std::vector<std::size_t>> held(recommender.matrix().n_users());
    for (const auto &cell : test) {
        held[cell.user].push_back(cell.route);
    }

    double total = 0.0;
    std::size_t users = 0;
    for (std::size_t u = 0; u < held.size(); ++u) {
        if (held[u].empty()) {
            continue;
        }
        const auto sims = recommender.similarities(u);
        std::vector<double> predicted(recommender.matrix().n_routes(), 0.0);
        for (auto r : held[u]) {
            predicted[r] = recommender.predict_at(u, r, sims).value;
        }
        const auto cf = top_by(held[u], recommender.matrix(), n,
                               [&](std::size_t r) { return predicted[r]; });
        const auto best = top_by(held[u], recommender.matrix(), n,
                                 [&](std::size_t r) { return oracle.at(u, r); });
        const auto hits = std::count_if(cf.begin(), cf.end(), [&](std::size_t r) {
            return std::find(best.begin(), best.end(), r) != best.end();
        });
        total += static_cast<double>(hits) / static_cast<double>(best.size());
        ++users;
    }
    return users > 0 ? total / static_cast<double>(users) : 0.0;
}

EvaluationReport evaluate_holdout(const RatingsMatrix &stored, const RatingsMatrix *noisy,
                                  const RatingsMatrix *deterministic, double fraction,
                                  std::uint64_t seed, const SimilarityModel &model,
                                  double noise_std) {
    auto split = holdout_split(stored, fraction, seed);
    EvaluationReport report;
    report.train_cells = split.train.n_rated();
    report.test_cells = split.test.size();
    report.noise_std = noise_std;
    report.noise_floor = gaussian_noise_floor(noise_std);
    report.full_precision_truth = noisy != nullptr;

    const Recommender recommender{std::move(split.train), model};
    const auto truth = cell_values(noisy != nullptr ? *noisy : stored, split.test);
    report.cf = accuracy(predict_cells(recommender, split.test), truth);
    if (deterministic != nullptr) {
        report.oracle = accuracy(cell_values(*deterministic, split.test), truth);
        report.precision_at_3 = precision_at_n(recommender, *deterministic, split.test, 3);
    }
    report.cf_within_band = report.cf.mae >= report.noise_floor - 0.1 &&
                            report.cf.mae <= report.noise_floor + 0.6;
    return report;
}

} // namespace healthroute
