#include <doctest.h>

#include "healthroute/dataset_io.h"
#include "healthroute/eval.h"
#include "healthroute/rating_sim.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

using namespace healthroute;

namespace {

const std::string kDataDir = HEALTHROUTE_DATA_DIR;

GeneratedRatings tarragona_run(std::uint64_t seed, std::size_t n = 1000) {
    const RouteCatalog catalog{read_routes(kDataDir + "/tarragona_routes.csv")};
    const auto population =
        generate_population(n, AgePyramid::default_pyramid(), PrevalenceConfig{}, seed);
    return generate_ratings(population, catalog, ModifierTable{}, NoiseConfig{}, seed);
}

/// E|clamp(d + e, 0, 10) - d| for e ~ N(0, sigma^2), by Simpson integration over +-8 sigma.
double expected_clamped_error(double d, double sigma) {
    constexpr int steps = 4000;
    const double lo = -8.0 * sigma;
    const double h = 16.0 * sigma / steps;
    double total = 0.0;
    for (int i = 0; i <= steps; ++i) {
        const double e = lo + i * h;
        const double density =
            std::exp(-0.5 * e * e / (sigma * sigma)) / (sigma * std::sqrt(2.0 * std::numbers::pi));
        const double f = std::abs(std::clamp(d + e, 0.0, 10.0) - d) * density;
        const double w = (i == 0 || i == steps) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        total += w * f;
    }
    return total * h / 3.0;
}

} // namespace

TEST_SUITE("eval") {

TEST_CASE("binomial bounds") {
    CHECK(binomial_bound(0.14, 50000) == doctest::Approx(0.0046553).epsilon(1e-4));
    CHECK(binomial_bound(0.034, 50000) == doctest::Approx(0.0024314).epsilon(1e-4));
    CHECK(binomial_bound(0.0, 50000) == 0.0);
    CHECK_THROWS_AS(binomial_bound(0.5, 0), std::invalid_argument);
}

TEST_CASE("prevalence report") {
    PrevalenceConfig zero;
    zero.p_visual = zero.p_respiratory = zero.p_mobility = zero.p_cardio = 0.0;
    const auto healthy = generate_population(1000, AgePyramid::default_pyramid(), zero, 1);
    for (const auto &check : prevalence_report(healthy, zero)) {
        CHECK(check.empirical == 0.0);
        CHECK(check.pass);
    }

    const auto population =
        generate_population(50000, AgePyramid::default_pyramid(), PrevalenceConfig{}, 21);
    const auto report = prevalence_report(population, PrevalenceConfig{});
    REQUIRE(report.size() == 4);
    for (const auto &check : report) {
        CHECK(check.pass);
    }
    CHECK(report[3].condition == Condition::heart);
    CHECK(report[3].bound == doctest::Approx(0.0046553).epsilon(1e-4));
    CHECK(prevalence_report(population, PrevalenceConfig{})[0].affected == report[0].affected);

    CHECK_THROWS_AS(prevalence_report(std::span<const Citizen>{}, PrevalenceConfig{}),
                    std::invalid_argument);
}

TEST_CASE("hold-out split") {
    const auto run = tarragona_run(3);
    const auto split = holdout_split(run.stored, 0.2, 77);
    const auto again = holdout_split(run.stored, 0.2, 77);
    CHECK(split.test == again.test);
    CHECK(split.train == again.train);
    CHECK_FALSE(holdout_split(run.stored, 0.2, 78).test == split.test);

    // 11,000 cells at 0.2: mean 2200, sd about 42.
    CHECK(split.test.size() >= 2050);
    CHECK(split.test.size() <= 2350);
    CHECK(split.train.n_rated() + split.test.size() == run.stored.n_rated());

    std::set<std::pair<std::size_t, std::size_t>> held;
    for (const auto &cell : split.test) {
        CHECK_FALSE(split.train.rated(cell.user, cell.route));
        CHECK(run.stored.rated(cell.user, cell.route));
        held.emplace(cell.user, cell.route);
    }
    CHECK(held.size() == split.test.size());
    for (std::size_t u = 0; u < split.train.n_users(); ++u) {
        std::size_t kept = 0;
        for (std::size_t r = 0; r < split.train.n_routes(); ++r) {
            if (split.train.rated(u, r)) {
                ++kept;
                CHECK(split.train.at(u, r) == run.stored.at(u, r));
            }
        }
        CHECK(kept >= 2);
    }

    const auto tiny = holdout_split(run.stored, 1e-9, 5);
    CHECK(tiny.test.empty());
}

TEST_CASE("hold-out split errors") {
    const auto run = tarragona_run(3, 10);
    CHECK_THROWS_AS(holdout_split(run.stored, 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(holdout_split(run.stored, 1.0, 1), std::invalid_argument);

    RatingsMatrix two{{1, 2}, {"a", "b", "c"}};
    two.set(0, 0, 1);
    two.set(0, 1, 2);
    two.set(1, 0, 3);
    two.set(1, 1, 4);
    two.set(1, 2, 5);
    // User 1 has exactly two ratings and can never lose one; the redraws find a split for user 2.
    const auto split = holdout_split(two, 0.5, 4);
    for (const auto &cell : split.test) {
        CHECK(cell.user == 1);
    }
    RatingsMatrix lonely{{1}, {"a", "b"}};
    lonely.set(0, 0, 1);
    CHECK_THROWS_AS(holdout_split(lonely, 0.5, 1), std::invalid_argument);
    RatingsMatrix crowded{{1}, {"a", "b", "c"}};
    crowded.set(0, 0, 1);
    crowded.set(0, 1, 1);
    crowded.set(0, 2, 1);
    CHECK_THROWS_AS(holdout_split(crowded, 0.999999999, 1), std::invalid_argument);
}

TEST_CASE("accuracy") {
    const std::vector<double> truth{1, 2, 3, 4};
    const auto exact = accuracy(truth, truth);
    CHECK(exact.mae == 0.0);
    CHECK(exact.rmse == 0.0);
    CHECK(exact.count == 4);

    const std::vector<double> shifted{2, 3, 4, 5};
    const auto offset = accuracy(shifted, truth);
    CHECK(offset.mae == doctest::Approx(1.0));
    CHECK(offset.rmse == doctest::Approx(1.0));

    const std::vector<double> mixed{1, 2, 3, 8};
    const auto m = accuracy(mixed, truth);
    CHECK(m.mae == doctest::Approx(1.0));
    CHECK(m.rmse == doctest::Approx(2.0));

    const std::vector<double> missing{1, 2, RatingsMatrix::kUnrated, 4};
    CHECK_THROWS_AS(accuracy(missing, truth), std::invalid_argument);
    CHECK_THROWS_AS(accuracy(std::vector<double>{1}, truth), std::invalid_argument);
    CHECK_THROWS_AS(accuracy(std::vector<double>{}, std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("MAE never exceeds RMSE") {
    SplitMix64 engine{4};
    std::uniform_real_distribution<double> value(0.0, 10.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> p(1 + engine() % 50);
        std::vector<double> t(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) {
            p[i] = value(engine);
            t[i] = value(engine);
        }
        const auto a = accuracy(p, t);
        CHECK(a.mae <= a.rmse + 1e-12);
    }
}

TEST_CASE("noise floor") {
    CHECK(gaussian_noise_floor(1.5) == doctest::Approx(1.1968268).epsilon(1e-7));
    CHECK(gaussian_noise_floor(0.0) == 0.0);
    // The integrator reproduces the unclamped value when the bounds are 10 sigma away.
    CHECK(expected_clamped_error(5.0, 0.5) == doctest::Approx(gaussian_noise_floor(0.5)).epsilon(1e-6));
    // At 3.3 sigma the clamp already trims the tails.
    CHECK(expected_clamped_error(5.0, 1.5) < gaussian_noise_floor(1.5));
    CHECK(expected_clamped_error(5.0, 1.5) > gaussian_noise_floor(1.5) - 1e-3);
}

TEST_CASE("oracle baseline against an independent clamped-noise expectation") {
    const auto run = tarragona_run(42);
    const auto split = holdout_split(run.stored, 0.2, 42);
    const auto truth = cell_values(run.noisy, split.test);
    const auto oracle = accuracy(cell_values(run.deterministic, split.test), truth);

    double expected = 0.0;
    double spread = 0.0;
    for (const auto &cell : split.test) {
        expected += expected_clamped_error(run.deterministic.at(cell.user, cell.route), 1.5);
    }
    expected /= static_cast<double>(split.test.size());
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double d = run.deterministic.at(split.test[i].user, split.test[i].route);
        const double err = std::abs(truth[i] - d);
        spread += (err - oracle.mae) * (err - oracle.mae);
    }
    const double se = std::sqrt(spread / static_cast<double>(truth.size() - 1)) /
                      std::sqrt(static_cast<double>(truth.size()));
    MESSAGE("oracle MAE " << oracle.mae << ", expected " << expected << ", se " << se);
    CHECK(std::abs(oracle.mae - expected) <= 4.0 * se);
    CHECK(std::abs(oracle.mae - gaussian_noise_floor(1.5)) <= 0.1);
}

TEST_CASE("hold-out evaluation report") {
    const auto run = tarragona_run(7);
    const auto report =
        evaluate_holdout(run.stored, &run.noisy, &run.deterministic, 0.2, 7, SimilarityModel{}, 1.5);
    MESSAGE("CF MAE " << report.cf.mae << ", RMSE " << report.cf.rmse << ", oracle MAE "
                      << report.oracle->mae << ", P@3 " << *report.precision_at_3);
    CHECK(report.test_cells + report.train_cells == 11000);
    CHECK(report.full_precision_truth);
    CHECK(report.cf.count == report.test_cells);
    CHECK(report.cf.mae <= report.cf.rmse);
    CHECK(report.noise_floor == doctest::Approx(1.1968268));
    CHECK(report.cf_within_band);
    REQUIRE(report.oracle.has_value());
    CHECK(report.oracle->mae < report.cf.mae);
    CHECK(*report.precision_at_3 >= 0.0);
    CHECK(*report.precision_at_3 <= 1.0);

    const auto stored_only = evaluate_holdout(run.stored, nullptr, nullptr, 0.2, 7,
                                              SimilarityModel{}, 1.5);
    CHECK_FALSE(stored_only.full_precision_truth);
    CHECK_FALSE(stored_only.oracle.has_value());
    CHECK(stored_only.test_cells == report.test_cells);
}

TEST_CASE("precision at N") {
    RatingsMatrix train{{1, 2}, {"a", "b", "c", "d"}};
    train.set(0, 0, 5);
    train.set(1, 0, 5);
    train.set(1, 1, 9);
    train.set(1, 2, 1);
    train.set(1, 3, 4);
    const Recommender rec{train, SimilarityModel{}};
    // User 1 falls back to column means b = 9, c = 1, d = 4.
    RatingsMatrix oracle{{1, 2}, {"a", "b", "c", "d"}};
    oracle.set(0, 1, 2);
    oracle.set(0, 2, 8);
    oracle.set(0, 3, 3);
    const std::vector<CellRef> test{{0, 1}, {0, 2}, {0, 3}};
    CHECK(precision_at_n(rec, oracle, test, 1) == 0.0);
    CHECK(precision_at_n(rec, oracle, test, 2) == doctest::Approx(0.5));
    CHECK(precision_at_n(rec, oracle, test, 3) == 1.0);
    CHECK_THROWS_AS(precision_at_n(rec, oracle, test, 0), std::invalid_argument);
}

} // TEST_SUITE
