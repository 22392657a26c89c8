#include <doctest.h>

#include "cf_oracle.h"

#include "healthroute/dataset_io.h"
#include "healthroute/errors.h"
#include "healthroute/recommender.h"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numeric>
#include <random>

using namespace healthroute;

namespace {

const std::string kDataDir = HEALTHROUTE_DATA_DIR;
constexpr double NaN = RatingsMatrix::kUnrated;

std::vector<std::string> route_names(std::size_t m) {
    std::vector<std::string> ids;
    for (std::size_t r = 0; r < m; ++r) {
        ids.push_back(fmt::format("r{:02}", r + 1));
    }
    return ids;
}

RatingsMatrix to_matrix(const oracle::Grid &grid) {
    std::vector<int> users(grid.size());
    std::iota(users.begin(), users.end(), 1);
    RatingsMatrix m{users, route_names(grid.front().size())};
    for (std::size_t u = 0; u < grid.size(); ++u) {
        for (std::size_t r = 0; r < grid[u].size(); ++r) {
            if (!std::isnan(grid[u][r])) {
                m.set(u, r, grid[u][r]);
            }
        }
    }
    return m;
}

oracle::Model to_oracle(const SimilarityModel &model) {
    return {model.metric == SimilarityMetric::cosine, model.k_neighbors, model.min_overlap};
}

/// Continuous ratings with independent sparsity, so similarity ties have probability zero.
oracle::Grid random_grid(std::mt19937_64 &rng, std::size_t users, std::size_t routes,
                         double density, double lo = 0.0, double hi = 10.0) {
    std::uniform_real_distribution<double> value(lo, hi);
    std::bernoulli_distribution keep(density);
    oracle::Grid grid(users, oracle::Row(routes, NaN));
    for (auto &row : grid) {
        for (auto &cell : row) {
            if (keep(rng)) {
                cell = value(rng);
            }
        }
    }
    return grid;
}

Citizen make(int age, int visual, int respiratory, int mobility, int heart) {
    Citizen c;
    c.id = 1;
    c.age = age;
    c.health.visual_impairment = Severity::from_tenths(visual);
    c.health.respiratory = Severity::from_tenths(respiratory);
    c.health.reduced_mobility = Severity::from_tenths(mobility);
    c.health.heart_disease = Severity::from_tenths(heart);
    return c;
}

Route easy_route(std::string id, RouteStatus status = RouteStatus::idle) {
    Route r;
    r.id = std::move(id);
    r.start = GeoPoint{41.0, 1.0};
    r.end = GeoPoint{41.001, 1.0};
    r.distance_km = 1.0;
    r.elevation_gain_m = 0.0;
    r.pavement = Pavement::very_good;
    r.status = status;
    return r;
}

const oracle::Grid kFiveByFour{
    {8, 6, NaN, 3},
    {7, 5, 6, 1},
    {2, 4, 5, 9},
    {9, 6, 8, 5},
    {6, 5, 3, 4},
};

} // namespace

TEST_SUITE("recommender") {

TEST_CASE("similarity examples") {
    const SimilarityModel pearson;
    const std::vector<double> u{1, 2, 3};
    const std::vector<double> v{3, 2, 1};
    CHECK(*similarity(u, u, pearson) == doctest::Approx(1.0));
    CHECK(*similarity(u, v, pearson) == doctest::Approx(-1.0));

    const std::vector<double> flat{5, 5, 5};
    CHECK_FALSE(similarity(flat, u, pearson).has_value());
    CHECK_FALSE(similarity(u, flat, pearson).has_value());

    const std::vector<double> sparse{1, NaN, 3};
    CHECK_FALSE(similarity(sparse, u, pearson).has_value()); // two co-rated < min_overlap 3

    const std::vector<double> shorter{1, 2};
    CHECK_THROWS_AS((void)similarity(u, shorter, pearson), std::invalid_argument);

    SimilarityModel cosine;
    cosine.metric = SimilarityMetric::cosine;
    CHECK(*similarity(flat, flat, cosine) == doctest::Approx(1.0));
    const std::vector<double> w{1, 0, 0};
    const std::vector<double> x{0, 1, 0};
    CHECK(*similarity(w, x, cosine) == doctest::Approx(0.0));
}

TEST_CASE("metric names") {
    CHECK(parse_metric("Pearson") == SimilarityMetric::pearson);
    CHECK(parse_metric("COSINE") == SimilarityMetric::cosine);
    CHECK(to_string(SimilarityMetric::cosine) == "cosine");
    CHECK_THROWS_AS(parse_metric("jaccard"), ConfigError);

    SimilarityModel bad;
    bad.k_neighbors = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = SimilarityModel{};
    bad.min_overlap = 0;
    CHECK_THROWS_AS(Recommender(to_matrix(kFiveByFour), bad), ConfigError);
}

TEST_CASE("frozen 5x4 instance") {
    SimilarityModel model;
    model.min_overlap = 2;
    const auto matrix = to_matrix(kFiveByFour);

    model.k_neighbors = 1;
    const Recommender k1{matrix, model};
    const auto sims = k1.similarities(0);
    CHECK(*sims[1] == doctest::Approx(0.99717646).epsilon(1e-8));
    CHECK(*sims[2] == doctest::Approx(-0.99186978).epsilon(1e-8));
    CHECK(*sims[3] == doctest::Approx(0.92261291).epsilon(1e-8));
    CHECK(*sims[4] == doctest::Approx(0.99339927).epsilon(1e-8));
    CHECK_FALSE(sims[0].has_value());

    CHECK(k1.neighbours(0, 2, sims) == std::vector<std::size_t>{1});
    CHECK(std::abs(k1.predict(1, "r03").value - 6.916666666666667) <= 1e-9);

    model.k_neighbors = 2;
    const Recommender k2{matrix, model};
    CHECK(k2.neighbours(0, 2, sims) == std::vector<std::size_t>{1, 4});
    CHECK(std::abs(k2.predict(1, "r03").value - 5.5442757842205665) <= 1e-9);

    model.k_neighbors = 3;
    const Recommender k3{matrix, model};
    const auto p3 = k3.predict(1, "r03");
    CHECK(k3.neighbours(0, 2, sims) == std::vector<std::size_t>{1, 4, 3});
    CHECK(std::abs(p3.value - 5.899739313148366) <= 1e-9);
    CHECK(p3.support == 3);

    // The negatively correlated user never joins, however large k gets.
    model.k_neighbors = 30;
    const Recommender k30{matrix, model};
    CHECK(k30.predict(1, "r03").support == 3);
}

TEST_CASE("5x4 instance agrees with the oracle and the subset enumeration") {
    for (std::size_t k = 1; k <= 5; ++k) {
        for (bool use_cosine : {false, true}) {
            SimilarityModel model;
            model.min_overlap = 2;
            model.k_neighbors = k;
            model.metric = use_cosine ? SimilarityMetric::cosine : SimilarityMetric::pearson;
            const Recommender rec{to_matrix(kFiveByFour), model};
            const auto om = to_oracle(model);
            for (std::size_t u = 0; u < 5; ++u) {
                const auto sims = rec.similarities(u);
                for (std::size_t r = 0; r < 4; ++r) {
                    auto mine = rec.neighbours(u, r, sims);
                    auto brute = oracle::neighbours_by_subsets(kFiveByFour, u, r, om);
                    auto ranked = oracle::neighbours(kFiveByFour, u, r, om);
                    std::sort(mine.begin(), mine.end());
                    std::sort(brute.begin(), brute.end());
                    CHECK(mine == brute);
                    CHECK(ranked == brute);
                    CHECK(std::abs(rec.predict_at(u, r, sims).value -
                                   oracle::predict(kFiveByFour, u, r, om)) <= 1e-9);
                }
            }
        }
    }
}

TEST_CASE("unanimous neighbourhood reproduces the shared row") {
    const oracle::Grid grid{
        {4, 7, 2, NaN},
        {4, 7, 2, 9},
        {4, 7, 2, 9},
        {4, 7, 2, 9},
    };
    const Recommender rec{to_matrix(grid), SimilarityModel{}};
    const auto p = rec.predict(1, "r04");
    CHECK(p.support == 3);
    // Own mean 13/3 plus the neighbours' deviation 9 - 22/4.
    CHECK(p.value == doctest::Approx(13.0 / 3.0 + 9.0 - 22.0 / 4.0));

    const oracle::Grid complete{
        {4, 7, 2, 9},
        {4, 7, 2, 9},
        {4, 7, 2, 9},
    };
    const Recommender full{to_matrix(complete), SimilarityModel{}};
    for (std::size_t r = 0; r < 4; ++r) {
        const auto sims = full.similarities(0);
        CHECK(full.predict_at(0, r, sims).value == doctest::Approx(complete[0][r]));
    }
}

TEST_CASE("fallback to the column mean") {
    const oracle::Grid grid{
        {5, NaN, NaN, NaN},
        {1, 2, 3, 4},
        {9, 8, 7, 6},
    };
    const Recommender rec{to_matrix(grid), SimilarityModel{}};
    const auto p = rec.predict(1, "r02");
    CHECK(p.support == 0);
    CHECK(p.value == doctest::Approx(5.0));
    CHECK(rec.fallback(3) == doctest::Approx(5.0));

    const oracle::Grid empty_column{
        {5, 3, NaN},
        {1, 2, NaN},
    };
    const Recommender rec2{to_matrix(empty_column), SimilarityModel{}};
    CHECK(rec2.predict(1, "r03").value == doctest::Approx(11.0 / 4.0));

    CHECK_THROWS_AS((void)rec.predict(99, "r01"), std::out_of_range);
    CHECK_THROWS_AS((void)rec.predict(1, "nope"), std::out_of_range);
}

TEST_CASE("top-N ordering, exhaustion and ties") {
    const oracle::Grid grid{
        {5, NaN, NaN, NaN, 2},
        {1, 2, 3, 4, 5},
        {9, 8, 7, 6, 5},
    };
    const Recommender rec{to_matrix(grid), SimilarityModel{}};
    const auto all = rec.top_n(1, 10);
    REQUIRE(all.size() == 3);
    CHECK(all[0].route_id == "r02");
    CHECK(all[1].route_id == "r03");
    CHECK(all[2].route_id == "r04");
    for (const auto &r : all) {
        CHECK(r.predicted == doctest::Approx(5.0)); // all column means tie at 5
        CHECK_FALSE(r.health.has_value());
    }
    CHECK(rec.top_n(1, 1).size() == 1);
    CHECK(rec.top_n(1, 10, TopNOptions{true}).size() == 5);
    CHECK_THROWS_AS((void)rec.top_n(1, 0), std::invalid_argument);
    CHECK_THROWS_AS((void)rec.top_n(42, 3), std::out_of_range);
}

TEST_CASE("hand-built 6-user top-3 matches the oracle") {
    const oracle::Grid grid{
        {8, NaN, 6, NaN, 3, NaN, NaN},
        {7, 4, 5, 9, 2, 6, 3},
        {9, 3, 7, 8, 4, 2, 6},
        {2, 8, 3, 1, 9, 5, 7},
        {6, 6, 4, 7, 1, 8, 5},
        {8, 2, 6, 5, 3, 4, 9},
    };
    SimilarityModel model;
    model.k_neighbors = 3;
    const Recommender rec{to_matrix(grid), model};
    const auto mine = rec.top_n(1, 3);
    const auto brute = oracle::top_n(grid, route_names(7), 0, 3, to_oracle(model));
    REQUIRE(mine.size() == 3);
    REQUIRE(brute.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(mine[i].route_id == brute[i].route);
        CHECK(std::abs(mine[i].predicted - brute[i].value) <= 1e-9);
    }
}

TEST_CASE("health filter examples") {
    const RouteCatalog single{{easy_route("easy")}};
    const auto &route = single.find("easy");
    const ModifierTable table;
    CHECK(single.scores(0) == FeatureScores{5, 5, 5});

    const auto healthy = make(30, 0, 0, 0, 0);
    const auto verdict = assess_health(healthy, route, single, table, {});
    CHECK(verdict.deterministic_rating == 10.0);
    CHECK(verdict.pass());

    const auto ui = make(57, 2, 9, 5, 7);
    const auto strict4 = assess_health(ui, route, single, table, {4.0, false});
    CHECK(strict4.deterministic_rating == doctest::Approx(3.5333333333));
    CHECK_FALSE(strict4.rating_ok);
    CHECK_FALSE(health_filter(ui, route, single, table, {4.0, false}));
    CHECK(health_filter(ui, route, single, table, {3.0, false}));

    const RouteCatalog caution{{easy_route("careful", RouteStatus::caution)}};
    const auto heart = make(60, 0, 0, 0, 7);
    const auto &careful = caution.find("careful");
    CHECK(health_filter(heart, careful, caution, table, {3.0, false}));
    const auto gated = assess_health(heart, careful, caution, table, {3.0, true});
    CHECK(gated.rating_ok);
    CHECK_FALSE(gated.status_ok);
    CHECK_FALSE(gated.pass());
    CHECK(health_filter(make(30, 0, 0, 0, 0), careful, caution, table, {3.0, true}));
}

TEST_CASE("randomized instances match the oracle") {
    std::mt19937_64 rng{2024};
    for (int instance = 0; instance < 60; ++instance) {
        std::uniform_int_distribution<std::size_t> n_users(2, 50);
        std::uniform_int_distribution<std::size_t> n_routes(2, 20);
        std::uniform_int_distribution<std::size_t> k(1, 12);
        std::uniform_int_distribution<std::size_t> overlap(1, 4);
        std::uniform_real_distribution<double> density(0.3, 0.95);
        const auto grid = random_grid(rng, n_users(rng), n_routes(rng), density(rng));
        SimilarityModel model;
        model.k_neighbors = k(rng);
        model.min_overlap = overlap(rng);
        model.metric = instance % 3 == 0 ? SimilarityMetric::cosine : SimilarityMetric::pearson;
        const Recommender rec{to_matrix(grid), model};
        const auto om = to_oracle(model);

        for (std::size_t u = 0; u < grid.size(); ++u) {
            const auto sims = rec.similarities(u);
            for (std::size_t r = 0; r < grid[u].size(); ++r) {
                auto mine = rec.neighbours(u, r, sims);
                std::sort(mine.begin(), mine.end());
                REQUIRE(mine == oracle::neighbours(grid, u, r, om));
                const double p = rec.predict_at(u, r, sims).value;
                REQUIRE(p >= 0.0);
                REQUIRE(p <= 10.0);
                REQUIRE(std::abs(p - oracle::predict(grid, u, r, om)) <= 1e-9);
            }
        }
    }
}

TEST_CASE("relabelling users permutes the outputs") {
    std::mt19937_64 rng{17};
    for (int instance = 0; instance < 10; ++instance) {
        const auto grid = random_grid(rng, 25, 12, 0.7);
        std::vector<std::size_t> perm(grid.size());
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        oracle::Grid permuted(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            permuted[perm[i]] = grid[i];
        }
        SimilarityModel model;
        model.k_neighbors = 5;
        const Recommender a{to_matrix(grid), model};
        const Recommender b{to_matrix(permuted), model};
        for (std::size_t u = 0; u < grid.size(); ++u) {
            const auto sa = a.similarities(u);
            const auto sb = b.similarities(perm[u]);
            for (std::size_t r = 0; r < 12; ++r) {
                REQUIRE(a.predict_at(u, r, sa).value ==
                        doctest::Approx(b.predict_at(perm[u], r, sb).value).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("shifting every rating keeps similarities and the ranking") {
    std::mt19937_64 rng{99};
    for (int instance = 0; instance < 20; ++instance) {
        auto grid = random_grid(rng, 20, 10, 0.6, 3.0, 6.0);
        auto shifted = grid;
        for (auto &row : shifted) {
            for (auto &cell : row) {
                cell += 1.0; // NaN stays NaN
            }
        }
        const Recommender a{to_matrix(grid), SimilarityModel{}};
        const Recommender b{to_matrix(shifted), SimilarityModel{}};
        for (std::size_t u = 0; u < grid.size(); ++u) {
            const auto sa = a.similarities(u);
            const auto sb = b.similarities(u);
            for (std::size_t v = 0; v < grid.size(); ++v) {
                REQUIRE(sa[v].has_value() == sb[v].has_value());
                if (sa[v]) {
                    REQUIRE(*sa[v] == doctest::Approx(*sb[v]).epsilon(1e-9));
                }
            }
            const auto ra = a.top_n(static_cast<int>(u + 1), 10);
            const auto rb = b.top_n(static_cast<int>(u + 1), 10);
            REQUIRE(ra.size() == rb.size());
            for (std::size_t i = 0; i < ra.size(); ++i) {
                REQUIRE(ra[i].route_id == rb[i].route_id);
                if (ra[i].support > 0) {
                    REQUIRE(rb[i].predicted == doctest::Approx(ra[i].predicted + 1.0));
                }
            }
        }
    }
}

TEST_CASE("filtered top-N only returns passing routes, sorted") {
    const RouteCatalog catalog{read_routes(kDataDir + "/tarragona_routes.csv")};
    const ModifierTable table;
    PrevalenceConfig sick;
    sick.p_mobility = 0.5;
    sick.p_respiratory = 0.5;
    const auto population = generate_population(200, AgePyramid::default_pyramid(), sick, 4);
    const auto generated = generate_ratings(population, catalog, table, NoiseConfig{}, 4);
    const Recommender rec{generated.stored, SimilarityModel{}};

    for (bool strict : {false, true}) {
        for (std::size_t u = 0; u < population.size(); u += 7) {
            const HealthFilterConfig config{4.0, strict};
            const HealthContext context{population[u], catalog, table, config};
            const auto list = rec.top_n(population[u].id, 5, context, TopNOptions{true});

            std::size_t passing = 0;
            for (const auto &route : catalog.routes()) {
                passing += health_filter(population[u], route, catalog, table, config) ? 1 : 0;
            }
            CHECK(list.size() == std::min<std::size_t>(5, passing));
            for (std::size_t i = 0; i < list.size(); ++i) {
                REQUIRE(list[i].health.has_value());
                CHECK(list[i].health->pass());
                CHECK(health_filter(population[u], catalog.find(list[i].route_id), catalog,
                                    table, config));
                if (i > 0) {
                    CHECK((list[i - 1].predicted > list[i].predicted ||
                           (list[i - 1].predicted == list[i].predicted &&
                            list[i - 1].route_id < list[i].route_id)));
                }
            }
        }
    }
}

} // TEST_SUITE
