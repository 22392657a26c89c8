#include <doctest.h>

#include "healthroute/errors.h"
#include "healthroute/population.h"

#include <array>
#include <cmath>

using namespace healthroute;

TEST_SUITE("population") {

TEST_CASE("severity lives on the tenths grid") {
    CHECK(Severity::from_value(0.7).tenths() == 7);
    CHECK(Severity::from_value(1.0).tenths() == 10);
    CHECK_FALSE(Severity{}.present());
    CHECK(Severity::from_value(0.3).value() == doctest::Approx(0.3));
    CHECK_THROWS_AS(Severity::from_value(0.25), ValidationError);
    CHECK_THROWS_AS(Severity::from_value(1.1), ValidationError);
    CHECK_THROWS_AS(Severity::from_value(-0.1), ValidationError);
    CHECK_THROWS_AS(Severity::from_tenths(11), ValidationError);
}

TEST_CASE("age pyramid rejects gaps, overlaps and zero weight") {
    CHECK_THROWS_AS(AgePyramid({{18, 35, 1}, {37, 90, 1}}), ConfigError);
    CHECK_THROWS_AS(AgePyramid({{18, 35, 1}, {35, 90, 1}}), ConfigError);
    CHECK_THROWS_AS(AgePyramid({{18, 35, 1}, {36, 89, 1}}), ConfigError);
    CHECK_THROWS_AS(AgePyramid({{19, 90, 1}}), ConfigError);
    CHECK_THROWS_AS(AgePyramid({{18, 90, 0}}), ConfigError);
    CHECK_THROWS_AS(AgePyramid({{18, 90, -1}}), ConfigError);
    CHECK_THROWS_AS(AgePyramid(std::vector<AgeBracket>{}), ConfigError);
    CHECK_NOTHROW(AgePyramid::default_pyramid());
}

TEST_CASE("single bracket pyramid covers every age and nothing else") {
    const AgePyramid pyramid{{{18, 90, 1.0}}};
    std::array<int, 91> seen{};
    SplitMix64 engine{7};
    for (int i = 0; i < 20000; ++i) {
        const int age = sample_age(pyramid, engine);
        REQUIRE(age >= 18);
        REQUIRE(age <= 90);
        ++seen[static_cast<std::size_t>(age)];
    }
    for (int age = 18; age <= 90; ++age) {
        CHECK(seen[static_cast<std::size_t>(age)] > 0);
    }
}

TEST_CASE("a forced bracket only yields its ages") {
    const AgePyramid pyramid{{{18, 35, 1.0}, {36, 90, 0.0}}};
    SplitMix64 engine{11};
    for (int i = 0; i < 5000; ++i) {
        CHECK(sample_age(pyramid, engine) <= 35);
    }
}

TEST_CASE("default pyramid bracket frequencies match their weights within 1pp") {
    const auto pyramid = AgePyramid::default_pyramid();
    std::array<int, 4> counts{};
    SplitMix64 engine{2024};
    constexpr int n = 100000;
    for (int i = 0; i < n; ++i) {
        const int age = sample_age(pyramid, engine);
        for (std::size_t b = 0; b < 4; ++b) {
            if (age >= pyramid.brackets()[b].min_age && age <= pyramid.brackets()[b].max_age) {
                ++counts[b];
            }
        }
    }
    for (std::size_t b = 0; b < 4; ++b) {
        CHECK(std::abs(counts[b] / double(n) - pyramid.probability(b)) <= 0.01);
    }
}

TEST_CASE("share above threshold counts whole ages") {
    // (35,50] contributes ages 46..50 = 5 of its 15 ages.
    const auto pyramid = AgePyramid::default_pyramid();
    CHECK(pyramid.share_above(45) == doctest::Approx(0.29 * 5.0 / 15.0 + 0.24 + 0.20));
    CHECK(pyramid.share_above(17) == doctest::Approx(1.0));
    CHECK(pyramid.share_above(90) == doctest::Approx(0.0));
    CHECK(heart_conditional_probability(pyramid, PrevalenceConfig{}) ==
          doctest::Approx(0.14 / (0.29 * 5.0 / 15.0 + 0.44)));
}

TEST_CASE("cardio prevalence above the over-threshold share is a configuration error") {
    const AgePyramid young{{{18, 45, 0.99}, {46, 90, 0.01}}};
    CHECK_THROWS_AS(heart_conditional_probability(young, PrevalenceConfig{}), ConfigError);
    CHECK_THROWS_AS(generate_population(10, young, PrevalenceConfig{}, 1), ConfigError);
}

TEST_CASE("prevalence config validation") {
    PrevalenceConfig cfg;
    cfg.p_visual = 1.5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = PrevalenceConfig{};
    cfg.severity_weights.fill(0.0);
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    CHECK_NOTHROW(PrevalenceConfig{}.validate());
}

TEST_CASE("nobody at or below the threshold gets heart disease") {
    const auto pyramid = AgePyramid::default_pyramid();
    PrevalenceConfig cfg;
    cfg.p_cardio = 0.5;
    const ConditionSampler sampler{cfg, pyramid};
    for (std::uint64_t s = 0; s < 2000; ++s) {
        SplitMix64 engine{s};
        CHECK(sampler(30, engine).heart_disease.tenths() == 0);
        CHECK(sampler(45, engine).heart_disease.tenths() == 0);
    }
}

TEST_CASE("zero prevalences give healthy citizens") {
    PrevalenceConfig cfg;
    cfg.p_visual = cfg.p_respiratory = cfg.p_mobility = cfg.p_cardio = 0.0;
    const auto population = generate_population(2000, AgePyramid::default_pyramid(), cfg, 5);
    for (const auto &c : population) {
        CHECK(c.health == HealthConditions{});
    }
}

TEST_CASE("visual prevalence at n=50000 is 3.4% within 0.3pp") {
    const auto population =
        generate_population(50000, AgePyramid::default_pyramid(), PrevalenceConfig{}, 99);
    std::size_t visual = 0;
    for (const auto &c : population) {
        visual += c.health.visual_impairment.present() ? 1 : 0;
    }
    CHECK(std::abs(visual / 50000.0 - 0.034) <= 0.003);
}

TEST_CASE("population shape, ids and invariants") {
    const auto pyramid = AgePyramid::default_pyramid();
    const PrevalenceConfig cfg;
    CHECK(generate_population(1000, pyramid, cfg, 1).size() == 1000);

    const auto population = generate_population(50000, pyramid, cfg, 3);
    REQUIRE(population.size() == 50000);
    for (std::size_t i = 0; i < population.size(); ++i) {
        const auto &c = population[i];
        REQUIRE(c.id == static_cast<int>(i + 1));
        REQUIRE(c.age >= 18);
        REQUIRE(c.age <= 90);
        if (c.health.heart_disease.present()) {
            REQUIRE(c.age > 45);
        }
        for (auto condition : kAllConditions) {
            const double scaled = c.health[condition].value() * 10.0;
            REQUIRE(std::abs(scaled - std::round(scaled)) < 1e-9);
        }
        CHECK_NOTHROW(validate_citizen(c));
    }
    CHECK_THROWS_AS(generate_population(0, pyramid, cfg, 1), ConfigError);
}

TEST_CASE("generation is a pure function of seed and id") {
    const auto pyramid = AgePyramid::default_pyramid();
    const PrevalenceConfig cfg;
    const auto a = generate_population(3000, pyramid, cfg, 42);
    const auto b = generate_population(3000, pyramid, cfg, 42);
    const auto c = generate_population(3000, pyramid, cfg, 43);
    CHECK(a == b);
    CHECK(a != c);

    // Any citizen can be regenerated alone, in any order.
    const ConditionSampler sampler{cfg, pyramid};
    for (int id : {2999, 1, 1500, 17}) {
        CHECK(generate_citizen(id, pyramid, sampler, 42) == a[static_cast<std::size_t>(id - 1)]);
    }
}

TEST_CASE("population-wide heart prevalence matches p_cardio within 3 sigma") {
    const auto population =
        generate_population(50000, AgePyramid::default_pyramid(), PrevalenceConfig{}, 8);
    std::size_t heart = 0;
    for (const auto &c : population) {
        heart += c.health.heart_disease.present() ? 1 : 0;
    }
    const double bound = 3.0 * std::sqrt(0.14 * 0.86 / 50000.0);
    CHECK(std::abs(heart / 50000.0 - 0.14) <= bound);
}

TEST_CASE("present severities are uniform over 0.1..1.0") {
    PrevalenceConfig cfg;
    cfg.p_visual = 1.0;
    const auto population = generate_population(20000, AgePyramid::default_pyramid(), cfg, 12);
    std::array<int, 11> counts{};
    for (const auto &c : population) {
        REQUIRE(c.health.visual_impairment.present());
        ++counts[static_cast<std::size_t>(c.health.visual_impairment.tenths())];
    }
    // Each tenth has p = 0.1; 4 sigma on n = 20000 is 0.0085.
    for (int t = 1; t <= 10; ++t) {
        CHECK(std::abs(counts[static_cast<std::size_t>(t)] / 20000.0 - 0.1) <= 0.0085);
    }
}

TEST_CASE("severity weights steer the severity draw") {
    PrevalenceConfig cfg;
    cfg.p_mobility = 1.0;
    cfg.severity_weights = {0, 0, 0, 0, 0, 0, 0, 0, 0, 1};
    const auto population = generate_population(500, AgePyramid::default_pyramid(), cfg, 4);
    for (const auto &c : population) {
        CHECK(c.health.reduced_mobility.tenths() == 10);
    }
}

TEST_CASE("validate_citizen enforces age range and heart gate") {
    Citizen c{1, 17, {}};
    CHECK_THROWS_AS(validate_citizen(c), ValidationError);
    c.age = 91;
    CHECK_THROWS_AS(validate_citizen(c), ValidationError);
    c.age = 45;
    c.health.heart_disease = Severity::from_tenths(3);
    CHECK_THROWS_AS(validate_citizen(c), ValidationError);
    c.age = 46;
    CHECK_NOTHROW(validate_citizen(c));
}

} // TEST_SUITE
