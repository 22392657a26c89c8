#include "healthroute/config.h"
#include "healthroute/dataset_io.h"
#include "healthroute/digest.h"
#include "healthroute/errors.h"
#include "healthroute/eval.h"
#include "healthroute/profiles.h"
#include "healthroute/rating_sim.h"
#include "healthroute/recommender.h"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace healthroute;
using json = nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitStatistics = 3;

/// Thrown when a statistical check fails; the report has already been printed.
struct StatisticalFailure {};

RunConfig load_or_default(const std::string &path) {
    return path.empty() ? RunConfig{} : load_config(path);
}

void warn(const std::string &message) { fmt::print(std::cerr, "warning: {}\n", message); }

/// Surfaces config digest mismatches and changed files for an input that carries a manifest.
std::optional<RunManifest> check_input_manifest(const fs::path &data_file,
                                                const std::map<std::string, std::string> &digests,
                                                const std::vector<std::string> &sections) {
    const auto manifest_path = manifest_path_for(data_file);
    if (!fs::exists(manifest_path)) {
        warn(fmt::format("{} has no manifest; provenance not verified", data_file.string()));
        return std::nullopt;
    }
    const auto manifest = read_manifest(manifest_path);
    std::map<std::string, std::string> relevant;
    for (const auto &name : sections) {
        relevant[name] = digests.at(name);
    }
    for (const auto &w : verify_manifest(manifest, relevant)) {
        warn(fmt::format("{}: {}", data_file.filename().string(), w));
    }
    const auto name = data_file.filename().string();
    const auto it = manifest.outputs.find(name);
    if (it != manifest.outputs.end() && it->second != sha256_file(data_file)) {
        warn(fmt::format("{} changed since its manifest was written", name));
    }
    return manifest;
}

void write_run_manifest(const fs::path &out, RunManifest manifest,
                        const std::vector<fs::path> &inputs) {
    manifest.generator_version = std::string{kGeneratorVersion};
    manifest.created = utc_timestamp();
    for (const auto &in : inputs) {
        manifest.inputs[in.filename().string()] = sha256_file(in);
    }
    manifest.outputs[out.filename().string()] = sha256_file(out);
    write_manifest(manifest_path_for(out), manifest);
}

void write_json(const std::string &path, const json &doc) {
    if (path.empty()) {
        return;
    }
    std::ofstream out{path};
    if (!out) {
        throw std::runtime_error(fmt::format("cannot write {}", path));
    }
    out << doc.dump(2) << '\n';
}

// ---------------------------------------------------------------------------------------------

struct GenCitizensArgs {
    std::size_t n{0};
    std::uint64_t seed{0};
    std::string config;
    std::string out;
};

int gen_citizens(const GenCitizensArgs &a) {
    const auto config = load_or_default(a.config);
    const auto population = generate_population(a.n, config.pyramid, config.prevalence, a.seed);
    write_citizens(fs::path{a.out}, population);

    RunManifest manifest;
    manifest.seed = a.seed;
    manifest.command = "gen-citizens";
    manifest.config_digests = config_digests(config);
    manifest.n_users = population.size();
    write_run_manifest(a.out, manifest, {});
    fmt::print("wrote {} citizens to {}\n", population.size(), a.out);
    return kExitOk;
}

struct IngestArgs {
    std::string in;
    std::string out;
};

int ingest_routes(const IngestArgs &a) {
    const RouteCatalog catalog{read_routes(fs::path{a.in})};
    fmt::print("{:<12} {:>9} {:>9} {:<9} {:<8} {:>6} {:>6} {:>6}\n", "route", "km", "gain_m",
               "pavement", "status", "dist", "elev", "pave");
    for (std::size_t i = 0; i < catalog.size(); ++i) {
        const auto &r = catalog[i];
        const auto &s = catalog.scores(i);
        fmt::print("{:<12} {:>9.2f} {:>9.1f} {:<9} {:<8} {:>6.2f} {:>6.2f} {:>6.2f}\n", r.id,
                   r.distance_km, r.elevation_gain_m, to_string(r.pavement), to_string(r.status),
                   s.distance, s.elevation, s.pavement);
    }
    write_routes(fs::path{a.out}, catalog.routes());

    RunManifest manifest;
    manifest.command = "ingest-routes";
    manifest.m_routes = catalog.size();
    write_run_manifest(a.out, manifest, {a.in});
    fmt::print("wrote {} routes to {}\n", catalog.size(), a.out);
    return kExitOk;
}

struct GenRatingsArgs {
    std::string citizens;
    std::string routes;
    std::uint64_t seed{0};
    std::optional<double> noise_std;
    std::string config;
    std::string out;
    bool oracle_columns{false};
};

int gen_ratings(const GenRatingsArgs &a) {
    auto config = load_or_default(a.config);
    if (a.noise_std) {
        config.noise.std_dev = *a.noise_std;
        config.noise.validate();
    }
    const auto digests = config_digests(config);
    check_input_manifest(a.citizens, digests, {"pyramid", "prevalence"});

    const auto population =
        read_citizens(fs::path{a.citizens}, config.prevalence.heart_age_threshold);
    if (population.empty()) {
        throw ValidationError(fmt::format("{} holds no citizens", a.citizens));
    }
    const RouteCatalog catalog{read_routes(fs::path{a.routes})};
    const auto generated =
        generate_ratings(population, catalog, config.modifiers, config.noise, a.seed);
    const RatingOracles oracles = a.oracle_columns
                                      ? RatingOracles{&generated.deterministic, &generated.noisy}
                                      : RatingOracles{};
    write_ratings(fs::path{a.out}, generated.stored, RatingFormat::integer, oracles);

    RunManifest manifest;
    manifest.seed = a.seed;
    manifest.command = a.oracle_columns ? "gen-ratings --oracle-columns" : "gen-ratings";
    manifest.config_digests = digests;
    manifest.n_users = population.size();
    manifest.m_routes = catalog.size();
    manifest.n_ratings = generated.stored.n_rated();
    write_run_manifest(a.out, manifest, {a.citizens, a.routes});
    fmt::print("wrote {} ratings ({} users x {} routes) to {}\n", generated.stored.n_rated(),
               population.size(), catalog.size(), a.out);
    return kExitOk;
}

struct RecommendArgs {
    std::string ratings;
    std::string citizens;
    std::string routes;
    std::string config;
    std::string out;
    int user{0};
    std::size_t n{3};
    std::optional<std::string> metric;
    std::optional<std::size_t> k;
    std::optional<std::size_t> min_overlap;
    std::optional<double> threshold;
    bool strict{false};
    bool all_routes{false};
};

int recommend(const RecommendArgs &a) {
    auto config = load_or_default(a.config);
    if (a.metric) {
        config.model.metric = parse_metric(*a.metric);
    }
    if (a.k) {
        config.model.k_neighbors = *a.k;
    }
    if (a.min_overlap) {
        config.model.min_overlap = *a.min_overlap;
    }
    if (a.threshold) {
        config.filter.threshold = *a.threshold;
    }
    config.filter.strict = config.filter.strict || a.strict;
    config.model.validate();

    const bool filtered = !a.citizens.empty() && !a.routes.empty();
    if (a.citizens.empty() != a.routes.empty()) {
        throw ConfigError("the health filter needs both --citizens and --routes");
    }
    const auto digests = config_digests(config);
    check_input_manifest(a.ratings, digests, {"pyramid", "prevalence", "modifier_table"});

    auto file = read_ratings(fs::path{a.ratings});
    const Recommender recommender{std::move(file.ratings), config.model};
    if (!recommender.matrix().find_user(a.user)) {
        throw ValidationError(fmt::format("user {} does not appear in {}", a.user, a.ratings));
    }
    const TopNOptions options{a.all_routes};

    std::vector<Recommendation> list;
    std::optional<std::vector<Citizen>> population;
    std::optional<RouteCatalog> catalog;
    if (filtered) {
        population = read_citizens(fs::path{a.citizens}, config.prevalence.heart_age_threshold);
        catalog.emplace(read_routes(fs::path{a.routes}));
        const auto it = std::find_if(population->begin(), population->end(),
                                     [&](const Citizen &c) { return c.id == a.user; });
        if (it == population->end()) {
            throw ValidationError(fmt::format("user {} does not appear in {}", a.user, a.citizens));
        }
        for (const auto &id : recommender.matrix().route_ids()) {
            try {
                (void)catalog->index_of(id);
            } catch (const std::out_of_range &) {
                throw ValidationError(fmt::format("route {} in {} is missing from {}", id,
                                                  a.ratings, a.routes));
            }
        }
        const HealthContext context{*it, *catalog, config.modifiers, config.filter};
        list = recommender.top_n(a.user, a.n, context, options);
    } else {
        list = recommender.top_n(a.user, a.n, options);
    }

    std::ostringstream text;
    text << fmt::format("# generator: {}\n", kGeneratorVersion);
    text << fmt::format("# ratings: {} ({} users x {} routes, {} rated)\n",
                        fs::path{a.ratings}.filename().string(), recommender.matrix().n_users(),
                        recommender.matrix().n_routes(), recommender.matrix().n_rated());
    text << fmt::format("# model: metric={} k_neighbors={} min_overlap={}\n",
                        to_string(config.model.metric), config.model.k_neighbors,
                        config.model.min_overlap);
    text << fmt::format("# filter: {}\n",
                        filtered ? fmt::format("threshold={} strict={}", config.filter.threshold,
                                               config.filter.strict)
                                 : std::string{"off"});
    text << fmt::format("# candidates: {}\n", a.all_routes ? "all routes" : "unrated routes");
    text << "user_id,rank,route_id,predicted,support,deterministic_rating,rating_ok,status_ok\n";
    for (std::size_t i = 0; i < list.size(); ++i) {
        const auto &r = list[i];
        text << fmt::format("{},{},{},{:.6f},{}", a.user, i + 1, r.route_id, r.predicted,
                            r.support);
        if (r.health) {
            text << fmt::format(",{:.6f},{},{}\n", r.health->deterministic_rating,
                                r.health->rating_ok, r.health->status_ok);
        } else {
            text << ",,,\n";
        }
    }

    if (a.out.empty()) {
        std::cout << text.str();
    } else {
        std::ofstream out{a.out};
        if (!out) {
            throw std::runtime_error(fmt::format("cannot write {}", a.out));
        }
        out << text.str();
    }
    return kExitOk;
}

struct EvaluateArgs {
    std::string ratings;
    std::string config;
    std::string json_out;
    double fraction{0.2};
    std::uint64_t seed{0};
    std::optional<double> noise_std;
    std::optional<std::string> metric;
    std::optional<std::size_t> k;
};

int evaluate(const EvaluateArgs &a) {
    auto config = load_or_default(a.config);
    if (a.metric) {
        config.model.metric = parse_metric(*a.metric);
    }
    if (a.k) {
        config.model.k_neighbors = *a.k;
    }
    if (a.noise_std) {
        config.noise.std_dev = *a.noise_std;
    }
    config.model.validate();
    config.noise.validate();
    check_input_manifest(a.ratings, config_digests(config), {"noise"});

    const auto file = read_ratings(fs::path{a.ratings});
    const auto report = evaluate_holdout(
        file.ratings, file.noisy ? &*file.noisy : nullptr,
        file.deterministic ? &*file.deterministic : nullptr, a.fraction, a.seed, config.model,
        config.noise.std_dev);

    fmt::print("hold-out: fraction {} seed {} -> {} train / {} test cells\n", a.fraction, a.seed,
               report.train_cells, report.test_cells);
    fmt::print("model: metric={} k_neighbors={} min_overlap={}\n", to_string(config.model.metric),
               config.model.k_neighbors, config.model.min_overlap);
    fmt::print("truth: {}\n", report.full_precision_truth ? "full-precision noisy ratings"
                                                          : "stored integer ratings");
    fmt::print("{:<22} {:>8} {:>8}\n", "predictor", "MAE", "RMSE");
    fmt::print("{:<22} {:>8.4f} {:>8.4f}\n", "collaborative filter", report.cf.mae,
               report.cf.rmse);
    if (report.oracle) {
        fmt::print("{:<22} {:>8.4f} {:>8.4f}\n", "deterministic oracle", report.oracle->mae,
                   report.oracle->rmse);
        fmt::print("precision@3 vs oracle ranking: {:.4f}\n", *report.precision_at_3);
    }
    fmt::print("noise floor sigma*sqrt(2/pi) at sigma={}: {:.4f}\n", report.noise_std,
               report.noise_floor);
    fmt::print("CF MAE within [floor-0.1, floor+0.6] = [{:.4f}, {:.4f}]: {}\n",
               report.noise_floor - 0.1, report.noise_floor + 0.6,
               report.cf_within_band ? "PASS" : "FAIL");

    json doc{{"fraction", a.fraction},
             {"seed", a.seed},
             {"train_cells", report.train_cells},
             {"test_cells", report.test_cells},
             {"metric", to_string(config.model.metric)},
             {"k_neighbors", config.model.k_neighbors},
             {"min_overlap", config.model.min_overlap},
             {"full_precision_truth", report.full_precision_truth},
             {"cf", {{"mae", report.cf.mae}, {"rmse", report.cf.rmse}}},
             {"noise_std", report.noise_std},
             {"noise_floor", report.noise_floor},
             {"cf_within_band", report.cf_within_band}};
    if (report.oracle) {
        doc["oracle"] = {{"mae", report.oracle->mae}, {"rmse", report.oracle->rmse}};
        doc["precision_at_3"] = *report.precision_at_3;
    }
    write_json(a.json_out, doc);
    if (!report.cf_within_band) {
        throw StatisticalFailure{};
    }
    return kExitOk;
}

struct StatsArgs {
    std::string citizens;
    std::string config;
    std::string json_out;
};

int stats(const StatsArgs &a) {
    const auto config = load_or_default(a.config);
    check_input_manifest(a.citizens, config_digests(config), {"pyramid", "prevalence"});
    const auto population =
        read_citizens(fs::path{a.citizens}, config.prevalence.heart_age_threshold);
    if (population.empty()) {
        throw ValidationError(fmt::format("{} holds no citizens", a.citizens));
    }
    const auto report = prevalence_report(population, config.prevalence);
    const auto census = profile_census(population);

    fmt::print("citizens: {}\n", population.size());
    if (population.size() < 1000) {
        warn("fewer than 1000 citizens; the 3-sigma bounds are not meaningful");
    }
    fmt::print("{:<12} {:>8} {:>10} {:>10} {:>9} {:>6}\n", "condition", "target", "empirical",
               "3sigma", "affected", "check");
    bool all_pass = true;
    json conditions = json::array();
    for (const auto &c : report) {
        fmt::print("{:<12} {:>8.4f} {:>10.5f} {:>10.5f} {:>9} {:>6}\n",
                   condition_name(c.condition), c.target, c.empirical, c.bound, c.affected,
                   c.pass ? "PASS" : "FAIL");
        all_pass = all_pass && c.pass;
        conditions.push_back({{"condition", condition_name(c.condition)},
                              {"target", c.target},
                              {"empirical", c.empirical},
                              {"bound", c.bound},
                              {"affected", c.affected},
                              {"pass", c.pass}});
    }

    fmt::print("\nprofiles observed: {} of {}\n", census.size(), kProfileCount);
    fmt::print("{:>4} {:>7} {:>5} {:>9}\n", "id", "bracket", "mask", "citizens");
    json profiles = json::object();
    for (const auto &[id, count] : census) {
        const auto p = ProfileId::unpack(id);
        fmt::print("{:>4} {:>7} {:>5} {:>9}\n", id, p.age_bracket,
                   fmt::format("{:04b}", p.disease_mask), count);
        profiles[std::to_string(id)] = count;
    }
    write_json(a.json_out, {{"citizens", population.size()},
                            {"prevalence", conditions},
                            {"profiles", profiles}});
    if (!all_pass) {
        throw StatisticalFailure{};
    }
    return kExitOk;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Synthetic citizens, route ratings and health-aware route recommendations."};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string{kGeneratorVersion});
    app.footer("Exit codes: 0 success, 1 usage, 2 invalid input or config, 3 statistical check "
               "failed.\nRecommender and noise defaults: metric pearson, k 30, min overlap 3, "
               "threshold 3.0, noise std 1.5 (a standard deviation, not a variance).");

    GenCitizensArgs citizens_args;
    auto *gen_c = app.add_subcommand("gen-citizens", "Sample a population and write it with a manifest");
    gen_c->add_option("--n", citizens_args.n, "Number of citizens (>= 1)")->required();
    gen_c->add_option("--seed", citizens_args.seed, "RNG seed (mandatory)")->required();
    gen_c->add_option("--config", citizens_args.config, "INI config; built-in defaults otherwise")
        ->check(CLI::ExistingFile);
    gen_c->add_option("--out", citizens_args.out, "Citizens CSV to write")->required();

    IngestArgs ingest_args;
    auto *ingest = app.add_subcommand("ingest-routes", "Validate a route catalog, preview scores, write it canonically");
    ingest->add_option("--in", ingest_args.in, "Route catalog CSV")->required()->check(CLI::ExistingFile);
    ingest->add_option("--out", ingest_args.out, "Canonical catalog CSV to write")->required();

    GenRatingsArgs ratings_args;
    auto *gen_r = app.add_subcommand("gen-ratings", "Simulate the complete ratings matrix");
    gen_r->add_option("--citizens", ratings_args.citizens, "Citizens CSV")->required()->check(CLI::ExistingFile);
    gen_r->add_option("--routes", ratings_args.routes, "Route catalog CSV")->required()->check(CLI::ExistingFile);
    gen_r->add_option("--seed", ratings_args.seed, "RNG seed (mandatory)")->required();
    gen_r->add_option("--noise-std", ratings_args.noise_std,
                      "Standard deviation of the Gaussian rating noise (default 1.5; 0 disables)");
    gen_r->add_option("--config", ratings_args.config, "INI config; built-in defaults otherwise")
        ->check(CLI::ExistingFile);
    gen_r->add_option("--out", ratings_args.out, "Ratings CSV to write")->required();
    gen_r->add_flag("--oracle-columns", ratings_args.oracle_columns,
                    "Append full-precision deterministic and noisy columns (evaluation oracle)");

    RecommendArgs rec_args;
    auto *rec = app.add_subcommand("recommend", "Top-N routes for one user");
    rec->add_option("--ratings", rec_args.ratings, "Ratings CSV")->required()->check(CLI::ExistingFile);
    rec->add_option("--user", rec_args.user, "User id")->required();
    rec->add_option("--n", rec_args.n, "Number of routes to return (>= 1)")->capture_default_str();
    rec->add_option("--metric", rec_args.metric, "Similarity: pearson or cosine (default pearson)");
    rec->add_option("--k", rec_args.k, "Neighbours per prediction (default 30)");
    rec->add_option("--min-overlap", rec_args.min_overlap,
                    "Co-rated routes needed for a similarity (default 3)");
    rec->add_option("--threshold", rec_args.threshold,
                    "Health filter: minimum noise-free rating (default 3.0)");
    rec->add_flag("--strict", rec_args.strict,
                  "Health filter: also drop Caution routes for anyone with a condition");
    rec->add_option("--citizens", rec_args.citizens, "Citizens CSV; enables the health filter")
        ->check(CLI::ExistingFile);
    rec->add_option("--routes", rec_args.routes, "Route catalog CSV; enables the health filter")
        ->check(CLI::ExistingFile);
    rec->add_flag("--all-routes", rec_args.all_routes,
                  "Score already-rated routes too (complete generator matrices)");
    rec->add_option("--config", rec_args.config, "INI config; flags override it")->check(CLI::ExistingFile);
    rec->add_option("--out", rec_args.out, "Write the list here instead of stdout");

    EvaluateArgs eval_args;
    auto *ev = app.add_subcommand("evaluate", "Hold-out accuracy against the noise floor");
    ev->add_option("--ratings", eval_args.ratings, "Ratings CSV (oracle columns used when present)")
        ->required()
        ->check(CLI::ExistingFile);
    ev->add_option("--fraction", eval_args.fraction, "Share of cells held out, in (0, 1)")
        ->capture_default_str();
    ev->add_option("--seed", eval_args.seed, "Hold-out seed (mandatory)")->required();
    ev->add_option("--noise-std", eval_args.noise_std, "Noise std used for the floor (default 1.5)");
    ev->add_option("--metric", eval_args.metric, "Similarity: pearson or cosine (default pearson)");
    ev->add_option("--k", eval_args.k, "Neighbours per prediction (default 30)");
    ev->add_option("--config", eval_args.config, "INI config; flags override it")->check(CLI::ExistingFile);
    ev->add_option("--json", eval_args.json_out, "Also write the report as JSON");

    StatsArgs stats_args;
    auto *st = app.add_subcommand("stats", "Prevalence report and 64-profile census");
    st->add_option("--citizens", stats_args.citizens, "Citizens CSV")->required()->check(CLI::ExistingFile);
    st->add_option("--config", stats_args.config, "INI config with the target prevalences")
        ->check(CLI::ExistingFile);
    st->add_option("--json", stats_args.json_out, "Also write the report as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*gen_c) {
            return gen_citizens(citizens_args);
        }
        if (*ingest) {
            return ingest_routes(ingest_args);
        }
        if (*gen_r) {
            return gen_ratings(ratings_args);
        }
        if (*rec) {
            return recommend(rec_args);
        }
        if (*ev) {
            return evaluate(eval_args);
        }
        return stats(stats_args);
    } catch (const StatisticalFailure &) {
        fmt::print(std::cerr, "error: statistical check failed\n");
        return kExitStatistics;
    } catch (const ConfigError &e) {
        fmt::print(std::cerr, "config error: {}\n", e.what());
        return kExitValidation;
    } catch (const ParseError &e) {
        fmt::print(std::cerr, "parse error: {}\n", e.what());
        return kExitValidation;
    } catch (const std::exception &e) {
        fmt::print(std::cerr, "error: {}\n", e.what());
        return kExitValidation;
    }
}
