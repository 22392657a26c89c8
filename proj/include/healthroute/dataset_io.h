#pragma once

#include "healthroute/population.h"
#include "healthroute/ratings_matrix.h"
#include "healthroute/routes.h"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace healthroute {

inline constexpr std::string_view kGeneratorVersion = "healthroute 1.0.0";

// All files are UTF-8, comma separated, LF terminated, with a mandatory header row. Readers
// raise ParseError (line and 1-based field number) for malformed rows and ValidationError for
// values that parse but break a domain rule.

/// `id,age,visual,respiratory,mobility,heart`, severities with exactly one decimal.
void write_citizens(std::ostream &out, std::span<const Citizen> population);
void write_citizens(const std::filesystem::path &path, std::span<const Citizen> population);
std::vector<Citizen> read_citizens(std::istream &in, int heart_age_threshold = 45);
std::vector<Citizen> read_citizens(const std::filesystem::path &path, int heart_age_threshold = 45);

/// `id,start,end,checkpoints,distance_km,elevation_gain_m,pavement,status`. Points are DMS
/// pairs or decimal `lat lon`; checkpoints are `;`-separated points (may be empty).
void write_routes(std::ostream &out, std::span<const Route> routes);
void write_routes(const std::filesystem::path &path, std::span<const Route> routes);
/// Validates every route (see validate_route) and rejects duplicate ids.
std::vector<Route> read_routes(std::istream &in);
std::vector<Route> read_routes(const std::filesystem::path &path);

enum class RatingFormat { integer, real };

/// Optional full-precision columns written next to the stored rating.
struct RatingOracles {
    const RatingsMatrix *deterministic{nullptr};
    const RatingsMatrix *noisy{nullptr};
};

/// Long format `user_id,route_id,rating[,deterministic,noisy]`, user-major in matrix order.
/// Unrated cells are skipped. Integer format requires whole-number ratings.
void write_ratings(std::ostream &out, const RatingsMatrix &ratings,
                   RatingFormat format = RatingFormat::integer, RatingOracles oracles = {});
void write_ratings(const std::filesystem::path &path, const RatingsMatrix &ratings,
                   RatingFormat format = RatingFormat::integer, RatingOracles oracles = {});

struct RatingsFile {
    RatingsMatrix ratings;
    std::optional<RatingsMatrix> deterministic;
    std::optional<RatingsMatrix> noisy;
};

/// Users and routes are ordered by first appearance. Duplicate cells, ratings outside
/// [0, 10] and (in integer format) non-integer ratings are rejected.
RatingsFile read_ratings(std::istream &in, RatingFormat format = RatingFormat::integer);
RatingsFile read_ratings(const std::filesystem::path &path,
                         RatingFormat format = RatingFormat::integer);

struct RunManifest {
    std::uint64_t seed{0};
    std::string generator_version{kGeneratorVersion};
    std::string command;
    /// pyramid, prevalence, modifier_table, noise, model -> SHA-256 of the canonical config.
    std::map<std::string, std::string> config_digests;
    std::size_t n_users{0};
    std::size_t m_routes{0};
    std::size_t n_ratings{0};
    /// ISO-8601 UTC; the only field allowed to differ between reproducing runs.
    std::string created;
    /// File name (relative to the manifest) -> SHA-256 of its contents.
    std::map<std::string, std::string> inputs;
    std::map<std::string, std::string> outputs;

    friend bool operator==(const RunManifest &, const RunManifest &) = default;
};

std::string utc_timestamp();

/// Pretty-printed JSON with sorted keys.
void write_manifest(std::ostream &out, const RunManifest &manifest);
void write_manifest(const std::filesystem::path &path, const RunManifest &manifest);
/// Throws ParseError for malformed JSON or a missing field.
RunManifest read_manifest(std::istream &in);
RunManifest read_manifest(const std::filesystem::path &path);

/// `<file>.manifest.json` next to the data file.
std::filesystem::path manifest_path_for(const std::filesystem::path &data_file);

/// Human-readable warnings for every supplied digest that differs from (or is absent in)
/// the manifest. Empty when everything matches.
std::vector<std::string> verify_manifest(const RunManifest &manifest,
                                         const std::map<std::string, std::string> &supplied);

/// Warnings for each listed output whose file (resolved against `directory`) is missing or
/// whose SHA-256 no longer matches.
std::vector<std::string> verify_outputs(const RunManifest &manifest,
                                        const std::filesystem::path &directory);

} // namespace healthroute
