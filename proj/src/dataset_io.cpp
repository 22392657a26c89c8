#include "healthroute/dataset_io.h"

#include "healthroute/csv.h"
#include "healthroute/digest.h"
#include "healthroute/errors.h"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fmt/chrono.h>
#include <fmt/format.h>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <unordered_set>

namespace healthroute {

namespace {

using json = nlohmann::json;

constexpr std::array<std::string_view, 6> kCitizenHeader{"id",          "age",      "visual",
                                                         "respiratory", "mobility", "heart"};
constexpr std::array<std::string_view, 8> kRouteHeader{
    "id", "start", "end", "checkpoints", "distance_km", "elevation_gain_m", "pavement", "status"};
constexpr std::array<std::string_view, 5> kRatingHeader{"user_id", "route_id", "rating",
                                                        "deterministic", "noisy"};

std::ofstream open_for_writing(const std::filesystem::path &path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error(fmt::format("cannot write {}", path.string()));
    }
    return out;
}

std::ifstream open_for_reading(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error(fmt::format("cannot read {}", path.string()));
    }
    return in;
}

template <std::size_t N>
std::string header_line(const std::array<std::string_view, N> &names, std::size_t count = N) {
    std::string line;
    for (std::size_t i = 0; i < count; ++i) {
        if (i > 0) {
            line += ',';
        }
        line += names[i];
    }
    return line;
}

/// Reads the header and checks it against the expected prefix; returns the column count.
template <std::size_t N>
std::size_t expect_header(CsvReader &reader, const std::array<std::string_view, N> &names,
                          std::size_t required, std::string_view what) {
    CsvRecord record;
    if (!reader.next(record)) {
        throw ParseError(fmt::format("{} file is empty: header row is mandatory", what), "", 1, 0);
    }
    const auto count = record.fields.size();
    bool ok = count >= required && count <= N;
    for (std::size_t i = 0; ok && i < count; ++i) {
        ok = record.fields[i] == names[i];
    }
    if (!ok) {
        throw ParseError(fmt::format("line {}: {} header must be '{}'", record.line, what,
                                     header_line(names, std::max(required, std::min(count, N)))),
                         header_line(names), record.line, 1);
    }
    return count;
}

void expect_width(const CsvRecord &record, std::size_t width) {
    if (record.fields.size() != width) {
        throw ParseError(fmt::format("line {}: expected {} fields, found {}", record.line, width,
                                     record.fields.size()),
                         "", record.line, std::min(record.fields.size(), width) + 1);
    }
}

ParseError field_error(const CsvRecord &record, std::size_t field, std::string_view name,
                       std::string_view problem) {
    return ParseError(fmt::format("line {}, field {} ({}): {} '{}'", record.line, field + 1, name,
                                  problem, record.fields[field]),
                      record.fields[field], record.line, field + 1);
}

ValidationError field_invalid(const CsvRecord &record, std::size_t field, std::string_view name,
                              std::string_view problem) {
    return ValidationError(fmt::format("line {}, field {} ({}): {}", record.line, field + 1, name,
                                       problem));
}

template <typename T>
T number_field(const CsvRecord &record, std::size_t field, std::string_view name) {
    const auto &text = record.fields[field];
    T value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
        throw field_error(record, field, name, "not a number");
    }
    return value;
}

std::string format_severity(Severity s) {
    return fmt::format("{}.{}", s.tenths() / 10, s.tenths() % 10);
}

std::string format_real(double value) { return fmt::format("{}", value); }

GeoPoint point_field(const CsvRecord &record, std::size_t field, std::string_view name,
                     std::string_view text) {
    try {
        return parse_point(text);
    } catch (const ParseError &e) {
        throw ParseError(fmt::format("line {}, field {} ({}): {}", record.line, field + 1, name,
                                     e.what()),
                         e.token(), record.line, field + 1);
    } catch (const ValidationError &e) {
        throw ParseError(fmt::format("line {}, field {} ({}): {}", record.line, field + 1, name,
                                     e.what()),
                         std::string{text}, record.line, field + 1);
    }
}

template <typename T> T json_field(const json &doc, const char *key) {
    if (!doc.contains(key)) {
        throw ParseError(fmt::format("manifest is missing field '{}'", key), key);
    }
    try {
        return doc.at(key).get<T>();
    } catch (const json::exception &e) {
        throw ParseError(fmt::format("manifest field '{}': {}", key, e.what()), key);
    }
}

} // namespace

// ---------------------------------------------------------------------------------------------
// citizens

void write_citizens(std::ostream &out, std::span<const Citizen> population) {
    out << header_line(kCitizenHeader) << '\n';
    for (const auto &c : population) {
        out << fmt::format("{},{},{},{},{},{}\n", c.id, c.age,
                           format_severity(c.health.visual_impairment),
                           format_severity(c.health.respiratory),
                           format_severity(c.health.reduced_mobility),
                           format_severity(c.health.heart_disease));
    }
}

void write_citizens(const std::filesystem::path &path, std::span<const Citizen> population) {
    auto out = open_for_writing(path);
    write_citizens(out, population);
}

std::vector<Citizen> read_citizens(std::istream &in, int heart_age_threshold) {
    CsvReader reader{in};
    expect_header(reader, kCitizenHeader, kCitizenHeader.size(), "citizens");

    std::vector<Citizen> population;
    std::unordered_set<int> ids;
    CsvRecord record;
    while (reader.next(record)) {
        expect_width(record, kCitizenHeader.size());
        Citizen citizen;
        citizen.id = number_field<int>(record, 0, kCitizenHeader[0]);
        citizen.age = number_field<int>(record, 1, kCitizenHeader[1]);
        for (auto condition : kAllConditions) {
            const auto field = 2 + static_cast<std::size_t>(condition);
            const double value = number_field<double>(record, field, kCitizenHeader[field]);
            try {
                citizen.health[condition] = Severity::from_value(value);
            } catch (const ValidationError &e) {
                throw field_invalid(record, field, kCitizenHeader[field], e.what());
            }
        }
        if (!ids.insert(citizen.id).second) {
            throw field_invalid(record, 0, "id", fmt::format("duplicate citizen id {}", citizen.id));
        }
        try {
            validate_citizen(citizen, heart_age_threshold);
        } catch (const ValidationError &e) {
            throw ValidationError(fmt::format("line {}: {}", record.line, e.what()));
        }
        population.push_back(citizen);
    }
    return population;
}

std::vector<Citizen> read_citizens(const std::filesystem::path &path, int heart_age_threshold) {
    auto in = open_for_reading(path);
    return read_citizens(in, heart_age_threshold);
}

// ---------------------------------------------------------------------------------------------
// routes

void write_routes(std::ostream &out, std::span<const Route> routes) {
    out << header_line(kRouteHeader) << '\n';
    for (const auto &r : routes) {
        std::string checkpoints;
        for (const auto &p : r.checkpoints) {
            if (!checkpoints.empty()) {
                checkpoints += ';';
            }
            checkpoints += format_point(p);
        }
        out << fmt::format("{},{},{},{},{},{},{},{}\n", csv_field(r.id),
                           csv_field(format_point(r.start)), csv_field(format_point(r.end)),
                           csv_field(checkpoints), format_real(r.distance_km),
                           format_real(r.elevation_gain_m), to_string(r.pavement),
                           to_string(r.status));
    }
}

void write_routes(const std::filesystem::path &path, std::span<const Route> routes) {
    auto out = open_for_writing(path);
    write_routes(out, routes);
}

std::vector<Route> read_routes(std::istream &in) {
    CsvReader reader{in};
    expect_header(reader, kRouteHeader, kRouteHeader.size(), "routes");

    std::vector<Route> routes;
    std::set<std::string> ids;
    CsvRecord record;
    while (reader.next(record)) {
        expect_width(record, kRouteHeader.size());
        Route route;
        route.id = record.fields[0];
        if (route.id.empty()) {
            throw field_error(record, 0, "id", "empty route id");
        }
        route.start = point_field(record, 1, "start", record.fields[1]);
        route.end = point_field(record, 2, "end", record.fields[2]);

        std::string_view rest = record.fields[3];
        while (!rest.empty()) {
            const auto split = rest.find(';');
            const auto piece = rest.substr(0, split);
            if (piece.find_first_not_of(" \t") != std::string_view::npos) {
                route.checkpoints.push_back(point_field(record, 3, "checkpoints", piece));
            }
            rest = split == std::string_view::npos ? std::string_view{} : rest.substr(split + 1);
        }

        route.distance_km = number_field<double>(record, 4, "distance_km");
        route.elevation_gain_m = number_field<double>(record, 5, "elevation_gain_m");
        try {
            route.pavement = parse_pavement(record.fields[6]);
        } catch (const ParseError &e) {
            throw field_error(record, 6, "pavement", "unknown pavement quality");
        }
        try {
            route.status = parse_status(record.fields[7]);
        } catch (const ParseError &e) {
            throw field_error(record, 7, "status", "unknown status");
        }

        try {
            validate_route(route);
        } catch (const ValidationError &e) {
            throw ValidationError(fmt::format("line {}: {}", record.line, e.what()));
        }
        if (!ids.insert(route.id).second) {
            throw field_invalid(record, 0, "id", fmt::format("duplicate route id {}", route.id));
        }
        routes.push_back(std::move(route));
    }
    return routes;
}

std::vector<Route> read_routes(const std::filesystem::path &path) {
    auto in = open_for_reading(path);
    return read_routes(in);
}

// ---------------------------------------------------------------------------------------------
// ratings

void write_ratings(std::ostream &out, const RatingsMatrix &ratings, RatingFormat format,
                   RatingOracles oracles) {
    const bool with_oracles = oracles.deterministic != nullptr || oracles.noisy != nullptr;
    if (with_oracles && (oracles.deterministic == nullptr || oracles.noisy == nullptr)) {
        throw std::invalid_argument("oracle columns need both the deterministic and noisy matrices");
    }
    out << header_line(kRatingHeader, with_oracles ? 5 : 3) << '\n';

    const auto &users = ratings.user_ids();
    const auto &routes = ratings.route_ids();
    std::string line;
    for (std::size_t u = 0; u < ratings.n_users(); ++u) {
        for (std::size_t r = 0; r < ratings.n_routes(); ++r) {
            if (!ratings.rated(u, r)) {
                continue;
            }
            const double value = ratings.at(u, r);
            line = fmt::format("{},{},", users[u], csv_field(routes[r]));
            if (format == RatingFormat::integer) {
                if (value != std::round(value)) {
                    throw ValidationError(fmt::format(
                        "user {} route {}: rating {} is not an integer", users[u], routes[r], value));
                }
                line += fmt::format("{}", static_cast<int>(value));
            } else {
                line += format_real(value);
            }
            if (with_oracles) {
                line += ',' + format_real(oracles.deterministic->at(u, r));
                line += ',' + format_real(oracles.noisy->at(u, r));
            }
            line += '\n';
            out << line;
        }
    }
}

void write_ratings(const std::filesystem::path &path, const RatingsMatrix &ratings,
                   RatingFormat format, RatingOracles oracles) {
    auto out = open_for_writing(path);
    write_ratings(out, ratings, format, oracles);
}

RatingsFile read_ratings(std::istream &in, RatingFormat format) {
    CsvReader reader{in};
    const auto width = expect_header(reader, kRatingHeader, 3, "ratings");
    if (width == 4) {
        throw ParseError("ratings header: the deterministic and noisy columns come as a pair",
                         "deterministic", 1, 4);
    }
    const bool with_oracles = width == 5;

    struct Cell {
        std::size_t user;
        std::size_t route;
        double rating;
        double deterministic;
        double noisy;
        std::size_t line;
    };
    std::vector<Cell> cells;
    std::vector<int> user_ids;
    std::vector<std::string> route_ids;
    std::unordered_map<int, std::size_t> user_index;
    std::unordered_map<std::string, std::size_t> route_index;

    const auto check_range = [](const CsvRecord &record, std::size_t field, double value) {
        if (!(value >= 0.0 && value <= 10.0)) {
            throw field_invalid(record, field, kRatingHeader[field],
                                fmt::format("rating {} outside [0, 10]", value));
        }
    };

    CsvRecord record;
    while (reader.next(record)) {
        expect_width(record, width);
        const int user_id = number_field<int>(record, 0, "user_id");
        const auto &route_id = record.fields[1];
        if (route_id.empty()) {
            throw field_error(record, 1, "route_id", "empty route id");
        }

        double rating = 0.0;
        if (format == RatingFormat::integer) {
            const auto &text = record.fields[2];
            const auto value = number_field<double>(record, 2, "rating");
            if (value != std::round(value) || text.find_first_of(".eE") != std::string::npos) {
                throw field_invalid(record, 2, "rating",
                                    fmt::format("rating '{}' is not an integer", text));
            }
            rating = value;
        } else {
            rating = number_field<double>(record, 2, "rating");
        }
        check_range(record, 2, rating);

        Cell cell{0, 0, rating, RatingsMatrix::kUnrated, RatingsMatrix::kUnrated, record.line};
        if (with_oracles) {
            cell.deterministic = number_field<double>(record, 3, "deterministic");
            cell.noisy = number_field<double>(record, 4, "noisy");
            check_range(record, 3, cell.deterministic);
            check_range(record, 4, cell.noisy);
        }

        auto [u, new_user] = user_index.try_emplace(user_id, user_ids.size());
        if (new_user) {
            user_ids.push_back(user_id);
        }
        auto [r, new_route] = route_index.try_emplace(route_id, route_ids.size());
        if (new_route) {
            route_ids.push_back(route_id);
        }
        cell.user = u->second;
        cell.route = r->second;
        cells.push_back(cell);
    }

    RatingsFile file{RatingsMatrix{user_ids, route_ids}, std::nullopt, std::nullopt};
    if (with_oracles) {
        file.deterministic.emplace(user_ids, route_ids);
        file.noisy.emplace(user_ids, route_ids);
    }
    for (const auto &cell : cells) {
        if (file.ratings.rated(cell.user, cell.route)) {
            throw ValidationError(fmt::format("line {}: duplicate rating for user {} route {}",
                                              cell.line, user_ids[cell.user],
                                              route_ids[cell.route]));
        }
        file.ratings.set(cell.user, cell.route, cell.rating);
        if (with_oracles) {
            file.deterministic->set(cell.user, cell.route, cell.deterministic);
            file.noisy->set(cell.user, cell.route, cell.noisy);
        }
    }
    return file;
}

RatingsFile read_ratings(const std::filesystem::path &path, RatingFormat format) {
    auto in = open_for_reading(path);
    return read_ratings(in, format);
}

// ---------------------------------------------------------------------------------------------
// manifests

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(now));
}

void write_manifest(std::ostream &out, const RunManifest &m) {
    json doc;
    doc["seed"] = m.seed;
    doc["generator_version"] = m.generator_version;
    doc["command"] = m.command;
    doc["config_digests"] = m.config_digests;
    doc["shapes"] = {{"n_users", m.n_users}, {"m_routes", m.m_routes}, {"n_ratings", m.n_ratings}};
    doc["created"] = m.created;
    doc["inputs"] = m.inputs;
    doc["outputs"] = m.outputs;
    out << doc.dump(2) << '\n';
}

void write_manifest(const std::filesystem::path &path, const RunManifest &manifest) {
    auto out = open_for_writing(path);
    write_manifest(out, manifest);
}

RunManifest read_manifest(std::istream &in) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error &e) {
        throw ParseError(fmt::format("manifest is not valid JSON: {}", e.what()), "");
    }

    RunManifest m;
    m.seed = json_field<std::uint64_t>(doc, "seed");
    m.generator_version = json_field<std::string>(doc, "generator_version");
    m.command = json_field<std::string>(doc, "command");
    m.config_digests = json_field<std::map<std::string, std::string>>(doc, "config_digests");
    const auto shapes = json_field<json>(doc, "shapes");
    m.n_users = json_field<std::size_t>(shapes, "n_users");
    m.m_routes = json_field<std::size_t>(shapes, "m_routes");
    m.n_ratings = json_field<std::size_t>(shapes, "n_ratings");
    m.created = json_field<std::string>(doc, "created");
    m.inputs = json_field<std::map<std::string, std::string>>(doc, "inputs");
    m.outputs = json_field<std::map<std::string, std::string>>(doc, "outputs");
    return m;
}

RunManifest read_manifest(const std::filesystem::path &path) {
    auto in = open_for_reading(path);
    return read_manifest(in);
}

std::filesystem::path manifest_path_for(const std::filesystem::path &data_file) {
    auto path = data_file;
    path += ".manifest.json";
    return path;
}

std::vector<std::string> verify_manifest(const RunManifest &manifest,
                                         const std::map<std::string, std::string> &supplied) {
    std::vector<std::string> warnings;
    for (const auto &[name, digest] : supplied) {
        const auto it = manifest.config_digests.find(name);
        if (it == manifest.config_digests.end()) {
            warnings.push_back(fmt::format("manifest has no digest for {} config", name));
        } else if (it->second != digest) {
            warnings.push_back(fmt::format(
                "{} config differs from the one recorded in the manifest ({} vs {})", name,
                digest.substr(0, 12), it->second.substr(0, 12)));
        }
    }
    return warnings;
}

std::vector<std::string> verify_outputs(const RunManifest &manifest,
                                        const std::filesystem::path &directory) {
    std::vector<std::string> warnings;
    for (const auto &[name, digest] : manifest.outputs) {
        const auto path = directory / name;
        if (!std::filesystem::exists(path)) {
            warnings.push_back(fmt::format("{} listed in the manifest is missing", name));
        } else if (sha256_file(path) != digest) {
            warnings.push_back(fmt::format("{} changed since the manifest was written", name));
        }
    }
    return warnings;
}

} // namespace healthroute
