#include "healthroute/routes.h"

#include "healthroute/errors.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fmt/format.h>
#include <numbers>
#include <stdexcept>
#include <unordered_set>

namespace healthroute {

namespace {

constexpr std::string_view kDegreeSign = "\xC2\xB0";       // °
constexpr std::string_view kOrdinalIndicator = "\xC2\xBA"; // º, a common stand-in for °
constexpr std::string_view kPrime = "\xE2\x80\xB2";        // ′
constexpr std::string_view kDoublePrime = "\xE2\x80\xB3";  // ″

bool is_space(char c) noexcept { return c == ' ' || c == '\t'; }

std::string_view trim(std::string_view text) noexcept {
    while (!text.empty() && (is_space(text.front()) || text.front() == ',')) {
        text.remove_prefix(1);
    }
    while (!text.empty() && (is_space(text.back()) || text.back() == ',')) {
        text.remove_suffix(1);
    }
    return text;
}

class DmsScanner {
  public:
    explicit DmsScanner(std::string_view text) : text_{text} {}

    void skip_spaces() noexcept {
        while (pos_ < text_.size() && is_space(text_[pos_])) {
            ++pos_;
        }
    }

    bool consume(std::string_view token) noexcept {
        if (text_.substr(pos_).starts_with(token)) {
            pos_ += token.size();
            return true;
        }
        return false;
    }

    template <std::size_t N> bool consume_any(const std::array<std::string_view, N> &tokens) {
        return std::any_of(tokens.begin(), tokens.end(),
                           [this](std::string_view t) { return consume(t); });
    }

    std::string_view digits(bool allow_fraction) noexcept {
        const auto begin = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
        if (allow_fraction && pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            while (pos_ < text_.size() &&
                   std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                ++pos_;
            }
        }
        return text_.substr(begin, pos_ - begin);
    }

    char peek() const noexcept { return pos_ < text_.size() ? text_[pos_] : '\0'; }
    void advance() noexcept { ++pos_; }
    bool done() const noexcept { return pos_ >= text_.size(); }
    std::size_t column() const noexcept { return pos_ + 1; }
    std::string_view rest() const noexcept { return text_.substr(pos_); }

  private:
    std::string_view text_;
    std::size_t pos_{0};
};

double to_number(std::string_view token, std::string_view whole, std::size_t column) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (token.empty() || ec != std::errc{} || ptr != token.data() + token.size()) {
        throw ParseError(fmt::format("malformed DMS coordinate '{}': expected a number at "
                                     "column {}",
                                     whole, column),
                         std::string{token}, 0, column);
    }
    return value;
}

std::string normalized_word(std::string_view text) {
    std::string word;
    for (char c : text) {
        if (c == ' ' || c == '_' || c == '-' || c == '\t') {
            continue;
        }
        word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return word;
}

bool has_hemisphere_letter(std::string_view text) noexcept {
    return text.find_first_of("NSEWnsew") != std::string_view::npos;
}

} // namespace

GeoPoint::GeoPoint(double latitude, double longitude)
    : latitude_{latitude}, longitude_{longitude} {
    if (!(latitude >= -90.0 && latitude <= 90.0)) {
        throw ValidationError(fmt::format("latitude {} outside [-90, 90]", latitude));
    }
    if (!(longitude >= -180.0 && longitude <= 180.0)) {
        throw ValidationError(fmt::format("longitude {} outside [-180, 180]", longitude));
    }
}

Coordinate parse_dms(std::string_view text) {
    const std::string_view whole = trim(text);
    DmsScanner scan{whole};
    const auto fail = [&](std::string_view what, std::string_view token) -> ParseError {
        return ParseError(fmt::format("malformed DMS coordinate '{}': {}", whole, what),
                          std::string{token}, 0, scan.column());
    };

    scan.skip_spaces();
    const auto degree_column = scan.column();
    const auto degree_token = scan.digits(false);
    const double degrees = to_number(degree_token, whole, degree_column);
    scan.skip_spaces();
    if (!scan.consume_any(std::array{kDegreeSign, kOrdinalIndicator, std::string_view{"d"}})) {
        throw fail("expected a degree sign after the degrees", scan.rest().substr(0, 1));
    }

    scan.skip_spaces();
    const auto minute_column = scan.column();
    const auto minute_token = scan.digits(false);
    const double minutes = to_number(minute_token, whole, minute_column);
    scan.skip_spaces();
    if (!scan.consume_any(std::array{std::string_view{"'"}, kPrime})) {
        throw fail("expected ' after the minutes", scan.rest().substr(0, 1));
    }

    scan.skip_spaces();
    const auto second_column = scan.column();
    const auto second_token = scan.digits(true);
    const double seconds = to_number(second_token, whole, second_column);
    scan.skip_spaces();
    if (!scan.consume_any(std::array{std::string_view{"\""}, std::string_view{"''"}, kDoublePrime})) {
        throw fail("expected \" after the seconds", scan.rest().substr(0, 1));
    }

    scan.skip_spaces();
    const char hemisphere =
        static_cast<char>(std::toupper(static_cast<unsigned char>(scan.peek())));
    if (hemisphere != 'N' && hemisphere != 'S' && hemisphere != 'E' && hemisphere != 'W') {
        throw fail("expected hemisphere N, S, E or W", scan.rest().substr(0, 1));
    }
    scan.advance();
    scan.skip_spaces();
    if (!scan.done()) {
        throw fail("trailing characters", scan.rest());
    }

    if (minutes >= 60.0) {
        throw ParseError(fmt::format("DMS coordinate '{}': minutes must be < 60", whole),
                         std::string{minute_token}, 0, minute_column);
    }
    if (seconds >= 60.0) {
        throw ParseError(fmt::format("DMS coordinate '{}': seconds must be < 60", whole),
                         std::string{second_token}, 0, second_column);
    }

    const Axis axis = (hemisphere == 'N' || hemisphere == 'S') ? Axis::latitude : Axis::longitude;
    const double magnitude = degrees + minutes / 60.0 + seconds / 3600.0;
    const double limit = axis == Axis::latitude ? 90.0 : 180.0;
    if (magnitude > limit) {
        throw ParseError(fmt::format("DMS coordinate '{}' exceeds {} degrees", whole, limit),
                         std::string{degree_token}, 0, degree_column);
    }

    const bool negative = hemisphere == 'S' || hemisphere == 'W';
    return Coordinate{negative ? -magnitude : magnitude, axis};
}

std::string format_dms(double degrees, Axis axis, int second_decimals) {
    const char hemisphere = axis == Axis::latitude ? (degrees < 0.0 ? 'S' : 'N')
                                                   : (degrees < 0.0 ? 'W' : 'E');
    const double scale = std::pow(10.0, second_decimals);
    // Work in rounded units of the last printed second decimal so carries propagate.
    const auto units = static_cast<long long>(std::llround(std::abs(degrees) * 3600.0 * scale));
    const auto per_minute = static_cast<long long>(60 * scale);
    const auto per_degree = per_minute * 60;
    const long long whole_degrees = units / per_degree;
    const long long whole_minutes = (units % per_degree) / per_minute;
    const double seconds = static_cast<double>(units % per_minute) / scale;
    return fmt::format("{}{}{}'{:.{}f}\"{}", whole_degrees, kDegreeSign, whole_minutes, seconds,
                       second_decimals, hemisphere);
}

GeoPoint parse_point(std::string_view text) {
    const std::string_view whole = trim(text);
    if (whole.empty()) {
        throw ParseError("empty point", "");
    }

    if (has_hemisphere_letter(whole)) {
        const auto split = whole.find_first_of("NSEWnsew");
        const auto first = parse_dms(whole.substr(0, split + 1));
        const auto second = parse_dms(trim(whole.substr(split + 1)));
        if (first.axis == second.axis) {
            throw ParseError(fmt::format("point '{}' needs one latitude and one longitude", whole),
                             std::string{whole});
        }
        return first.axis == Axis::latitude ? GeoPoint{first.degrees, second.degrees}
                                            : GeoPoint{second.degrees, first.degrees};
    }

    const auto split = whole.find_first_of(" \t,");
    if (split == std::string_view::npos) {
        throw ParseError(fmt::format("point '{}' needs a latitude and a longitude", whole),
                         std::string{whole});
    }
    const auto lat_token = trim(whole.substr(0, split));
    const auto lon_token = trim(whole.substr(split + 1));
    const double latitude = to_number(lat_token, whole, 1);
    const double longitude = to_number(lon_token, whole, split + 2);
    try {
        return GeoPoint{latitude, longitude};
    } catch (const ValidationError &e) {
        throw ParseError(e.what(), std::string{whole});
    }
}

std::string format_point(const GeoPoint &point) {
    return fmt::format("{:.7f} {:.7f}", point.latitude(), point.longitude());
}

double haversine_km(const GeoPoint &a, const GeoPoint &b) noexcept {
    constexpr double to_rad = std::numbers::pi / 180.0;
    const double phi1 = a.latitude() * to_rad;
    const double phi2 = b.latitude() * to_rad;
    const double dphi = phi2 - phi1;
    const double dlambda = (b.longitude() - a.longitude()) * to_rad;
    const double h = std::sin(dphi / 2) * std::sin(dphi / 2) +
                     std::cos(phi1) * std::cos(phi2) * std::sin(dlambda / 2) * std::sin(dlambda / 2);
    return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

Pavement parse_pavement(std::string_view text) {
    const auto word = normalized_word(text);
    if (word == "verypoor") {
        return Pavement::very_poor;
    }
    if (word == "poor") {
        return Pavement::poor;
    }
    if (word == "average") {
        return Pavement::average;
    }
    if (word == "good") {
        return Pavement::good;
    }
    if (word == "verygood") {
        return Pavement::very_good;
    }
    throw ParseError(fmt::format("unknown pavement quality '{}' (expected VeryPoor, Poor, "
                                 "Average, Good or VeryGood)",
                                 text),
                     std::string{text});
}

std::string_view to_string(Pavement pavement) noexcept {
    switch (pavement) {
    case Pavement::very_poor:
        return "VeryPoor";
    case Pavement::poor:
        return "Poor";
    case Pavement::average:
        return "Average";
    case Pavement::good:
        return "Good";
    case Pavement::very_good:
        return "VeryGood";
    }
    return "Average";
}

RouteStatus parse_status(std::string_view text) {
    const auto word = normalized_word(text);
    if (word == "idle") {
        return RouteStatus::idle;
    }
    if (word == "caution") {
        return RouteStatus::caution;
    }
    throw ParseError(
        fmt::format("unknown route status '{}' (expected Idle or Caution)", text),
        std::string{text});
}

std::string_view to_string(RouteStatus status) noexcept {
    return status == RouteStatus::caution ? "Caution" : "Idle";
}

void validate_route(const Route &route) {
    if (route.id.empty()) {
        throw ValidationError("route id is empty");
    }
    if (!(route.distance_km > 0.0) || !std::isfinite(route.distance_km)) {
        throw ValidationError(
            fmt::format("route {}: distance must be positive, got {}", route.id, route.distance_km));
    }
    if (!(route.elevation_gain_m >= 0.0) || !std::isfinite(route.elevation_gain_m)) {
        throw ValidationError(fmt::format("route {}: elevation gain must be >= 0, got {}",
                                          route.id, route.elevation_gain_m));
    }

    const double straight = haversine_km(route.start, route.end);
    if (route.distance_km + 1e-9 < straight) {
        throw ValidationError(fmt::format(
            "route {}: declared distance {} km is shorter than the {:.3f} km straight line "
            "from start to end",
            route.id, route.distance_km, straight));
    }
}

FeatureScores normalize_features(const Route &route, std::span<const Route> corpus) {
    if (corpus.empty()) {
        throw std::invalid_argument("cannot normalize features against an empty corpus");
    }
    const bool member = std::any_of(corpus.begin(), corpus.end(),
                                    [&](const Route &r) { return r.id == route.id; });
    if (!member) {
        throw std::invalid_argument(
            fmt::format("route {} is not part of the normalization corpus", route.id));
    }

    const auto [min_d, max_d] = std::minmax_element(
        corpus.begin(), corpus.end(),
        [](const Route &a, const Route &b) { return a.distance_km < b.distance_km; });
    const auto [min_e, max_e] = std::minmax_element(
        corpus.begin(), corpus.end(),
        [](const Route &a, const Route &b) { return a.elevation_gain_m < b.elevation_gain_m; });

    FeatureScores scores;
    const double d_range = max_d->distance_km - min_d->distance_km;
    scores.distance =
        d_range > 0.0 ? 5.0 * ((max_d->distance_km - route.distance_km) / d_range) : 5.0;
    scores.elevation = max_e->elevation_gain_m > min_e->elevation_gain_m
                           ? 5.0 * (1.0 - route.elevation_gain_m / max_e->elevation_gain_m)
                           : 5.0;
    scores.pavement = static_cast<double>(static_cast<int>(route.pavement));
    return scores;
}

RouteCatalog::RouteCatalog(std::vector<Route> routes) : routes_{std::move(routes)} {
    if (routes_.empty()) {
        throw ValidationError("route catalog is empty");
    }

    std::unordered_set<std::string> seen;
    for (const auto &route : routes_) {
        validate_route(route);
        if (!seen.insert(route.id).second) {
            throw ValidationError(fmt::format("duplicate route id {}", route.id));
        }
    }

    scores_.reserve(routes_.size());
    for (const auto &route : routes_) {
        scores_.push_back(normalize_features(route, routes_));
    }
}

std::size_t RouteCatalog::index_of(std::string_view id) const {
    const auto it = std::find_if(routes_.begin(), routes_.end(),
                                 [&](const Route &r) { return r.id == id; });
    if (it == routes_.end()) {
        throw std::out_of_range(fmt::format("unknown route id {}", id));
    }
    return static_cast<std::size_t>(it - routes_.begin());
}

} // namespace healthroute
