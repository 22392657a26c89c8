#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace healthroute {

inline constexpr double kEarthRadiusKm = 6371.0;

/// Latitude/longitude in decimal degrees. Ranges are enforced on construction.
class GeoPoint {
  public:
    /// Throws ValidationError unless latitude is in [-90, 90] and longitude in [-180, 180].
    GeoPoint(double latitude, double longitude);

    double latitude() const noexcept { return latitude_; }
    double longitude() const noexcept { return longitude_; }

    friend bool operator==(const GeoPoint &, const GeoPoint &) = default;

  private:
    double latitude_;
    double longitude_;
};

enum class Axis { latitude, longitude };

/// A single signed coordinate and the axis its hemisphere letter selected.
struct Coordinate {
    double degrees;
    Axis axis;
};

/// Parses `41°4'44.54"N`. Whitespace between the components is allowed, as are the
/// typographic prime marks and `d` for the degree sign. Throws ParseError naming the
/// offending token for malformed text, minutes or seconds >= 60, or degrees out of range.
Coordinate parse_dms(std::string_view text);

/// Formats a coordinate as `D°M'S.ss"H` with the given number of decimals on the seconds.
std::string format_dms(double degrees, Axis axis, int second_decimals = 2);

/// Parses a point written either as two DMS coordinates (`41°4'44.54"N 1°12'49.58"E`,
/// optionally comma separated, in either order) or as decimal `lat lon` / `lat,lon`.
GeoPoint parse_point(std::string_view text);

/// Decimal `lat lon` with seven decimals (about 1 cm).
std::string format_point(const GeoPoint &point);

/// Great-circle distance on a sphere of radius 6371 km.
double haversine_km(const GeoPoint &a, const GeoPoint &b) noexcept;

enum class Pavement : int { very_poor = 1, poor = 2, average = 3, good = 4, very_good = 5 };
enum class RouteStatus { idle, caution };

/// Case-insensitive; spaces, underscores and hyphens ignored ("Very good" == "VeryGood").
/// Throws ParseError for anything else.
Pavement parse_pavement(std::string_view text);
std::string_view to_string(Pavement pavement) noexcept;

/// Only "Idle" and "Caution" are known (case-insensitive). Throws ParseError otherwise.
RouteStatus parse_status(std::string_view text);
std::string_view to_string(RouteStatus status) noexcept;

struct Route {
    std::string id;
    GeoPoint start{0.0, 0.0};
    GeoPoint end{0.0, 0.0};
    std::vector<GeoPoint> checkpoints;
    double distance_km{0.0};
    double elevation_gain_m{0.0};
    Pavement pavement{Pavement::average};
    RouteStatus status{RouteStatus::idle};

    friend bool operator==(const Route &, const Route &) = default;
};

/// Throws ValidationError for an empty id, distance <= 0, negative elevation gain, or a
/// declared distance shorter than the straight line from start to end.
void validate_route(const Route &route);

/// Ease scores in [0, 5]; higher is easier.
struct FeatureScores {
    double distance{0.0};
    double elevation{0.0};
    double pavement{0.0};

    friend bool operator==(const FeatureScores &, const FeatureScores &) = default;
};

/// Scores one route against the corpus it belongs to:
///   distance  5 * (d_max - d) / (d_max - d_min)   (shortest 5, longest 0)
///   elevation 5 * (1 - e / e_max)                 (0 m is 5, corpus maximum is 0)
///   pavement  ordinal VeryPoor..VeryGood -> 1..5
/// A feature that is constant across the corpus (including a one-route corpus) scores 5.
/// Throws std::invalid_argument if the corpus is empty or does not contain the route id.
FeatureScores normalize_features(const Route &route, std::span<const Route> corpus);

/// Immutable, validated route collection with feature scores precomputed against itself.
class RouteCatalog {
  public:
    /// Throws ValidationError for an empty catalog, duplicate ids or an invalid route.
    explicit RouteCatalog(std::vector<Route> routes);

    const std::vector<Route> &routes() const noexcept { return routes_; }
    std::size_t size() const noexcept { return routes_.size(); }
    const Route &operator[](std::size_t i) const { return routes_.at(i); }

    /// Throws std::out_of_range for an unknown id.
    std::size_t index_of(std::string_view id) const;
    const Route &find(std::string_view id) const { return routes_[index_of(id)]; }

    const FeatureScores &scores(std::size_t i) const { return scores_.at(i); }

  private:
    std::vector<Route> routes_;
    std::vector<FeatureScores> scores_;
};

} // namespace healthroute
