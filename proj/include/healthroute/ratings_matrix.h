#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace healthroute {

/// Dense users x routes grid of ratings in [0, 10]. Unrated cells hold NaN, which lets the
/// same type serve the complete generator output and sparse evaluation splits.
class RatingsMatrix {
  public:
    static constexpr double kUnrated = std::numeric_limits<double>::quiet_NaN();

    RatingsMatrix() = default;

    /// All cells start unrated. Throws std::invalid_argument for duplicate ids.
    RatingsMatrix(std::vector<int> user_ids, std::vector<std::string> route_ids);

    std::size_t n_users() const noexcept { return user_ids_.size(); }
    std::size_t n_routes() const noexcept { return route_ids_.size(); }
    std::size_t n_rated() const noexcept { return n_rated_; }
    bool complete() const noexcept { return n_rated_ == values_.size(); }

    const std::vector<int> &user_ids() const noexcept { return user_ids_; }
    const std::vector<std::string> &route_ids() const noexcept { return route_ids_; }

    /// Throw std::out_of_range for unknown ids.
    std::size_t user_index(int user_id) const;
    std::size_t route_index(std::string_view route_id) const;
    std::optional<std::size_t> find_user(int user_id) const noexcept;
    std::optional<std::size_t> find_route(std::string_view route_id) const noexcept;

    bool rated(std::size_t user, std::size_t route) const noexcept;
    /// NaN when unrated.
    double at(std::size_t user, std::size_t route) const noexcept {
        return values_[user * route_ids_.size() + route];
    }

    /// Throws std::out_of_range for a value outside [0, 10] or a non-finite value.
    void set(std::size_t user, std::size_t route, double rating);
    void clear(std::size_t user, std::size_t route) noexcept;

    /// Row view; unrated entries are NaN.
    std::span<const double> row(std::size_t user) const noexcept {
        return {values_.data() + user * route_ids_.size(), route_ids_.size()};
    }

    friend bool operator==(const RatingsMatrix &a, const RatingsMatrix &b);

  private:
    std::vector<int> user_ids_;
    std::vector<std::string> route_ids_;
    std::unordered_map<int, std::size_t> user_lookup_;
    std::unordered_map<std::string, std::size_t> route_lookup_;
    std::vector<double> values_;
    std::size_t n_rated_{0};
};

} // namespace healthroute
