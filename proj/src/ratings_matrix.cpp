#include "healthroute/ratings_matrix.h"

#include <cmath>
#include <fmt/format.h>
#include <stdexcept>

namespace healthroute {

RatingsMatrix::RatingsMatrix(std::vector<int> user_ids, std::vector<std::string> route_ids)
    : user_ids_{std::move(user_ids)}, route_ids_{std::move(route_ids)},
      values_(user_ids_.size() * route_ids_.size(), kUnrated) {
    user_lookup_.reserve(user_ids_.size());
    for (std::size_t i = 0; i < user_ids_.size(); ++i) {
        if (!user_lookup_.emplace(user_ids_[i], i).second) {
            throw std::invalid_argument(fmt::format("duplicate user id {}", user_ids_[i]));
        }
    }
    for (std::size_t j = 0; j < route_ids_.size(); ++j) {
        if (!route_lookup_.emplace(route_ids_[j], j).second) {
            throw std::invalid_argument(fmt::format("duplicate route id {}", route_ids_[j]));
        }
    }
}

std::optional<std::size_t> RatingsMatrix::find_user(int user_id) const noexcept {
    const auto it = user_lookup_.find(user_id);
    if (it == user_lookup_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::optional<std::size_t> RatingsMatrix::find_route(std::string_view route_id) const noexcept {
    const auto it = route_lookup_.find(std::string{route_id});
    if (it == route_lookup_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::size_t RatingsMatrix::user_index(int user_id) const {
    if (auto index = find_user(user_id)) {
        return *index;
    }
    throw std::out_of_range(fmt::format("unknown user id {}", user_id));
}

std::size_t RatingsMatrix::route_index(std::string_view route_id) const {
    if (auto index = find_route(route_id)) {
        return *index;
    }
    throw std::out_of_range(fmt::format("unknown route id {}", route_id));
}

bool RatingsMatrix::rated(std::size_t user, std::size_t route) const noexcept {
    return !std::isnan(at(user, route));
}

void RatingsMatrix::set(std::size_t user, std::size_t route, double rating) {
    if (!(rating >= 0.0 && rating <= 10.0)) {
        throw std::out_of_range(fmt::format("rating {} outside [0, 10]", rating));
    }
    auto &cell = values_.at(user * route_ids_.size() + route);
    if (std::isnan(cell)) {
        ++n_rated_;
    }
    cell = rating;
}

void RatingsMatrix::clear(std::size_t user, std::size_t route) noexcept {
    auto &cell = values_[user * route_ids_.size() + route];
    if (!std::isnan(cell)) {
        --n_rated_;
    }
    cell = kUnrated;
}

bool operator==(const RatingsMatrix &a, const RatingsMatrix &b) {
    if (a.user_ids_ != b.user_ids_ || a.route_ids_ != b.route_ids_) {
        return false;
    }
    for (std::size_t i = 0; i < a.values_.size(); ++i) {
        const double x = a.values_[i];
        const double y = b.values_[i];
        if (std::isnan(x) != std::isnan(y) || (!std::isnan(x) && x != y)) {
            return false;
        }
    }
    return true;
}

} // namespace healthroute
