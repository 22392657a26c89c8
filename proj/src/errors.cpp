#include "healthroute/errors.h"

#include <utility>

namespace healthroute {

ParseError::ParseError(const std::string &message, std::string token, std::size_t line,
                       std::size_t column)
    : std::runtime_error{message}, token_{std::move(token)}, line_{line}, column_{column} {}

} // namespace healthroute
