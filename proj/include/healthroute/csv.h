#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace healthroute {

/// One parsed row and the 1-based line it came from.
struct CsvRecord {
    std::vector<std::string> fields;
    std::size_t line{0};
};

/// Comma-separated reader with RFC 4180 quoting ("" escapes a quote inside a quoted field).
/// Records do not span lines. Blank lines are skipped; a trailing CR is dropped.
class CsvReader {
  public:
    explicit CsvReader(std::istream &in) : in_{in} {}

    /// False at end of input. Throws ParseError on an unterminated quote.
    bool next(CsvRecord &record);

  private:
    std::istream &in_;
    std::size_t line_{0};
};

/// Quotes a field when it contains a comma, quote or leading/trailing space.
std::string csv_field(std::string_view text);

} // namespace healthroute
