#include "healthroute/csv.h"

#include "healthroute/errors.h"

#include <fmt/format.h>
#include <istream>

namespace healthroute {

bool CsvReader::next(CsvRecord &record) {
    std::string text;
    while (std::getline(in_, text)) {
        ++line_;
        if (!text.empty() && text.back() == '\r') {
            text.pop_back();
        }
        if (text.empty()) {
            continue;
        }

        record.fields.clear();
        record.line = line_;
        std::string field;
        bool quoted = false;
        std::size_t quote_column = 0;
        for (std::size_t i = 0; i < text.size(); ++i) {
            const char c = text[i];
            if (quoted) {
                if (c == '"') {
                    if (i + 1 < text.size() && text[i + 1] == '"') {
                        field.push_back('"');
                        ++i;
                    } else {
                        quoted = false;
                    }
                } else {
                    field.push_back(c);
                }
            } else if (c == '"') {
                quoted = true;
                quote_column = i + 1;
            } else if (c == ',') {
                record.fields.push_back(std::move(field));
                field.clear();
            } else {
                field.push_back(c);
            }
        }
        if (quoted) {
            throw ParseError(fmt::format("line {}: unterminated quote opened at column {}", line_,
                                         quote_column),
                             text.substr(quote_column - 1), line_, quote_column);
        }
        record.fields.push_back(std::move(field));
        return true;
    }
    return false;
}

std::string csv_field(std::string_view text) {
    const bool needs_quotes = text.find_first_of(",\"") != std::string_view::npos ||
                              (!text.empty() && (text.front() == ' ' || text.back() == ' '));
    if (!needs_quotes) {
        return std::string{text};
    }
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') {
            out += "\"\"";
        } else {
            out.push_back(c);
        }
    }
    out.push_back('"');
    return out;
}

} // namespace healthroute
