#pragma once
// Minimal RFC 4180 helpers for single-line records (no embedded newlines,
// which labels cannot contain anyway).

#include <string>
#include <string_view>
#include <vector>

namespace confaudit::csv {

// Always wraps in double quotes, doubling embedded quotes.
std::string quote(std::string_view field);

// Splits one line into fields, honoring quoted fields. Throws
// std::runtime_error on an unterminated quote.
std::vector<std::string> split_line(std::string_view line);

}  // namespace confaudit::csv
