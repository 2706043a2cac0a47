#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace htrace {

// Shortest decimal that round-trips to the same double. Stable across runs,
// which the golden-file and determinism checks rely on.
std::string format_double(double value);
std::string format_double(const std::optional<double>& value);

// RFC 4180 quoting, only when the field needs it.
std::string csv_escape(std::string_view field);
std::string csv_row(const std::vector<std::string>& fields);

std::vector<std::string> split_list(std::string_view text, char sep = ',');

}  // namespace htrace
