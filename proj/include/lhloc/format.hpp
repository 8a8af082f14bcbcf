#pragma once

#include <string>
#include <string_view>

namespace lhloc {

/// Shortest decimal text that reads back to the same double ("nan" for NaN).
std::string format_double(double value);

/// Inverse of format_double. Throws FormatError (offset 0) on malformed input.
double parse_double(std::string_view text);

}  // namespace lhloc
