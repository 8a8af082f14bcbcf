#include "lhloc/format.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <limits>

#include "lhloc/errors.hpp"

namespace lhloc {

std::string format_double(double value) {
  if (std::isnan(value)) {
    return "nan";
  }
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

double parse_double(std::string_view text) {
  if (text == "nan") {
    return std::numeric_limits<double>::quiet_NaN();
  }
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw FormatError("malformed number '" + std::string(text) + "'", 0);
  }
  return out;
}

}  // namespace lhloc
