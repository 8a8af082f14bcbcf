#include "lhloc/session.hpp"

namespace lhloc {

std::uint64_t timestamp_of(const CfEvent& event) {
  return std::visit([](const auto& e) { return e.timestamp_us; }, event);
}

}  // namespace lhloc
