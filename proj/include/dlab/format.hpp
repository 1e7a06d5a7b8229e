#pragma once

#include <charconv>
#include <optional>
#include <string>

namespace dlab {

/// Shortest round-trip decimal form. Identical bytes on every platform with
/// a conforming to_chars, which keeps TSV outputs reproducible.
inline std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

inline std::string format_optional(const std::optional<double>& value) {
  return value ? format_double(*value) : std::string("NA");
}

}  // namespace dlab
