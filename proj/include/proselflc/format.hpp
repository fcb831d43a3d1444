#pragma once

#include <charconv>
#include <string>

namespace proselflc {

/// Shortest round-trip decimal form; '.' decimal point regardless of locale.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace proselflc
