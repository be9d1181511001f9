#pragma once

#include <charconv>
#include <string>

namespace mee {

/// Shortest decimal form that round-trips; the same value always prints the same.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

} // namespace mee
