#pragma once

#include <charconv>
#include <string>

namespace flowhiql {

/// Shortest decimal form that round-trips, independent of locale.
inline std::string fmt(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

}  // namespace flowhiql
