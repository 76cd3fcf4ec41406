#pragma once

#include <charconv>
#include <string>
#include <system_error>

namespace slateval {

/// Shortest round-trip decimal form of a double, e.g. 0.3 -> "0.3".
/// Locale-independent, so emitted files are byte-stable across machines.
inline std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

}  // namespace slateval
