#pragma once

#include <charconv>
#include <string>

namespace idde::detail {

// Shortest round-trip representation; shared by every text writer so that
// CLI and service output stay byte-identical.
inline void append_double(std::string& out, double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, res.ptr);
}

} // namespace idde::detail
