#pragma once

#include <charconv>
#include <string>

namespace rumorloc {

// Shortest round-trip decimal form. Both cascade files and benchmark CSV
// rely on this being byte-stable across runs.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace rumorloc
