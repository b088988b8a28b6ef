#pragma once

#include <charconv>
#include <cmath>
#include <string>
#include <system_error>
#include <vector>

#include "dalloy/errors.hpp"

namespace dalloy {

// Shortest round-trip decimal representation; the basis of byte-identical
// result files.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc()) fail(ErrorKind::Io, "number formatting failed");
  return std::string(buf, res.ptr);
}

inline std::string csv_row(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += cells[i];
  }
  out += '\n';
  return out;
}

}  // namespace dalloy
