#pragma once

#include <charconv>
#include <string>

namespace geodid {

//! Shortest decimal form that parses back to the same double ("1.5", not
//! "1.500000"); non-finite values print as "nan"/"inf".
inline std::string format_double(double value) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

}  // namespace geodid
