#pragma once

#include <charconv>
#include <stdexcept>
#include <string>
#include <string_view>

namespace daimon {

/// Shortest decimal representation that parses back to the identical double.
inline std::string double_to_string(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("double_to_string failed");
  return std::string(buf, end);
}

inline double double_from_string(std::string_view s) {
  double v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw std::runtime_error("double_from_string: bad literal '" + std::string(s) + "'");
  return v;
}

}  // namespace daimon
