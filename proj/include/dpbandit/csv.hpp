#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dpbandit {

// Shortest round-trip representation; from_chars parses it back exactly.
inline std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Integral doubles (horizons, counts) print without an exponent.
inline std::string format_count(double v) {
  if (std::isfinite(v) && v >= 0.0 && v < 9.2e18 && v == std::floor(v)) {
    char buf[24];
    const auto res =
        std::to_chars(buf, buf + sizeof(buf), static_cast<std::uint64_t>(v));
    return std::string(buf, res.ptr);
  }
  return format_double(v);
}

inline double parse_double(std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw std::invalid_argument("bad floating-point field: " + std::string(s));
  return v;
}

inline std::uint64_t parse_u64(std::string_view s) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw std::invalid_argument("bad integer field: " + std::string(s));
  return v;
}

inline std::vector<std::string_view> split_fields(std::string_view line,
                                                  char sep = ',') {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

// Comma-separated decimals, e.g. the --means and --epsilon CLI flags.
inline std::vector<double> parse_double_list(std::string_view s) {
  std::vector<double> out;
  for (std::string_view field : split_fields(s)) out.push_back(parse_double(field));
  return out;
}

}  // namespace dpbandit
