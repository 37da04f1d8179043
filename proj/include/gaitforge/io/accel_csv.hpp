#pragma once

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "gaitforge/core/error.hpp"
#include "gaitforge/datamodel.hpp"

namespace gaitforge::io {

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size() && !s.empty();
}

inline std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace detail

inline constexpr std::string_view kAccelHeader = "t_ms,ax,ay,az";

// Parses `t_ms,ax,ay,az` rows. Timestamps must be strictly increasing.
inline std::vector<AccelSample> parse_accel_csv(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError(source, 1, "missing header");
  ++line_no;
  if (detail::trim(line) != kAccelHeader)
    throw ParseError(source, line_no, "expected header '" + std::string(kAccelHeader) + "'");

  std::vector<AccelSample> samples;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = detail::trim(line);
    if (row.empty()) continue;
    std::string_view fields[4];
    std::size_t count = 0;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = row.find(',', start);
      if (count == 4) throw ParseError(source, line_no, "too many fields");
      fields[count++] = row.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (count != 4) throw ParseError(source, line_no, "expected 4 fields");
    AccelSample s;
    if (!detail::parse_number(fields[0], s.t_ms)) throw ParseError(source, line_no, "bad timestamp");
    if (!detail::parse_number(fields[1], s.ax) || !detail::parse_number(fields[2], s.ay) ||
        !detail::parse_number(fields[3], s.az))
      throw ParseError(source, line_no, "bad acceleration value");
    if (!samples.empty() && s.t_ms <= samples.back().t_ms)
      throw ValidationError(source + ":" + std::to_string(line_no) + ": timestamps must be strictly increasing");
    samples.push_back(s);
  }
  return samples;
}

inline std::vector<AccelSample> load_accel_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_accel_csv(in, path.string());
}

inline void write_accel_csv(std::ostream& out, const std::vector<AccelSample>& samples) {
  out << kAccelHeader << '\n';
  for (const AccelSample& s : samples)
    out << s.t_ms << ',' << detail::format_double(s.ax) << ',' << detail::format_double(s.ay) << ','
        << detail::format_double(s.az) << '\n';
}

inline void save_accel_csv(const std::filesystem::path& path, const std::vector<AccelSample>& samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_accel_csv(out, samples);
  if (!out) throw IoError("write failed for " + path.string());
}

// Sampling rate from the median inter-sample interval; 0 when undefined.
inline double infer_rate_hz(const std::vector<AccelSample>& samples) {
  if (samples.size() < 2) return 0.0;
  std::vector<std::int64_t> gaps;
  gaps.reserve(samples.size() - 1);
  for (std::size_t i = 1; i < samples.size(); ++i) gaps.push_back(samples[i].t_ms - samples[i - 1].t_ms);
  std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
  const auto median = gaps[gaps.size() / 2];
  return median > 0 ? 1000.0 / static_cast<double>(median) : 0.0;
}

}  // namespace gaitforge::io
