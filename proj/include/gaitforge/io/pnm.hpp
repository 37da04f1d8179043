#pragma once

#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "gaitforge/core/error.hpp"
#include "gaitforge/core/grid.hpp"
#include "gaitforge/datamodel.hpp"

// Binary PPM (P6, maxval 255) for color and PGM (P5, maxval <= 8191,
// big-endian 16-bit samples) for depth.

namespace gaitforge::io {

namespace detail {

struct PnmHeader {
  std::string magic;
  std::size_t width = 0;
  std::size_t height = 0;
  unsigned maxval = 0;
};

inline std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

// Parses the header and returns the offset of the first raster byte.
inline std::size_t parse_pnm_header(const std::vector<unsigned char>& bytes, PnmHeader& h, const std::string& name) {
  std::size_t pos = 0;
  auto skip_space_and_comments = [&] {
    for (;;) {
      while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
      if (pos < bytes.size() && bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else {
        return;
      }
    }
  };
  auto token = [&] {
    skip_space_and_comments();
    std::string t;
    while (pos < bytes.size() && !std::isspace(bytes[pos]) && bytes[pos] != '#') t.push_back(static_cast<char>(bytes[pos++]));
    if (t.empty()) throw FormatError(name + ": truncated header");
    return t;
  };
  auto number = [&] {
    const std::string t = token();
    for (char c : t)
      if (!std::isdigit(static_cast<unsigned char>(c))) throw FormatError(name + ": bad header field '" + t + "'");
    return std::stoul(t);
  };
  h.magic = token();
  h.width = number();
  h.height = number();
  h.maxval = static_cast<unsigned>(number());
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw FormatError(name + ": truncated header");
  return pos + 1;  // exactly one whitespace byte before the raster
}

}  // namespace detail

inline ColorImage decode_ppm(const std::vector<unsigned char>& bytes, const std::string& name) {
  detail::PnmHeader h;
  const std::size_t off = detail::parse_pnm_header(bytes, h, name);
  if (h.magic != "P6") throw FormatError(name + ": expected P6");
  if (h.maxval != 255) throw FormatError(name + ": color maxval must be 255");
  if (bytes.size() - off < h.width * h.height * 3) throw FormatError(name + ": truncated raster");
  ColorImage img(h.width, h.height);
  const unsigned char* p = bytes.data() + off;
  for (Rgb& px : img.data()) {
    px = {p[0], p[1], p[2]};
    p += 3;
  }
  return img;
}

inline std::vector<unsigned char> encode_ppm(const ColorImage& img) {
  const std::string header = "P6\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  std::vector<unsigned char> bytes(header.begin(), header.end());
  bytes.reserve(bytes.size() + img.size() * 3);
  for (const Rgb& px : img.data()) {
    bytes.push_back(px.r);
    bytes.push_back(px.g);
    bytes.push_back(px.b);
  }
  return bytes;
}

inline DepthImage decode_depth_pgm(const std::vector<unsigned char>& bytes, const std::string& name) {
  detail::PnmHeader h;
  const std::size_t off = detail::parse_pnm_header(bytes, h, name);
  if (h.magic != "P5") throw FormatError(name + ": expected P5");
  if (h.maxval == 0 || h.maxval > kMaxDepth)
    throw FormatError(name + ": depth maxval " + std::to_string(h.maxval) + " outside [1, 8191]");
  const std::size_t bps = h.maxval > 255 ? 2 : 1;
  if (bytes.size() - off < h.width * h.height * bps) throw FormatError(name + ": truncated raster");
  DepthImage img(h.width, h.height);
  const unsigned char* p = bytes.data() + off;
  for (std::uint16_t& d : img.data()) {
    d = bps == 2 ? static_cast<std::uint16_t>((p[0] << 8) | p[1]) : p[0];
    p += bps;
    if (d > h.maxval) throw FormatError(name + ": depth sample " + std::to_string(d) + " exceeds maxval");
  }
  return img;
}

inline std::vector<unsigned char> encode_depth_pgm(const DepthImage& img) {
  const std::string header = "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n" +
                             std::to_string(kMaxDepth) + "\n";
  std::vector<unsigned char> bytes(header.begin(), header.end());
  bytes.reserve(bytes.size() + img.size() * 2);
  for (std::uint16_t d : img.data()) {
    if (d > kMaxDepth) throw ValidationError("depth value " + std::to_string(d) + " exceeds 13-bit range");
    bytes.push_back(static_cast<unsigned char>(d >> 8));
    bytes.push_back(static_cast<unsigned char>(d & 0xff));
  }
  return bytes;
}

inline ColorImage load_ppm(const std::filesystem::path& path) { return decode_ppm(detail::read_file(path), path.string()); }
inline DepthImage load_depth_pgm(const std::filesystem::path& path) {
  return decode_depth_pgm(detail::read_file(path), path.string());
}
inline void save_ppm(const std::filesystem::path& path, const ColorImage& img) { detail::write_file(path, encode_ppm(img)); }
inline void save_depth_pgm(const std::filesystem::path& path, const DepthImage& img) {
  detail::write_file(path, encode_depth_pgm(img));
}

}  // namespace gaitforge::io
