#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gaitforge/core/error.hpp"
#include "gaitforge/io/pnm.hpp"

// Little-endian blob writer/reader shared by the model formats.

namespace gaitforge::io {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

class BlobWriter {
 public:
  void magic(std::string_view m) { bytes_.insert(bytes_.end(), m.begin(), m.end()); }

  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64s(std::span<const double> vs) {
    for (double v : vs) f64(v);
  }
  void str(std::string_view s) {
    u64(s.size());
    bytes_.insert(bytes_.end(), s.begin(), s.end());
  }

  const std::vector<unsigned char>& bytes() const noexcept { return bytes_; }
  std::vector<unsigned char> take() { return std::move(bytes_); }

 private:
  std::vector<unsigned char> bytes_;
};

class BlobReader {
 public:
  BlobReader(std::span<const unsigned char> bytes, std::string name) : bytes_(bytes), name_(std::move(name)) {}

  void expect_magic(std::string_view m) {
    need(m.size());
    if (std::memcmp(bytes_.data() + pos_, m.data(), m.size()) != 0)
      throw FormatError(name_ + ": bad magic, expected " + std::string(m));
    pos_ += m.size();
  }

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  float f32() { return std::bit_cast<float>(u32()); }

  // A count stored as a 64-bit float; must be a non-negative integer <= limit.
  std::size_t count(std::string_view what, std::size_t limit = std::size_t{1} << 32) {
    const double v = f64();
    if (!(v >= 0.0) || v != static_cast<double>(static_cast<std::size_t>(v)) || v > static_cast<double>(limit))
      throw FormatError(name_ + ": invalid " + std::string(what));
    return static_cast<std::size_t>(v);
  }

  std::vector<double> f64s(std::size_t n) {
    need(n * 8);
    std::vector<double> out(n);
    for (double& v : out) v = f64();
    return out;
  }

  std::string str() {
    const std::uint64_t n = u64();
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  bool at_end() const noexcept { return pos_ == bytes_.size(); }
  void expect_end() const {
    if (!at_end()) throw FormatError(name_ + ": trailing bytes");
  }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw FormatError(name_ + ": truncated");
  }

  std::span<const unsigned char> bytes_;
  std::size_t pos_ = 0;
  std::string name_;
};

inline std::vector<unsigned char> read_blob(const std::filesystem::path& path) { return detail::read_file(path); }
inline void write_blob(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
  detail::write_file(path, bytes);
}

}  // namespace gaitforge::io
