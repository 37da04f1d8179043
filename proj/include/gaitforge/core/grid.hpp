#pragma once

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace gaitforge {

// Row-major 2D raster. (x, y) indexing: x is the column, y the row.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t width, std::size_t height, T fill = T{})
      : width_(width), height_(height), data_(width * height, fill) {}

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  bool contains(long x, long y) const noexcept {
    return x >= 0 && y >= 0 && static_cast<std::size_t>(x) < width_ && static_cast<std::size_t>(y) < height_;
  }

  T& operator()(std::size_t x, std::size_t y) {
    assert(x < width_ && y < height_);
    return data_[y * width_ + x];
  }
  const T& operator()(std::size_t x, std::size_t y) const {
    assert(x < width_ && y < height_);
    return data_[y * width_ + x];
  }

  std::span<T> row(std::size_t y) { return {data_.data() + y * width_, width_}; }
  std::span<const T> row(std::size_t y) const { return {data_.data() + y * width_, width_}; }

  std::vector<T>& data() noexcept { return data_; }
  const std::vector<T>& data() const noexcept { return data_; }

  bool same_shape(const Grid& other) const noexcept { return width_ == other.width_ && height_ == other.height_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<T> data_;
};

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

using ColorImage = Grid<Rgb>;
using DepthImage = Grid<std::uint16_t>;  // 13-bit depth, 0 = invalid
using FloatImage = Grid<float>;
using BinaryMask = Grid<std::uint8_t>;   // 0 / 1

}  // namespace gaitforge
