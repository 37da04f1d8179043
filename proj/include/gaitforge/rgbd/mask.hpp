#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "gaitforge/core/grid.hpp"
#include "gaitforge/rgbd/image_ops.hpp"

// Person mask from a foreground-coded depth raster: resize to the color
// raster (bicubic), binarize at 113, fill holes, drop components under
// 1000 pixels.

namespace gaitforge::rgbd {

inline constexpr float kMaskThreshold = 113.0f;
inline constexpr std::size_t kMinSegmentPixels = 1000;

struct PersonMask {
  BinaryMask grid;
  std::size_t frame_index = 0;

  bool empty() const {
    for (std::uint8_t v : grid.data())
      if (v) return false;
    return true;
  }
  std::size_t area() const {
    std::size_t n = 0;
    for (std::uint8_t v : grid.data()) n += v;
    return n;
  }
  bool at(double x, double y) const {
    const long ix = static_cast<long>(std::lround(x));
    const long iy = static_cast<long>(std::lround(y));
    return grid.contains(ix, iy) && grid(static_cast<std::size_t>(ix), static_cast<std::size_t>(iy)) != 0;
  }
};

// Background pixels not 4-connected to the border become foreground.
inline void fill_holes(BinaryMask& mask) {
  const std::size_t w = mask.width();
  const std::size_t h = mask.height();
  if (w == 0 || h == 0) return;
  BinaryMask outside(w, h, 0);
  std::vector<std::pair<std::size_t, std::size_t>> stack;
  auto push = [&](std::size_t x, std::size_t y) {
    if (!mask(x, y) && !outside(x, y)) {
      outside(x, y) = 1;
      stack.emplace_back(x, y);
    }
  };
  for (std::size_t x = 0; x < w; ++x) {
    push(x, 0);
    push(x, h - 1);
  }
  for (std::size_t y = 0; y < h; ++y) {
    push(0, y);
    push(w - 1, y);
  }
  while (!stack.empty()) {
    const auto [x, y] = stack.back();
    stack.pop_back();
    if (x > 0) push(x - 1, y);
    if (x + 1 < w) push(x + 1, y);
    if (y > 0) push(x, y - 1);
    if (y + 1 < h) push(x, y + 1);
  }
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (!outside.data()[i]) mask.data()[i] = 1;
}

// Clears 8-connected foreground components smaller than min_pixels.
inline void remove_small_components(BinaryMask& mask, std::size_t min_pixels) {
  const std::size_t w = mask.width();
  const std::size_t h = mask.height();
  Grid<std::uint8_t> seen(w, h, 0);
  std::vector<std::pair<std::size_t, std::size_t>> stack;
  std::vector<std::pair<std::size_t, std::size_t>> component;
  for (std::size_t sy = 0; sy < h; ++sy)
    for (std::size_t sx = 0; sx < w; ++sx) {
      if (!mask(sx, sy) || seen(sx, sy)) continue;
      component.clear();
      seen(sx, sy) = 1;
      stack.emplace_back(sx, sy);
      while (!stack.empty()) {
        const auto [x, y] = stack.back();
        stack.pop_back();
        component.emplace_back(x, y);
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const long nx = static_cast<long>(x) + dx;
            const long ny = static_cast<long>(y) + dy;
            if (!mask.contains(nx, ny)) continue;
            const auto ux = static_cast<std::size_t>(nx);
            const auto uy = static_cast<std::size_t>(ny);
            if (mask(ux, uy) && !seen(ux, uy)) {
              seen(ux, uy) = 1;
              stack.emplace_back(ux, uy);
            }
          }
      }
      if (component.size() < min_pixels)
        for (const auto& [x, y] : component) mask(x, y) = 0;
    }
}

// Binarize / fill / prune on a depth raster already at color resolution.
inline PersonMask segment_resized(const FloatImage& depth, std::size_t frame_index = 0) {
  PersonMask m;
  m.frame_index = frame_index;
  m.grid = BinaryMask(depth.width(), depth.height(), 0);
  for (std::size_t i = 0; i < depth.size(); ++i) m.grid.data()[i] = depth.data()[i] > kMaskThreshold ? 1 : 0;
  fill_holes(m.grid);
  remove_small_components(m.grid, kMinSegmentPixels);
  return m;
}

inline PersonMask segment_mask(const DepthImage& depth, std::size_t color_width, std::size_t color_height,
                               std::size_t frame_index = 0) {
  return segment_resized(resize_bicubic(depth, color_width, color_height), frame_index);
}

}  // namespace gaitforge::rgbd
