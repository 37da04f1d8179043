#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "gaitforge/core/grid.hpp"
#include "gaitforge/datamodel.hpp"

namespace gaitforge::rgbd {

inline FloatImage to_gray(const ColorImage& img) {
  FloatImage g(img.width(), img.height());
  const auto& src = img.data();
  auto& dst = g.data();
  for (std::size_t i = 0; i < src.size(); ++i)
    dst[i] = 0.299f * src[i].r + 0.587f * src[i].g + 0.114f * src[i].b;
  return g;
}

namespace detail {

inline std::size_t clamp_index(long i, std::size_t n) {
  return static_cast<std::size_t>(std::clamp<long>(i, 0, static_cast<long>(n) - 1));
}

// Keys cubic convolution weights (a = -0.75) for taps at -1, 0, 1, 2.
inline std::array<double, 4> cubic_weights(double t) {
  constexpr double a = -0.75;
  std::array<double, 4> w;
  const double x0 = t + 1.0;
  const double x1 = t;
  const double x2 = 1.0 - t;
  w[0] = ((a * x0 - 5.0 * a) * x0 + 8.0 * a) * x0 - 4.0 * a;
  w[1] = ((a + 2.0) * x1 - (a + 3.0)) * x1 * x1 + 1.0;
  w[2] = ((a + 2.0) * x2 - (a + 3.0)) * x2 * x2 + 1.0;
  w[3] = 1.0 - w[0] - w[1] - w[2];
  return w;
}

}  // namespace detail

// Bicubic resize of a depth raster with pixel-centre alignment and
// replicated borders; results are clamped to the 13-bit depth range.
inline FloatImage resize_bicubic(const DepthImage& src, std::size_t width, std::size_t height) {
  FloatImage dst(width, height);
  if (src.empty()) return dst;
  const double sx = static_cast<double>(src.width()) / static_cast<double>(width);
  const double sy = static_cast<double>(src.height()) / static_cast<double>(height);

  // Horizontal pass into a (width x src.height) buffer, then vertical.
  std::vector<double> tmp(width * src.height());
  for (std::size_t x = 0; x < width; ++x) {
    const double fx = (static_cast<double>(x) + 0.5) * sx - 0.5;
    const long x0 = static_cast<long>(std::floor(fx));
    const auto wx = detail::cubic_weights(fx - static_cast<double>(x0));
    std::array<std::size_t, 4> cols;
    for (int k = 0; k < 4; ++k) cols[k] = detail::clamp_index(x0 - 1 + k, src.width());
    for (std::size_t y = 0; y < src.height(); ++y) {
      double acc = 0.0;
      for (int k = 0; k < 4; ++k) acc += wx[k] * src(cols[k], y);
      tmp[y * width + x] = acc;
    }
  }
  for (std::size_t y = 0; y < height; ++y) {
    const double fy = (static_cast<double>(y) + 0.5) * sy - 0.5;
    const long y0 = static_cast<long>(std::floor(fy));
    const auto wy = detail::cubic_weights(fy - static_cast<double>(y0));
    std::array<const double*, 4> rows;
    for (int k = 0; k < 4; ++k) rows[k] = tmp.data() + detail::clamp_index(y0 - 1 + k, src.height()) * width;
    for (std::size_t x = 0; x < width; ++x) {
      const double acc = wy[0] * rows[0][x] + wy[1] * rows[1][x] + wy[2] * rows[2][x] + wy[3] * rows[3][x];
      dst(x, y) = static_cast<float>(std::clamp(acc, 0.0, static_cast<double>(kMaxDepth)));
    }
  }
  return dst;
}

// Separable [1 4 6 4 1]/16 smoothing with replicated borders.
inline FloatImage blur5(const FloatImage& src) {
  static constexpr float k[5] = {1.f / 16, 4.f / 16, 6.f / 16, 4.f / 16, 1.f / 16};
  const std::size_t w = src.width();
  const std::size_t h = src.height();
  FloatImage tmp(w, h);
  FloatImage out(w, h);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      float s = 0.f;
      for (int i = -2; i <= 2; ++i) s += k[i + 2] * src(detail::clamp_index(static_cast<long>(x) + i, w), y);
      tmp(x, y) = s;
    }
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      float s = 0.f;
      for (int i = -2; i <= 2; ++i) s += k[i + 2] * tmp(x, detail::clamp_index(static_cast<long>(y) + i, h));
      out(x, y) = s;
    }
  return out;
}

// Smooth then keep every second pixel.
inline FloatImage downsample2(const FloatImage& src) {
  const FloatImage smooth = blur5(src);
  FloatImage out((src.width() + 1) / 2, (src.height() + 1) / 2);
  for (std::size_t y = 0; y < out.height(); ++y)
    for (std::size_t x = 0; x < out.width(); ++x) out(x, y) = smooth(2 * x, 2 * y);
  return out;
}

// Bilinear sample with coordinates clamped to the raster.
inline float sample_bilinear(const FloatImage& img, double x, double y) {
  const double maxx = static_cast<double>(img.width() - 1);
  const double maxy = static_cast<double>(img.height() - 1);
  x = std::clamp(x, 0.0, maxx);
  y = std::clamp(y, 0.0, maxy);
  const std::size_t x0 = static_cast<std::size_t>(x);
  const std::size_t y0 = static_cast<std::size_t>(y);
  const std::size_t x1 = std::min(x0 + 1, img.width() - 1);
  const std::size_t y1 = std::min(y0 + 1, img.height() - 1);
  const double fx = x - static_cast<double>(x0);
  const double fy = y - static_cast<double>(y0);
  const double top = img(x0, y0) + fx * (img(x1, y0) - img(x0, y0));
  const double bottom = img(x0, y1) + fx * (img(x1, y1) - img(x0, y1));
  return static_cast<float>(top + fy * (bottom - top));
}

// Sum over a (2r+1)^2 window with replicated borders.
inline FloatImage box_sum(const FloatImage& src, int radius) {
  const std::size_t w = src.width();
  const std::size_t h = src.height();
  FloatImage tmp(w, h);
  FloatImage out(w, h);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      float s = 0.f;
      for (int i = -radius; i <= radius; ++i) s += src(detail::clamp_index(static_cast<long>(x) + i, w), y);
      tmp(x, y) = s;
    }
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      float s = 0.f;
      for (int i = -radius; i <= radius; ++i) s += tmp(x, detail::clamp_index(static_cast<long>(y) + i, h));
      out(x, y) = s;
    }
  return out;
}

inline FloatImage median3x3(const FloatImage& src) {
  const std::size_t w = src.width();
  const std::size_t h = src.height();
  FloatImage out(w, h);
  std::array<float, 9> v;
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      int n = 0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
          v[n++] = src(detail::clamp_index(static_cast<long>(x) + dx, w), detail::clamp_index(static_cast<long>(y) + dy, h));
      std::nth_element(v.begin(), v.begin() + 4, v.end());
      out(x, y) = v[4];
    }
  return out;
}

}  // namespace gaitforge::rgbd
