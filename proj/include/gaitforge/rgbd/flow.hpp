#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "gaitforge/core/error.hpp"
#include "gaitforge/core/grid.hpp"
#include "gaitforge/io/binary.hpp"
#include "gaitforge/rgbd/image_ops.hpp"

namespace gaitforge::rgbd {

// Per-pixel displacement from frame t to frame t+1: I1(x + u, y + v) ~ I0(x, y).
struct MotionField {
  FloatImage u;
  FloatImage v;

  std::size_t width() const noexcept { return u.width(); }
  std::size_t height() const noexcept { return u.height(); }
};

inline MotionField zero_field(std::size_t width, std::size_t height) {
  return {FloatImage(width, height, 0.f), FloatImage(width, height, 0.f)};
}

// Half-open pixel rectangle [x0, x1) x [y0, y1).
struct Region {
  std::size_t x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  bool empty() const noexcept { return x1 <= x0 || y1 <= y0; }
};

// Dense motion estimator contract. pair_index identifies the (t, t+1) pair
// within the current sequence; estimators that compute from pixels ignore it.
class MotionEstimator {
 public:
  virtual ~MotionEstimator() = default;
  virtual MotionField estimate(const ColorImage& prev, const ColorImage& next, std::size_t pair_index) const = 0;

  // Field that only needs to be accurate inside `roi`; outside it may be zero.
  virtual MotionField estimate_region(const ColorImage& prev, const ColorImage& next, std::size_t pair_index,
                                      const Region&) const {
    return estimate(prev, next, pair_index);
  }
};

struct PyramidalFlowOptions {
  int levels = 3;
  int window = 5;           // odd; side of the least-squares window
  int iterations = 5;       // per level
  double regularization = 100.0;  // damping toward the current estimate, in squared-gradient units
};

// Coarse-to-fine dense Lucas-Kanade: at each pyramid level the flow is
// refined by Gauss-Newton steps solving the 2x2 windowed normal equations of
// brightness constancy against the warped next frame.
class PyramidalFlow final : public MotionEstimator {
 public:
  explicit PyramidalFlow(PyramidalFlowOptions opt = {}) : opt_(opt) {}

  MotionField estimate(const ColorImage& prev, const ColorImage& next, std::size_t = 0) const override {
    if (!prev.same_shape(next)) throw ValidationError("estimate_motion: frame dimensions differ");
    return estimate_gray(to_gray(prev), to_gray(next));
  }

  MotionField estimate_gray(const FloatImage& prev, const FloatImage& next) const {
    if (!prev.same_shape(next)) throw ValidationError("estimate_motion: frame dimensions differ");
    std::vector<FloatImage> p0{blur5(prev)};
    std::vector<FloatImage> p1{blur5(next)};
    for (int l = 1; l < opt_.levels; ++l) {
      if (p0.back().width() < 8 || p0.back().height() < 8) break;
      p0.push_back(downsample2(p0.back()));
      p1.push_back(downsample2(p1.back()));
    }
    MotionField flow = zero_field(p0.back().width(), p0.back().height());
    for (std::size_t l = p0.size(); l-- > 0;) {
      if (l + 1 < p0.size()) flow = upsample(flow, p0[l].width(), p0[l].height());
      refine(p0[l], p1[l], flow);
    }
    return flow;
  }

  // Runs on the crop only; the rest of the field is zero.
  MotionField estimate_region(const ColorImage& prev, const ColorImage& next, std::size_t,
                              const Region& roi) const override {
    if (!prev.same_shape(next)) throw ValidationError("estimate_motion: frame dimensions differ");
    MotionField full = zero_field(prev.width(), prev.height());
    const std::size_t x1 = std::min(roi.x1, prev.width());
    const std::size_t y1 = std::min(roi.y1, prev.height());
    if (x1 <= roi.x0 || y1 <= roi.y0) return full;
    const std::size_t w = x1 - roi.x0;
    const std::size_t h = y1 - roi.y0;
    FloatImage g0(w, h);
    FloatImage g1(w, h);
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        const Rgb a = prev(roi.x0 + x, roi.y0 + y);
        const Rgb b = next(roi.x0 + x, roi.y0 + y);
        g0(x, y) = 0.299f * a.r + 0.587f * a.g + 0.114f * a.b;
        g1(x, y) = 0.299f * b.r + 0.587f * b.g + 0.114f * b.b;
      }
    const MotionField crop = estimate_gray(g0, g1);
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        full.u(roi.x0 + x, roi.y0 + y) = crop.u(x, y);
        full.v(roi.x0 + x, roi.y0 + y) = crop.v(x, y);
      }
    return full;
  }

  const PyramidalFlowOptions& options() const noexcept { return opt_; }

 private:
  static MotionField upsample(const MotionField& coarse, std::size_t width, std::size_t height) {
    MotionField fine = zero_field(width, height);
    for (std::size_t y = 0; y < height; ++y)
      for (std::size_t x = 0; x < width; ++x) {
        const double cx = (static_cast<double>(x) + 0.5) / 2.0 - 0.5;
        const double cy = (static_cast<double>(y) + 0.5) / 2.0 - 0.5;
        fine.u(x, y) = 2.f * sample_bilinear(coarse.u, cx, cy);
        fine.v(x, y) = 2.f * sample_bilinear(coarse.v, cx, cy);
      }
    return fine;
  }

  void refine(const FloatImage& i0, const FloatImage& i1, MotionField& flow) const {
    const std::size_t w = i0.width();
    const std::size_t h = i0.height();
    const int radius = opt_.window / 2;
    FloatImage ix(w, h);
    FloatImage iy(w, h);
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        const std::size_t xl = x > 0 ? x - 1 : x;
        const std::size_t xr = x + 1 < w ? x + 1 : x;
        const std::size_t yu = y > 0 ? y - 1 : y;
        const std::size_t yd = y + 1 < h ? y + 1 : y;
        ix(x, y) = (i0(xr, y) - i0(xl, y)) / static_cast<float>(xr - xl);
        iy(x, y) = (i0(x, yd) - i0(x, yu)) / static_cast<float>(yd - yu);
      }
    FloatImage prod(w, h);
    auto windowed = [&](auto&& fn) {
      for (std::size_t i = 0; i < prod.size(); ++i) prod.data()[i] = fn(i);
      return box_sum(prod, radius);
    };
    const FloatImage gxx = windowed([&](std::size_t i) { return ix.data()[i] * ix.data()[i]; });
    const FloatImage gxy = windowed([&](std::size_t i) { return ix.data()[i] * iy.data()[i]; });
    const FloatImage gyy = windowed([&](std::size_t i) { return iy.data()[i] * iy.data()[i]; });

    // Each window pixel q was linearized around its own flow, so the
    // normal equations give the new flow directly:
    //   (G + lambda) u_p = sum_q (grad grad^T u_q - grad * It_q) + lambda u_p
    FloatImage it(w, h);
    for (int iter = 0; iter < opt_.iterations; ++iter) {
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
          it(x, y) = sample_bilinear(i1, static_cast<double>(x) + flow.u(x, y), static_cast<double>(y) + flow.v(x, y)) -
                     i0(x, y);
      const float* gx = ix.data().data();
      const float* gy = iy.data().data();
      const float* fu = flow.u.data().data();
      const float* fv = flow.v.data().data();
      const float* t = it.data().data();
      const FloatImage bx = windowed([&](std::size_t i) { return gx[i] * (gx[i] * fu[i] + gy[i] * fv[i] - t[i]); });
      const FloatImage by = windowed([&](std::size_t i) { return gy[i] * (gx[i] * fu[i] + gy[i] * fv[i] - t[i]); });
      for (std::size_t i = 0; i < it.size(); ++i) {
        const double lambda = opt_.regularization;
        const double a = gxx.data()[i] + lambda;
        const double b = gxy.data()[i];
        const double c = gyy.data()[i] + lambda;
        const double det = a * c - b * b;
        if (!(det > 0.0)) continue;
        const double rx = bx.data()[i] + lambda * flow.u.data()[i];
        const double ry = by.data()[i] + lambda * flow.v.data()[i];
        flow.u.data()[i] = static_cast<float>((c * rx - b * ry) / det);
        flow.v.data()[i] = static_cast<float>((a * ry - b * rx) / det);
      }
    }
  }

  PyramidalFlowOptions opt_;
};

// Replays externally computed fields, one per frame pair.
class PrecomputedFlow final : public MotionEstimator {
 public:
  explicit PrecomputedFlow(std::vector<MotionField> fields) : fields_(std::move(fields)) {}

  MotionField estimate(const ColorImage& prev, const ColorImage&, std::size_t pair_index) const override {
    if (pair_index >= fields_.size())
      throw ValidationError("precomputed flow: no field for pair " + std::to_string(pair_index));
    const MotionField& f = fields_[pair_index];
    if (f.width() != prev.width() || f.height() != prev.height())
      throw ValidationError("precomputed flow: field " + std::to_string(pair_index) + " does not match frame size");
    return f;
  }

  std::size_t size() const noexcept { return fields_.size(); }

 private:
  std::vector<MotionField> fields_;
};

// FLO1: magic "FLO1", width and height as little-endian uint32, then
// little-endian float32 u-plane followed by the v-plane, row-major.
inline std::vector<unsigned char> encode_flow(const MotionField& f) {
  io::BlobWriter w;
  w.magic("FLO1");
  w.u32(static_cast<std::uint32_t>(f.width()));
  w.u32(static_cast<std::uint32_t>(f.height()));
  for (float v : f.u.data()) w.f32(v);
  for (float v : f.v.data()) w.f32(v);
  return w.take();
}

inline MotionField decode_flow(std::span<const unsigned char> bytes, const std::string& name = "FLO1 blob") {
  io::BlobReader r(bytes, name);
  r.expect_magic("FLO1");
  const std::size_t w = r.u32();
  const std::size_t h = r.u32();
  if (w == 0 || h == 0 || w > 1u << 16 || h > 1u << 16) throw FormatError(name + ": bad dimensions");
  MotionField f = zero_field(w, h);
  for (float& v : f.u.data()) v = r.f32();
  for (float& v : f.v.data()) v = r.f32();
  r.expect_end();
  return f;
}

inline void save_flow(const std::filesystem::path& path, const MotionField& f) { io::write_blob(path, encode_flow(f)); }
inline MotionField load_flow(const std::filesystem::path& path) { return decode_flow(io::read_blob(path), path.string()); }

}  // namespace gaitforge::rgbd
