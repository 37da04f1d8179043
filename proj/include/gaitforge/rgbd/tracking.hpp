#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <list>
#include <vector>

#include "gaitforge/core/error.hpp"
#include "gaitforge/core/grid.hpp"
#include "gaitforge/datamodel.hpp"
#include "gaitforge/rgbd/flow.hpp"
#include "gaitforge/rgbd/image_ops.hpp"
#include "gaitforge/rgbd/mask.hpp"

namespace gaitforge::rgbd {

inline constexpr std::size_t kDefaultTrackLength = 15;

struct TrackPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;  // depth at the tracked pixel
  friend bool operator==(const TrackPoint&, const TrackPoint&) = default;
};

struct Trajectory3D {
  std::vector<TrackPoint> points;  // L + 1
  std::size_t start_frame = 0;
  friend bool operator==(const Trajectory3D&, const Trajectory3D&) = default;
};

struct TrackerOptions {
  std::size_t length = kDefaultTrackLength;  // L
  std::size_t stride = 5;                    // seeding grid, px
  double max_step = 15.0;                    // px per frame
  double min_total_displacement = 1.0;       // px, summed over steps
  bool prune_static = true;
};

namespace detail {

inline double depth_at(const FloatImage& depth, double x, double y) {
  const long ix = std::lround(x);
  const long iy = std::lround(y);
  if (!depth.contains(ix, iy)) return 0.0;
  return depth(static_cast<std::size_t>(ix), static_cast<std::size_t>(iy));
}

// Bilinear sample of the 3x3-median-filtered field, evaluating the median
// only at the four pixels the interpolation touches.
inline float median_at(const FloatImage& f, std::size_t x, std::size_t y) {
  std::array<float, 9> v;
  int n = 0;
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx)
      v[n++] = f(clamp_index(static_cast<long>(x) + dx, f.width()), clamp_index(static_cast<long>(y) + dy, f.height()));
  std::nth_element(v.begin(), v.begin() + 4, v.end());
  return v[4];
}

inline float sample_median_filtered(const FloatImage& f, double x, double y) {
  x = std::clamp(x, 0.0, static_cast<double>(f.width() - 1));
  y = std::clamp(y, 0.0, static_cast<double>(f.height() - 1));
  const auto x0 = static_cast<std::size_t>(x);
  const auto y0 = static_cast<std::size_t>(y);
  const std::size_t x1 = std::min(x0 + 1, f.width() - 1);
  const std::size_t y1 = std::min(y0 + 1, f.height() - 1);
  const double fx = x - static_cast<double>(x0);
  const double fy = y - static_cast<double>(y0);
  const double a = median_at(f, x0, y0), b = median_at(f, x1, y0);
  const double c = median_at(f, x0, y1), d = median_at(f, x1, y1);
  const double top = a + fx * (b - a);
  const double bottom = c + fx * (d - c);
  return static_cast<float>(top + fy * (bottom - top));
}

inline double path_length(const Trajectory3D& t) {
  double s = 0.0;
  for (std::size_t i = 1; i < t.points.size(); ++i)
    s += std::hypot(t.points[i].x - t.points[i - 1].x, t.points[i].y - t.points[i - 1].y);
  return s;
}

}  // namespace detail

// Dense point tracking through a sequence. depth[t] is the depth raster
// resized to color resolution, masks[t] the person mask, fields[t] the motion
// from frame t to t+1 (so fields.size() == frames - 1).
inline std::vector<Trajectory3D> calc_trajectories(const std::vector<FloatImage>& depth,
                                                   const std::vector<PersonMask>& masks,
                                                   const std::vector<MotionField>& fields,
                                                   const TrackerOptions& opt = {}) {
  const std::size_t frames = depth.size();
  if (masks.size() != frames) throw ValidationError("calc_trajectories: mask count differs from frame count");
  if (frames > 0 && fields.size() + 1 != frames)
    throw ValidationError("calc_trajectories: need one motion field per frame pair");
  if (opt.length == 0 || opt.stride == 0) throw ValidationError("calc_trajectories: length and stride must be positive");
  std::vector<Trajectory3D> out;
  if (frames == 0) return out;
  const std::size_t w = depth[0].width();
  const std::size_t h = depth[0].height();
  for (std::size_t t = 0; t < frames; ++t) {
    if (depth[t].width() != w || depth[t].height() != h || masks[t].grid.width() != w || masks[t].grid.height() != h)
      throw ValidationError("calc_trajectories: frame " + std::to_string(t) + " has mismatched raster size");
    if (t + 1 < frames && (fields[t].width() != w || fields[t].height() != h))
      throw ValidationError("calc_trajectories: motion field " + std::to_string(t) + " has mismatched size");
  }

  const std::size_t gw = (w + opt.stride - 1) / opt.stride;
  const std::size_t gh = (h + opt.stride - 1) / opt.stride;
  std::list<Trajectory3D> live;
  Grid<std::uint8_t> occupied(gw, gh, 0);

  for (std::size_t t = 0; t < frames; ++t) {
    // Seed where no live track currently sits, if a full track still fits.
    if (t + opt.length < frames) {
      std::fill(occupied.data().begin(), occupied.data().end(), 0);
      for (const Trajectory3D& tr : live) {
        const long cx = static_cast<long>(std::floor(tr.points.back().x / static_cast<double>(opt.stride)));
        const long cy = static_cast<long>(std::floor(tr.points.back().y / static_cast<double>(opt.stride)));
        if (occupied.contains(cx, cy)) occupied(static_cast<std::size_t>(cx), static_cast<std::size_t>(cy)) = 1;
      }
      const std::size_t offset = opt.stride / 2;
      for (std::size_t gy = 0; gy < gh; ++gy)
        for (std::size_t gx = 0; gx < gw; ++gx) {
          const std::size_t x = gx * opt.stride + offset;
          const std::size_t y = gy * opt.stride + offset;
          if (x >= w || y >= h || occupied(gx, gy) || !masks[t].grid(x, y)) continue;
          const double z = depth[t](x, y);
          if (!(z > 0.0)) continue;
          Trajectory3D tr;
          tr.start_frame = t;
          tr.points.reserve(opt.length + 1);
          tr.points.push_back({static_cast<double>(x), static_cast<double>(y), z});
          live.push_back(std::move(tr));
        }
    }
    if (t + 1 == frames) break;

    for (auto it = live.begin(); it != live.end();) {
      const TrackPoint p = it->points.back();
      const double u = detail::sample_median_filtered(fields[t].u, p.x, p.y);
      const double v = detail::sample_median_filtered(fields[t].v, p.x, p.y);
      const TrackPoint q{p.x + u, p.y + v, 0.0};
      bool alive = std::hypot(u, v) <= opt.max_step && masks[t + 1].at(q.x, q.y);
      TrackPoint next = q;
      if (alive) {
        next.z = detail::depth_at(depth[t + 1], q.x, q.y);
        alive = next.z > 0.0;
      }
      if (!alive) {
        it = live.erase(it);
        continue;
      }
      it->points.push_back(next);
      if (it->points.size() == opt.length + 1) {
        if (!opt.prune_static || detail::path_length(*it) >= opt.min_total_displacement) out.push_back(std::move(*it));
        it = live.erase(it);
        continue;
      }
      ++it;
    }
  }
  return out;
}

// Bounding box of the union of two masks, grown by `margin` pixels.
inline Region mask_region(const PersonMask& a, const PersonMask& b, std::size_t margin) {
  const std::size_t w = a.grid.width();
  const std::size_t h = a.grid.height();
  std::size_t x0 = w, y0 = h, x1 = 0, y1 = 0;
  for (const PersonMask* m : {&a, &b})
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x)
        if (m->grid(x, y)) {
          x0 = std::min(x0, x);
          y0 = std::min(y0, y);
          x1 = std::max(x1, x + 1);
          y1 = std::max(y1, y + 1);
        }
  if (x1 == 0) return {};
  return {x0 > margin ? x0 - margin : 0, y0 > margin ? y0 - margin : 0, std::min(w, x1 + margin),
          std::min(h, y1 + margin)};
}

struct SequenceOptions {
  TrackerOptions tracker;
  std::size_t roi_margin = 24;  // flow is only estimated around the person
};

// Masks, motion and tracks for one RGBD sequence.
inline std::vector<Trajectory3D> track_sequence(const std::vector<RgbdFrame>& frames, const MotionEstimator& estimator,
                                                const SequenceOptions& opt = {}) {
  std::vector<FloatImage> depth;
  std::vector<PersonMask> masks;
  depth.reserve(frames.size());
  masks.reserve(frames.size());
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const RgbdFrame& f = frames[t];
    if (f.color.empty() || f.depth.empty()) throw ValidationError("frame " + std::to_string(t) + " is empty");
    if (t > 0 && !f.color.same_shape(frames[0].color))
      throw ValidationError("frame " + std::to_string(t) + " color size differs from frame 0");
    validate_frame(f);
    depth.push_back(resize_bicubic(f.depth, f.color.width(), f.color.height()));
    masks.push_back(segment_resized(depth.back(), t));
  }
  std::vector<MotionField> fields;
  for (std::size_t t = 0; t + 1 < frames.size(); ++t) {
    const Region roi = mask_region(masks[t], masks[t + 1], opt.roi_margin);
    if (roi.empty()) {
      fields.push_back(zero_field(frames[t].color.width(), frames[t].color.height()));
      continue;
    }
    fields.push_back(estimator.estimate_region(frames[t].color, frames[t + 1].color, t, roi));
  }
  return calc_trajectories(depth, masks, fields, opt.tracker);
}

}  // namespace gaitforge::rgbd
