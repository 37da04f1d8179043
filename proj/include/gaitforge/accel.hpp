#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gaitforge/core/error.hpp"
#include "gaitforge/datamodel.hpp"

// Tri-axial acceleration -> compound gait curve -> step partition -> fixed
// length multi-step windows.

namespace gaitforge::accel {

inline constexpr double kMinPeakValue = 4.0;        // m/s^2
inline constexpr std::int64_t kMinPeakGapMs = 700;  // between accepted points

struct PartitionPoint {
  std::size_t index = 0;
  std::int64_t t_ms = 0;
  double value = 0.0;
  friend bool operator==(const PartitionPoint&, const PartitionPoint&) = default;
};

// Euclidean norm of the acceleration vector; invariant to device orientation.
inline double compound(double ax, double ay, double az) {
  if (!std::isfinite(ax) || !std::isfinite(ay) || !std::isfinite(az))
    throw ValidationError("compound: non-finite acceleration component");
  return std::sqrt(ax * ax + ay * ay + az * az);
}

// Builds a gait curve and checks sampling regularity: every interval must lie
// within +-20% of the nominal period.
inline GaitCurve make_curve(std::span<const AccelSample> samples, std::string id = {},
                            double nominal_rate_hz = kNominalAccelRateHz) {
  GaitCurve c;
  c.id = std::move(id);
  c.rate_hz = nominal_rate_hz;
  c.values.reserve(samples.size());
  c.t_ms.reserve(samples.size());
  const double period = 1000.0 / nominal_rate_hz;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const AccelSample& s = samples[i];
    if (i > 0) {
      const double gap = static_cast<double>(s.t_ms - samples[i - 1].t_ms);
      if (gap <= 0.0) throw ValidationError("make_curve: timestamps not strictly increasing at sample " + std::to_string(i));
      if (std::abs(gap - period) > kAccelJitterTolerance * period)
        throw ValidationError("make_curve: sampling interval " + std::to_string(gap) + " ms at sample " +
                              std::to_string(i) + " outside tolerance");
    }
    c.values.push_back(compound(s.ax, s.ay, s.az));
    c.t_ms.push_back(s.t_ms);
  }
  return c;
}

// Left-to-right greedy scan. A point is accepted when it is a local maximum
// (strictly above its left neighbour, and the first differing sample to its
// right is lower, so a plateau reports its leftmost sample), its value
// exceeds 4 m/s^2, and it lies at least 700 ms after the last accepted point.
inline std::vector<PartitionPoint> partition_steps(const GaitCurve& curve) {
  std::vector<PartitionPoint> points;
  const auto& v = curve.values;
  const std::size_t n = v.size();
  if (n < 3) return points;
  std::size_t i = 1;
  while (i + 1 < n) {
    if (!(v[i] > v[i - 1])) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < n && v[j] == v[i]) ++j;
    if (j < n && v[j] < v[i] && v[i] > kMinPeakValue &&
        (points.empty() || curve.t_ms[i] - points.back().t_ms >= kMinPeakGapMs))
      points.push_back({i, curve.t_ms[i], v[i]});
    // Samples inside a plateau are never strictly above their left neighbour.
    i = j;
  }
  return points;
}

namespace detail {

// Linear interpolation of the closed segment [first, last] at `count`
// uniformly spaced instants, appended to out.
inline void resample_segment(const GaitCurve& curve, std::size_t first, std::size_t last, std::size_t count,
                             std::vector<double>& out) {
  const double t0 = static_cast<double>(curve.t_ms[first]);
  const double t1 = static_cast<double>(curve.t_ms[last]);
  std::size_t k = first;
  for (std::size_t j = 0; j < count; ++j) {
    if (j + 1 == count) {
      out.push_back(curve.values[last]);
      break;
    }
    const double t = t0 + (t1 - t0) * static_cast<double>(j) / static_cast<double>(count - 1);
    while (k + 1 < last && static_cast<double>(curve.t_ms[k + 1]) <= t) ++k;
    const double ta = static_cast<double>(curve.t_ms[k]);
    const double tb = static_cast<double>(curve.t_ms[k + 1]);
    const double w = (t - ta) / (tb - ta);
    out.push_back(w == 0.0 ? curve.values[k] : curve.values[k] + w * (curve.values[k + 1] - curve.values[k]));
  }
}

}  // namespace detail

// Non-overlapping windows of `steps` cycles; window k spans partition points
// [k*steps, (k+1)*steps]. Each cycle is resampled to 50 values.
inline std::vector<StepWindow> extract_windows(const GaitCurve& curve, std::span<const PartitionPoint> points,
                                               int steps) {
  if (steps < kMinSteps || steps > kMaxSteps)
    throw ValidationError("extract_windows: steps must be in [1, 8], got " + std::to_string(steps));
  std::vector<StepWindow> windows;
  const auto s = static_cast<std::size_t>(steps);
  for (std::size_t k = 0; k + s < points.size(); k += s) {
    StepWindow w;
    w.steps = steps;
    w.source_curve_id = curve.id;
    w.first_point = k;
    w.samples.reserve(kSamplesPerStep * s);
    for (std::size_t c = 0; c < s; ++c)
      detail::resample_segment(curve, points[k + c].index, points[k + c + 1].index, kSamplesPerStep, w.samples);
    windows.push_back(std::move(w));
  }
  return windows;
}

}  // namespace gaitforge::accel
