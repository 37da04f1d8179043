#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "gaitforge/core/error.hpp"
#include "gaitforge/core/grid.hpp"
#include "gaitforge/core/hash.hpp"
#include "gaitforge/core/parallel.hpp"
#include "gaitforge/core/rng.hpp"
#include "gaitforge/datamodel.hpp"
#include "gaitforge/io/accel_csv.hpp"
#include "gaitforge/io/manifest.hpp"
#include "gaitforge/io/pnm.hpp"

// Seeded synthetic walkers. Each subject gets a gait-cycle acceleration
// profile and an articulated-figure body profile; every sample is a noisy
// realisation under a pace and a walking condition.

namespace gaitforge::synth {

constexpr double kPi = std::numbers::pi;

// Gravity-compensated phone acceleration over one step cycle. The vertical
// component is a sum of periodic (von Mises shaped) bumps over the cycle
// phase in [0, 1): the main heel-strike peak at phase 0, the other foot's
// peak near mid-cycle, a dip, a minor bump and a few small idiosyncratic
// ones. The forward component is a single sinusoid.
struct Bump {
  double amp = 0.0;     // m/s^2, negative for a dip
  double center = 0.0;  // cycle phase
  double kappa = 4.0;   // sharpness
};

struct AccelProfile {
  double period_s = 1.0;  // one full step cycle at normal pace
  std::array<Bump, 8> bumps{};
  double forward_amp = 1.0;
  double forward_phase = 0.0;
};

struct BodyProfile {
  double height = 1.75;        // m
  double shoulder = 0.45;      // shoulder width / height ratio scale
  double hip = 0.32;
  double leg_amp = 0.45;       // rad
  double knee_amp = 0.5;       // rad
  double arm_amp = 0.35;       // rad
  double arm_phase = 0.0;      // rad, added to the anti-phase of the legs
  double abduction = 0.12;     // rad
  double bounce = 0.03;        // m
  double sway = 0.03;          // m
  double roll = 0.05;          // rad
  double speed = 1.2;          // m/s at normal pace
  std::array<double, 3> shirt{};
  std::array<double, 3> trousers{};
};

struct SubjectProfile {
  std::string id;
  AccelProfile accel;
  BodyProfile body;
  std::vector<double> signature;  // normalized parameters used for separation
};

struct GeneratorOptions {
  std::size_t subjects = 10;
  std::size_t samples_per_subject = 20;
  std::vector<Pace> paces{Pace::normal, Pace::fast};
  std::vector<Covariate> covariates{Covariate::none};
  std::uint64_t seed = 0;
  bool accel = true;
  bool rgbd = true;
  double walk_seconds = 5.0;
  std::size_t frames = 24;
  double fps = 15.0;
  std::size_t color_width = 256;
  std::size_t color_height = 192;
  std::size_t depth_width = 128;
  std::size_t depth_height = 96;
  double focal = 260.0;            // px at color resolution
  double variability = 1.0;       // scales intra-subject variation
  double min_separation = 0.35;    // between subject signatures
  std::size_t threads = 1;
};

struct SampleSpec {
  std::size_t subject = 0;
  std::size_t index = 0;
  std::string id;
  Pace pace = Pace::normal;
  Covariate covariate = Covariate::none;
};

struct SyntheticSample {
  SampleSpec spec;
  std::string subject_id;
  std::vector<AccelSample> accel;
  std::vector<RgbdFrame> frames;
};

namespace detail {

inline double lerp(double a, double b, double u) { return a + (b - a) * u; }

inline double vertical(const AccelProfile& a, double phase) {
  double v = 0.0;
  for (const Bump& b : a.bumps) v += b.amp * std::exp(b.kappa * (std::cos(2.0 * kPi * (phase - b.center)) - 1.0));
  return v;
}

inline double forward(const AccelProfile& a, double phase) {
  return a.forward_amp * std::sin(2.0 * kPi * (phase - a.forward_phase));
}

// Compound (magnitude) value.
inline double waveform(const AccelProfile& a, double phase) { return std::hypot(vertical(a, phase), forward(a, phase)); }

// The step partitioner accepts local maxima above 4 m/s^2 at least 700 ms
// apart. A cycle is clean when only the main peak gets near that level, it
// clears it comfortably, and its flanks above the level are steep enough
// that sensor noise cannot split them into extra maxima.
inline bool clean_cycle(const AccelProfile& a) {
  constexpr int kN = 2000;
  if (waveform(a, 0.0) < 5.0) return false;
  // The region above 3.4 must be one arc around phase 0.
  int transitions = 0;
  bool prev = waveform(a, -1.0 / kN) > 3.4;
  for (int i = 0; i < kN; ++i) {
    const bool cur = waveform(a, static_cast<double>(i) / kN) > 3.4;
    transitions += cur != prev;
    prev = cur;
  }
  if (transitions != 2) return false;
  const double h = 0.02 / a.period_s;  // one sample at 50 Hz
  const double crest = 0.04 / a.period_s;
  for (double p = crest; p < 0.5; p += 0.25 * h) {
    if (waveform(a, -p) > 3.9 && waveform(a, -p + h) - waveform(a, -p) < 0.15) return false;
    if (waveform(a, p) > 3.9 && waveform(a, p) - waveform(a, p + h) < 0.15) return false;
  }
  return true;
}

inline constexpr std::size_t kSignatureSize = 27;

inline SubjectProfile profile_from_signature(const std::vector<double>& u, const std::string& id) {
  SubjectProfile p;
  p.id = id;
  p.signature = u;
  AccelProfile& a = p.accel;
  a.period_s = lerp(0.98, 1.1, u[0]);
  const double main = lerp(5.5, 8.0, u[1]);
  a.bumps[0] = {main, 0.0, lerp(1.5, 4.0, u[2])};
  a.bumps[1] = {main * lerp(0.2, 0.45, u[3]), lerp(0.42, 0.54, u[4]), lerp(3.0, 10.0, u[5])};
  a.bumps[2] = {-lerp(0.3, 1.2, u[6]), lerp(0.15, 0.33, u[7]), lerp(4.0, 12.0, u[8])};
  a.bumps[3] = {lerp(0.0, 0.8, u[9]), lerp(0.08, 0.2, u[10]), 14.0};
  for (std::size_t i = 0; i < 4; ++i) {
    const double v = u[17 + 2 * i];
    a.bumps[4 + i] = {v < 0.5 ? lerp(-0.8, -0.2, 2.0 * v) : lerp(0.2, 0.8, 2.0 * v - 1.0),
                      lerp(0.05, 0.8, u[18 + 2 * i]), 16.0};
  }
  a.forward_amp = lerp(0.5, 1.5, u[25]);
  a.forward_phase = u[26];
  BodyProfile& b = p.body;
  b.height = lerp(1.55, 1.9, u[11]);
  b.leg_amp = lerp(0.3, 0.55, u[12]);
  b.arm_amp = lerp(0.15, 0.55, u[13]);
  b.arm_phase = lerp(-0.6, 0.6, u[14]);
  b.bounce = lerp(0.015, 0.05, u[15]);
  b.sway = lerp(0.01, 0.06, u[16]);
  return p;
}

// Pace and walking-condition effects on the acceleration profile.
inline AccelProfile condition(AccelProfile a, Pace pace, Covariate c) {
  if (pace == Pace::fast) {
    a.period_s = std::max(0.8, a.period_s * 0.8);
  }
  const double side = (c == Covariate::left_hand_in_pocket || c == Covariate::left_hand_holding_book ||
                       c == Covariate::left_hand_with_loadings)
                          ? 1.0
                          : -1.0;
  switch (c) {
    case Covariate::left_hand_in_pocket:
    case Covariate::right_hand_in_pocket:
      a.bumps[2].amp *= 1.3;
      a.bumps[2].center += 0.025 * side;
      break;
    case Covariate::both_hands_in_pocket:
      a.bumps[0].amp *= 0.88;
      a.bumps[0].kappa *= 1.3;
      a.bumps[1].amp *= 1.25;
      a.bumps[2].amp = a.bumps[2].amp * 1.5 - 0.15;
      break;
    case Covariate::left_hand_holding_book:
    case Covariate::right_hand_holding_book:
      a.bumps[3].amp += 0.25;
      a.bumps[3].center += 0.02 * side;
      a.bumps[0].amp *= 0.95;
      break;
    case Covariate::left_hand_with_loadings:
    case Covariate::right_hand_with_loadings:
      a.period_s *= 1.03;
      a.bumps[1].amp *= 0.8;
      a.bumps[1].kappa *= 0.8;
      a.bumps[2].center -= 0.02 * side;
      break;
    case Covariate::natural:
    case Covariate::none: break;
  }
  return a;
}

inline bool clean_under_all_conditions(const AccelProfile& a) {
  for (Pace p : {Pace::normal, Pace::fast})
    for (Covariate c : kHardCovariates)
      if (!clean_cycle(condition(a, p, c))) return false;
  return true;
}

}  // namespace detail

// Draws subject profiles whose normalized signatures are at least
// min_separation apart (Euclidean); throws when that cannot be met.
inline std::vector<SubjectProfile> make_profiles(const GeneratorOptions& opt) {
  if (opt.subjects < 2) throw ValidationError("generate: need at least 2 subjects");
  const Rng root = Rng(opt.seed).split("profiles");
  std::vector<SubjectProfile> out;
  constexpr int kAttempts = 2000;
  for (std::size_t s = 0; s < opt.subjects; ++s) {
    Rng rng = root.split(s);
    char id[16];
    std::snprintf(id, sizeof id, "s%02zu", s);
    bool placed = false;
    for (int attempt = 0; attempt < kAttempts && !placed; ++attempt) {
      std::vector<double> u(detail::kSignatureSize);
      for (double& v : u) v = rng.uniform();
      bool ok = true;
      for (const auto& other : out) {
        double d2 = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) d2 += (u[i] - other.signature[i]) * (u[i] - other.signature[i]);
        if (std::sqrt(d2) < opt.min_separation) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      SubjectProfile p = detail::profile_from_signature(u, id);
      if (!detail::clean_under_all_conditions(p.accel)) continue;
      BodyProfile& b = p.body;
      b.shoulder = rng.uniform(0.22, 0.27);
      b.hip = rng.uniform(0.16, 0.2);
      b.knee_amp = rng.uniform(0.35, 0.7);
      b.abduction = rng.uniform(0.06, 0.18);
      b.roll = rng.uniform(0.02, 0.07);
      b.speed = rng.uniform(1.0, 1.3);
      for (double& c : b.shirt) c = rng.uniform(40, 220);
      for (double& c : b.trousers) c = rng.uniform(30, 150);
      out.push_back(std::move(p));
      placed = true;
    }
    if (!placed)
      throw ValidationError("generate: cannot place " + std::to_string(opt.subjects) +
                            " subjects with minimum parameter separation " + std::to_string(opt.min_separation) +
                            "; lower the separation or enlarge the parameter space");
  }
  return out;
}

inline std::vector<SampleSpec> make_specs(const GeneratorOptions& opt) {
  if (opt.paces.empty() || opt.covariates.empty()) throw ValidationError("generate: paces and covariates must be non-empty");
  if (opt.samples_per_subject == 0) throw ValidationError("generate: need at least one sample per subject");
  std::vector<SampleSpec> specs;
  for (std::size_t s = 0; s < opt.subjects; ++s)
    for (std::size_t j = 0; j < opt.samples_per_subject; ++j) {
      SampleSpec spec;
      spec.subject = s;
      spec.index = j;
      char id[32];
      std::snprintf(id, sizeof id, "s%02zu-%03zu", s, j);
      spec.id = id;
      spec.pace = opt.paces[j % opt.paces.size()];
      spec.covariate = opt.covariates[(j / opt.paces.size()) % opt.covariates.size()];
      specs.push_back(std::move(spec));
    }
  return specs;
}

namespace detail {

inline std::vector<AccelSample> render_accel(const SubjectProfile& profile, const SampleSpec& spec,
                                             const GeneratorOptions& opt, Rng rng) {
  const AccelProfile base = condition(profile.accel, spec.pace, spec.covariate);
  const double var = opt.variability;
  AccelProfile a = base;
  for (int attempt = 0; attempt < 20; ++attempt) {
    a = base;
    a.period_s *= 1.0 + var * 0.015 * rng.normal();
    for (Bump& b : a.bumps) {
      b.amp *= 1.0 + var * 0.04 * rng.normal();
      b.center += var * 0.006 * rng.normal();
      b.kappa *= 1.0 + var * 0.04 * rng.normal();
    }
    a.bumps[0].center = 0.0;
    a.forward_amp *= 1.0 + var * 0.05 * rng.normal();
    if (clean_cycle(a)) break;
    a = base;
  }

  const double start = rng.uniform();
  const auto n = static_cast<std::size_t>(opt.walk_seconds * kNominalAccelRateHz);

  // Phone orientation is arbitrary; only the magnitude carries the gait.
  std::array<double, 3> up{rng.normal(), rng.normal(), rng.normal()};
  std::array<double, 3> fwd{rng.normal(), rng.normal(), rng.normal()};
  auto normalize = [](std::array<double, 3>& v) {
    const double len = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    for (double& c : v) c /= len;
  };
  normalize(up);
  const double along = fwd[0] * up[0] + fwd[1] * up[1] + fwd[2] * up[2];
  for (int k = 0; k < 3; ++k) fwd[k] -= along * up[k];
  normalize(fwd);

  std::vector<std::array<double, 3>> noise(n + 2);
  for (auto& e : noise)
    for (double& c : e) c = 0.05 * rng.normal();
  std::vector<AccelSample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double jitter = std::round(rng.uniform(-2.0, 2.0));
    const double t_ms = 20.0 * static_cast<double>(i) + (i == 0 ? 0.0 : jitter);
    double phase = t_ms / 1000.0 / a.period_s + start;
    phase -= std::floor(phase);
    const double v = vertical(a, phase);
    const double f = forward(a, phase);
    std::array<double, 3> acc{};
    for (int k = 0; k < 3; ++k) acc[k] = v * up[k] + f * fwd[k] + (noise[i][k] + noise[i + 1][k] + noise[i + 2][k]) / 3.0;
    out.push_back({static_cast<std::int64_t>(t_ms), acc[0], acc[1], acc[2]});
  }
  return out;
}

// Smooth value noise in [0, 1] on a unit lattice.
inline double lattice(std::uint64_t seed, long x, long y) {
  const std::uint64_t h = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(x) * 0x9E3779B1ULL +
                                                       static_cast<std::uint64_t>(y) * 0x85EBCA77ULL));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

inline double value_noise(std::uint64_t seed, double x, double y) {
  const double fx = std::floor(x), fy = std::floor(y);
  const long ix = static_cast<long>(fx), iy = static_cast<long>(fy);
  double tx = x - fx, ty = y - fy;
  tx = tx * tx * (3 - 2 * tx);
  ty = ty * ty * (3 - 2 * ty);
  const double a = lattice(seed, ix, iy), b = lattice(seed, ix + 1, iy);
  const double c = lattice(seed, ix, iy + 1), d = lattice(seed, ix + 1, iy + 1);
  return lerp(lerp(a, b, tx), lerp(c, d, tx), ty);
}

inline double texture(std::uint64_t seed, double u, double v) {
  return 0.65 * value_noise(seed, u, v) + 0.35 * value_noise(seed + 1, 2.1 * u, 2.1 * v);
}

struct Vec3 {
  double x = 0, y = 0, z = 0;
  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
};

// A textured slab between two 3D points, rendered as a screen-aligned quad.
struct Part {
  Vec3 a, b;
  double half_width = 0.05;  // m
  std::array<double, 3> color{};
  std::uint64_t texture_seed = 0;
  double texture_scale = 12.0;  // lattice cells per metre
};

struct Camera {
  double f, cx, cy, height;
  double px(const Vec3& p) const { return cx + f * p.x / p.z; }
  double py(const Vec3& p) const { return cy - f * (p.y - height) / p.z; }
};

inline void raster_part(const Part& part, const Camera& cam, Grid<double>& zbuf, ColorImage* color,
                        DepthImage* depth) {
  if (part.a.z <= 0.1 || part.b.z <= 0.1) return;
  const double ax = cam.px(part.a), ay = cam.py(part.a);
  const double bx = cam.px(part.b), by = cam.py(part.b);
  const double dx = bx - ax, dy = by - ay;
  const double len2 = dx * dx + dy * dy;
  const double hw = cam.f * part.half_width / (0.5 * (part.a.z + part.b.z));
  const double ext = hw + 1.0;
  const long x0 = static_cast<long>(std::floor(std::min(ax, bx) - ext));
  const long x1 = static_cast<long>(std::ceil(std::max(ax, bx) + ext));
  const long y0 = static_cast<long>(std::floor(std::min(ay, by) - ext));
  const long y1 = static_cast<long>(std::ceil(std::max(ay, by) + ext));
  const double len = std::sqrt(len2);
  const double world_len = std::sqrt((part.b.x - part.a.x) * (part.b.x - part.a.x) +
                                     (part.b.y - part.a.y) * (part.b.y - part.a.y) +
                                     (part.b.z - part.a.z) * (part.b.z - part.a.z));
  for (long y = std::max(0L, y0); y <= std::min<long>(y1, static_cast<long>(zbuf.height()) - 1); ++y)
    for (long x = std::max(0L, x0); x <= std::min<long>(x1, static_cast<long>(zbuf.width()) - 1); ++x) {
      const double rx = static_cast<double>(x) - ax, ry = static_cast<double>(y) - ay;
      double s = len2 > 1e-9 ? (rx * dx + ry * dy) / len2 : 0.0;
      double across = len > 1e-9 ? (rx * dy - ry * dx) / len : std::hypot(rx, ry);
      if (s < 0.0 || s > 1.0 || std::abs(across) > hw) continue;
      const double z = part.a.z + s * (part.b.z - part.a.z);
      const auto ux = static_cast<std::size_t>(x), uy = static_cast<std::size_t>(y);
      if (z >= zbuf(ux, uy)) continue;
      zbuf(ux, uy) = z;
      if (depth) (*depth)(ux, uy) = static_cast<std::uint16_t>(std::clamp(std::lround(z * 1000.0), 1L, 8191L));
      if (color) {
        const double u = s * world_len * part.texture_scale;
        const double v = (across / hw) * part.half_width * part.texture_scale;
        const double shade = 0.45 + 0.75 * texture(part.texture_seed, u, v);
        Rgb& px = (*color)(ux, uy);
        px.r = static_cast<std::uint8_t>(std::clamp(part.color[0] * shade, 0.0, 255.0));
        px.g = static_cast<std::uint8_t>(std::clamp(part.color[1] * shade, 0.0, 255.0));
        px.b = static_cast<std::uint8_t>(std::clamp(part.color[2] * shade, 0.0, 255.0));
      }
    }
}

struct Pose {
  std::vector<Part> parts;
};

// Articulated figure facing the camera at time t.
inline Pose pose_at(const BodyProfile& b, const SampleSpec& spec, double t, double period, double speed, double z0,
                    double x0, double theta0, double arm_scale, std::uint64_t tex_seed) {
  const double H = b.height;
  const double theta = 2.0 * kPi * t / period + theta0;
  const Covariate cov = spec.covariate;
  const bool loaded_l = cov == Covariate::left_hand_with_loadings;
  const bool loaded_r = cov == Covariate::right_hand_with_loadings;
  const double lean = loaded_l ? 0.06 : loaded_r ? -0.06 : 0.0;

  const Vec3 pelvis{x0 + b.sway * std::sin(theta), 0.53 * H + b.bounce * std::cos(2.0 * theta), z0 - speed * t};
  const double roll = b.roll * std::sin(theta) + lean;
  const double torso_len = 0.30 * H;
  const Vec3 neck = pelvis + Vec3{-torso_len * std::sin(roll), torso_len * std::cos(roll), 0.0};
  const double sw = b.shoulder * H * 0.5;
  const double hw = b.hip * H * 0.5;

  Pose pose;
  auto add = [&](Vec3 a, Vec3 c, double half_width, const std::array<double, 3>& col, std::uint64_t k,
                 double scale = 12.0) {
    pose.parts.push_back({a, c, half_width, col, tex_seed + k, scale});
  };
  const std::array<double, 3> skin{205, 160, 130};
  const std::array<double, 3> hair{60, 45, 35};

  // Legs: thigh + shin, opposite phases.
  for (int side : {-1, 1}) {
    const double ph = side < 0 ? theta : theta + kPi;
    const double alpha = b.leg_amp * std::sin(ph);
    const double knee = b.knee_amp * (0.5 - 0.5 * std::cos(ph + 0.7));
    const Vec3 hip = pelvis + Vec3{side * hw, 0.0, 0.0};
    const double thigh = 0.25 * H, shin = 0.26 * H;
    const Vec3 k = hip + Vec3{0.0, -thigh * std::cos(alpha), -thigh * std::sin(alpha)};
    const double beta = alpha - knee;
    const Vec3 ankle = k + Vec3{0.0, -shin * std::cos(beta), -shin * std::sin(beta)};
    add(hip, k, 0.065 * H * 0.5 + 0.02, b.trousers, side < 0 ? 10 : 20);
    add(k, ankle, 0.05 * H * 0.5 + 0.015, b.trousers, side < 0 ? 11 : 21);
  }
  // Torso and head.
  add(pelvis, neck, 0.5 * (sw + hw), b.shirt, 30, 10.0);
  const Vec3 head_top = neck + Vec3{-0.15 * H * std::sin(roll), 0.15 * H * std::cos(roll), 0.0};
  add(neck + Vec3{0, 0.01 * H, -0.01}, head_top, 0.055 * H, skin, 40, 16.0);
  add(head_top + Vec3{0, -0.04 * H, 0.01}, head_top + Vec3{0, 0.005 * H, 0.01}, 0.058 * H, hair, 41, 20.0);

  // Arms.
  for (int side : {-1, 1}) {
    const bool left = side < 0;
    const double ph = (left ? theta + kPi : theta) + b.arm_phase;
    double amp = b.arm_amp * arm_scale;
    double abd = b.abduction;
    const bool pocket = (left && (cov == Covariate::left_hand_in_pocket || cov == Covariate::both_hands_in_pocket)) ||
                        (!left && (cov == Covariate::right_hand_in_pocket || cov == Covariate::both_hands_in_pocket));
    const bool book = (left && cov == Covariate::left_hand_holding_book) ||
                      (!left && cov == Covariate::right_hand_holding_book);
    const bool load = (left && loaded_l) || (!left && loaded_r);
    const Vec3 shoulder = neck + Vec3{side * sw, -0.02 * H, 0.0};
    const double upper = 0.19 * H, fore = 0.2 * H;
    if (book) {
      const double swing = 0.05 * std::sin(ph);
      const Vec3 elbow = shoulder + Vec3{-side * 0.02, -upper * 0.95, -upper * 0.3};
      const Vec3 hand = elbow + Vec3{-side * 0.06 + swing * 0.02, 0.03, -fore};
      add(shoulder, elbow, 0.022 * H, b.shirt, left ? 50 : 60, 10.0);
      add(elbow, hand, 0.018 * H, skin, left ? 51 : 61, 16.0);
      const Vec3 bc = hand + Vec3{-side * 0.08, 0.02, -0.02};
      add(bc + Vec3{0, -0.13, 0}, bc + Vec3{0, 0.13, 0}, 0.1, {190, 60, 50}, 70, 25.0);
      continue;
    }
    if (pocket) {
      amp *= 0.1;
      abd = 0.03;
    }
    if (load) {
      amp *= 0.3;
      abd = 0.08;
    }
    const double swing = amp * std::sin(ph);
    const Vec3 dir{side * std::sin(abd), -std::cos(abd) * std::cos(swing), -std::cos(abd) * std::sin(swing)};
    const Vec3 elbow = shoulder + dir * upper;
    const double bend = pocket ? 0.5 : 0.15 + 0.3 * std::max(0.0, std::sin(swing));
    const Vec3 fdir{side * std::sin(abd) * (pocket ? -1.5 : 1.0), -std::cos(swing + bend), -std::sin(swing + bend)};
    const Vec3 hand = elbow + fdir * (fore * (pocket ? 0.75 : 1.0));
    add(shoulder, elbow, 0.022 * H, b.shirt, left ? 50 : 60, 10.0);
    add(elbow, hand, 0.018 * H, pocket ? b.shirt : skin, left ? 51 : 61, 16.0);
    if (load) {
      const double pend = 0.25 * std::sin(theta * 1.0 + 0.9);
      const Vec3 top = hand + Vec3{0.0, -0.02, 0.0};
      const Vec3 bottom = top + Vec3{0.32 * std::sin(pend), -0.32 * std::cos(pend), -0.05};
      add(top, bottom, 0.14, {70, 90, 140}, 80, 14.0);
    }
  }
  return pose;
}

inline ColorImage render_background(std::uint64_t seed, std::size_t w, std::size_t h) {
  ColorImage img(w, h);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      const double v = texture(seed, static_cast<double>(x) / 9.0, static_cast<double>(y) / 9.0);
      const double floor_tone = y > h * 6 / 10 ? 0.8 : 1.0;
      const auto c = static_cast<std::uint8_t>(std::clamp((70.0 + 120.0 * v) * floor_tone, 0.0, 255.0));
      img(x, y) = {c, static_cast<std::uint8_t>(c * 0.95), static_cast<std::uint8_t>(c * 0.85)};
    }
  return img;
}

inline std::vector<RgbdFrame> render_frames(const SubjectProfile& profile, const SampleSpec& spec,
                                            const GeneratorOptions& opt, Rng rng) {
  const BodyProfile& b = profile.body;
  const double var = opt.variability;
  double period = profile.accel.period_s;
  double speed = b.speed;
  double arm_scale = 1.0;
  if (spec.pace == Pace::fast) {
    period = std::max(0.8, period * 0.8);
    speed *= 1.15;
    arm_scale = 1.25;
  }
  period *= 1.0 + var * 0.015 * rng.normal();
  speed *= 1.0 + var * 0.03 * rng.normal();
  arm_scale *= 1.0 + var * 0.05 * rng.normal();
  BodyProfile body = b;
  body.leg_amp *= 1.0 + var * 0.04 * rng.normal();
  body.bounce *= 1.0 + var * 0.05 * rng.normal();
  body.sway *= 1.0 + var * 0.05 * rng.normal();
  const double z0 = rng.uniform(4.9, 5.2);
  const double x0 = rng.uniform(-0.15, 0.15);
  const double theta0 = rng.uniform(0.0, 2.0 * kPi);
  const std::uint64_t tex_seed = splitmix64(fnv1a(profile.id));
  const std::uint64_t bg_seed = rng.next();

  const Camera ccam{opt.focal, opt.color_width * 0.5, opt.color_height * 0.5, 0.95};
  const double ds = static_cast<double>(opt.depth_width) / static_cast<double>(opt.color_width);
  const Camera dcam{opt.focal * ds, opt.depth_width * 0.5, opt.depth_height * 0.5, 0.95};
  const ColorImage background = render_background(bg_seed, opt.color_width, opt.color_height);

  std::vector<RgbdFrame> frames;
  frames.reserve(opt.frames);
  for (std::size_t i = 0; i < opt.frames; ++i) {
    const double t_ms = std::round(1000.0 * static_cast<double>(i) / opt.fps);
    const Pose pose = pose_at(body, spec, t_ms / 1000.0, period, speed, z0, x0, theta0, arm_scale, tex_seed);
    RgbdFrame f;
    f.t_ms = static_cast<std::int64_t>(t_ms);
    f.color = background;
    f.depth = DepthImage(opt.depth_width, opt.depth_height, 0);
    Grid<double> zc(opt.color_width, opt.color_height, 1e9);
    Grid<double> zd(opt.depth_width, opt.depth_height, 1e9);
    for (const Part& p : pose.parts) {
      raster_part(p, ccam, zc, &f.color, nullptr);
      raster_part(p, dcam, zd, nullptr, &f.depth);
    }
    for (Rgb& px : f.color.data()) {
      const int n = static_cast<int>(rng.index(5)) - 2;
      px.r = static_cast<std::uint8_t>(std::clamp(px.r + n, 0, 255));
      px.g = static_cast<std::uint8_t>(std::clamp(px.g + n, 0, 255));
      px.b = static_cast<std::uint8_t>(std::clamp(px.b + n, 0, 255));
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

}  // namespace detail

inline SyntheticSample render_sample(const SubjectProfile& profile, const SampleSpec& spec,
                                     const GeneratorOptions& opt) {
  const Rng root = Rng(opt.seed).split("samples").split(spec.id);
  SyntheticSample s;
  s.spec = spec;
  s.subject_id = profile.id;
  if (opt.accel) s.accel = detail::render_accel(profile, spec, opt, root.split("accel"));
  if (opt.rgbd) s.frames = detail::render_frames(profile, spec, opt, root.split("rgbd"));
  return s;
}

// In-memory view of a synthetic dataset: profiles and sample specs, with
// samples rendered on demand.
struct SyntheticDataset {
  GeneratorOptions options;
  std::vector<SubjectProfile> profiles;
  std::vector<SampleSpec> specs;

  SyntheticSample render(std::size_t i) const { return render_sample(profiles[specs[i].subject], specs[i], options); }
};

inline SyntheticDataset make_dataset(const GeneratorOptions& opt) {
  return {opt, make_profiles(opt), make_specs(opt)};
}

// Writes accel CSVs, PPM/PGM frames and manifest.json under `root`; returns
// the manifest path.
inline std::filesystem::path generate_dataset(const GeneratorOptions& opt, const std::filesystem::path& root) {
  const SyntheticDataset ds = make_dataset(opt);
  std::error_code ec;
  std::filesystem::create_directories(root, ec);
  if (ec) throw IoError("cannot create " + root.string() + ": " + ec.message());

  io::DatasetManifest manifest;
  manifest.root = root;
  for (const auto& p : ds.profiles) manifest.subjects.push_back({p.id, {}});
  std::vector<io::SampleRecord> records(ds.specs.size());
  parallel_for(ds.specs.size(), opt.threads, [&](std::size_t i) {
    const SyntheticSample s = ds.render(i);
    const std::filesystem::path rel = std::filesystem::path(s.subject_id) / s.spec.id;
    std::filesystem::create_directories(root / rel);
    io::SampleRecord& r = records[i];
    r.id = s.spec.id;
    r.pace = s.spec.pace;
    r.covariate = s.spec.covariate;
    if (opt.accel) {
      r.accel = rel / "accel.csv";
      io::save_accel_csv(root / *r.accel, s.accel);
    }
    for (std::size_t f = 0; f < s.frames.size(); ++f) {
      char name[32];
      io::FrameRef ref;
      std::snprintf(name, sizeof name, "c%04zu.ppm", f);
      ref.color = rel / name;
      std::snprintf(name, sizeof name, "d%04zu.pgm", f);
      ref.depth = rel / name;
      ref.t_ms = ref.depth_t_ms = s.frames[f].t_ms;
      io::save_ppm(root / ref.color, s.frames[f].color);
      io::save_depth_pgm(root / ref.depth, s.frames[f].depth);
      r.frames.push_back(std::move(ref));
    }
  });
  for (std::size_t i = 0; i < ds.specs.size(); ++i)
    manifest.subjects[ds.specs[i].subject].samples.push_back(std::move(records[i]));
  const std::filesystem::path path = root / "manifest.json";
  io::save_manifest(path, manifest);
  return path;
}

}  // namespace gaitforge::synth
