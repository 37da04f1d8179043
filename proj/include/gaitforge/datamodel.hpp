#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gaitforge/core/error.hpp"
#include "gaitforge/core/grid.hpp"

namespace gaitforge {

inline constexpr double kNominalAccelRateHz = 50.0;
inline constexpr double kAccelJitterTolerance = 0.20;
inline constexpr std::size_t kSamplesPerStep = 50;
inline constexpr int kMinSteps = 1;
inline constexpr int kMaxSteps = 8;
inline constexpr std::uint16_t kMaxDepth = 8191;

struct AccelSample {
  std::int64_t t_ms = 0;
  double ax = 0.0;
  double ay = 0.0;
  double az = 0.0;
  friend bool operator==(const AccelSample&, const AccelSample&) = default;
};

enum class Pace { normal, fast, unknown };

// The eight walking conditions plus `none` for untagged data.
enum class Covariate {
  natural,
  left_hand_in_pocket,
  right_hand_in_pocket,
  both_hands_in_pocket,
  left_hand_holding_book,
  right_hand_holding_book,
  left_hand_with_loadings,
  right_hand_with_loadings,
  none,
};

inline constexpr std::array<Covariate, 8> kHardCovariates = {
    Covariate::natural,
    Covariate::left_hand_in_pocket,
    Covariate::right_hand_in_pocket,
    Covariate::both_hands_in_pocket,
    Covariate::left_hand_holding_book,
    Covariate::right_hand_holding_book,
    Covariate::left_hand_with_loadings,
    Covariate::right_hand_with_loadings,
};

inline std::string_view to_string(Pace p) {
  switch (p) {
    case Pace::normal: return "normal";
    case Pace::fast: return "fast";
    case Pace::unknown: return "unknown";
  }
  return "unknown";
}

inline Pace parse_pace(std::string_view s) {
  if (s == "normal") return Pace::normal;
  if (s == "fast") return Pace::fast;
  if (s == "unknown") return Pace::unknown;
  throw ValidationError("unknown pace '" + std::string(s) + "'");
}

inline std::string_view to_string(Covariate c) {
  switch (c) {
    case Covariate::natural: return "natural";
    case Covariate::left_hand_in_pocket: return "left_hand_in_pocket";
    case Covariate::right_hand_in_pocket: return "right_hand_in_pocket";
    case Covariate::both_hands_in_pocket: return "both_hands_in_pocket";
    case Covariate::left_hand_holding_book: return "left_hand_holding_book";
    case Covariate::right_hand_holding_book: return "right_hand_holding_book";
    case Covariate::left_hand_with_loadings: return "left_hand_with_loadings";
    case Covariate::right_hand_with_loadings: return "right_hand_with_loadings";
    case Covariate::none: return "none";
  }
  return "none";
}

inline Covariate parse_covariate(std::string_view s) {
  for (Covariate c : kHardCovariates)
    if (to_string(c) == s) return c;
  if (s == "none") return Covariate::none;
  throw ValidationError("unknown covariate '" + std::string(s) + "'");
}

// Compound acceleration over one walk, with the timestamps it was sampled at.
struct GaitCurve {
  std::vector<double> values;
  std::vector<std::int64_t> t_ms;
  double rate_hz = kNominalAccelRateHz;
  std::optional<std::string> subject_id;
  std::string id;
  Pace pace = Pace::unknown;
  Covariate covariate = Covariate::none;

  std::size_t size() const noexcept { return values.size(); }
};

// `steps` consecutive step cycles, each resampled to 50 values.
struct StepWindow {
  int steps = 0;
  std::vector<double> samples;
  std::string source_curve_id;
  std::size_t first_point = 0;  // index of the opening partition point
};

struct RgbdFrame {
  ColorImage color;
  DepthImage depth;
  std::int64_t t_ms = 0;
};

inline void validate_frame(const RgbdFrame& frame) {
  for (std::uint16_t d : frame.depth.data())
    if (d > kMaxDepth) throw ValidationError("depth value " + std::to_string(d) + " exceeds 13-bit range");
}

}  // namespace gaitforge
