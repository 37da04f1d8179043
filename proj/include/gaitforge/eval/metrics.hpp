#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "gaitforge/core/error.hpp"
#include "gaitforge/numerics/matrix.hpp"

namespace gaitforge::eval {

inline constexpr std::size_t kNoPrediction = std::numeric_limits<std::size_t>::max();

// Correctly classified over total.
inline double accuracy(std::span<const std::size_t> predicted, std::span<const std::size_t> truth) {
  if (predicted.size() != truth.size()) throw ValidationError("accuracy: length mismatch");
  if (truth.empty()) throw ValidationError("accuracy: no test samples");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) correct += predicted[i] == truth[i];
  return static_cast<double>(correct) / static_cast<double>(truth.size());
}

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::string label;
  std::vector<RocPoint> points;  // (0,0) ... (1,1), both coordinates non-decreasing
  double auc = 0.0;
};

inline double trapezoid_auc(std::span<const RocPoint> pts) {
  double a = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    a += (pts[i].fpr - pts[i - 1].fpr) * 0.5 * (pts[i].tpr + pts[i - 1].tpr);
  return a;
}

// Threshold sweep from the highest score down. Tied scores enter together,
// which draws a diagonal segment and credits ties with one half in the AUC.
inline RocCurve roc_curve(std::span<const double> scores, const std::vector<bool>& positive, std::string label = {}) {
  if (scores.size() != positive.size()) throw ValidationError("roc_curve: length mismatch");
  const auto pos = static_cast<std::size_t>(std::count(positive.begin(), positive.end(), true));
  const std::size_t neg = positive.size() - pos;
  if (pos == 0 || neg == 0) throw ValidationError("roc_curve: need positive and negative samples");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  RocCurve c;
  c.label = std::move(label);
  c.points.push_back({0.0, 0.0});
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (positive[order[j]] ? tp : fp) += 1;
      ++j;
    }
    c.points.push_back({static_cast<double>(fp) / static_cast<double>(neg), static_cast<double>(tp) / static_cast<double>(pos)});
    i = j;
  }
  c.auc = trapezoid_auc(c.points);
  return c;
}

// TPR at a given FPR: the highest TPR reached at exactly that FPR, otherwise
// linear interpolation across the enclosing segment.
inline double tpr_at(const RocCurve& c, double fpr) {
  const auto& p = c.points;
  std::size_t k = 0;
  while (k + 1 < p.size() && p[k + 1].fpr <= fpr) ++k;
  if (p[k].fpr == fpr || k + 1 == p.size()) return p[k].tpr;
  const double w = (fpr - p[k].fpr) / (p[k + 1].fpr - p[k].fpr);
  return p[k].tpr + w * (p[k + 1].tpr - p[k].tpr);
}

// Vertical averaging on a uniform FPR grid; (0,0) is prepended so the
// averaged curve is anchored like the inputs.
inline RocCurve average_roc(std::span<const RocCurve> curves, std::size_t grid = 101) {
  if (curves.empty()) throw ValidationError("average_roc: no curves");
  if (grid < 2) throw ValidationError("average_roc: grid needs at least 2 points");
  RocCurve avg;
  avg.label = "average";
  avg.points.push_back({0.0, 0.0});
  for (std::size_t g = 0; g < grid; ++g) {
    const double fpr = static_cast<double>(g) / static_cast<double>(grid - 1);
    double s = 0.0;
    for (const auto& c : curves) s += tpr_at(c, fpr);
    avg.points.push_back({fpr, s / static_cast<double>(curves.size())});
  }
  avg.auc = trapezoid_auc(avg.points);
  return avg;
}

struct RocReport {
  std::vector<RocCurve> subjects;
  std::vector<std::string> skipped;  // subjects absent from the test labels
  RocCurve average;
};

// One-vs-all ROC per subject from a (test x subject) score matrix.
inline RocReport evaluate_roc(const numerics::Matrix& scores, std::span<const std::size_t> truth,
                              std::span<const std::string> subject_ids) {
  if (scores.rows() != truth.size() || scores.cols() != subject_ids.size())
    throw ValidationError("evaluate_roc: score matrix shape does not match labels");
  RocReport r;
  std::vector<double> col(truth.size());
  std::vector<bool> pos(truth.size());
  for (std::size_t s = 0; s < subject_ids.size(); ++s) {
    std::size_t npos = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      col[i] = scores(i, s);
      pos[i] = truth[i] == s;
      npos += pos[i];
    }
    if (npos == 0 || npos == truth.size()) {
      r.skipped.push_back(subject_ids[s]);
      continue;
    }
    r.subjects.push_back(roc_curve(col, pos, subject_ids[s]));
  }
  if (r.subjects.size() < 2) throw ValidationError("evaluate_roc: need at least 2 subjects present in the test labels");
  r.average = average_roc(r.subjects);
  return r;
}

}  // namespace gaitforge::eval
