#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "gaitforge/core/error.hpp"
#include "gaitforge/core/rng.hpp"
#include "gaitforge/numerics/matrix.hpp"

namespace gaitforge::numerics {

struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;
  double C = 1.0;
  friend bool operator==(const LinearModel&, const LinearModel&) = default;
};

struct SvmOptions {
  double C = 1000.0;
  double tolerance = 1e-4;   // on the projected-gradient spread
  std::size_t max_epochs = 1000;
  std::uint64_t seed = 0;    // coordinate order
};

struct SvmTrace {
  std::vector<double> dual_objective;    // 0.5|w|^2 - sum(alpha), per epoch
  std::vector<double> primal_objective;  // 0.5|w|^2 + C sum(hinge), per epoch
  std::vector<double> alpha;
  std::size_t epochs = 0;
  bool converged = false;
};

inline double decision_value(const LinearModel& m, std::span<const double> x) {
  if (x.size() != m.weights.size())
    throw ValidationError("decision_value: expected dimension " + std::to_string(m.weights.size()) + ", got " +
                          std::to_string(x.size()));
  return dot(m.weights, x) + m.bias;
}

namespace detail {

// w . [x, 1]
inline double augmented_dot(std::span<const double> w, std::span<const double> x) {
  return dot(w.first(x.size()), x) + w[x.size()];
}

inline double primal_objective(std::span<const double> w, const Matrix& x, std::span<const int> y, double c) {
  double hinge = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) hinge += std::max(0.0, 1.0 - y[i] * augmented_dot(w, x.row(i)));
  return 0.5 * dot(w, w) + c * hinge;
}

// Exact minimization of the dual along alpha(t) = clip(alpha + t d): a
// coordinate freezes once it reaches its bound and the rest keep moving.
// Never increases the dual. Rebuilds w from alpha when it moves.
inline void projected_search(const Matrix& x, std::span<const int> y, std::vector<double>& alpha,
                             std::span<const double> direction, std::vector<double>& w, double c) {
  const std::size_t dim = x.cols();
  struct Move {
    double t;  // where the coordinate hits its bound
    std::size_t i;
    double d;
  };
  std::vector<Move> moves;
  std::vector<double> u(dim + 1, 0.0);
  double s = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    const double d = direction[i];
    if (d == 0.0) continue;
    const double room = d > 0.0 ? c - alpha[i] : alpha[i];
    moves.push_back({room / std::abs(d), i, d});
    const auto xi = x.row(i);
    for (std::size_t k = 0; k < dim; ++k) u[k] += y[i] * d * xi[k];
    u[dim] += y[i] * d;
    s += d;
  }
  if (moves.empty()) return;
  std::sort(moves.begin(), moves.end(), [](const Move& a, const Move& b) { return a.t < b.t || (a.t == b.t && a.i < b.i); });

  // dual along a segment: 0.5 |wa + (t - ta) u|^2 - (sum alpha) - (t - ta) s
  std::vector<double> wa = w;
  double ta = 0.0, t_final = 0.0;
  std::size_t next = 0;
  while (true) {
    while (next < moves.size() && moves[next].t <= ta) {
      const Move& m = moves[next++];
      const auto xi = x.row(m.i);
      for (std::size_t k = 0; k < dim; ++k) u[k] -= y[m.i] * m.d * xi[k];
      u[dim] -= y[m.i] * m.d;
      s -= m.d;
    }
    double wu = 0.0, uu = 0.0;
    for (std::size_t k = 0; k <= dim; ++k) {
      wu += wa[k] * u[k];
      uu += u[k] * u[k];
    }
    const double slope = wu - s;
    if (next == moves.size() && uu == 0.0) {
      t_final = ta;  // nothing left that moves
      break;
    }
    if (!(slope < 0.0)) {
      t_final = ta;
      break;
    }
    const double tb = next < moves.size() ? moves[next].t : std::numeric_limits<double>::infinity();
    const double tstar = uu > 0.0 ? ta - slope / uu : std::numeric_limits<double>::infinity();
    if (tstar < tb) {
      t_final = tstar;
      break;
    }
    if (!std::isfinite(tb)) return;  // unbounded descent cannot happen for a valid dual; bail out
    for (std::size_t k = 0; k <= dim; ++k) wa[k] += (tb - ta) * u[k];
    ta = tb;
  }
  if (!(t_final > 0.0) || !std::isfinite(t_final)) return;
  for (const Move& m : moves) {
    double a = alpha[m.i] + std::min(t_final, m.t) * m.d;
    if (m.t <= t_final) a = m.d > 0.0 ? c : 0.0;
    alpha[m.i] = std::clamp(a, 0.0, c);
  }
  std::fill(w.begin(), w.end(), 0.0);
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (alpha[i] == 0.0) continue;
    const double f = alpha[i] * y[i];
    const auto xi = x.row(i);
    for (std::size_t k = 0; k < dim; ++k) w[k] += f * xi[k];
    w[dim] += f;
  }
}

// Newton direction for the free dual variables (0 < alpha < C): solves
// (Q_FF + ridge) d = 1 - Q_F. alpha so the free points move onto the margin.
// When Q_FF is singular the ridge turns the null space into long moves that
// raise sum(alpha) without changing w; the search then stops at the box.
inline bool newton_direction(const Matrix& x, std::span<const int> y, const std::vector<double>& alpha,
                             const std::vector<double>& w, double c, std::vector<double>& direction) {
  std::vector<std::size_t> free;
  for (std::size_t i = 0; i < alpha.size(); ++i)
    if (alpha[i] > 0.0 && alpha[i] < c) free.push_back(i);
  const std::size_t f = free.size();
  if (f == 0 || f > 512) return false;
  std::vector<double> q(f * f), r(f);
  for (std::size_t a = 0; a < f; ++a) {
    const auto xa = x.row(free[a]);
    r[a] = 1.0 - y[free[a]] * augmented_dot(w, xa);
    for (std::size_t b = 0; b <= a; ++b)
      q[a * f + b] = q[b * f + a] = y[free[a]] * y[free[b]] * (dot(xa, x.row(free[b])) + 1.0);
  }
  // Cholesky on the ridged system
  double scale = 0.0;
  for (std::size_t a = 0; a < f; ++a) scale = std::max(scale, q[a * f + a]);
  for (std::size_t a = 0; a < f; ++a) q[a * f + a] += 1e-8 * scale;
  for (std::size_t j = 0; j < f; ++j) {
    double d = q[j * f + j];
    for (std::size_t k = 0; k < j; ++k) d -= q[j * f + k] * q[j * f + k];
    if (!(d > 0.0)) return false;
    d = std::sqrt(d);
    q[j * f + j] = d;
    for (std::size_t i = j + 1; i < f; ++i) {
      double v = q[i * f + j];
      for (std::size_t k = 0; k < j; ++k) v -= q[i * f + k] * q[j * f + k];
      q[i * f + j] = v / d;
    }
  }
  for (std::size_t i = 0; i < f; ++i) {
    for (std::size_t k = 0; k < i; ++k) r[i] -= q[i * f + k] * r[k];
    r[i] /= q[i * f + i];
  }
  for (std::size_t i = f; i-- > 0;) {
    for (std::size_t k = i + 1; k < f; ++k) r[i] -= q[k * f + i] * r[k];
    r[i] /= q[i * f + i];
  }
  std::fill(direction.begin(), direction.end(), 0.0);
  bool any = false;
  for (std::size_t a = 0; a < f; ++a) {
    direction[free[a]] = r[a];
    any = any || r[a] != 0.0;
  }
  return any;
}

}  // namespace detail

// L1-loss (hinge) linear SVM by dual coordinate descent. The bias is learned
// as the weight of an appended constant feature equal to 1, so it is
// regularized along with w. Labels must be +1 / -1 with both present.
inline LinearModel train_linear_svm(const Matrix& x, std::span<const int> y, const SvmOptions& opt = {},
                                    SvmTrace* trace = nullptr) {
  const std::size_t n = x.rows();
  const std::size_t dim = x.cols();
  if (y.size() != n) throw ValidationError("train_linear_svm: label count mismatch");
  if (!(opt.C > 0.0)) throw ValidationError("train_linear_svm: C must be positive");
  bool has_pos = false;
  bool has_neg = false;
  for (int label : y) {
    if (label == 1) has_pos = true;
    else if (label == -1) has_neg = true;
    else throw ValidationError("train_linear_svm: labels must be +1 or -1");
  }
  if (!has_pos || !has_neg) throw ValidationError("train_linear_svm: both classes required");

  const double c = opt.C;
  std::vector<double> w(dim + 1, 0.0);
  std::vector<double> alpha(n, 0.0);
  std::vector<double> qdiag(n);
  for (std::size_t i = 0; i < n; ++i) qdiag[i] = dot(x.row(i), x.row(i)) + 1.0;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(opt.seed);

  std::size_t epoch = 0;
  bool converged = false;
  std::vector<double> alpha_prev(n), direction(n);
  for (; epoch < opt.max_epochs; ++epoch) {
    alpha_prev = alpha;
    rng.shuffle(std::span<std::size_t>(order));
    double pg_max = -std::numeric_limits<double>::infinity();
    double pg_min = std::numeric_limits<double>::infinity();
    for (std::size_t i : order) {
      const auto xi = x.row(i);
      const double yi = y[i];
      const double g = yi * detail::augmented_dot(w, xi) - 1.0;
      double pg = g;
      if (alpha[i] == 0.0) pg = std::min(g, 0.0);
      else if (alpha[i] == c) pg = std::max(g, 0.0);
      pg_max = std::max(pg_max, pg);
      pg_min = std::min(pg_min, pg);
      if (pg == 0.0) continue;
      const double old = alpha[i];
      alpha[i] = std::clamp(old - g / qdiag[i], 0.0, c);
      const double step = (alpha[i] - old) * yi;
      for (std::size_t d = 0; d < dim; ++d) w[d] += step * xi[d];
      w[dim] += step;
    }
    // accelerate: follow the epoch's net change, then a Newton step on the
    // free variables; both are exact searches that cannot raise the dual
    for (std::size_t i = 0; i < n; ++i) direction[i] = alpha[i] - alpha_prev[i];
    detail::projected_search(x, y, alpha, direction, w, c);
    if (detail::newton_direction(x, y, alpha, w, c, direction)) detail::projected_search(x, y, alpha, direction, w, c);
    if (trace) {
      const double half_norm = 0.5 * dot(w, w);
      trace->dual_objective.push_back(half_norm - std::accumulate(alpha.begin(), alpha.end(), 0.0));
      trace->primal_objective.push_back(detail::primal_objective(w, x, y, c));
    }
    if (pg_max - pg_min < opt.tolerance) {
      converged = true;
      ++epoch;
      break;
    }
  }
  if (trace) {
    trace->alpha = alpha;
    trace->epochs = epoch;
    trace->converged = converged;
  }
  LinearModel m;
  m.bias = w[dim];
  w.pop_back();
  m.weights = std::move(w);
  m.C = c;
  return m;
}

}  // namespace gaitforge::numerics
