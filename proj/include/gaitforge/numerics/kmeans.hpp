#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "gaitforge/core/error.hpp"
#include "gaitforge/core/parallel.hpp"
#include "gaitforge/core/rng.hpp"
#include "gaitforge/numerics/matrix.hpp"

namespace gaitforge::numerics {

struct Nearest {
  std::size_t index = 0;
  double distance2 = 0.0;
};

// Exhaustive nearest center under squared Euclidean distance; ties go to the
// lowest index.
inline Nearest nearest_center(const Matrix& centers, std::span<const double> x) {
  Nearest best{0, std::numeric_limits<double>::infinity()};
  for (std::size_t c = 0; c < centers.rows(); ++c) {
    const double d = squared_distance(centers.row(c), x);
    if (d < best.distance2) best = {c, d};
  }
  return best;
}

struct KMeansOptions {
  std::size_t max_iterations = 100;
  std::size_t restarts = 10;
  std::size_t threads = 1;  // restarts run concurrently
};

struct KMeansResult {
  Matrix centers;
  std::vector<std::size_t> assignment;
  double cost = 0.0;                // within-cluster sum of squares
  std::vector<double> cost_trace;   // cost after every assignment step
  std::size_t iterations = 0;
  bool converged = false;
};

// k-means++ seeding. Throws when the data has fewer than k distinct points.
inline Matrix kmeanspp_init(const Matrix& points, std::size_t k, Rng& rng) {
  const std::size_t n = points.rows();
  if (k == 0 || n < k) throw ValidationError("kmeans: need at least k points");
  Matrix centers;
  centers.push_row(points.row(rng.index(n)));
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points.row(i), centers.row(0));
  while (centers.rows() < k) {
    double total = 0.0;
    for (double v : d2) total += v;
    if (!(total > 0.0)) throw ValidationError("kmeans: fewer distinct points than clusters");
    double target = rng.uniform() * total;
    std::size_t pick = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (d2[i] <= 0.0) continue;
      pick = i;
      target -= d2[i];
      if (target < 0.0) break;
    }
    centers.push_row(points.row(pick));
    const auto c = centers.row(centers.rows() - 1);
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(points.row(i), c));
  }
  return centers;
}

// Lloyd iterations from the given centers. Stops when no assignment changes or
// after max_iterations. An emptied cluster is re-seeded at the point farthest
// from its current center.
//
// Assignment uses Hamerly's bounds: a point keeps its center without a scan
// only when the bounds prove that center strictly nearest, so assignments are
// the same as an exhaustive scan with lowest-index tie-breaking.
inline KMeansResult lloyd(const Matrix& points, Matrix centers, std::size_t max_iterations) {
  const std::size_t n = points.rows();
  const std::size_t k = centers.rows();
  const std::size_t dim = points.cols();
  constexpr double kSlack = 1e-9;
  KMeansResult r;
  r.assignment.assign(n, 0);
  std::vector<double> dist(n);   // squared distance to the assigned center
  std::vector<double> upper(n);  // >= distance to the assigned center
  std::vector<double> lower(n);  // <= distance to every other center

  auto full_scan = [&](std::size_t i) {
    const auto x = points.row(i);
    double best = std::numeric_limits<double>::infinity();
    double second = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t c = 0; c < k; ++c) {
      const double d = squared_distance(centers.row(c), x);
      if (d < best) {
        second = best;
        best = d;
        arg = c;
      } else if (d < second) {
        second = d;
      }
    }
    const bool changed = arg != r.assignment[i];
    r.assignment[i] = arg;
    dist[i] = best;
    upper[i] = std::sqrt(best);
    lower[i] = std::sqrt(second);
    return changed;
  };

  double cost = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    full_scan(i);
    cost += dist[i];
  }
  r.cost_trace.push_back(cost);

  Matrix previous;
  std::vector<double> half_gap(k);
  for (r.iterations = 0; r.iterations < max_iterations;) {
    previous = centers;
    Matrix sums(k, dim);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto s = sums.row(r.assignment[i]);
      const auto p = points.row(i);
      for (std::size_t d = 0; d < dim; ++d) s[d] += p[d];
      ++counts[r.assignment[i]];
    }
    std::vector<std::size_t> taken;
    for (std::size_t c = 0; c < k; ++c) {
      auto center = centers.row(c);
      if (counts[c] > 0) {
        const auto s = sums.row(c);
        for (std::size_t d = 0; d < dim; ++d) center[d] = s[d] / static_cast<double>(counts[c]);
        continue;
      }
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (std::find(taken.begin(), taken.end(), i) != taken.end()) continue;
        if (far == n || dist[i] > dist[far]) far = i;
      }
      taken.push_back(far);
      const auto p = points.row(far);
      std::copy(p.begin(), p.end(), center.begin());
    }
    ++r.iterations;

    std::vector<double> moved(k);
    std::size_t most = 0;
    for (std::size_t c = 0; c < k; ++c) {
      moved[c] = std::sqrt(squared_distance(previous.row(c), centers.row(c)));
      if (moved[c] > moved[most]) most = c;
    }
    double runner_up = 0.0;
    for (std::size_t c = 0; c < k; ++c)
      if (c != most) runner_up = std::max(runner_up, moved[c]);
    for (std::size_t c = 0; c < k; ++c) {
      double g = std::numeric_limits<double>::infinity();
      for (std::size_t o = 0; o < k; ++o)
        if (o != c) g = std::min(g, squared_distance(centers.row(c), centers.row(o)));
      half_gap[c] = 0.5 * std::sqrt(g);
    }

    bool changed = false;
    cost = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t a = r.assignment[i];
      upper[i] += moved[a];
      lower[i] -= a == most ? runner_up : moved[most];
      const double bound = std::max(half_gap[a], lower[i]);
      bool settled = upper[i] * (1.0 + kSlack) < bound;
      if (!settled) {
        dist[i] = squared_distance(points.row(i), centers.row(a));
        upper[i] = std::sqrt(dist[i]);
        settled = upper[i] * (1.0 + kSlack) < bound;
      }
      if (settled) {
        dist[i] = squared_distance(points.row(i), centers.row(a));
        upper[i] = std::sqrt(dist[i]);
      } else if (full_scan(i)) {
        changed = true;
      }
      cost += dist[i];
    }
    r.cost_trace.push_back(cost);
    if (!changed) {
      r.converged = true;
      break;
    }
  }
  r.cost = r.cost_trace.back();
  r.centers = std::move(centers);
  return r;
}

// Best of `restarts` seeded k-means++ / Lloyd runs (lowest cost; earliest run
// on ties). Restart i draws from rng stream i of `seed`.
inline KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, const KMeansOptions& opt = {}) {
  if (points.rows() < k) throw ValidationError("kmeans: fewer points than clusters");
  const std::size_t restarts = std::max<std::size_t>(1, opt.restarts);
  std::vector<KMeansResult> runs(restarts);
  const Rng root(seed);
  parallel_for(restarts, opt.threads, [&](std::size_t i) {
    Rng rng = root.split(i);
    runs[i] = lloyd(points, kmeanspp_init(points, k, rng), opt.max_iterations);
  });
  std::size_t best = 0;
  for (std::size_t i = 1; i < restarts; ++i)
    if (runs[i].cost < runs[best].cost) best = i;
  return std::move(runs[best]);
}

}  // namespace gaitforge::numerics
