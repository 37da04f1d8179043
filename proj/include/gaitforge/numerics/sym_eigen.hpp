#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "gaitforge/core/error.hpp"
#include "gaitforge/numerics/matrix.hpp"

namespace gaitforge::numerics {

// Symmetric matrix stored as packed upper triangle (row-major).
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(std::size_t dim) : dim_(dim), packed_(dim * (dim + 1) / 2, 0.0) {}

  std::size_t dim() const noexcept { return dim_; }

  double operator()(std::size_t i, std::size_t j) const { return packed_[offset(i, j)]; }
  double& at(std::size_t i, std::size_t j) { return packed_[offset(i, j)]; }

  // Adds scale * x x^T.
  void add_outer(std::span<const double> x, double scale = 1.0) {
    for (std::size_t i = 0; i < dim_; ++i) {
      const double xi = scale * x[i];
      double* row = packed_.data() + offset(i, i);
      for (std::size_t j = i; j < dim_; ++j) row[j - i] += xi * x[j];
    }
  }

  void scale(double s) {
    for (double& v : packed_) v *= s;
  }

  Matrix dense() const {
    Matrix m(dim_, dim_);
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t j = i; j < dim_; ++j) m(i, j) = m(j, i) = (*this)(i, j);
    return m;
  }

  double frobenius() const {
    double s = 0.0;
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t j = 0; j < dim_; ++j) s += (*this)(i, j) * (*this)(i, j);
    return std::sqrt(s);
  }

  bool finite() const {
    return std::all_of(packed_.begin(), packed_.end(), [](double v) { return std::isfinite(v); });
  }

 private:
  std::size_t offset(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    return i * dim_ - i * (i - 1) / 2 + (j - i);
  }

  std::size_t dim_ = 0;
  std::vector<double> packed_;
};

struct EigenDecomposition {
  std::vector<double> values;  // descending
  Matrix vectors;              // row i is the unit eigenvector for values[i]
};

namespace detail {

// Householder reduction to tridiagonal form (EISPACK tred2 lineage). On
// return v holds the accumulated orthogonal transform, d the diagonal and e
// the sub-diagonal.
inline void tridiagonalize(std::vector<std::vector<double>>& v, std::vector<double>& d, std::vector<double>& e) {
  const std::size_t n = d.size();
  for (std::size_t j = 0; j < n; ++j) d[j] = v[n - 1][j];

  for (std::size_t i = n - 1; i > 0; --i) {
    double scale = 0.0;
    double h = 0.0;
    for (std::size_t k = 0; k < i; ++k) scale += std::abs(d[k]);
    if (scale == 0.0) {
      e[i] = d[i - 1];
      for (std::size_t j = 0; j < i; ++j) {
        d[j] = v[i - 1][j];
        v[i][j] = 0.0;
        v[j][i] = 0.0;
      }
    } else {
      for (std::size_t k = 0; k < i; ++k) {
        d[k] /= scale;
        h += d[k] * d[k];
      }
      double f = d[i - 1];
      double g = std::sqrt(h);
      if (f > 0) g = -g;
      e[i] = scale * g;
      h -= f * g;
      d[i - 1] = f - g;
      for (std::size_t j = 0; j < i; ++j) e[j] = 0.0;

      for (std::size_t j = 0; j < i; ++j) {
        f = d[j];
        v[j][i] = f;
        g = e[j] + v[j][j] * f;
        for (std::size_t k = j + 1; k <= i - 1; ++k) {
          g += v[k][j] * d[k];
          e[k] += v[k][j] * f;
        }
        e[j] = g;
      }
      f = 0.0;
      for (std::size_t j = 0; j < i; ++j) {
        e[j] /= h;
        f += e[j] * d[j];
      }
      const double hh = f / (h + h);
      for (std::size_t j = 0; j < i; ++j) e[j] -= hh * d[j];
      for (std::size_t j = 0; j < i; ++j) {
        f = d[j];
        g = e[j];
        for (std::size_t k = j; k <= i - 1; ++k) v[k][j] -= (f * e[k] + g * d[k]);
        d[j] = v[i - 1][j];
        v[i][j] = 0.0;
      }
    }
    d[i] = h;
  }

  for (std::size_t i = 0; i + 1 < n; ++i) {
    v[n - 1][i] = v[i][i];
    v[i][i] = 1.0;
    const double h = d[i + 1];
    if (h != 0.0) {
      for (std::size_t k = 0; k <= i; ++k) d[k] = v[k][i + 1] / h;
      for (std::size_t j = 0; j <= i; ++j) {
        double g = 0.0;
        for (std::size_t k = 0; k <= i; ++k) g += v[k][i + 1] * v[k][j];
        for (std::size_t k = 0; k <= i; ++k) v[k][j] -= g * d[k];
      }
    }
    for (std::size_t k = 0; k <= i; ++k) v[k][i + 1] = 0.0;
  }
  for (std::size_t j = 0; j < n; ++j) {
    d[j] = v[n - 1][j];
    v[n - 1][j] = 0.0;
  }
  v[n - 1][n - 1] = 1.0;
  e[0] = 0.0;
}

// Implicit-shift QL on the tridiagonal form (EISPACK tql2 lineage).
inline void tridiagonal_ql(std::vector<std::vector<double>>& v, std::vector<double>& d, std::vector<double>& e) {
  const std::size_t n = d.size();
  for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;

  double f = 0.0;
  double tst1 = 0.0;
  const double eps = std::ldexp(1.0, -52);
  for (std::size_t l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
    std::size_t m = l;
    while (m < n) {
      if (std::abs(e[m]) <= eps * tst1) break;
      ++m;
    }
    if (m > l) {
      int iter = 0;
      do {
        if (++iter > 60) throw Error("sym_eigen: QL iteration did not converge");
        double g = d[l];
        double p = (d[l + 1] - g) / (2.0 * e[l]);
        double r = std::hypot(p, 1.0);
        if (p < 0) r = -r;
        d[l] = e[l] / (p + r);
        d[l + 1] = e[l] * (p + r);
        const double dl1 = d[l + 1];
        double h = g - d[l];
        for (std::size_t i = l + 2; i < n; ++i) d[i] -= h;
        f += h;

        p = d[m];
        double c = 1.0;
        double c2 = c;
        double c3 = c;
        const double el1 = e[l + 1];
        double s = 0.0;
        double s2 = 0.0;
        for (std::size_t ii = m; ii-- > l;) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e[ii];
          h = c * p;
          r = std::hypot(p, e[ii]);
          e[ii + 1] = s * r;
          s = e[ii] / r;
          c = p / r;
          p = c * d[ii] - s * g;
          d[ii + 1] = h + s * (c * g + s * d[ii]);
          for (std::size_t k = 0; k < n; ++k) {
            h = v[k][ii + 1];
            v[k][ii + 1] = s * v[k][ii] + c * h;
            v[k][ii] = c * v[k][ii] - s * h;
          }
        }
        p = -s * s2 * c3 * el1 * e[l] / dl1;
        e[l] = s * p;
        d[l] = c * p;
      } while (std::abs(e[l]) > eps * tst1);
    }
    d[l] += f;
    e[l] = 0.0;
  }
}

}  // namespace detail

// Flips v so that its largest-magnitude component (first one on ties) is positive.
inline void fix_sign(std::span<double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (std::abs(v[i]) > std::abs(v[best])) best = i;
  if (!v.empty() && v[best] < 0)
    for (double& x : v) x = -x;
}

// Full eigendecomposition of a symmetric matrix: Householder tridiagonalization
// followed by implicit QL. Eigenvalues descending, eigenvectors sign-normalized.
inline EigenDecomposition sym_eigen(const SymmetricMatrix& a) {
  if (!a.finite()) throw ValidationError("sym_eigen: non-finite matrix entry");
  const std::size_t n = a.dim();
  EigenDecomposition out;
  if (n == 0) return out;

  std::vector<std::vector<double>> v(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) v[i][j] = a(i, j);
  std::vector<double> d(n);
  std::vector<double> e(n);
  detail::tridiagonalize(v, d, e);
  detail::tridiagonal_ql(v, d, e);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return d[x] > d[y]; });

  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t c = order[r];
    out.values[r] = d[c];
    auto row = out.vectors.row(r);
    for (std::size_t k = 0; k < n; ++k) row[k] = v[k][c];
    fix_sign(row);
  }
  return out;
}

}  // namespace gaitforge::numerics
