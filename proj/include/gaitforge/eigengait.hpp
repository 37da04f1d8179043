#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "gaitforge/core/error.hpp"
#include "gaitforge/core/hash.hpp"
#include "gaitforge/datamodel.hpp"
#include "gaitforge/io/binary.hpp"
#include "gaitforge/numerics/matrix.hpp"
#include "gaitforge/numerics/sym_eigen.hpp"

// Eigenspace of gait-curve differences, and projection of step windows onto it.

namespace gaitforge::eigengait {

inline constexpr double kDefaultEnergyFraction = 0.85;
inline constexpr std::string_view kModelMagic = "EGM1";

struct EigenGaitModel {
  std::vector<double> overall_mean;  // mean of the per-subject means
  numerics::Matrix eigenvectors;     // r x D, orthonormal rows
  std::vector<double> eigenvalues;   // r, descending, >= 0
  double total_energy = 0.0;         // sum of all (clamped) eigenvalues
  double energy_fraction = kDefaultEnergyFraction;
  int steps = 0;
  std::vector<std::string> training_sources;  // window provenance; not serialized
  std::uint64_t id = 0;                        // hash of the EGM1 encoding

  std::size_t dimension() const noexcept { return overall_mean.size(); }
  std::size_t rank() const noexcept { return eigenvalues.size(); }
};

inline std::vector<unsigned char> serialize(const EigenGaitModel& m);

struct EigenGaitFeature {
  std::vector<double> coeffs;
  std::uint64_t model_id = 0;
};

using WindowsBySubject = std::map<std::string, std::vector<StepWindow>>;

inline std::vector<double> subject_mean(std::span<const StepWindow> windows) {
  if (windows.empty()) throw ValidationError("subject_mean: no windows");
  const std::size_t d = windows.front().samples.size();
  std::vector<double> mean(d, 0.0);
  for (const StepWindow& w : windows) {
    if (w.samples.size() != d) throw ValidationError("subject_mean: windows differ in length");
    for (std::size_t i = 0; i < d; ++i) mean[i] += w.samples[i];
  }
  for (double& v : mean) v /= static_cast<double>(windows.size());
  return mean;
}

// Minimal r whose leading eigenvalue sum reaches `fraction` of the total.
// A relative slack of 1e-12 absorbs round-off when eigenvalues are equal.
inline std::size_t retained_rank(std::span<const double> eigenvalues, double fraction) {
  double total = 0.0;
  for (double v : eigenvalues) total += v;
  const double target = fraction * total * (1.0 - 1e-12);
  double acc = 0.0;
  for (std::size_t r = 0; r < eigenvalues.size(); ++r) {
    acc += eigenvalues[r];
    if (acc >= target) return r + 1;
  }
  return std::max<std::size_t>(1, eigenvalues.size());
}

// Covariance of every training window about the overall mean of subject means.
inline numerics::SymmetricMatrix difference_covariance(const WindowsBySubject& by_subject,
                                                       std::span<const double> overall_mean) {
  const std::size_t d = overall_mean.size();
  numerics::SymmetricMatrix cov(d);
  std::size_t count = 0;
  std::vector<double> diff(d);
  for (const auto& [subject, windows] : by_subject)
    for (const StepWindow& w : windows) {
      for (std::size_t i = 0; i < d; ++i) diff[i] = w.samples[i] - overall_mean[i];
      cov.add_outer(diff);
      ++count;
    }
  cov.scale(1.0 / static_cast<double>(count));
  return cov;
}

// Fits the eigenspace. Covariance is accumulated over individual windows'
// differences from the overall mean, so the rank is not capped at N-1.
inline EigenGaitModel fit(const WindowsBySubject& by_subject, double energy_fraction = kDefaultEnergyFraction) {
  if (by_subject.size() < 2) throw ValidationError("eigengait fit: need at least 2 subjects");
  if (!(energy_fraction > 0.0 && energy_fraction <= 1.0))
    throw ValidationError("eigengait fit: energy fraction must be in (0, 1]");

  EigenGaitModel m;
  m.energy_fraction = energy_fraction;
  std::size_t d = 0;
  std::vector<double> overall;
  for (const auto& [subject, windows] : by_subject) {
    if (windows.empty()) throw ValidationError("eigengait fit: subject '" + subject + "' has no windows");
    const std::vector<double> mean = subject_mean(windows);
    if (d == 0) {
      d = mean.size();
      overall.assign(d, 0.0);
      m.steps = windows.front().steps;
    }
    if (mean.size() != d) throw ValidationError("eigengait fit: window length differs across subjects");
    for (std::size_t i = 0; i < d; ++i) overall[i] += mean[i];
    for (const StepWindow& w : windows) m.training_sources.push_back(w.source_curve_id);
  }
  if (d == 0) throw ValidationError("eigengait fit: empty windows");
  for (double& v : overall) v /= static_cast<double>(by_subject.size());

  const numerics::SymmetricMatrix cov = difference_covariance(by_subject, overall);
  numerics::EigenDecomposition eig = numerics::sym_eigen(cov);
  for (double& v : eig.values) v = std::max(v, 0.0);

  m.total_energy = 0.0;
  for (double v : eig.values) m.total_energy += v;
  const std::size_t r = retained_rank(eig.values, energy_fraction);
  m.eigenvalues.assign(eig.values.begin(), eig.values.begin() + static_cast<std::ptrdiff_t>(r));
  m.eigenvectors = numerics::Matrix(r, d);
  for (std::size_t i = 0; i < r; ++i) {
    const auto src = eig.vectors.row(i);
    std::copy(src.begin(), src.end(), m.eigenvectors.row(i).begin());
  }
  m.overall_mean = std::move(overall);
  m.id = fnv1a(serialize(m));
  return m;
}

inline EigenGaitFeature project(const EigenGaitModel& m, std::span<const double> window) {
  if (window.size() != m.dimension())
    throw ValidationError("eigengait project: expected length " + std::to_string(m.dimension()) + ", got " +
                          std::to_string(window.size()));
  std::vector<double> centered(window.size());
  for (std::size_t i = 0; i < window.size(); ++i) centered[i] = window[i] - m.overall_mean[i];
  EigenGaitFeature f;
  f.coeffs.resize(m.rank());
  for (std::size_t i = 0; i < m.rank(); ++i) f.coeffs[i] = numerics::dot(m.eigenvectors.row(i), centered);
  f.model_id = m.id;
  return f;
}

inline EigenGaitFeature project(const EigenGaitModel& m, const StepWindow& w) { return project(m, w.samples); }

// EGM1: magic, then little-endian f64 fields: dimension, r, mean[D],
// eigenvalues[r], eigenvectors[r][D] row-major.
inline std::vector<unsigned char> serialize(const EigenGaitModel& m) {
  io::BlobWriter w;
  w.magic(kModelMagic);
  w.f64(static_cast<double>(m.dimension()));
  w.f64(static_cast<double>(m.rank()));
  w.f64s(m.overall_mean);
  w.f64s(m.eigenvalues);
  w.f64s(m.eigenvectors.data());
  return w.take();
}

inline EigenGaitModel deserialize(std::span<const unsigned char> bytes, const std::string& name = "EGM1 blob") {
  io::BlobReader r(bytes, name);
  r.expect_magic(kModelMagic);
  EigenGaitModel m;
  const std::size_t d = r.count("dimension", 1 << 20);
  const std::size_t rank = r.count("rank", d);
  if (d == 0 || rank == 0) throw FormatError(name + ": empty model");
  m.overall_mean = r.f64s(d);
  m.eigenvalues = r.f64s(rank);
  m.eigenvectors = numerics::Matrix(rank, d);
  m.eigenvectors.data() = r.f64s(rank * d);
  r.expect_end();
  m.steps = static_cast<int>(d / kSamplesPerStep);
  m.total_energy = 0.0;  // not persisted
  m.id = fnv1a(bytes);
  return m;
}

}  // namespace gaitforge::eigengait
