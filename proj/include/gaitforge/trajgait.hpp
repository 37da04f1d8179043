#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gaitforge/core/error.hpp"
#include "gaitforge/core/hash.hpp"
#include "gaitforge/core/rng.hpp"
#include "gaitforge/io/binary.hpp"
#include "gaitforge/numerics/kmeans.hpp"
#include "gaitforge/numerics/matrix.hpp"
#include "gaitforge/rgbd/tracking.hpp"

// Trajectory descriptors, codebook learning and bag-of-words encoding.

namespace gaitforge::trajgait {

using numerics::Matrix;

inline constexpr std::string_view kCodebookMagic = "TGC1";
inline constexpr std::size_t kDefaultCodebookSize = 1024;

// Which descriptor blocks are kept. The dropped block is zeroed before the
// codebook is fitted, so every variant learns its own codebook.
enum class Channel { full, depth_only, spatial_only };

inline std::string_view to_string(Channel c) {
  switch (c) {
    case Channel::full: return "full";
    case Channel::depth_only: return "depth_only";
    case Channel::spatial_only: return "spatial_only";
  }
  return "full";
}

// Layout: [dx_1..dx_L, dy_1..dy_L, dz_1..dz_L]. The (dx, dy) block is divided
// by the sum of step lengths, the dz block by the sum of |dz|.
inline std::vector<double> describe(const rgbd::Trajectory3D& traj, std::size_t length) {
  if (length == 0 || traj.points.size() != length + 1)
    throw ValidationError("describe: trajectory has " + std::to_string(traj.points.size()) + " points, expected " +
                          std::to_string(length + 1));
  const std::size_t L = length;
  std::vector<double> d(3 * L);
  double spatial = 0.0;
  double depth = 0.0;
  for (std::size_t t = 0; t < L; ++t) {
    const auto& a = traj.points[t];
    const auto& b = traj.points[t + 1];
    d[t] = b.x - a.x;
    d[L + t] = b.y - a.y;
    d[2 * L + t] = b.z - a.z;
    spatial += std::hypot(d[t], d[L + t]);
    depth += std::abs(d[2 * L + t]);
  }
  for (std::size_t t = 0; t < 2 * L; ++t) d[t] = spatial > 0.0 ? d[t] / spatial : 0.0;
  for (std::size_t t = 2 * L; t < 3 * L; ++t) d[t] = depth > 0.0 ? d[t] / depth : 0.0;
  return d;
}

inline void restrict_channel(std::span<double> descriptor, Channel c) {
  const std::size_t L = descriptor.size() / 3;
  if (c == Channel::depth_only) std::fill(descriptor.begin(), descriptor.begin() + 2 * L, 0.0);
  if (c == Channel::spatial_only) std::fill(descriptor.begin() + 2 * L, descriptor.end(), 0.0);
}

// All descriptors of one RGBD sample, one per row.
struct DescriptorSet {
  std::string sample_id;
  Matrix rows;
  std::size_t size() const noexcept { return rows.rows(); }
};

inline DescriptorSet describe_all(std::string sample_id, std::span<const rgbd::Trajectory3D> tracks,
                                  std::size_t length) {
  DescriptorSet s{std::move(sample_id), Matrix(0, 3 * length)};
  s.rows.reserve_rows(tracks.size());
  for (const auto& t : tracks) s.rows.push_row(describe(t, length));
  return s;
}

inline DescriptorSet restrict_channel(const DescriptorSet& s, Channel c) {
  DescriptorSet out = s;
  if (c == Channel::full) return out;
  for (std::size_t i = 0; i < out.rows.rows(); ++i) restrict_channel(out.rows.row(i), c);
  return out;
}

struct Codebook {
  Matrix centers;  // K x 3L
  std::uint64_t seed = 0;
  double cost = 0.0;                           // within-cluster sum of squares
  std::vector<std::string> training_sources;  // sample ids; not serialized
  std::uint64_t id = 0;                        // hash of the TGC1 encoding

  std::size_t size() const noexcept { return centers.rows(); }
  std::size_t dimension() const noexcept { return centers.cols(); }
};

inline std::vector<unsigned char> serialize(const Codebook& cb);

struct CodebookOptions {
  std::size_t per_sample_cap = 1000;
  std::size_t pool_cap = 1000000;
  std::size_t restarts = 10;
  std::size_t max_iterations = 100;
  std::size_t threads = 1;
};

// Pools up to per_sample_cap descriptors from each training sample (uniform
// without replacement), caps the pool, and keeps the cheapest of the k-means
// restarts.
inline Codebook fit_codebook(std::span<const DescriptorSet> training, std::size_t k, std::uint64_t seed,
                             const CodebookOptions& opt = {}) {
  if (k < 2) throw ValidationError("fit_codebook: K must be at least 2");
  const Rng root(seed);
  std::size_t dim = 0;
  for (const auto& s : training)
    if (s.size() > 0) {
      if (dim == 0) dim = s.rows.cols();
      if (s.rows.cols() != dim) throw ValidationError("fit_codebook: descriptor length differs across samples");
    }
  Matrix pool(0, dim);
  Codebook cb;
  for (std::size_t si = 0; si < training.size(); ++si) {
    const DescriptorSet& s = training[si];
    cb.training_sources.push_back(s.sample_id);
    std::vector<std::size_t> idx(s.size());
    std::iota(idx.begin(), idx.end(), 0);
    if (idx.size() > opt.per_sample_cap) {
      Rng rng = root.split(s.sample_id);
      rng.shuffle(std::span<std::size_t>(idx));
      idx.resize(opt.per_sample_cap);
      std::sort(idx.begin(), idx.end());
    }
    for (std::size_t i : idx) pool.push_row(s.rows.row(i));
  }
  if (pool.rows() > opt.pool_cap) {
    std::vector<std::size_t> idx(pool.rows());
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng = root.split("pool");
    rng.shuffle(std::span<std::size_t>(idx));
    idx.resize(opt.pool_cap);
    std::sort(idx.begin(), idx.end());
    Matrix capped(0, dim);
    capped.reserve_rows(idx.size());
    for (std::size_t i : idx) capped.push_row(pool.row(i));
    pool = std::move(capped);
  }
  if (pool.rows() < k)
    throw ValidationError("fit_codebook: only " + std::to_string(pool.rows()) + " descriptors pooled for K=" +
                          std::to_string(k));
  numerics::KMeansOptions ko;
  ko.restarts = opt.restarts;
  ko.max_iterations = opt.max_iterations;
  ko.threads = opt.threads;
  numerics::KMeansResult r = numerics::kmeans(pool, k, root.split("kmeans").seed(), ko);
  cb.centers = std::move(r.centers);
  cb.cost = r.cost;
  cb.seed = seed;
  cb.id = fnv1a(serialize(cb));
  return cb;
}

// Hard-assignment histogram. An empty descriptor set yields all zeros.
struct TrajHistogram {
  std::vector<std::uint64_t> counts;
  std::uint64_t codebook_id = 0;

  std::uint64_t total() const { return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}); }
  bool empty() const { return total() == 0; }
};

inline TrajHistogram encode(const Matrix& descriptors, const Codebook& cb) {
  if (descriptors.rows() > 0 && descriptors.cols() != cb.dimension())
    throw ValidationError("encode: descriptor length " + std::to_string(descriptors.cols()) +
                          " does not match codebook dimension " + std::to_string(cb.dimension()));
  TrajHistogram h;
  h.counts.assign(cb.size(), 0);
  h.codebook_id = cb.id;
  for (std::size_t i = 0; i < descriptors.rows(); ++i) ++h.counts[numerics::nearest_center(cb.centers, descriptors.row(i)).index];
  return h;
}

inline TrajHistogram encode(const DescriptorSet& s, const Codebook& cb) { return encode(s.rows, cb); }

// TGC1: magic, K and dimension as little-endian f64, seed as u64, then the
// centers row-major as f64.
inline std::vector<unsigned char> serialize(const Codebook& cb) {
  io::BlobWriter w;
  w.magic(kCodebookMagic);
  w.f64(static_cast<double>(cb.size()));
  w.f64(static_cast<double>(cb.dimension()));
  w.u64(cb.seed);
  w.f64s(cb.centers.data());
  return w.take();
}

inline Codebook deserialize_codebook(std::span<const unsigned char> bytes, const std::string& name = "TGC1 blob") {
  io::BlobReader r(bytes, name);
  r.expect_magic(kCodebookMagic);
  const std::size_t k = r.count("K", 1 << 24);
  const std::size_t dim = r.count("dimension", 1 << 16);
  if (k < 2 || dim == 0) throw FormatError(name + ": degenerate codebook");
  Codebook cb;
  cb.seed = r.u64();
  cb.centers = Matrix(k, dim);
  cb.centers.data() = r.f64s(k * dim);
  r.expect_end();
  cb.id = fnv1a(bytes);
  return cb;
}

}  // namespace gaitforge::trajgait
