#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gaitforge/core/error.hpp"
#include "gaitforge/core/parallel.hpp"
#include "gaitforge/io/binary.hpp"
#include "gaitforge/numerics/linear_svm.hpp"
#include "gaitforge/numerics/matrix.hpp"
#include "gaitforge/trajgait.hpp"

namespace gaitforge::recognition {

using numerics::Matrix;

inline constexpr std::string_view kModelMagic = "SGM1";
inline constexpr double kDefaultC = 1000.0;

enum class FeatureMode { eigengait, trajgait, trajgait_depth, trajgait_rgb, fused };

inline constexpr FeatureMode kAllModes[] = {FeatureMode::eigengait, FeatureMode::trajgait,
                                            FeatureMode::trajgait_depth, FeatureMode::trajgait_rgb,
                                            FeatureMode::fused};

inline std::string_view to_string(FeatureMode m) {
  switch (m) {
    case FeatureMode::eigengait: return "eigengait";
    case FeatureMode::trajgait: return "trajgait";
    case FeatureMode::trajgait_depth: return "trajgait-depth";
    case FeatureMode::trajgait_rgb: return "trajgait-rgb";
    case FeatureMode::fused: return "fused";
  }
  return "fused";
}

inline FeatureMode parse_mode(std::string_view s) {
  for (FeatureMode m : kAllModes)
    if (to_string(m) == s) return m;
  throw ValidationError("unknown mode '" + std::string(s) + "'");
}

inline bool uses_eigengait(FeatureMode m) { return m == FeatureMode::eigengait || m == FeatureMode::fused; }
inline bool uses_trajgait(FeatureMode m) { return m != FeatureMode::eigengait; }

inline trajgait::Channel channel_of(FeatureMode m) {
  if (m == FeatureMode::trajgait_depth) return trajgait::Channel::depth_only;
  if (m == FeatureMode::trajgait_rgb) return trajgait::Channel::spatial_only;
  return trajgait::Channel::full;
}

struct FusedFeature {
  std::vector<double> values;
  std::vector<std::size_t> block_dims;
};

inline double l1_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += std::abs(v);
  return s;
}

// Each block is scaled to unit L1 norm (all-zero blocks stay zero), the
// blocks are concatenated, and the result is scaled to unit L1 norm again.
inline FusedFeature fuse_blocks(std::span<const std::vector<double>> blocks) {
  FusedFeature f;
  for (const auto& b : blocks) {
    f.block_dims.push_back(b.size());
    const double n = l1_norm(b);
    for (double v : b) f.values.push_back(n > 0.0 ? v / n : 0.0);
  }
  const double total = l1_norm(f.values);
  if (!(total > 0.0)) throw ValidationError("fuse: every feature block is zero");
  for (double& v : f.values) v /= total;
  return f;
}

inline std::vector<double> as_doubles(const trajgait::TrajHistogram& h) {
  return {h.counts.begin(), h.counts.end()};
}

inline FusedFeature fuse(std::span<const double> eigengait, const trajgait::TrajHistogram& trajgait) {
  const std::vector<std::vector<double>> blocks{{eigengait.begin(), eigengait.end()}, as_doubles(trajgait)};
  return fuse_blocks(blocks);
}

struct ScoreVector {
  std::vector<double> values;
};

struct Classification {
  std::size_t index = 0;
  std::string subject_id;
  ScoreVector scores;
};

struct SubjectModel {
  std::vector<std::string> subject_ids;
  std::vector<numerics::LinearModel> models;  // one-vs-all, parallel to subject_ids
  std::vector<std::size_t> block_dims;
  std::uint64_t eigen_model_id = 0;
  std::uint64_t codebook_id = 0;

  std::size_t size() const noexcept { return subject_ids.size(); }
  std::size_t dimension() const noexcept { return models.empty() ? 0 : models.front().weights.size(); }
};

struct TrainOptions {
  double C = kDefaultC;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

// One-vs-all linear SVMs; labels[i] indexes subject_ids.
inline SubjectModel train(const Matrix& features, std::span<const std::size_t> labels,
                          std::vector<std::string> subject_ids, const TrainOptions& opt = {}) {
  const std::size_t n = subject_ids.size();
  if (n < 2) throw ValidationError("train: need at least 2 subjects");
  if (labels.size() != features.rows()) throw ValidationError("train: label count differs from feature count");
  std::vector<std::size_t> per_subject(n, 0);
  for (std::size_t l : labels) {
    if (l >= n) throw ValidationError("train: label out of range");
    ++per_subject[l];
  }
  for (std::size_t i = 0; i < n; ++i)
    if (per_subject[i] == 0) throw ValidationError("train: subject '" + subject_ids[i] + "' has no training samples");

  SubjectModel m;
  m.subject_ids = std::move(subject_ids);
  m.models.resize(n);
  const Rng root(opt.seed);
  parallel_for(n, opt.threads, [&](std::size_t s) {
    std::vector<int> y(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) y[i] = labels[i] == s ? 1 : -1;
    numerics::SvmOptions so;
    so.C = opt.C;
    so.seed = root.split(s).seed();
    m.models[s] = numerics::train_linear_svm(features, y, so);
  });
  return m;
}

inline ScoreVector scores(const SubjectModel& m, std::span<const double> feature) {
  if (feature.size() != m.dimension())
    throw ValidationError("classify: feature dimension " + std::to_string(feature.size()) + ", model expects " +
                          std::to_string(m.dimension()));
  ScoreVector s;
  s.values.reserve(m.size());
  for (const auto& lm : m.models) s.values.push_back(numerics::decision_value(lm, feature));
  return s;
}

// Argmax of the one-vs-all decision values; ties go to the lowest index.
inline std::size_t argmax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

inline Classification classify(const SubjectModel& m, std::span<const double> feature) {
  Classification c;
  c.scores = scores(m, feature);
  c.index = argmax(c.scores.values);
  c.subject_id = m.subject_ids[c.index];
  return c;
}

// SGM1: magic; n, feature dimension, block count and block dims as f64;
// per subject the weights then the bias (f64); eigen-model and codebook
// hashes as u64 (0 = unused); subject ids as length-prefixed strings.
inline std::vector<unsigned char> serialize(const SubjectModel& m) {
  io::BlobWriter w;
  w.magic(kModelMagic);
  w.f64(static_cast<double>(m.size()));
  w.f64(static_cast<double>(m.dimension()));
  w.f64(static_cast<double>(m.block_dims.size()));
  for (std::size_t d : m.block_dims) w.f64(static_cast<double>(d));
  for (const auto& lm : m.models) {
    w.f64s(lm.weights);
    w.f64(lm.bias);
  }
  w.u64(m.eigen_model_id);
  w.u64(m.codebook_id);
  for (const auto& id : m.subject_ids) w.str(id);
  return w.take();
}

inline SubjectModel deserialize_subject_model(std::span<const unsigned char> bytes, const std::string& name = "SGM1 blob",
                                              double c = kDefaultC) {
  io::BlobReader r(bytes, name);
  r.expect_magic(kModelMagic);
  const std::size_t n = r.count("subject count", 1 << 20);
  const std::size_t dim = r.count("feature dimension", 1 << 24);
  const std::size_t blocks = r.count("block count", 16);
  if (n < 2 || dim == 0) throw FormatError(name + ": degenerate subject model");
  SubjectModel m;
  std::size_t sum = 0;
  for (std::size_t i = 0; i < blocks; ++i) {
    m.block_dims.push_back(r.count("block dimension", dim));
    sum += m.block_dims.back();
  }
  if (sum != dim) throw FormatError(name + ": block dims do not add up to the feature dimension");
  m.models.resize(n);
  for (auto& lm : m.models) {
    lm.weights = r.f64s(dim);
    lm.bias = r.f64();
    lm.C = c;
  }
  m.eigen_model_id = r.u64();
  m.codebook_id = r.u64();
  for (std::size_t i = 0; i < n; ++i) m.subject_ids.push_back(r.str());
  r.expect_end();
  return m;
}

}  // namespace gaitforge::recognition
