#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gaitforge/accel.hpp"
#include "gaitforge/core/error.hpp"
#include "gaitforge/core/hash.hpp"
#include "gaitforge/core/parallel.hpp"
#include "gaitforge/core/rng.hpp"
#include "gaitforge/eigengait.hpp"
#include "gaitforge/eval/metrics.hpp"
#include "gaitforge/eval/split.hpp"
#include "gaitforge/eval/synth.hpp"
#include "gaitforge/io/manifest.hpp"
#include "gaitforge/recognition.hpp"
#include "gaitforge/rgbd/flow.hpp"
#include "gaitforge/rgbd/tracking.hpp"
#include "gaitforge/trajgait.hpp"

// Feature extraction, per-split training and the accuracy / covariate / ROC
// protocol.

namespace gaitforge::eval {

using numerics::Matrix;
using recognition::FeatureMode;

struct PipelineConfig {
  FeatureMode mode = FeatureMode::fused;
  int steps = 2;
  std::size_t K = trajgait::kDefaultCodebookSize;
  std::size_t L = rgbd::kDefaultTrackLength;
  double C = recognition::kDefaultC;
  double energy = eigengait::kDefaultEnergyFraction;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  trajgait::CodebookOptions codebook;
  rgbd::PyramidalFlowOptions flow;
  std::size_t roi_margin = 24;

  void validate() const {
    if (steps < kMinSteps || steps > kMaxSteps) throw ValidationError("steps must be in [1, 8]");
    if (K < 2) throw ValidationError("K must be at least 2");
    if (L < 1 || L > 100) throw ValidationError("L must be in [1, 100]");
    if (!(C > 0.0)) throw ValidationError("C must be positive");
    if (!(energy > 0.0 && energy <= 1.0)) throw ValidationError("energy fraction must be in (0, 1]");
  }
};

// Label-free per-sample features, extracted once and reused by every split.
struct SampleData {
  std::string id;
  std::size_t subject = 0;
  Pace pace = Pace::unknown;
  Covariate covariate = Covariate::none;
  std::vector<StepWindow> windows;
  trajgait::DescriptorSet descriptors;
  bool has_accel = false;
  bool has_rgbd = false;
};

struct LabeledDataset {
  std::vector<std::string> subject_ids;
  std::vector<SampleData> samples;

  std::vector<std::size_t> labels() const {
    std::vector<std::size_t> l;
    l.reserve(samples.size());
    for (const auto& s : samples) l.push_back(s.subject);
    return l;
  }
};

inline std::vector<StepWindow> accel_windows(const std::vector<AccelSample>& samples, const std::string& id, int steps) {
  if (samples.empty()) return {};
  const GaitCurve curve = accel::make_curve(samples, id);
  const auto points = accel::partition_steps(curve);
  return accel::extract_windows(curve, points, steps);
}

inline SampleData extract_sample(std::string id, const std::vector<AccelSample>& accel,
                                 const std::vector<RgbdFrame>& frames, const PipelineConfig& cfg,
                                 const rgbd::MotionEstimator& estimator) {
  SampleData d;
  d.id = std::move(id);
  d.has_accel = !accel.empty();
  d.has_rgbd = !frames.empty();
  if (recognition::uses_eigengait(cfg.mode)) d.windows = accel_windows(accel, d.id, cfg.steps);
  d.descriptors = {d.id, Matrix(0, 3 * cfg.L)};
  if (recognition::uses_trajgait(cfg.mode) && !frames.empty()) {
    rgbd::SequenceOptions so;
    so.tracker.length = cfg.L;
    so.roi_margin = cfg.roi_margin;
    const auto tracks = rgbd::track_sequence(frames, estimator, so);
    d.descriptors = trajgait::describe_all(d.id, tracks, cfg.L);
  }
  return d;
}

inline LabeledDataset extract_manifest(const io::DatasetManifest& m, const PipelineConfig& cfg) {
  cfg.validate();
  LabeledDataset ds;
  struct Ref {
    std::size_t subject;
    const io::SampleRecord* record;
  };
  std::vector<Ref> refs;
  for (std::size_t s = 0; s < m.subjects.size(); ++s) {
    ds.subject_ids.push_back(m.subjects[s].id);
    for (const auto& r : m.subjects[s].samples) refs.push_back({s, &r});
  }
  ds.samples.resize(refs.size());
  const rgbd::PyramidalFlow estimator(cfg.flow);
  parallel_for(refs.size(), resolve_threads(cfg.threads), [&](std::size_t i) {
    const io::SampleRecord& r = *refs[i].record;
    const auto accel = recognition::uses_eigengait(cfg.mode) ? io::load_sample_accel(m.root, r) : std::vector<AccelSample>{};
    const auto frames =
        recognition::uses_trajgait(cfg.mode) ? io::load_rgbd_sequence(m.root, r) : std::vector<RgbdFrame>{};
    SampleData d = extract_sample(r.id, accel, frames, cfg, estimator);
    d.subject = refs[i].subject;
    d.pace = r.pace;
    d.covariate = r.covariate;
    ds.samples[i] = std::move(d);
  });
  return ds;
}

// Renders and extracts in memory; nothing is written to disk.
inline LabeledDataset extract_synthetic(const synth::SyntheticDataset& data, const PipelineConfig& cfg) {
  cfg.validate();
  LabeledDataset ds;
  for (const auto& p : data.profiles) ds.subject_ids.push_back(p.id);
  ds.samples.resize(data.specs.size());
  const rgbd::PyramidalFlow estimator(cfg.flow);
  parallel_for(data.specs.size(), resolve_threads(cfg.threads), [&](std::size_t i) {
    const synth::SyntheticSample s = data.render(i);
    SampleData d = extract_sample(s.spec.id, s.accel, s.frames, cfg, estimator);
    d.subject = s.spec.subject;
    d.pace = s.spec.pace;
    d.covariate = s.spec.covariate;
    ds.samples[i] = std::move(d);
  });
  return ds;
}

// Everything fitted on training data that maps a sample to a feature vector.
struct FeatureSpace {
  FeatureMode mode = FeatureMode::fused;
  std::size_t L = rgbd::kDefaultTrackLength;
  std::optional<eigengait::EigenGaitModel> eigen;
  std::optional<trajgait::Codebook> codebook;

  std::vector<std::size_t> block_dims() const {
    std::vector<std::size_t> dims;
    if (eigen) dims.push_back(eigen->rank());
    if (codebook) dims.push_back(codebook->size());
    return dims;
  }
};

// Codebooks keyed by training set, channel, K and seed, so runs that share a
// training partition (different modes, label permutations) fit once.
class CodebookCache {
 public:
  template <typename Fit>
  trajgait::Codebook get(std::uint64_t key, Fit&& fit) {
    {
      std::lock_guard lock(mutex_);
      if (auto it = entries_.find(key); it != entries_.end()) return it->second;
    }
    trajgait::Codebook cb = fit();
    std::lock_guard lock(mutex_);
    return entries_.emplace(key, std::move(cb)).first->second;
  }

 private:
  std::mutex mutex_;
  std::map<std::uint64_t, trajgait::Codebook> entries_;
};

inline FeatureSpace fit_feature_space(const LabeledDataset& ds, std::span<const std::size_t> train,
                                      const PipelineConfig& cfg, CodebookCache* cache = nullptr) {
  FeatureSpace fs;
  fs.mode = cfg.mode;
  fs.L = cfg.L;
  const Rng root(cfg.seed);
  if (recognition::uses_eigengait(cfg.mode)) {
    eigengait::WindowsBySubject by_subject;
    for (std::size_t i : train) {
      const SampleData& s = ds.samples[i];
      if (s.windows.empty()) continue;
      auto& dst = by_subject[ds.subject_ids[s.subject]];
      dst.insert(dst.end(), s.windows.begin(), s.windows.end());
    }
    if (by_subject.size() < 2) throw ValidationError("training data has step windows for fewer than 2 subjects");
    fs.eigen = eigengait::fit(by_subject, cfg.energy);
  }
  if (recognition::uses_trajgait(cfg.mode)) {
    const trajgait::Channel channel = recognition::channel_of(cfg.mode);
    const std::uint64_t seed = root.split("codebook").seed();
    auto fit = [&] {
      std::vector<trajgait::DescriptorSet> sets;
      sets.reserve(train.size());
      for (std::size_t i : train) sets.push_back(trajgait::restrict_channel(ds.samples[i].descriptors, channel));
      trajgait::CodebookOptions opt = cfg.codebook;
      return trajgait::fit_codebook(sets, cfg.K, seed, opt);
    };
    if (cache) {
      std::uint64_t key = fnv1a(trajgait::to_string(channel));
      for (std::size_t i : train) key = fnv1a(ds.samples[i].id + '\n', key);
      key = splitmix64(key ^ splitmix64(cfg.K) ^ splitmix64(seed + cfg.L));
      fs.codebook = cache->get(key, fit);
    } else {
      fs.codebook = fit();
    }
  }
  return fs;
}

// Fused (or single-block) feature; nullopt when every block is zero. The
// EigenGait block projects the mean of the sample's step windows.
inline std::optional<std::vector<double>> sample_feature(const FeatureSpace& fs, const SampleData& s) {
  std::vector<std::vector<double>> blocks;
  if (fs.eigen) {
    if (s.windows.empty()) blocks.emplace_back(fs.eigen->rank(), 0.0);
    else blocks.push_back(eigengait::project(*fs.eigen, eigengait::subject_mean(s.windows)).coeffs);
  }
  if (fs.codebook) {
    const auto restricted = trajgait::restrict_channel(s.descriptors, recognition::channel_of(fs.mode));
    blocks.push_back(recognition::as_doubles(trajgait::encode(restricted, *fs.codebook)));
  }
  for (const auto& b : blocks)
    if (recognition::l1_norm(b) > 0.0) return recognition::fuse_blocks(blocks).values;
  return std::nullopt;
}

// Pluggable classifier over fused features.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual void fit(const Matrix& x, std::span<const std::size_t> labels, std::span<const std::size_t> samples,
                   const std::vector<std::string>& subject_ids) = 0;
  virtual std::vector<double> scores(std::span<const double> x, std::size_t sample) const = 0;
};

class SvmClassifier final : public Classifier {
 public:
  SvmClassifier(double c, std::uint64_t seed, std::size_t threads) : opt_{c, seed, threads} {}

  void fit(const Matrix& x, std::span<const std::size_t> labels, std::span<const std::size_t>,
           const std::vector<std::string>& subject_ids) override {
    model_ = recognition::train(x, labels, subject_ids, opt_);
  }
  std::vector<double> scores(std::span<const double> x, std::size_t) const override {
    return recognition::scores(model_, x).values;
  }
  const recognition::SubjectModel& model() const noexcept { return model_; }

 private:
  recognition::TrainOptions opt_;
  recognition::SubjectModel model_;
};

using ClassifierFactory = std::function<std::unique_ptr<Classifier>(const PipelineConfig&)>;

inline std::unique_ptr<Classifier> make_svm(const PipelineConfig& cfg) {
  return std::make_unique<SvmClassifier>(cfg.C, Rng(cfg.seed).split("svm").seed(), 1);
}

struct RunOptions {
  bool shuffle_training_labels = false;  // chance-level control
  ClassifierFactory classifier = make_svm;
  CodebookCache* cache = nullptr;
};

struct SplitResult {
  Split split;
  std::vector<std::size_t> truth;      // per test sample
  std::vector<std::size_t> predicted;  // kNoPrediction when the feature was all-zero
  Matrix scores;                       // test x subjects
  std::vector<std::string> eigen_sources;
  std::vector<std::string> codebook_sources;
  double accuracy = 0.0;
};

inline SplitResult run_split(const LabeledDataset& ds, const Split& split, const PipelineConfig& cfg,
                             const RunOptions& run = {}) {
  cfg.validate();
  SplitResult r;
  r.split = split;
  const FeatureSpace fs = fit_feature_space(ds, split.train, cfg, run.cache);
  if (fs.eigen) r.eigen_sources = fs.eigen->training_sources;
  if (fs.codebook) r.codebook_sources = fs.codebook->training_sources;

  std::vector<std::size_t> labels;
  for (std::size_t i : split.train) labels.push_back(ds.samples[i].subject);
  if (run.shuffle_training_labels) {
    Rng rng = Rng(cfg.seed).split("label-shuffle");
    rng.shuffle(std::span<std::size_t>(labels));
  }
  Matrix x;
  std::vector<std::size_t> y;
  std::vector<std::size_t> used;
  for (std::size_t k = 0; k < split.train.size(); ++k) {
    const auto f = sample_feature(fs, ds.samples[split.train[k]]);
    if (!f) continue;
    x.push_row(*f);
    y.push_back(labels[k]);
    used.push_back(split.train[k]);
  }
  const std::size_t n = ds.subject_ids.size();
  auto classifier = run.classifier(cfg);
  classifier->fit(x, y, used, ds.subject_ids);

  r.scores = Matrix(split.test.size(), n, -std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k < split.test.size(); ++k) {
    const SampleData& s = ds.samples[split.test[k]];
    r.truth.push_back(s.subject);
    const auto f = sample_feature(fs, s);
    if (!f) {
      r.predicted.push_back(kNoPrediction);
      continue;
    }
    const auto sc = classifier->scores(*f, split.test[k]);
    std::copy(sc.begin(), sc.end(), r.scores.row(k).begin());
    r.predicted.push_back(recognition::argmax(sc));
  }
  r.accuracy = accuracy(r.predicted, r.truth);
  return r;
}

inline Split make_split(const LabeledDataset& ds, const SplitSpec& spec) {
  const auto labels = ds.labels();
  return stratified_split(labels, ds.subject_ids.size(), spec);
}

inline double evaluate_accuracy(const LabeledDataset& ds, const SplitSpec& spec, const PipelineConfig& cfg,
                                const RunOptions& run = {}) {
  return run_split(ds, make_split(ds, spec), cfg, run).accuracy;
}

struct CovariateRow {
  Covariate covariate = Covariate::none;
  std::size_t tested = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
};

// Accuracy restricted to each walking condition present in the test set,
// from one jointly trained model. Conditions without test samples are absent.
inline std::vector<CovariateRow> covariate_breakdown(const LabeledDataset& ds, const SplitResult& r) {
  std::map<int, CovariateRow> rows;
  for (std::size_t k = 0; k < r.split.test.size(); ++k) {
    const Covariate c = ds.samples[r.split.test[k]].covariate;
    CovariateRow& row = rows[static_cast<int>(c)];
    row.covariate = c;
    ++row.tested;
    row.correct += r.predicted[k] == r.truth[k];
  }
  std::vector<CovariateRow> out;
  for (auto& [key, row] : rows) {
    row.accuracy = static_cast<double>(row.correct) / static_cast<double>(row.tested);
    out.push_back(row);
  }
  return out;
}

struct SweepRow {
  double fraction = 0.0;
  std::vector<double> accuracies;  // one per repeat
  double mean = 0.0;
  double stddev = 0.0;             // population standard deviation
};

inline std::vector<double> parse_fractions(const std::string& spec) {
  std::vector<double> out;
  const auto a = spec.find(':');
  if (a == std::string::npos) {
    std::size_t pos = 0;
    while (pos <= spec.size()) {
      const auto comma = spec.find(',', pos);
      const std::string tok = spec.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      double v = 0.0;
      if (!io::detail::parse_number(io::detail::trim(tok), v)) throw ValidationError("bad fraction '" + tok + "'");
      out.push_back(v);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  } else {
    const auto b = spec.find(':', a + 1);
    if (b == std::string::npos) throw ValidationError("fractions range must be start:stop:step");
    double lo = 0, hi = 0, step = 0;
    if (!io::detail::parse_number(spec.substr(0, a), lo) || !io::detail::parse_number(spec.substr(a + 1, b - a - 1), hi) ||
        !io::detail::parse_number(spec.substr(b + 1), step) || !(step > 0.0))
      throw ValidationError("bad fractions range '" + spec + "'");
    for (long i = 0;; ++i) {
      const double v = lo + static_cast<double>(i) * step;
      if (v > hi + 1e-9) break;
      out.push_back(std::round(v * 1e9) / 1e9);
    }
  }
  for (double f : out)
    if (!(f > 0.0 && f < 1.0)) throw ValidationError("training fractions must lie in (0, 1)");
  if (out.empty()) throw ValidationError("no training fractions given");
  return out;
}

inline SplitSpec sweep_split(std::uint64_t seed, std::size_t fraction_index, std::size_t repeat, double fraction) {
  return {fraction, Rng(seed).split("split").split(fraction_index).split(repeat).seed()};
}

// Accuracy for every (fraction, repeat) pair; each pair has its own split.
inline std::vector<SweepRow> sweep(const LabeledDataset& ds, std::span<const double> fractions, std::size_t repeats,
                                   const PipelineConfig& cfg, const RunOptions& run = {}) {
  if (repeats == 0) throw ValidationError("repeats must be positive");
  std::vector<SweepRow> rows(fractions.size());
  std::vector<double> acc(fractions.size() * repeats);
  CodebookCache local;
  RunOptions opts = run;
  if (!opts.cache) opts.cache = &local;
  parallel_for(acc.size(), resolve_threads(cfg.threads), [&](std::size_t k) {
    const std::size_t f = k / repeats, r = k % repeats;
    acc[k] = evaluate_accuracy(ds, sweep_split(cfg.seed, f, r, fractions[f]), cfg, opts);
  });
  for (std::size_t f = 0; f < fractions.size(); ++f) {
    SweepRow& row = rows[f];
    row.fraction = fractions[f];
    row.accuracies.assign(acc.begin() + static_cast<std::ptrdiff_t>(f * repeats),
                          acc.begin() + static_cast<std::ptrdiff_t>((f + 1) * repeats));
    for (double a : row.accuracies) row.mean += a;
    row.mean /= static_cast<double>(repeats);
    for (double a : row.accuracies) row.stddev += (a - row.mean) * (a - row.mean);
    row.stddev = std::sqrt(row.stddev / static_cast<double>(repeats));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Trained model on disk: eigen.egm, codebook.tgc, subjects.sgm, config.json.

struct TrainedModel {
  FeatureSpace space;
  recognition::SubjectModel subjects;
  PipelineConfig config;
};

inline TrainedModel train_model(const LabeledDataset& ds, std::span<const std::size_t> train, const PipelineConfig& cfg) {
  cfg.validate();
  TrainedModel m;
  m.config = cfg;
  m.space = fit_feature_space(ds, train, cfg);
  Matrix x;
  std::vector<std::size_t> y;
  for (std::size_t i : train) {
    const auto f = sample_feature(m.space, ds.samples[i]);
    if (!f) continue;
    x.push_row(*f);
    y.push_back(ds.samples[i].subject);
  }
  recognition::TrainOptions to{cfg.C, Rng(cfg.seed).split("svm").seed(), resolve_threads(cfg.threads)};
  m.subjects = recognition::train(x, y, ds.subject_ids, to);
  m.subjects.block_dims = m.space.block_dims();
  if (m.space.eigen) m.subjects.eigen_model_id = m.space.eigen->id;
  if (m.space.codebook) m.subjects.codebook_id = m.space.codebook->id;
  return m;
}

inline nlohmann::json config_to_json(const PipelineConfig& c) {
  return {{"mode", std::string(recognition::to_string(c.mode))},
          {"steps", c.steps},
          {"K", c.K},
          {"L", c.L},
          {"C", c.C},
          {"energy", c.energy},
          {"seed", c.seed}};
}

inline PipelineConfig config_from_json(const nlohmann::json& j) {
  PipelineConfig c;
  try {
    c.mode = recognition::parse_mode(j.at("mode").get<std::string>());
    c.steps = j.at("steps").get<int>();
    c.K = j.at("K").get<std::size_t>();
    c.L = j.at("L").get<std::size_t>();
    c.C = j.at("C").get<double>();
    c.energy = j.at("energy").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model config: ") + e.what());
  }
  c.validate();
  return c;
}

inline void save_model(const std::filesystem::path& dir, const TrainedModel& m) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  if (m.space.eigen) io::write_blob(dir / "eigen.egm", eigengait::serialize(*m.space.eigen));
  if (m.space.codebook) io::write_blob(dir / "codebook.tgc", trajgait::serialize(*m.space.codebook));
  io::write_blob(dir / "subjects.sgm", recognition::serialize(m.subjects));
  std::ofstream out(dir / "config.json");
  if (!out) throw IoError("cannot write " + (dir / "config.json").string());
  out << config_to_json(m.config).dump(1) << '\n';
}

inline TrainedModel load_model(const std::filesystem::path& dir) {
  TrainedModel m;
  m.config = config_from_json(io::detail::read_json(dir / "config.json"));
  m.space.mode = m.config.mode;
  m.space.L = m.config.L;
  if (recognition::uses_eigengait(m.config.mode)) {
    const auto path = dir / "eigen.egm";
    m.space.eigen = eigengait::deserialize(io::read_blob(path), path.string());
    m.space.eigen->steps = m.config.steps;
  }
  if (recognition::uses_trajgait(m.config.mode)) {
    const auto path = dir / "codebook.tgc";
    m.space.codebook = trajgait::deserialize_codebook(io::read_blob(path), path.string());
  }
  const auto path = dir / "subjects.sgm";
  m.subjects = recognition::deserialize_subject_model(io::read_blob(path), path.string(), m.config.C);
  if (m.space.eigen && m.subjects.eigen_model_id != m.space.eigen->id)
    throw FormatError(path.string() + ": eigen model hash does not match eigen.egm");
  if (m.space.codebook && m.subjects.codebook_id != m.space.codebook->id)
    throw FormatError(path.string() + ": codebook hash does not match codebook.tgc");
  if (m.subjects.block_dims != m.space.block_dims())
    throw FormatError(path.string() + ": block dimensions do not match the feature space");
  return m;
}

inline recognition::Classification classify_sample(const TrainedModel& m, const SampleData& s) {
  const auto f = sample_feature(m.space, s);
  if (!f) throw ValidationError("sample '" + s.id + "' yields no usable feature (no step windows or trajectories)");
  return recognition::classify(m.subjects, *f);
}

}  // namespace gaitforge::eval
