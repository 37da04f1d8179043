// gaitforge: generate, extract, train, classify and evaluate.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "gaitforge/gaitforge.hpp"

namespace fs = std::filesystem;
using namespace gaitforge;

namespace {

struct Options {
  std::string mode = "fused";
  int steps = 2;
  std::size_t K = trajgait::kDefaultCodebookSize;
  std::size_t L = rgbd::kDefaultTrackLength;
  double C = recognition::kDefaultC;
  double energy = eigengait::kDefaultEnergyFraction;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  std::string output;

  // gen
  std::size_t subjects = 10;
  std::size_t samples = 20;
  std::string paces = "normal,fast";
  std::string covariates = "none";
  std::size_t frames = 24;
  bool no_rgbd = false;
  bool no_accel = false;

  // eval / roc
  std::string fractions = "0.1:0.9:0.1";
  std::size_t repeats = 5;
  double breakdown = 0.0;
  double fraction = 0.3;

  std::string dataset;
  std::string model_dir;
  std::string sample;
};

void add_pipeline_flags(CLI::App& cmd, Options& o) {
  cmd.add_option("--mode", o.mode, "feature mode: eigengait, trajgait, trajgait-depth, trajgait-rgb, fused")
      ->capture_default_str();
  cmd.add_option("--steps", o.steps, "steps per acceleration window (1-8)")->capture_default_str();
  cmd.add_option("--K", o.K, "trajectory codebook size")->capture_default_str();
  cmd.add_option("--L", o.L, "trajectory length in frames")->capture_default_str();
  cmd.add_option("--C", o.C, "SVM penalty")->capture_default_str();
  cmd.add_option("--energy", o.energy, "retained eigen-energy fraction")->capture_default_str();
}

void add_common_flags(CLI::App& cmd, Options& o) {
  cmd.add_option("--seed", o.seed, "root random seed")->capture_default_str();
  cmd.add_option("--threads", o.threads, "worker threads (0: GAITFORGE_THREADS, else all cores)")
      ->capture_default_str();
}

eval::PipelineConfig make_config(const Options& o) {
  eval::PipelineConfig c;
  c.mode = recognition::parse_mode(o.mode);
  c.steps = o.steps;
  c.K = o.K;
  c.L = o.L;
  c.C = o.C;
  c.energy = o.energy;
  c.seed = o.seed;
  c.threads = resolve_threads(o.threads);
  c.codebook.threads = c.threads;
  c.validate();
  return c;
}

void log_config(const std::string& cmd, const eval::PipelineConfig& c) {
  std::cerr << "gaitforge " << cmd << ": mode=" << recognition::to_string(c.mode) << " steps=" << c.steps
            << " K=" << c.K << " L=" << c.L << " C=" << c.C << " energy=" << c.energy << " seed=" << c.seed
            << " threads=" << c.threads << '\n';
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& s, Parse parse) {
  std::vector<T> out;
  std::stringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ','))
    if (!tok.empty()) out.push_back(parse(tok));
  if (out.empty()) throw ValidationError("empty list '" + s + "'");
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

int run_gen(const Options& o) {
  if (o.output.empty()) throw ValidationError("gen needs an output directory (-o)");
  synth::GeneratorOptions g;
  g.subjects = o.subjects;
  g.samples_per_subject = o.samples;
  g.seed = o.seed;
  g.frames = o.frames;
  g.rgbd = !o.no_rgbd;
  g.accel = !o.no_accel;
  g.threads = resolve_threads(o.threads);
  g.paces = parse_list<Pace>(o.paces, [](const std::string& t) { return parse_pace(t); });
  if (o.covariates == "all") g.covariates.assign(kHardCovariates.begin(), kHardCovariates.end());
  else g.covariates = parse_list<Covariate>(o.covariates, [](const std::string& t) { return parse_covariate(t); });
  std::cerr << "gaitforge gen: subjects=" << g.subjects << " samples=" << g.samples_per_subject << " seed=" << g.seed
            << " frames=" << g.frames << " threads=" << g.threads << '\n';
  std::cout << synth::generate_dataset(g, o.output).string() << '\n';
  return 0;
}

eval::LabeledDataset load_dataset(const Options& o, const eval::PipelineConfig& cfg) {
  return eval::extract_manifest(io::load_manifest(o.dataset), cfg);
}

int run_extract(const Options& o) {
  const auto cfg = make_config(o);
  log_config("extract", cfg);
  if (o.output.empty()) throw ValidationError("extract needs an output directory (-o)");
  const auto ds = load_dataset(o, cfg);
  const fs::path out = o.output;
  ensure_dir(out / "descriptors");
  std::ofstream summary(out / "extract.csv");
  std::ofstream windows(out / "windows.csv");
  if (!summary || !windows) throw IoError("cannot write into " + out.string());
  summary << "sample,subject,pace,covariate,windows,descriptors\n";
  for (const auto& s : ds.samples) {
    summary << s.id << ',' << ds.subject_ids[s.subject] << ',' << to_string(s.pace) << ',' << to_string(s.covariate)
            << ',' << s.windows.size() << ',' << s.descriptors.size() << '\n';
    for (std::size_t w = 0; w < s.windows.size(); ++w) {
      windows << s.id << ',' << w;
      for (double v : s.windows[w].samples) windows << ',' << io::detail::format_double(v);
      windows << '\n';
    }
    if (s.descriptors.size() == 0) continue;
    std::ofstream d(out / "descriptors" / (s.id + ".csv"));
    if (!d) throw IoError("cannot write descriptors for " + s.id);
    for (std::size_t r = 0; r < s.descriptors.size(); ++r) {
      const auto row = s.descriptors.rows.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) d << (c ? "," : "") << io::detail::format_double(row[c]);
      d << '\n';
    }
  }
  std::cout << ds.samples.size() << " samples extracted to " << out.string() << '\n';
  return 0;
}

int run_train(const Options& o) {
  const auto cfg = make_config(o);
  log_config("train", cfg);
  if (o.output.empty()) throw ValidationError("train needs an output directory (-o)");
  const auto manifest = io::load_manifest(o.dataset);
  const auto ds = eval::extract_manifest(manifest, cfg);
  // Samples tagged "train" in the manifest if any are tagged, else all.
  std::vector<std::size_t> train, all;
  std::size_t k = 0;
  for (const auto& subj : manifest.subjects)
    for (const auto& s : subj.samples) {
      all.push_back(k);
      if (s.split && *s.split == "train") train.push_back(k);
      ++k;
    }
  if (train.empty()) train = all;
  const auto model = eval::train_model(ds, train, cfg);
  eval::save_model(o.output, model);
  std::cout << "model with " << model.subjects.subject_ids.size() << " subjects trained on " << train.size()
            << " samples written to " << o.output << '\n';
  return 0;
}

void print_classification(const std::string& id, const recognition::Classification& c,
                          const std::vector<std::string>& subjects) {
  std::cout << id << ' ' << c.subject_id;
  for (std::size_t i = 0; i < subjects.size(); ++i)
    std::cout << ' ' << subjects[i] << '=' << eval::fmt(c.scores.values[i]);
  std::cout << '\n';
}

int run_classify(const Options& o) {
  auto model = eval::load_model(o.model_dir);
  model.config.threads = resolve_threads(o.threads);
  log_config("classify", model.config);
  const rgbd::PyramidalFlow estimator(model.config.flow);
  const auto j = io::detail::read_json(o.sample);
  std::vector<std::pair<io::SampleRecord, fs::path>> records;
  if (j.contains("subjects")) {
    const auto m = io::load_manifest(o.sample);
    for (const auto& subj : m.subjects)
      for (const auto& s : subj.samples) records.emplace_back(s, m.root);
  } else {
    records.push_back(io::load_sample_json(o.sample));
  }
  const auto& cfg = model.config;
  for (const auto& [record, root] : records) {
    const auto accel = recognition::uses_eigengait(cfg.mode) ? io::load_sample_accel(root, record)
                                                             : std::vector<AccelSample>{};
    const auto frames = recognition::uses_trajgait(cfg.mode) ? io::load_rgbd_sequence(root, record)
                                                             : std::vector<RgbdFrame>{};
    const auto data = eval::extract_sample(record.id, accel, frames, cfg, estimator);
    print_classification(record.id, eval::classify_sample(model, data), model.subjects.subject_ids);
  }
  return 0;
}

int run_eval(const Options& o) {
  const auto cfg = make_config(o);
  log_config("eval", cfg);
  const auto fractions = eval::parse_fractions(o.fractions);
  if (o.repeats == 0) throw ValidationError("--repeats must be positive");
  const auto ds = load_dataset(o, cfg);
  eval::CodebookCache cache;
  eval::RunOptions run;
  run.cache = &cache;
  const auto rows = eval::sweep(ds, fractions, o.repeats, cfg, run);

  std::vector<eval::CovariateRow> cov;
  if (o.breakdown > 0.0) {
    const auto r = eval::run_split(ds, eval::make_split(ds, {o.breakdown, Rng(cfg.seed).split("breakdown").seed()}),
                                   cfg, run);
    cov = eval::covariate_breakdown(ds, r);
  }
  if (o.output.empty()) {
    eval::write_sweep_csv(std::cout, rows);
    if (!cov.empty()) {
      std::cout << '\n';
      eval::write_covariate_csv(std::cout, cov);
    }
    return 0;
  }
  const fs::path out = o.output;
  ensure_dir(out);
  std::ostringstream csv;
  eval::write_sweep_csv(csv, rows);
  eval::write_text(out / "accuracy.csv", csv.str());
  const eval::Series s = eval::sweep_series(std::string(recognition::to_string(cfg.mode)), rows);
  eval::write_text(out / "accuracy.svg",
                   eval::svg_plot({"Accuracy vs training fraction", "training fraction", "accuracy"}, {&s, 1}));
  if (!cov.empty()) {
    std::ostringstream c;
    eval::write_covariate_csv(c, cov);
    eval::write_text(out / "covariates.csv", c.str());
  }
  std::cout << csv.str();
  return 0;
}

int run_roc(const Options& o) {
  const auto cfg = make_config(o);
  log_config("roc", cfg);
  const auto ds = load_dataset(o, cfg);
  const auto r = eval::run_split(ds, eval::make_split(ds, {o.fraction, Rng(cfg.seed).split("roc").seed()}), cfg);
  const auto labels = r.truth;
  const auto report = eval::evaluate_roc(r.scores, labels, ds.subject_ids);
  for (const auto& s : report.skipped) std::cerr << "warning: subject " << s << " has no test samples; skipped\n";
  std::cerr << "accuracy " << eval::fmt(r.accuracy, 4) << ", average AUC " << eval::fmt(report.average.auc, 4) << '\n';
  if (o.output.empty()) {
    eval::write_roc_csv(std::cout, report);
    return 0;
  }
  const fs::path out = o.output;
  ensure_dir(out);
  std::ostringstream csv;
  eval::write_roc_csv(csv, report);
  eval::write_text(out / "roc.csv", csv.str());
  std::vector<eval::Series> series;
  for (const auto& c : report.subjects) series.push_back(eval::roc_series(c));
  series.push_back(eval::roc_series(report.average));
  eval::write_text(out / "roc.svg", eval::svg_plot({"One-vs-all ROC", "false positive rate", "true positive rate"},
                                                   series));
  std::cout << "ROC for " << report.subjects.size() << " subjects written to " << out.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gaitforge: gait recognition from phone acceleration and RGBD walks"};
  app.require_subcommand(1);
  Options o;

  auto* gen = app.add_subcommand("gen", "write a seeded synthetic dataset");
  gen->add_option("--subjects", o.subjects, "number of subjects")->capture_default_str();
  gen->add_option("--samples", o.samples, "samples per subject")->capture_default_str();
  gen->add_option("--paces", o.paces, "comma-separated paces, cycled per sample")->capture_default_str();
  gen->add_option("--covariates", o.covariates, "comma-separated walking conditions, or 'all'")
      ->capture_default_str();
  gen->add_option("--frames", o.frames, "RGBD frames per sample")->capture_default_str();
  gen->add_flag("--no-rgbd", o.no_rgbd, "skip RGBD frames");
  gen->add_flag("--no-accel", o.no_accel, "skip acceleration");
  add_common_flags(*gen, o);
  gen->add_option("-o,--output", o.output, "output directory")->required();

  auto* extract = app.add_subcommand("extract", "dump step windows and trajectory descriptors");
  add_pipeline_flags(*extract, o);
  add_common_flags(*extract, o);
  extract->add_option("dataset", o.dataset, "manifest.json")->required();
  extract->add_option("-o,--output", o.output, "output directory")->required();

  auto* train = app.add_subcommand("train", "fit a model on a dataset");
  add_pipeline_flags(*train, o);
  add_common_flags(*train, o);
  train->add_option("dataset", o.dataset, "manifest.json")->required();
  train->add_option("-o,--output", o.output, "model directory")->required();

  auto* classify = app.add_subcommand("classify", "identify the walker of a sample");
  classify->add_option("--threads", o.threads, "worker threads")->capture_default_str();
  classify->add_option("model", o.model_dir, "model directory")->required();
  classify->add_option("sample", o.sample, "sample.json or manifest.json")->required();

  auto* ev = app.add_subcommand("eval", "accuracy versus training fraction");
  add_pipeline_flags(*ev, o);
  add_common_flags(*ev, o);
  ev->add_option("--fractions", o.fractions, "start:stop:step or a comma list")->capture_default_str();
  ev->add_option("--repeats", o.repeats, "random splits per fraction")->capture_default_str();
  ev->add_option("--breakdown", o.breakdown, "also tabulate accuracy per walking condition at this fraction");
  ev->add_option("dataset", o.dataset, "manifest.json")->required();
  ev->add_option("-o,--output", o.output, "output directory (default: CSV on stdout)");

  auto* roc = app.add_subcommand("roc", "one-vs-all ROC curves and their average");
  add_pipeline_flags(*roc, o);
  add_common_flags(*roc, o);
  roc->add_option("--fraction", o.fraction, "training fraction")->capture_default_str();
  roc->add_option("dataset", o.dataset, "manifest.json")->required();
  roc->add_option("-o,--output", o.output, "output directory (default: CSV on stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (*gen) return run_gen(o);
    if (*extract) return run_extract(o);
    if (*train) return run_train(o);
    if (*classify) return run_classify(o);
    if (*ev) return run_eval(o);
    if (*roc) return run_roc(o);
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
