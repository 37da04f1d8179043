#include <gtest/gtest.h>

#include <fstream>
#include <iterator>

#include "oracles.hpp"
#include "temp_dir.hpp"

using namespace gaitforge;
namespace fs = std::filesystem;

namespace {

synth::GeneratorOptions tiny(std::uint64_t seed) {
  synth::GeneratorOptions g;
  g.subjects = 2;
  g.samples_per_subject = 10;
  g.seed = seed;
  g.frames = 6;
  return g;
}

std::vector<char> slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<double> mean_window(const std::vector<AccelSample>& accel, const std::string& id) {
  const auto ws = eval::accel_windows(accel, id, 2);
  return eigengait::subject_mean(ws);
}

}  // namespace

TEST(Synth, SameSeedSameSamples) {
  const auto a = synth::make_dataset(tiny(7)), b = synth::make_dataset(tiny(7));
  ASSERT_EQ(a.specs.size(), 20u);
  for (std::size_t i : {0u, 13u}) {
    const auto x = a.render(i), y = b.render(i);
    EXPECT_EQ(x.spec.id, y.spec.id);
    ASSERT_EQ(x.accel.size(), y.accel.size());
    for (std::size_t k = 0; k < x.accel.size(); ++k) {
      EXPECT_EQ(x.accel[k].t_ms, y.accel[k].t_ms);
      EXPECT_EQ(x.accel[k].ax, y.accel[k].ax);
    }
    ASSERT_EQ(x.frames.size(), y.frames.size());
    for (std::size_t f = 0; f < x.frames.size(); ++f) {
      EXPECT_EQ(x.frames[f].depth.data(), y.frames[f].depth.data());
      EXPECT_TRUE(x.frames[f].color.data() == y.frames[f].color.data());
    }
  }
  const auto c = synth::make_dataset(tiny(8)).render(0);
  EXPECT_NE(c.accel[5].ax, a.render(0).accel[5].ax);
}

TEST(Synth, GeneratedTreeIsBitIdentical) {
  auto g = tiny(7);
  g.samples_per_subject = 3;
  g.frames = 3;
  TempDir a, b;
  synth::generate_dataset(g, a.path);
  g.threads = 3;
  synth::generate_dataset(g, b.path);
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(a.path)) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), a.path);
    ASSERT_TRUE(fs::exists(b.path / rel)) << rel;
    EXPECT_EQ(slurp(e.path()), slurp(b.path / rel)) << rel;
    ++files;
  }
  EXPECT_EQ(files, 1u + 6u * (1u + 2u * 3u));
  const auto m = io::load_manifest(a.path / "manifest.json");
  EXPECT_EQ(m.sample_count(), 6u);
  EXPECT_NO_THROW(io::verify_manifest(m));
}

TEST(Synth, EveryWalkHasStepWindows) {
  auto g = tiny(3);
  g.rgbd = false;
  g.subjects = 5;
  g.paces = {Pace::normal, Pace::fast};
  g.covariates.assign(kHardCovariates.begin(), kHardCovariates.end());
  g.samples_per_subject = 16;
  const auto ds = synth::make_dataset(g);
  for (std::size_t i = 0; i < ds.specs.size(); ++i) {
    const auto s = ds.render(i);
    EXPECT_FALSE(s.frames.size());
    const auto curve = accel::make_curve(s.accel, s.spec.id);
    const auto pts = accel::partition_steps(curve);
    ASSERT_GE(pts.size(), 3u) << s.spec.id;
    EXPECT_GE(eval::accel_windows(s.accel, s.spec.id, 2).size(), 1u) << s.spec.id;
  }
}

TEST(Synth, ConditionChangesTheCurve) {
  auto g = tiny(5);
  g.samples_per_subject = 12;
  g.rgbd = false;
  g.paces = {Pace::normal};
  g.covariates = {Covariate::none, Covariate::both_hands_in_pocket};
  const auto ds = synth::make_dataset(g);
  std::vector<std::vector<double>> means;
  std::vector<Covariate> cov;
  for (std::size_t i = 0; i < ds.specs.size(); ++i) {
    if (ds.specs[i].subject != 0) continue;
    const auto s = ds.render(i);
    means.push_back(mean_window(s.accel, s.spec.id));
    cov.push_back(s.spec.covariate);
  }
  double within = 0.0, across = 0.0;
  std::size_t nw = 0, na = 0;
  for (std::size_t i = 0; i < means.size(); ++i)
    for (std::size_t j = i + 1; j < means.size(); ++j) {
      const double d = std::sqrt(oracle::dist2(means[i], means[j]));
      if (cov[i] == cov[j]) {
        within += d;
        ++nw;
      } else {
        across += d;
        ++na;
      }
    }
  EXPECT_GT(across / static_cast<double>(na), within / static_cast<double>(nw));
}

TEST(Synth, FramesAreValid) {
  const auto ds = synth::make_dataset(tiny(9));
  const auto s = ds.render(4);
  ASSERT_EQ(s.frames.size(), 6u);
  std::int64_t last = -1;
  for (const auto& f : s.frames) {
    EXPECT_NO_THROW(validate_frame(f));
    EXPECT_EQ(f.color.width(), 256u);
    EXPECT_EQ(f.depth.width(), 128u);
    EXPECT_GT(f.t_ms, last);
    last = f.t_ms;
    std::size_t body = 0;
    for (std::uint16_t d : f.depth.data()) body += d > 0;
    EXPECT_GT(body, 200u);
  }
}

TEST(Synth, ProfilesAreSeparated) {
  auto g = tiny(2);
  g.subjects = 10;
  const auto profiles = synth::make_profiles(g);
  ASSERT_EQ(profiles.size(), 10u);
  for (std::size_t i = 0; i < profiles.size(); ++i)
    for (std::size_t j = i + 1; j < profiles.size(); ++j) {
      EXPECT_NE(profiles[i].id, profiles[j].id);
      EXPECT_GE(std::sqrt(oracle::dist2(profiles[i].signature, profiles[j].signature)), g.min_separation);
    }
  g.paces.clear();
  EXPECT_THROW(synth::make_specs(g), ValidationError);
}
