#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "gaitforge/gaitforge.hpp"
#include "temp_dir.hpp"

using namespace gaitforge;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

CliRun cli(const std::string& args, const fs::path& scratch) {
  const fs::path out = scratch / "stdout.txt", err = scratch / "stderr.txt";
  const std::string cmd = std::string("\"") + GAITFORGE_CLI_PATH + "\" " + args + " >\"" + out.string() + "\" 2>\"" +
                          err.string() + "\"";
  const int status = std::system(cmd.c_str());
  CliRun r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream o(out), e(err);
  std::stringstream so, se;
  so << o.rdbuf();
  se << e.rdbuf();
  r.out = so.str();
  r.err = se.str();
  return r;
}

std::size_t lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

// One dataset shared by the end-to-end checks.
class CliFlow : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    tmp_ = new TempDir("gaitforge_cli_");
    const CliRun r = cli("gen --subjects 3 --samples 4 --frames 18 --seed 5 --threads 2 -o \"" +
                          (tmp_->path / "data").string() + "\"",
                      tmp_->path);
    ASSERT_EQ(r.code, 0) << r.err;
  }
  static void TearDownTestSuite() {
    delete tmp_;
    tmp_ = nullptr;
  }
  static fs::path manifest() { return tmp_->path / "data" / "manifest.json"; }
  static TempDir* tmp_;
};

TempDir* CliFlow::tmp_ = nullptr;

TEST_F(CliFlow, GenWritesLoadableManifest) {
  const auto m = io::load_manifest(manifest());
  EXPECT_EQ(m.subjects.size(), 3u);
  EXPECT_EQ(m.sample_count(), 12u);
  EXPECT_NO_THROW(io::verify_manifest(m));
}

TEST_F(CliFlow, TrainThenClassifyHandWrittenSample) {
  const fs::path model = tmp_->path / "model";
  const CliRun t = cli("train --K 8 --seed 1 --threads 2 \"" + manifest().string() + "\" -o \"" + model.string() + "\"",
                    tmp_->path);
  ASSERT_EQ(t.code, 0) << t.err;
  for (const char* f : {"eigen.egm", "codebook.tgc", "subjects.sgm", "config.json"})
    EXPECT_TRUE(fs::exists(model / f)) << f;

  const auto m = io::load_manifest(manifest());
  const auto& rec = m.subjects[1].samples[2];
  const fs::path dir = m.root / rec.accel->parent_path();
  std::ofstream js(dir / "sample.json");
  js << "{\n  \"id\": \"probe\",\n  \"accel\": \"accel.csv\",\n  \"frames\": [\n";
  for (std::size_t f = 0; f < rec.frames.size(); ++f)
    js << "    {\"color\": \"" << rec.frames[f].color.filename().string() << "\", \"depth\": \""
       << rec.frames[f].depth.filename().string() << "\", \"t_ms\": " << rec.frames[f].t_ms << "}"
       << (f + 1 < rec.frames.size() ? ",\n" : "\n");
  js << "  ]\n}\n";
  js.close();

  const CliRun c = cli("classify \"" + model.string() + "\" \"" + (dir / "sample.json").string() + "\"", tmp_->path);
  ASSERT_EQ(c.code, 0) << c.err;
  EXPECT_EQ(c.out.rfind("probe " + m.subjects[1].id + " ", 0), 0u) << c.out;

  const CliRun all = cli("classify \"" + model.string() + "\" \"" + manifest().string() + "\"", tmp_->path);
  ASSERT_EQ(all.code, 0) << all.err;
  EXPECT_EQ(lines(all.out), 12u);
}

TEST_F(CliFlow, EvalPrintsOneRowPerFraction) {
  const CliRun r = cli("eval --mode eigengait --repeats 2 \"" + manifest().string() + "\"", tmp_->path);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("fraction,accuracy,std\n", 0), 0u);
  EXPECT_EQ(lines(r.out), 10u);
  const fs::path out = tmp_->path / "eval";
  const CliRun w = cli("eval --mode eigengait --repeats 1 --fractions 0.5 --breakdown 0.5 \"" + manifest().string() +
                        "\" -o \"" + out.string() + "\"",
                    tmp_->path);
  ASSERT_EQ(w.code, 0) << w.err;
  for (const char* f : {"accuracy.csv", "accuracy.svg", "covariates.csv"}) EXPECT_TRUE(fs::exists(out / f)) << f;
}

TEST_F(CliFlow, RocWritesCurves) {
  const fs::path out = tmp_->path / "roc";
  const CliRun r = cli("roc --mode eigengait --fraction 0.5 \"" + manifest().string() + "\" -o \"" + out.string() + "\"",
                    tmp_->path);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(out / "roc.csv"));
  EXPECT_TRUE(fs::exists(out / "roc.svg"));
}

TEST(CliErrors, ExitCodes) {
  TempDir tmp("gaitforge_cli_err_");
  const CliRun unknown = cli("eval --bogus x.json", tmp.path);
  EXPECT_EQ(unknown.code, 1);
  EXPECT_NE(unknown.err.find("Usage"), std::string::npos) << unknown.err;
  EXPECT_EQ(cli("eval --steps 9 x.json", tmp.path).code, 1);
  EXPECT_EQ(cli("eval --mode nope x.json", tmp.path).code, 1);
  EXPECT_EQ(cli("", tmp.path).code, 1);
  const CliRun missing = cli("train \"" + (tmp.path / "absent.json").string() + "\" -o \"" + (tmp.path / "m").string() +
                              "\"",
                          tmp.path);
  EXPECT_EQ(missing.code, 2) << missing.err;
  EXPECT_EQ(cli("classify \"" + (tmp.path / "nomodel").string() + "\" x.json", tmp.path).code, 2);
}
