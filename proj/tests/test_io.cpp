#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gaitforge/io/accel_csv.hpp"
#include "gaitforge/io/binary.hpp"
#include "gaitforge/io/manifest.hpp"
#include "gaitforge/io/pnm.hpp"
#include "gaitforge/core/rng.hpp"
#include "temp_dir.hpp"

using namespace gaitforge;
namespace fs = std::filesystem;

namespace {

std::vector<AccelSample> parse(const std::string& text) {
  std::istringstream in(text);
  return io::parse_accel_csv(in, "mem");
}

ColorImage random_color(Rng& r, std::size_t w, std::size_t h) {
  ColorImage img(w, h);
  for (auto& p : img.data())
    p = {static_cast<std::uint8_t>(r.index(256)), static_cast<std::uint8_t>(r.index(256)),
         static_cast<std::uint8_t>(r.index(256))};
  return img;
}

DepthImage random_depth(Rng& r, std::size_t w, std::size_t h) {
  DepthImage img(w, h);
  for (auto& d : img.data()) d = static_cast<std::uint16_t>(r.index(kMaxDepth + 1));
  return img;
}

// Writes n frame pairs for one sample and returns the record.
io::SampleRecord write_sequence(const fs::path& root, const std::string& id, std::size_t n, Rng& r) {
  io::SampleRecord s;
  s.id = id;
  fs::create_directories(root / id);
  for (std::size_t i = 0; i < n; ++i) {
    io::FrameRef f;
    f.color = fs::path(id) / ("c" + std::to_string(i) + ".ppm");
    f.depth = fs::path(id) / ("d" + std::to_string(i) + ".pgm");
    f.t_ms = f.depth_t_ms = static_cast<std::int64_t>(i) * 67;
    io::save_ppm(root / f.color, random_color(r, 8, 6));
    io::save_depth_pgm(root / f.depth, random_depth(r, 4, 3));
    s.frames.push_back(f);
  }
  return s;
}

}  // namespace

TEST(AccelCsv, TwoRowsInferFiftyHertz) {
  const auto s = parse("t_ms,ax,ay,az\n0,0,9.8,0\n20,0,9.9,0\n");
  ASSERT_EQ(s.size(), 2u);
  EXPECT_DOUBLE_EQ(s[1].ay, 9.9);
  EXPECT_DOUBLE_EQ(io::infer_rate_hz(s), 50.0);
}

TEST(AccelCsv, EmptyDataSection) { EXPECT_TRUE(parse("t_ms,ax,ay,az\n").empty()); }

TEST(AccelCsv, NonMonotoneTimestamps) {
  EXPECT_THROW(parse("t_ms,ax,ay,az\n0,0,0,0\n20,0,0,0\n10,0,0,0\n"), ValidationError);
}

TEST(AccelCsv, MalformedRowReportsLine) {
  try {
    parse("t_ms,ax,ay,az\n0,0,0,0\n20,0,x,0\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(parse("t_ms,ax,ay\n"), ParseError);
  EXPECT_THROW(parse("t_ms,ax,ay,az\n0,1,2\n"), ParseError);
  EXPECT_THROW(parse("t_ms,ax,ay,az\n0,1,2,3,4\n"), ParseError);
  EXPECT_THROW(parse(""), ParseError);
}

TEST(AccelCsv, RoundTripBitExact) {
  TempDir tmp;
  Rng r(1);
  std::vector<AccelSample> s;
  for (int i = 0; i < 500; ++i)
    s.push_back({i * 20 + static_cast<std::int64_t>(r.index(3)), r.normal(0, 5), r.normal(9.8, 3), r.uniform(-1e-7, 1e7)});
  io::save_accel_csv(tmp.path / "a.csv", s);
  const auto back = io::load_accel_csv(tmp.path / "a.csv");
  ASSERT_EQ(back.size(), s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_EQ(back[i].t_ms, s[i].t_ms);
    EXPECT_EQ(back[i].ax, s[i].ax);
    EXPECT_EQ(back[i].ay, s[i].ay);
    EXPECT_EQ(back[i].az, s[i].az);
  }
}

TEST(AccelCsv, MissingFileIsIoError) { EXPECT_THROW(io::load_accel_csv("/nonexistent/a.csv"), IoError); }

TEST(Pnm, RoundTrip) {
  Rng r(2);
  const ColorImage c = random_color(r, 17, 9);
  const DepthImage d = random_depth(r, 13, 7);
  const ColorImage c2 = io::decode_ppm(io::encode_ppm(c), "c");
  const DepthImage d2 = io::decode_depth_pgm(io::encode_depth_pgm(d), "d");
  ASSERT_TRUE(c2.same_shape(c));
  ASSERT_TRUE(d2.same_shape(d));
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_EQ(c2.data()[i].r, c.data()[i].r);
    EXPECT_EQ(c2.data()[i].b, c.data()[i].b);
  }
  EXPECT_EQ(d2.data(), d.data());
}

TEST(Pnm, DepthValueAboveRangeIsFormatError) {
  DepthImage d(3, 2, 100);
  auto bytes = io::encode_depth_pgm(d);
  // last sample -> 9000, big-endian
  bytes[bytes.size() - 2] = static_cast<unsigned char>(9000 >> 8);
  bytes[bytes.size() - 1] = static_cast<unsigned char>(9000 & 0xff);
  EXPECT_THROW(io::decode_depth_pgm(bytes, "d"), FormatError);
}

TEST(Pnm, DepthMaxvalAboveRangeIsFormatError) {
  const std::string s = "P5\n1 1\n65535\n\x01\x02";
  EXPECT_THROW(io::decode_depth_pgm({s.begin(), s.end()}, "d"), FormatError);
}

TEST(Pnm, HeaderCommentsAndTruncation) {
  const std::string ok = "P6\n# comment\n1 1\n255\nabc";
  const ColorImage c = io::decode_ppm({ok.begin(), ok.end()}, "c");
  EXPECT_EQ(c(0, 0).g, 'b');
  const std::string cut = "P6\n2 2\n255\nabc";
  EXPECT_THROW(io::decode_ppm({cut.begin(), cut.end()}, "c"), FormatError);
  const std::string wrong = "P3\n1 1\n255\n1 2 3";
  EXPECT_THROW(io::decode_ppm({wrong.begin(), wrong.end()}, "c"), FormatError);
}

TEST(Blob, ReaderWriterRoundTrip) {
  io::BlobWriter w;
  w.magic("TEST");
  w.u64(0x0123456789abcdefULL);
  w.f64(-2.5);
  w.f32(1.25f);
  w.str("hello");
  const auto bytes = w.take();
  EXPECT_EQ(bytes[4], 0xef);  // little-endian
  io::BlobReader r(bytes, "blob");
  r.expect_magic("TEST");
  EXPECT_EQ(r.u64(), 0x0123456789abcdefULL);
  EXPECT_EQ(r.f64(), -2.5);
  EXPECT_EQ(r.f32(), 1.25f);
  EXPECT_EQ(r.str(), "hello");
  EXPECT_NO_THROW(r.expect_end());
  io::BlobReader bad(bytes, "blob");
  EXPECT_THROW(bad.expect_magic("NOPE"), FormatError);
  io::BlobReader shortr(std::span<const unsigned char>(bytes.data(), 6), "blob");
  shortr.expect_magic("TEST");
  EXPECT_THROW(shortr.u64(), FormatError);
}

TEST(RgbdSequence, CountPreserved) {
  TempDir tmp;
  Rng r(3);
  const auto s = write_sequence(tmp.path, "s0", 10, r);
  const auto frames = io::load_rgbd_sequence(tmp.path, s);
  ASSERT_EQ(frames.size(), 10u);
  for (std::size_t i = 1; i < frames.size(); ++i) EXPECT_LT(frames[i - 1].t_ms, frames[i].t_ms);
}

TEST(RgbdSequence, TimestampMismatchNamesFrame) {
  TempDir tmp;
  Rng r(4);
  auto s = write_sequence(tmp.path, "s0", 5, r);
  s.frames[3].depth_t_ms += 5;
  try {
    io::load_rgbd_sequence(tmp.path, s);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("frame 3"), std::string::npos);
  }
}

TEST(RgbdSequence, MissingMemberNamesFrame) {
  TempDir tmp;
  Rng r(5);
  auto s = write_sequence(tmp.path, "s0", 5, r);
  s.frames[2].depth.clear();
  try {
    io::load_rgbd_sequence(tmp.path, s);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("frame 2"), std::string::npos);
  }
  auto s2 = write_sequence(tmp.path, "s1", 5, r);
  fs::remove(tmp.path / s2.frames[4].color);
  EXPECT_THROW(io::load_rgbd_sequence(tmp.path, s2), IoError);
}

TEST(RgbdSequence, OutOfRangeDepthIsFormatError) {
  TempDir tmp;
  Rng r(6);
  auto s = write_sequence(tmp.path, "s0", 3, r);
  const std::string bad = "P5\n1 1\n8191\n\x23\x28";  // 9000
  std::ofstream(tmp.path / s.frames[1].depth, std::ios::binary) << bad;
  EXPECT_THROW(io::load_rgbd_sequence(tmp.path, s), FormatError);
}

TEST(Manifest, RoundTripAndValidation) {
  TempDir tmp;
  Rng r(7);
  io::DatasetManifest m;
  m.root = tmp.path;
  for (int subj = 0; subj < 2; ++subj) {
    io::SubjectRecord sr{"p" + std::to_string(subj), {}};
    for (int k = 0; k < 2; ++k) {
      const std::string id = sr.id + "_" + std::to_string(k);
      auto s = write_sequence(tmp.path, id, 2, r);
      s.accel = fs::path(id) / "a.csv";
      io::save_accel_csv(tmp.path / *s.accel, {{0, 1, 2, 3}, {20, 1, 2, 3}});
      s.pace = k ? Pace::fast : Pace::normal;
      s.covariate = Covariate::left_hand_in_pocket;
      if (k == 0) s.split = "train";
      sr.samples.push_back(s);
    }
    m.subjects.push_back(sr);
  }
  io::save_manifest(tmp.path / "manifest.json", m);
  const auto back = io::load_manifest(tmp.path / "manifest.json");
  ASSERT_EQ(back.sample_count(), 4u);
  EXPECT_EQ(back.subjects[1].samples[1].pace, Pace::fast);
  EXPECT_EQ(back.subjects[0].samples[0].covariate, Covariate::left_hand_in_pocket);
  EXPECT_EQ(back.subjects[0].samples[0].split.value_or(""), "train");
  EXPECT_FALSE(back.subjects[0].samples[1].split.has_value());
  EXPECT_NO_THROW(io::verify_manifest(back));

  // dangling path rejected at load time
  fs::remove(tmp.path / *m.subjects[1].samples[0].accel);
  EXPECT_THROW(io::load_manifest(tmp.path / "manifest.json"), ValidationError);
}

TEST(Manifest, DuplicateIdsAndSchema) {
  TempDir tmp;
  std::ofstream(tmp.path / "a.csv") << "t_ms,ax,ay,az\n";
  std::ofstream(tmp.path / "dup.json")
      << R"({"subjects":[{"id":"a","samples":[]},{"id":"a","samples":[]}]})";
  EXPECT_THROW(io::load_manifest(tmp.path / "dup.json"), ValidationError);
  std::ofstream(tmp.path / "dups.json")
      << R"({"subjects":[{"id":"a","samples":[{"id":"x","accel":"a.csv"}]},{"id":"b","samples":[{"id":"x","accel":"a.csv"}]}]})";
  EXPECT_THROW(io::load_manifest(tmp.path / "dups.json"), ValidationError);
  std::ofstream(tmp.path / "nosub.json") << R"({"people":[]})";
  EXPECT_THROW(io::load_manifest(tmp.path / "nosub.json"), ValidationError);
  std::ofstream(tmp.path / "garbage.json") << "{not json";
  EXPECT_THROW(io::load_manifest(tmp.path / "garbage.json"), ValidationError);
  std::ofstream(tmp.path / "nodata.json") << R"({"subjects":[{"id":"a","samples":[{"id":"x"}]}]})";
  EXPECT_THROW(io::load_manifest(tmp.path / "nodata.json"), ValidationError);
  std::ofstream(tmp.path / "badpace.json")
      << R"({"subjects":[{"id":"a","samples":[{"id":"x","accel":"a.csv","pace":"crawl"}]}]})";
  EXPECT_THROW(io::load_manifest(tmp.path / "badpace.json"), ValidationError);
  EXPECT_THROW(io::load_manifest(tmp.path / "absent.json"), IoError);
}
