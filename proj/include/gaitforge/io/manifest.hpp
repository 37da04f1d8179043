#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gaitforge/core/error.hpp"
#include "gaitforge/datamodel.hpp"
#include "gaitforge/io/accel_csv.hpp"
#include "gaitforge/io/pnm.hpp"

// Dataset manifest (JSON). Paths inside are relative to the manifest file.
//
//   {
//     "format": "gaitforge-manifest-1",
//     "subjects": [
//       { "id": "s00",
//         "samples": [
//           { "id": "s00-000", "pace": "normal", "covariate": "natural",
//             "accel": "s00/000/accel.csv",
//             "frames": [ { "color": "s00/000/c0000.ppm",
//                           "depth": "s00/000/d0000.pgm",
//                           "t_ms": 0, "depth_t_ms": 0 }, ... ],
//             "split": "train" } ] } ]
//   }
//
// "accel" and "frames" are each optional, but a sample needs at least one.
// "depth_t_ms" defaults to "t_ms"; "split" is an optional annotation.

namespace gaitforge::io {

inline constexpr std::string_view kManifestFormat = "gaitforge-manifest-1";

struct FrameRef {
  std::filesystem::path color;
  std::filesystem::path depth;
  std::int64_t t_ms = 0;
  std::int64_t depth_t_ms = 0;
};

struct SampleRecord {
  std::string id;
  Pace pace = Pace::unknown;
  Covariate covariate = Covariate::none;
  std::optional<std::filesystem::path> accel;
  std::vector<FrameRef> frames;
  std::optional<std::string> split;
};

struct SubjectRecord {
  std::string id;
  std::vector<SampleRecord> samples;
};

struct DatasetManifest {
  std::filesystem::path root;  // directory the relative paths resolve against
  std::vector<SubjectRecord> subjects;

  std::size_t sample_count() const {
    std::size_t n = 0;
    for (const auto& s : subjects) n += s.samples.size();
    return n;
  }
};

namespace detail {

inline SampleRecord sample_from_json(const nlohmann::json& j, const std::string& where) {
  SampleRecord s;
  try {
    s.id = j.at("id").get<std::string>();
    s.pace = parse_pace(j.value("pace", "unknown"));
    s.covariate = parse_covariate(j.value("covariate", "none"));
    if (j.contains("accel")) s.accel = j.at("accel").get<std::string>();
    if (j.contains("frames")) {
      for (const auto& f : j.at("frames")) {
        FrameRef r;
        r.color = f.value("color", std::string{});
        r.depth = f.value("depth", std::string{});
        r.t_ms = f.at("t_ms").get<std::int64_t>();
        r.depth_t_ms = f.value("depth_t_ms", r.t_ms);
        s.frames.push_back(std::move(r));
      }
    }
    if (j.contains("split")) s.split = j.at("split").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(where + ": " + e.what());
  }
  if (!s.accel && s.frames.empty()) throw ValidationError(where + ": sample '" + s.id + "' has no data");
  return s;
}

inline nlohmann::json sample_to_json(const SampleRecord& s) {
  nlohmann::json j;
  j["id"] = s.id;
  j["pace"] = std::string(to_string(s.pace));
  j["covariate"] = std::string(to_string(s.covariate));
  if (s.accel) j["accel"] = s.accel->generic_string();
  if (!s.frames.empty()) {
    auto& frames = j["frames"] = nlohmann::json::array();
    for (const FrameRef& f : s.frames) {
      nlohmann::json jf = {{"color", f.color.generic_string()}, {"depth", f.depth.generic_string()}, {"t_ms", f.t_ms}};
      if (f.depth_t_ms != f.t_ms) jf["depth_t_ms"] = f.depth_t_ms;
      frames.push_back(std::move(jf));
    }
  }
  if (s.split) j["split"] = *s.split;
  return j;
}

inline nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

inline void check_exists(const std::filesystem::path& root, const std::filesystem::path& rel, const std::string& what) {
  if (!std::filesystem::is_regular_file(root / rel))
    throw ValidationError(what + ": missing file " + (root / rel).string());
}

inline void check_sample_paths(const std::filesystem::path& root, const SampleRecord& s) {
  if (s.accel) check_exists(root, *s.accel, "sample " + s.id);
  for (std::size_t i = 0; i < s.frames.size(); ++i) {
    const std::string what = "sample " + s.id + " frame " + std::to_string(i);
    if (s.frames[i].color.empty() || s.frames[i].depth.empty())
      throw ValidationError(what + ": missing color or depth member");
    check_exists(root, s.frames[i].color, what);
    check_exists(root, s.frames[i].depth, what);
  }
}

}  // namespace detail

// Loads and validates structure, id uniqueness, and that every referenced
// file exists. Contents are parsed lazily by the loaders below, or eagerly
// by verify_manifest().
inline DatasetManifest load_manifest(const std::filesystem::path& path) {
  const nlohmann::json j = detail::read_json(path);
  DatasetManifest m;
  m.root = path.parent_path();
  if (!j.is_object() || !j.contains("subjects") || !j.at("subjects").is_array())
    throw ValidationError(path.string() + ": top-level 'subjects' array required");
  std::set<std::string> subject_ids;
  std::set<std::string> sample_ids;
  for (const auto& js : j.at("subjects")) {
    SubjectRecord subj;
    try {
      subj.id = js.at("id").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(path.string() + ": " + e.what());
    }
    if (!subject_ids.insert(subj.id).second) throw ValidationError("duplicate subject id '" + subj.id + "'");
    if (js.contains("samples")) {
      for (const auto& jsample : js.at("samples")) {
        SampleRecord s = detail::sample_from_json(jsample, path.string());
        if (!sample_ids.insert(s.id).second) throw ValidationError("duplicate sample id '" + s.id + "'");
        detail::check_sample_paths(m.root, s);
        subj.samples.push_back(std::move(s));
      }
    }
    m.subjects.push_back(std::move(subj));
  }
  return m;
}

inline void save_manifest(const std::filesystem::path& path, const DatasetManifest& m) {
  nlohmann::json j;
  j["format"] = std::string(kManifestFormat);
  auto& subjects = j["subjects"] = nlohmann::json::array();
  for (const auto& subj : m.subjects) {
    nlohmann::json js;
    js["id"] = subj.id;
    auto& samples = js["samples"] = nlohmann::json::array();
    for (const auto& s : subj.samples) samples.push_back(detail::sample_to_json(s));
    subjects.push_back(std::move(js));
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(1) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

// A stand-alone sample description (same schema as a manifest sample), used
// to classify one walk. Returns the record and the directory it resolves in.
inline std::pair<SampleRecord, std::filesystem::path> load_sample_json(const std::filesystem::path& path) {
  const nlohmann::json j = detail::read_json(path);
  SampleRecord s = detail::sample_from_json(j, path.string());
  detail::check_sample_paths(path.parent_path(), s);
  return {std::move(s), path.parent_path()};
}

inline void save_sample_json(const std::filesystem::path& path, const SampleRecord& s) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << detail::sample_to_json(s).dump(1) << '\n';
}

inline std::vector<AccelSample> load_sample_accel(const std::filesystem::path& root, const SampleRecord& s) {
  if (!s.accel) return {};
  return load_accel_csv(root / *s.accel);
}

// Loads every frame pair in order; errors name the offending frame index.
inline std::vector<RgbdFrame> load_rgbd_sequence(const std::filesystem::path& root, const SampleRecord& s) {
  std::vector<RgbdFrame> frames;
  frames.reserve(s.frames.size());
  for (std::size_t i = 0; i < s.frames.size(); ++i) {
    const FrameRef& ref = s.frames[i];
    const std::string where = "sample " + s.id + " frame " + std::to_string(i);
    if (ref.color.empty() || ref.depth.empty()) throw ValidationError(where + ": missing color or depth member");
    if (ref.t_ms != ref.depth_t_ms)
      throw ValidationError(where + ": color/depth timestamps differ (" + std::to_string(ref.t_ms) + " vs " +
                            std::to_string(ref.depth_t_ms) + ")");
    if (!frames.empty() && ref.t_ms <= frames.back().t_ms)
      throw ValidationError(where + ": frame timestamps must be strictly increasing");
    RgbdFrame f;
    try {
      f.color = load_ppm(root / ref.color);
      f.depth = load_depth_pgm(root / ref.depth);
    } catch (const FormatError& e) {
      throw FormatError(where + ": " + e.what());
    } catch (const IoError& e) {
      throw IoError(where + ": " + e.what());
    }
    f.t_ms = ref.t_ms;
    frames.push_back(std::move(f));
  }
  return frames;
}

// Parses every referenced file; throws on the first failure.
inline void verify_manifest(const DatasetManifest& m) {
  for (const auto& subj : m.subjects)
    for (const auto& s : subj.samples) {
      (void)load_sample_accel(m.root, s);
      (void)load_rgbd_sequence(m.root, s);
    }
}

}  // namespace gaitforge::io
