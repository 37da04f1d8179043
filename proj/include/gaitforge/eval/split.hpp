#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "gaitforge/core/error.hpp"
#include "gaitforge/core/rng.hpp"

namespace gaitforge::eval {

struct SplitSpec {
  double train_fraction = 0.3;
  std::uint64_t seed = 0;
};

// Sample indices, ascending within each partition.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

inline std::size_t train_count(double fraction, std::size_t m) {
  const auto n = static_cast<long>(std::lround(fraction * static_cast<double>(m)));
  return static_cast<std::size_t>(std::clamp<long>(n, 1, static_cast<long>(m) - 1));
}

// Stratified by subject: each subject with m samples contributes
// clamp(round(f * m), 1, m - 1) training samples chosen uniformly.
inline Split stratified_split(std::span<const std::size_t> subject_of, std::size_t subjects, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
    throw ValidationError("split: training fraction must be in (0, 1)");
  std::vector<std::vector<std::size_t>> by_subject(subjects);
  for (std::size_t i = 0; i < subject_of.size(); ++i) {
    if (subject_of[i] >= subjects) throw ValidationError("split: subject index out of range");
    by_subject[subject_of[i]].push_back(i);
  }
  const Rng root(spec.seed);
  Split split;
  for (std::size_t s = 0; s < subjects; ++s) {
    auto& idx = by_subject[s];
    if (idx.size() < 2)
      throw ValidationError("split infeasible: subject " + std::to_string(s) + " has " + std::to_string(idx.size()) +
                            " sample(s), need at least 2");
    Rng rng = root.split(s);
    rng.shuffle(std::span<std::size_t>(idx));
    const std::size_t n = train_count(spec.train_fraction, idx.size());
    split.train.insert(split.train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n));
    split.test.insert(split.test.end(), idx.begin() + static_cast<std::ptrdiff_t>(n), idx.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

}  // namespace gaitforge::eval
