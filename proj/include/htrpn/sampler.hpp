#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "htrpn/matcher.hpp"

namespace htrpn {

enum class Strategy { Random, HSamp };

std::string strategy_name(Strategy s);
Strategy strategy_from_name(const std::string& name);

struct SampleConfig {
  std::int64_t batch_size = 256;
  std::int64_t positive_cap = 128;
  Strategy strategy = Strategy::HSamp;
  std::uint64_t seed = 0;

  void validate() const;  // positive_cap <= batch_size, both >= 0
};

// Per-level pools of anchor ids eligible as negatives. Building the pools
// once lets repeated draws (Monte-Carlo loops) skip the full-match scan.
struct NegativePools {
  std::vector<std::string> level_names;
  std::vector<std::vector<std::int64_t>> per_level;

  static NegativePools from_match(const MatchResult& match);
  // Synthetic pools with the given sizes and consecutive ids; used to study
  // the samplers on stated pool layouts without building an anchor grid.
  static NegativePools from_sizes(std::span<const std::int64_t> sizes);

  std::int64_t total() const;
};

struct NegativeSample {
  std::vector<std::int64_t> ids;           // sorted, no duplicates
  std::vector<std::int64_t> per_level;     // counts aligned with the pools
};

// Uniform draw without replacement across all levels pooled together.
NegativeSample sample_random(const NegativePools& pools, std::int64_t m,
                             std::uint64_t seed);
// Balanced draw: floor(m/L) per level, remainder to the lowest levels first;
// deficits from short pools redistribute round-robin to levels with capacity.
NegativeSample sample_hsamp(const NegativePools& pools, std::int64_t m,
                            std::uint64_t seed);

NegativeSample sample_random(const MatchResult& match, std::int64_t m,
                             std::uint64_t seed);
NegativeSample sample_hsamp(const MatchResult& match, std::int64_t m,
                            std::uint64_t seed);

struct SampledBatch {
  std::vector<std::int64_t> positives;  // sorted anchor ids, status Active
  std::vector<std::int64_t> negatives;  // sorted anchor ids, status Negative
  std::vector<std::int64_t> per_level_negatives;

  std::int64_t size() const {
    return static_cast<std::int64_t>(positives.size() + negatives.size());
  }
};

// Positives: uniform min(|Active|, positive_cap); negatives fill the rest of
// the batch under cfg.strategy. Positive draws depend only on (match, seed),
// so runs that differ in strategy alone stay paired.
SampledBatch sample_batch(const MatchResult& match, const SampleConfig& cfg);

}  // namespace htrpn
