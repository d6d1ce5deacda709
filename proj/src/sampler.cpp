#include "htrpn/sampler.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include "htrpn/rng.hpp"

namespace htrpn {

std::string strategy_name(Strategy s) {
  return s == Strategy::Random ? "random" : "hsamp";
}

Strategy strategy_from_name(const std::string& name) {
  if (name == "random") return Strategy::Random;
  if (name == "hsamp") return Strategy::HSamp;
  throw std::invalid_argument("unknown strategy: " + name);
}

void SampleConfig::validate() const {
  if (batch_size < 0 || positive_cap < 0) {
    throw std::invalid_argument("SampleConfig: sizes must be non-negative");
  }
  if (positive_cap > batch_size) {
    throw std::invalid_argument("SampleConfig: positive_cap exceeds batch_size");
  }
}

NegativePools NegativePools::from_match(const MatchResult& match) {
  NegativePools pools;
  pools.level_names.reserve(match.levels.size());
  pools.per_level.resize(match.levels.size());
  for (std::size_t l = 0; l < match.levels.size(); ++l) {
    const auto& range = match.levels[l];
    pools.level_names.push_back(range.name);
    auto& pool = pools.per_level[l];
    for (std::int64_t id = range.begin; id < range.end; ++id) {
      if (match.status[static_cast<std::size_t>(id)] == AnchorStatus::Negative) {
        pool.push_back(id);
      }
    }
  }
  return pools;
}

NegativePools NegativePools::from_sizes(std::span<const std::int64_t> sizes) {
  NegativePools pools;
  std::int64_t next_id = 0;
  for (std::size_t l = 0; l < sizes.size(); ++l) {
    pools.level_names.push_back("p" + std::to_string(l + 2));
    std::vector<std::int64_t> pool(static_cast<std::size_t>(sizes[l]));
    std::iota(pool.begin(), pool.end(), next_id);
    next_id += sizes[l];
    pools.per_level.push_back(std::move(pool));
  }
  return pools;
}

std::int64_t NegativePools::total() const {
  std::int64_t t = 0;
  for (const auto& p : per_level) t += static_cast<std::int64_t>(p.size());
  return t;
}

namespace {

// Floyd's uniform m-subset of [0, n); O(m) draws, no pool copy.
std::vector<std::int64_t> floyd_subset(std::int64_t n, std::int64_t m, Rng& rng) {
  std::unordered_set<std::int64_t> chosen;
  chosen.reserve(static_cast<std::size_t>(m) * 2 + 1);
  for (std::int64_t j = n - m; j < n; ++j) {
    const auto t = static_cast<std::int64_t>(rng.bounded(static_cast<std::uint64_t>(j) + 1));
    chosen.insert(chosen.count(t) ? j : t);
  }
  std::vector<std::int64_t> out(chosen.begin(), chosen.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::int64_t> draw_from_pool(const std::vector<std::int64_t>& pool,
                                         std::int64_t m, Rng& rng) {
  const auto n = static_cast<std::int64_t>(pool.size());
  if (m >= n) return pool;  // exhaustive draw, pools are already sorted
  std::vector<std::int64_t> out;
  out.reserve(static_cast<std::size_t>(m));
  for (std::int64_t pos : floyd_subset(n, m, rng)) {
    out.push_back(pool[static_cast<std::size_t>(pos)]);
  }
  return out;
}

}  // namespace

NegativeSample sample_random(const NegativePools& pools, std::int64_t m,
                             std::uint64_t seed) {
  if (m < 0) throw std::invalid_argument("sample_random: m must be >= 0");
  const std::int64_t n = pools.total();
  const std::int64_t take = std::min(m, n);
  const std::size_t num_levels = pools.per_level.size();

  // Offsets of each level inside the conceptual flat pool.
  std::vector<std::int64_t> offset(num_levels + 1, 0);
  for (std::size_t l = 0; l < num_levels; ++l) {
    offset[l + 1] = offset[l] + static_cast<std::int64_t>(pools.per_level[l].size());
  }

  Rng rng(seed);
  NegativeSample sample;
  sample.per_level.assign(num_levels, 0);
  sample.ids.reserve(static_cast<std::size_t>(take));
  for (std::int64_t flat : floyd_subset(n, take, rng)) {
    const auto l = static_cast<std::size_t>(
        std::upper_bound(offset.begin(), offset.end(), flat) - offset.begin() - 1);
    sample.ids.push_back(pools.per_level[l][static_cast<std::size_t>(flat - offset[l])]);
    ++sample.per_level[l];
  }
  std::sort(sample.ids.begin(), sample.ids.end());
  return sample;
}

NegativeSample sample_hsamp(const NegativePools& pools, std::int64_t m,
                            std::uint64_t seed) {
  if (m < 0) throw std::invalid_argument("sample_hsamp: m must be >= 0");
  const auto num_levels = static_cast<std::int64_t>(pools.per_level.size());
  NegativeSample sample;
  sample.per_level.assign(static_cast<std::size_t>(num_levels), 0);
  if (num_levels == 0 || m == 0) return sample;

  // Equal quotas, remainder one each to the lowest levels.
  std::vector<std::int64_t> take(static_cast<std::size_t>(num_levels));
  const std::int64_t base = m / num_levels;
  const std::int64_t rem = m % num_levels;
  std::int64_t deficit = 0;
  for (std::int64_t l = 0; l < num_levels; ++l) {
    const std::int64_t quota = base + (l < rem ? 1 : 0);
    const auto cap = static_cast<std::int64_t>(pools.per_level[static_cast<std::size_t>(l)].size());
    take[static_cast<std::size_t>(l)] = std::min(quota, cap);
    deficit += quota - take[static_cast<std::size_t>(l)];
  }
  // Short pools hand their quota back one anchor at a time, cycling from the
  // lowest level, so the final counts stay as even as capacity allows.
  while (deficit > 0) {
    bool progressed = false;
    for (std::int64_t l = 0; l < num_levels && deficit > 0; ++l) {
      const auto cap = static_cast<std::int64_t>(pools.per_level[static_cast<std::size_t>(l)].size());
      if (take[static_cast<std::size_t>(l)] < cap) {
        ++take[static_cast<std::size_t>(l)];
        --deficit;
        progressed = true;
      }
    }
    if (!progressed) break;  // every pool exhausted
  }

  Rng rng(seed);
  for (std::int64_t l = 0; l < num_levels; ++l) {
    auto drawn = draw_from_pool(pools.per_level[static_cast<std::size_t>(l)],
                                take[static_cast<std::size_t>(l)], rng);
    sample.per_level[static_cast<std::size_t>(l)] = static_cast<std::int64_t>(drawn.size());
    sample.ids.insert(sample.ids.end(), drawn.begin(), drawn.end());
  }
  std::sort(sample.ids.begin(), sample.ids.end());
  return sample;
}

NegativeSample sample_random(const MatchResult& match, std::int64_t m,
                             std::uint64_t seed) {
  return sample_random(NegativePools::from_match(match), m, seed);
}

NegativeSample sample_hsamp(const MatchResult& match, std::int64_t m,
                            std::uint64_t seed) {
  return sample_hsamp(NegativePools::from_match(match), m, seed);
}

SampledBatch sample_batch(const MatchResult& match, const SampleConfig& cfg) {
  cfg.validate();
  std::vector<std::int64_t> actives;
  for (std::int64_t id = 0; id < match.total(); ++id) {
    if (match.status[static_cast<std::size_t>(id)] == AnchorStatus::Active) {
      actives.push_back(id);
    }
  }

  SampledBatch batch;
  {
    Rng rng(derive_seed(cfg.seed, kSaltPositives));
    const std::int64_t want = std::min<std::int64_t>(
        cfg.positive_cap, static_cast<std::int64_t>(actives.size()));
    batch.positives = draw_from_pool(actives, want, rng);
  }

  const std::int64_t m = cfg.batch_size - static_cast<std::int64_t>(batch.positives.size());
  const std::uint64_t neg_seed = derive_seed(cfg.seed, kSaltNegatives);
  auto negs = cfg.strategy == Strategy::Random ? sample_random(match, m, neg_seed)
                                               : sample_hsamp(match, m, neg_seed);
  batch.negatives = std::move(negs.ids);
  batch.per_level_negatives = std::move(negs.per_level);
  return batch;
}

}  // namespace htrpn
