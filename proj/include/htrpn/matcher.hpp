#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "htrpn/geometry.hpp"
#include "htrpn/pyramid.hpp"

namespace htrpn {

enum class AnchorStatus : std::uint8_t { Negative = 0, Active = 1, Ignore = 2 };

// Per-anchor max ground-truth IoU, best ground-truth index and status.
// Carries the level ranges so samplers need no separate AnchorSet handle.
struct MatchResult {
  std::vector<double> iou;             // max over ground truth
  std::vector<std::int64_t> best_gt;   // -1 when there is no overlap
  std::vector<AnchorStatus> status;
  std::vector<LevelRange> levels;

  std::int64_t total() const { return static_cast<std::int64_t>(iou.size()); }
};

// Strict thresholds: Active iff iou > t_pos, Negative iff iou < t_neg,
// Ignore in between. Ties in best_gt go to the lowest ground-truth index.
// Throws std::invalid_argument unless 0 <= t_neg <= t_pos <= 1.
MatchResult match_anchors(const AnchorSet& anchors, std::span<const Box> gt,
                          double t_pos = 0.7, double t_neg = 0.3);

}  // namespace htrpn
