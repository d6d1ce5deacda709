#include "htrpn/matcher.hpp"

#include <stdexcept>

namespace htrpn {

MatchResult match_anchors(const AnchorSet& anchors, std::span<const Box> gt,
                          double t_pos, double t_neg) {
  if (!(t_neg >= 0.0 && t_neg <= t_pos && t_pos <= 1.0)) {
    throw std::invalid_argument("match_anchors: need 0 <= t_neg <= t_pos <= 1");
  }
  const std::size_t n = anchors.boxes.size();
  MatchResult res;
  res.iou.assign(n, 0.0);
  res.best_gt.assign(n, -1);
  res.status.assign(n, AnchorStatus::Negative);
  res.levels = anchors.levels;

  for (std::size_t g = 0; g < gt.size(); ++g) {
    const Box& b = gt[g];
    for (std::size_t a = 0; a < n; ++a) {
      const double v = iou(anchors.boxes[a], b);
      if (v > res.iou[a]) {  // strict keeps the lowest index on ties
        res.iou[a] = v;
        res.best_gt[a] = static_cast<std::int64_t>(g);
      }
    }
  }
  for (std::size_t a = 0; a < n; ++a) {
    const double v = res.iou[a];
    res.status[a] = v > t_pos   ? AnchorStatus::Active
                    : v < t_neg ? AnchorStatus::Negative
                                : AnchorStatus::Ignore;
  }
  return res;
}

}  // namespace htrpn
