#include "htrpn/ternary.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace htrpn {

std::vector<int> assign_ternary(const SampledBatch& batch,
                                std::span<const std::vector<double>> scores,
                                double thre_cls,
                                std::optional<std::size_t> background_index) {
  if (!(thre_cls >= 0.0 && thre_cls <= 1.0)) {
    throw std::invalid_argument("assign_ternary: thre_cls must lie in [0, 1]");
  }
  if (scores.size() != batch.negatives.size()) {
    throw std::invalid_argument("assign_ternary: one score vector per negative required");
  }

  std::vector<int> labels;
  labels.reserve(batch.positives.size() + batch.negatives.size());
  labels.insert(labels.end(), batch.positives.size(), kLabelPositive);

  for (const auto& row : scores) {
    double best = 0.0;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (background_index && *background_index == c) continue;
      if (!(row[c] >= 0.0 && row[c] <= 1.0)) {
        throw std::invalid_argument("assign_ternary: class scores must lie in [0, 1]");
      }
      best = std::max(best, row[c]);
    }
    labels.push_back(best > thre_cls ? kLabelPotentialNovel : kLabelTrueNegative);
  }
  return labels;
}

std::string combine_op_name(CombineOp op) {
  return op == CombineOp::Max ? "max" : "sum";
}

CombineOp combine_op_from_name(const std::string& name) {
  if (name == "max") return CombineOp::Max;
  if (name == "sum") return CombineOp::Sum;
  throw std::invalid_argument("unknown combine op: " + name);
}

double combined_objectness(const std::array<double, 3>& logits, CombineOp op) {
  return op == CombineOp::Max ? std::max(logits[1], logits[2])
                              : logits[1] + logits[2];
}

double ranking_score(const Proposal& p, RankStage stage, CombineOp op) {
  // Before label 2 is trained, only the positive logit carries signal.
  if (stage == RankStage::PreTrain) return p.tobj_logits[1];
  return combined_objectness(p.tobj_logits, op);
}

std::vector<std::size_t> rank_proposals(std::span<const Proposal> proposals,
                                        RankStage stage, std::size_t k,
                                        CombineOp op) {
  std::vector<std::size_t> order(proposals.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ranking_score(proposals[a], stage, op) >
           ranking_score(proposals[b], stage, op);
  });
  if (order.size() > k) order.resize(k);
  return order;
}

}  // namespace htrpn
