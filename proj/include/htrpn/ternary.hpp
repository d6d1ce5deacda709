#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "htrpn/geometry.hpp"
#include "htrpn/sampler.hpp"

namespace htrpn {

// Three-way objectness labels.
//   0: true negative (background stays background)
//   1: positive (matched to an annotated box)
//   2: potential novel (sampled negative whose classifier is nonetheless
//      confident about some foreground class)
inline constexpr int kLabelTrueNegative = 0;
inline constexpr int kLabelPositive = 1;
inline constexpr int kLabelPotentialNovel = 2;

struct Proposal {
  Box bbox_c;
  std::array<double, 3> tobj_logits{0.0, 0.0, 0.0};
  double iou_gt_p = 0.0;               // best IoU against annotated boxes
  std::vector<double> class_scores;    // per-class confidence in [0, 1]
};

struct Detection {
  std::int64_t class_index = -1;
  double confidence = 0.0;
  Box bbox_r;
};

enum class RankStage { PreTrain, FineTune };
enum class CombineOp { Max, Sum };

std::string combine_op_name(CombineOp op);
CombineOp combine_op_from_name(const std::string& name);

// Labels for a sampled batch, positives first then negatives, in batch order.
// `scores[i]` holds the per-class confidences for negative i; a negative is
// upgraded to label 2 when its best foreground score strictly exceeds
// `thre_cls`. `background_index`, when set, excludes that column from the max.
std::vector<int> assign_ternary(const SampledBatch& batch,
                                std::span<const std::vector<double>> scores,
                                double thre_cls = 0.75,
                                std::optional<std::size_t> background_index = std::nullopt);

// Objectness used for ranking once label-2 exists: either max or sum of the
// positive and potential-novel logits.
double combined_objectness(const std::array<double, 3>& logits, CombineOp op);

double ranking_score(const Proposal& p, RankStage stage, CombineOp op);

// Indices of the top-k proposals, best first. Equal scores keep input order.
std::vector<std::size_t> rank_proposals(std::span<const Proposal> proposals,
                                        RankStage stage,
                                        std::size_t k = 1000,
                                        CombineOp op = CombineOp::Max);

}  // namespace htrpn
