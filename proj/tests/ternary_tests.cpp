#include <doctest.h>

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "htrpn/rng.hpp"
#include "htrpn/ternary.hpp"

using namespace htrpn;

namespace {

SampledBatch batch_of(std::size_t positives, std::size_t negatives) {
  SampledBatch b;
  for (std::size_t i = 0; i < positives; ++i)
    b.positives.push_back(static_cast<std::int64_t>(i));
  for (std::size_t i = 0; i < negatives; ++i)
    b.negatives.push_back(static_cast<std::int64_t>(1000 + i));
  return b;
}

Proposal with_logits(double l0, double l1, double l2) {
  Proposal p;
  p.tobj_logits = {l0, l1, l2};
  return p;
}

}  // namespace

TEST_CASE("label assignment hand values") {
  const SampledBatch batch = batch_of(2, 3);
  const std::vector<std::vector<double>> scores{
      {0.1, 0.8, 0.05},   // best 0.8 > 0.75 -> potential novel
      {0.2, 0.75, 0.1},   // best == threshold -> stays negative
      {0.0, 0.0, 0.0},
  };
  const std::vector<int> labels = assign_ternary(batch, scores, 0.75);
  CHECK(labels == std::vector<int>{1, 1, 2, 0, 0});
}

TEST_CASE("background column can be excluded from the gate") {
  const SampledBatch batch = batch_of(0, 2);
  const std::vector<std::vector<double>> scores{
      {0.9, 0.1, 0.2},  // 0.9 sits in the background column
      {0.1, 0.9, 0.2},
  };
  CHECK(assign_ternary(batch, scores, 0.75, 0) == std::vector<int>{0, 2});
  CHECK(assign_ternary(batch, scores, 0.75) == std::vector<int>{2, 2});
}

TEST_CASE("label assignment validates its inputs") {
  const SampledBatch batch = batch_of(1, 2);
  const std::vector<std::vector<double>> short_scores{{0.1}};
  CHECK_THROWS_AS(assign_ternary(batch, short_scores), std::invalid_argument);

  const std::vector<std::vector<double>> bad_range{{0.5}, {1.2}};
  CHECK_THROWS_AS(assign_ternary(batch, bad_range), std::invalid_argument);
  const std::vector<std::vector<double>> negative{{0.5}, {-0.1}};
  CHECK_THROWS_AS(assign_ternary(batch, negative), std::invalid_argument);

  const std::vector<std::vector<double>> fine{{0.5}, {0.4}};
  CHECK_THROWS_AS(assign_ternary(batch, fine, 1.5), std::invalid_argument);
}

TEST_CASE("raising the threshold only removes label 2") {
  Rng rng(51);
  const SampledBatch batch = batch_of(0, 500);
  std::vector<std::vector<double>> scores;
  for (int i = 0; i < 500; ++i) {
    std::vector<double> row;
    for (int c = 0; c < 4; ++c) row.push_back(rng.real01());
    scores.push_back(row);
  }
  const std::vector<int> low = assign_ternary(batch, scores, 0.5);
  const std::vector<int> high = assign_ternary(batch, scores, 0.9);
  for (std::size_t i = 0; i < low.size(); ++i) {
    if (high[i] == kLabelPotentialNovel) CHECK(low[i] == kLabelPotentialNovel);
    // The gate is the indicator max(scores) > threshold.
    const double best = *std::max_element(scores[i].begin(), scores[i].end());
    CHECK(low[i] == (best > 0.5 ? 2 : 0));
    CHECK(high[i] == (best > 0.9 ? 2 : 0));
  }
}

TEST_CASE("combined objectness hand values") {
  CHECK(combined_objectness({0.0, 2.0, -3.0}, CombineOp::Max) == 2.0);
  CHECK(combined_objectness({0.0, 2.0, -3.0}, CombineOp::Sum) == -1.0);
  CHECK(combined_objectness({0.0, 1.0, 1.0}, CombineOp::Max) == 1.0);
  CHECK(combined_objectness({0.0, 1.0, 1.0}, CombineOp::Sum) == 2.0);
  // The first logit never participates.
  CHECK(combined_objectness({5.0, -1.0, -1.0}, CombineOp::Max) == -1.0);
}

TEST_CASE("ranking differs between stages and operators") {
  const std::vector<Proposal> proposals{
      with_logits(0.0, 2.0, -3.0),   // A
      with_logits(0.0, -1.0, 3.5),   // B
      with_logits(0.0, 1.0, 1.0),    // C
  };

  const auto fine_max = rank_proposals(proposals, RankStage::FineTune, 2);
  CHECK(fine_max == std::vector<std::size_t>{1, 0});

  const auto fine_sum =
      rank_proposals(proposals, RankStage::FineTune, 2, CombineOp::Sum);
  CHECK(fine_sum == std::vector<std::size_t>{1, 2});

  // Pre-training ranks by the positive logit alone.
  const auto pre = rank_proposals(proposals, RankStage::PreTrain, 3);
  CHECK(pre == std::vector<std::size_t>{0, 2, 1});

  const std::vector<Proposal> pair{with_logits(0.0, 1.0, 9.0),
                                   with_logits(0.0, 2.0, 0.0)};
  CHECK(rank_proposals(pair, RankStage::PreTrain, 2) ==
        std::vector<std::size_t>{1, 0});
  CHECK(rank_proposals(pair, RankStage::FineTune, 2) ==
        std::vector<std::size_t>{0, 1});
}

TEST_CASE("ranking keeps input order on ties and clamps k") {
  const std::vector<Proposal> proposals{
      with_logits(0, 1, 0), with_logits(0, 1, 0), with_logits(0, 0, 1)};
  const auto order = rank_proposals(proposals, RankStage::FineTune, 10);
  CHECK(order == std::vector<std::size_t>{0, 1, 2});
  CHECK(rank_proposals(proposals, RankStage::FineTune, 0).empty());
  CHECK(rank_proposals({}, RankStage::FineTune, 5).empty());
}

TEST_CASE("ranking order is invariant under positive affine score maps") {
  Rng rng(52);
  std::vector<Proposal> proposals;
  for (int i = 0; i < 200; ++i)
    proposals.push_back(
        with_logits(rng.normal(0, 1), rng.normal(0, 1), rng.normal(0, 1)));
  const double a = 2.5;
  const double b = -7.0;
  std::vector<Proposal> mapped = proposals;
  for (Proposal& p : mapped)
    for (double& v : p.tobj_logits) v = a * v + b;

  for (CombineOp op : {CombineOp::Max, CombineOp::Sum}) {
    for (RankStage stage : {RankStage::PreTrain, RankStage::FineTune}) {
      CHECK(rank_proposals(proposals, stage, proposals.size(), op) ==
            rank_proposals(mapped, stage, mapped.size(), op));
    }
  }
}

TEST_CASE("a dominant novel logit wins under max") {
  Rng rng(53);
  std::vector<Proposal> proposals;
  for (int i = 0; i < 64; ++i)
    proposals.push_back(
        with_logits(rng.normal(0, 1), rng.uniform(-4, 2), rng.uniform(-4, 2)));
  proposals[17].tobj_logits = {0.0, -5.0, 10.0};
  const auto order = rank_proposals(proposals, RankStage::FineTune, 1);
  CHECK(order == std::vector<std::size_t>{17});
  // ...but not during pre-training, where the novel logit is invisible.
  CHECK(rank_proposals(proposals, RankStage::PreTrain, 1) !=
        std::vector<std::size_t>{17});
}

TEST_CASE("combine op names") {
  CHECK(combine_op_name(CombineOp::Max) == "max");
  CHECK(combine_op_name(CombineOp::Sum) == "sum");
  CHECK(combine_op_from_name("max") == CombineOp::Max);
  CHECK(combine_op_from_name("sum") == CombineOp::Sum);
  CHECK_THROWS_AS(combine_op_from_name("avg"), std::invalid_argument);
}
