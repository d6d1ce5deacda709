#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "htrpn/matcher.hpp"
#include "htrpn/pyramid.hpp"
#include "htrpn/rng.hpp"

using namespace htrpn;

namespace {

AnchorSet single_level_set(std::vector<Box> boxes) {
  AnchorSet set;
  const auto n = static_cast<std::int64_t>(boxes.size());
  set.boxes = std::move(boxes);
  set.tags.resize(static_cast<std::size_t>(n));
  set.levels = {{"p2", 0, n, 1, n}};
  return set;
}

double oracle_iou(const Box& a, const Box& b) {
  const double ix = std::max(0.0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
  const double iy = std::max(0.0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
  const double inter = ix * iy;
  if (inter <= 0.0) return 0.0;
  return inter / (a.area() + b.area() - inter);
}

}  // namespace

TEST_CASE("matching hand values") {
  const AnchorSet set = single_level_set({{0, 0, 10, 10}, {100, 100, 110, 110}});
  const std::vector<Box> gt{{0, 0, 10, 10}, {5, 0, 15, 10}};
  const MatchResult m = match_anchors(set, gt);
  REQUIRE(m.total() == 2);
  CHECK(m.iou[0] == 1.0);
  CHECK(m.best_gt[0] == 0);
  CHECK(m.status[0] == AnchorStatus::Active);
  CHECK(m.iou[1] == 0.0);
  CHECK(m.best_gt[1] == -1);
  CHECK(m.status[1] == AnchorStatus::Negative);
}

TEST_CASE("overlap of one third lands in the ignore band") {
  const AnchorSet set = single_level_set({{0, 0, 10, 10}});
  const std::vector<Box> gt{{5, 0, 15, 10}};
  const MatchResult m = match_anchors(set, gt);
  CHECK(m.iou[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(m.best_gt[0] == 0);
  CHECK(m.status[0] == AnchorStatus::Ignore);
}

TEST_CASE("no ground truth means every anchor is negative") {
  const AnchorSet set = generate_anchors(default_pyramid_spec(), 64, 64);
  const MatchResult m = match_anchors(set, {});
  CHECK(m.total() == set.total());
  for (std::int64_t i = 0; i < m.total(); ++i) {
    const auto id = static_cast<std::size_t>(i);
    CHECK(m.iou[id] == 0.0);
    CHECK(m.best_gt[id] == -1);
    CHECK(m.status[id] == AnchorStatus::Negative);
  }
  CHECK(m.levels.size() == set.levels.size());
}

TEST_CASE("thresholds compare strictly") {
  const AnchorSet set = single_level_set({{0, 0, 10, 10}});
  const std::vector<Box> gt{{5, 0, 15, 10}};
  const double v = match_anchors(set, gt).iou[0];

  // iou == t_pos is not Active, iou == t_neg is not Negative.
  CHECK(match_anchors(set, gt, v, 0.1).status[0] == AnchorStatus::Ignore);
  CHECK(match_anchors(set, gt, 0.9, v).status[0] == AnchorStatus::Ignore);
  CHECK(match_anchors(set, gt, 0.9, std::nextafter(v, 1.0)).status[0] ==
        AnchorStatus::Negative);
  CHECK(match_anchors(set, gt, std::nextafter(v, 0.0), 0.1).status[0] ==
        AnchorStatus::Active);
}

TEST_CASE("best ground truth ties keep the lowest index") {
  const AnchorSet set = single_level_set({{0, 0, 10, 10}});
  const std::vector<Box> twins{{0, 0, 10, 10}, {0, 0, 10, 10}};
  CHECK(match_anchors(set, twins).best_gt[0] == 0);

  const std::vector<Box> mirrored{{-5, 0, 5, 10}, {5, 0, 15, 10}};
  const MatchResult m = match_anchors(set, mirrored);
  CHECK(m.iou[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(m.best_gt[0] == 0);
}

TEST_CASE("threshold validation") {
  const AnchorSet set = single_level_set({{0, 0, 10, 10}});
  CHECK_THROWS_AS(match_anchors(set, {}, 0.3, 0.7), std::invalid_argument);
  CHECK_THROWS_AS(match_anchors(set, {}, 1.2, 0.3), std::invalid_argument);
  CHECK_THROWS_AS(match_anchors(set, {}, 0.7, -0.1), std::invalid_argument);
}

TEST_CASE("agreement with a brute-force oracle on random scenes") {
  const AnchorSet set = generate_anchors(default_pyramid_spec(), 32, 32);
  REQUIRE(set.total() <= 1000);
  Rng rng(21);
  for (int scene = 0; scene < 50; ++scene) {
    const auto n_gt = static_cast<std::size_t>(rng.uniform_int(0, 20));
    std::vector<Box> gt;
    for (std::size_t g = 0; g < n_gt; ++g) {
      const double x1 = rng.uniform(-20.0, 40.0);
      const double y1 = rng.uniform(-20.0, 40.0);
      gt.push_back({x1, y1, x1 + rng.uniform(1.0, 40.0), y1 + rng.uniform(1.0, 40.0)});
    }
    const MatchResult m = match_anchors(set, gt);
    for (std::int64_t id = 0; id < set.total(); ++id) {
      double best = 0.0;
      std::int64_t best_gt = -1;
      for (std::size_t g = 0; g < gt.size(); ++g) {
        const double v = oracle_iou(set.boxes[static_cast<std::size_t>(id)], gt[g]);
        if (v > best) {
          best = v;
          best_gt = static_cast<std::int64_t>(g);
        }
      }
      AnchorStatus status = AnchorStatus::Ignore;
      if (best > 0.7) status = AnchorStatus::Active;
      if (best < 0.3) status = AnchorStatus::Negative;
      const auto i = static_cast<std::size_t>(id);
      CHECK(m.iou[i] == doctest::Approx(best).epsilon(1e-12));
      CHECK(m.best_gt[i] == best_gt);
      CHECK(m.status[i] == status);
    }
  }
}

TEST_CASE("status sets move monotonically with the thresholds") {
  const AnchorSet set = generate_anchors(default_pyramid_spec(), 64, 64);
  Rng rng(22);
  std::vector<Box> gt;
  for (int g = 0; g < 8; ++g) {
    const double x1 = rng.uniform(0.0, 48.0);
    const double y1 = rng.uniform(0.0, 48.0);
    gt.push_back({x1, y1, x1 + rng.uniform(4.0, 40.0), y1 + rng.uniform(4.0, 40.0)});
  }
  const MatchResult loose = match_anchors(set, gt, 0.5, 0.3);
  const MatchResult strict = match_anchors(set, gt, 0.7, 0.3);
  const MatchResult narrow = match_anchors(set, gt, 0.7, 0.2);
  std::int64_t counts[3] = {0, 0, 0};
  for (std::int64_t i = 0; i < set.total(); ++i) {
    const auto id = static_cast<std::size_t>(i);
    ++counts[static_cast<int>(strict.status[id])];
    if (strict.status[id] == AnchorStatus::Active)
      CHECK(loose.status[id] == AnchorStatus::Active);
    if (narrow.status[id] == AnchorStatus::Negative)
      CHECK(strict.status[id] == AnchorStatus::Negative);
  }
  CHECK(counts[0] + counts[1] + counts[2] == set.total());
}
