#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "htrpn/geometry.hpp"
#include "htrpn/pyramid.hpp"

namespace htrpn {

struct CocoImage {
  std::int64_t id = 0;
  double width = 0.0;
  double height = 0.0;
};

// A labeled (base-category) annotation. `bbox_xywh` keeps the file's exact
// values so re-serialization is lossless; `box` is the corner form.
struct CocoAnnotation {
  std::int64_t id = 0;
  std::int64_t image_id = 0;
  std::int64_t category_id = 0;
  std::array<double, 4> bbox_xywh{};
  Box box;
};

// A held-out-category instance with its label stripped.
struct NovelBox {
  std::int64_t image_id = 0;
  std::array<double, 4> bbox_xywh{};
  Box box;
};

struct CategorySplit {
  std::set<std::int64_t> base;
  std::set<std::int64_t> heldout;

  void validate() const;  // sets must be disjoint
  bool is_heldout(std::int64_t category_id) const { return heldout.count(category_id) > 0; }
};

struct Dataset {
  std::vector<CocoImage> images;  // sorted by id
  std::vector<CocoAnnotation> annotations;
  std::vector<NovelBox> novel;
  CategorySplit split;
  std::map<std::int64_t, std::string> category_names;
};

// Parse `{"base": [...], "heldout": [...]}`.
CategorySplit load_split(const std::string& path);

// Standard COCO annotation JSON. Annotations of held-out categories move to
// the unlabeled-novel list; everything else stays labeled. Malformed JSON
// reports the byte offset; annotations referencing missing images are
// collected and reported together.
Dataset load_coco(const std::string& path, const CategorySplit& split);

// Per image-level anchor statistics against labeled boxes only.
struct PoolRow {
  std::int64_t image_id = 0;
  std::string level;
  std::int64_t stride = 0;
  std::int64_t total_anchors = 0;
  std::int64_t negative_pool = 0;
  std::int64_t active_count = 0;
  std::int64_t ignore_count = 0;
};

struct ImageSummary {
  std::int64_t image_id = 0;
  std::int64_t total_anchors = 0;
  std::int64_t negative_total = 0;
  std::int64_t labeled_boxes = 0;
  std::int64_t novel_boxes = 0;
  bool novel_feasible = false;  // any anchor reaches the IoU bar on a novel box
};

struct PoolStats {
  std::vector<PoolRow> rows;          // images ascending, levels low to high
  std::vector<ImageSummary> images;
  std::vector<std::string> level_names;
  std::vector<double> mean_negative_per_level;
  std::vector<std::int64_t> min_negative_per_level;
  std::vector<std::int64_t> max_negative_per_level;
  // Per level, a 10-bin histogram of negative-pool sizes over images,
  // bins spanning [0, per-level max].
  std::vector<std::array<std::int64_t, 10>> negative_histograms;
  std::int64_t feasible_images = 0;
  std::int64_t total_images = 0;
  double feasibility_iou = 0.3;
};

PoolStats pool_stats(const Dataset& ds, const PyramidSpec& spec,
                     double feasibility_iou = 0.3);

}  // namespace htrpn
