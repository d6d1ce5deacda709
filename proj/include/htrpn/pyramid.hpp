#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "htrpn/geometry.hpp"

namespace htrpn {

struct LevelSpec {
  std::string name;                   // p2 .. p6
  int stride = 0;                     // pixels per feature cell
  double base_size = 0.0;             // anchor side at aspect ratio 1
  std::vector<double> aspect_ratios;  // width / height, 3 per level
};

struct PyramidSpec {
  std::vector<LevelSpec> levels;

  // Increasing strides, positive sizes, exactly 3 ratios per level.
  // Throws std::invalid_argument otherwise.
  void validate() const;
};

// Strides 4..64, base sizes 32..512, ratios (0.5, 1, 2) on p2..p6.
PyramidSpec default_pyramid_spec();

struct FeatureShape {
  std::int64_t h = 0;
  std::int64_t w = 0;
};

// Ceiling division of the image extent by the stride.
FeatureShape feature_shape(std::int64_t image_w, std::int64_t image_h, int stride);

struct AnchorTag {
  std::int32_t level = 0;
  std::int32_t row = 0;
  std::int32_t col = 0;
  std::int32_t anchor = 0;  // index into the level's aspect ratios
};

struct LevelRange {
  std::string name;
  std::int64_t begin = 0;  // flat anchor id range [begin, end)
  std::int64_t end = 0;
  std::int64_t feat_h = 0;
  std::int64_t feat_w = 0;

  std::int64_t count() const { return end - begin; }
};

// Flat anchor store; per-level slices addressed through `levels`.
struct AnchorSet {
  std::vector<Box> boxes;
  std::vector<AnchorTag> tags;
  std::vector<LevelRange> levels;

  std::int64_t total() const { return static_cast<std::int64_t>(boxes.size()); }
  int level_of(std::int64_t id) const;
};

// 3 anchors per feature cell, centered at (cell + 0.5) * stride, area
// base_size^2, one per aspect ratio. Anchors are not clipped to the image.
AnchorSet generate_anchors(const PyramidSpec& spec, std::int64_t image_w,
                           std::int64_t image_h);

}  // namespace htrpn
