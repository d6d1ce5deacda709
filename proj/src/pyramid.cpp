#include "htrpn/pyramid.hpp"

#include <cmath>
#include <stdexcept>

namespace htrpn {

void PyramidSpec::validate() const {
  if (levels.empty()) {
    throw std::invalid_argument("PyramidSpec: no levels");
  }
  int prev_stride = 0;
  for (const auto& lv : levels) {
    if (lv.stride <= 0) {
      throw std::invalid_argument("PyramidSpec: stride must be positive (" + lv.name + ")");
    }
    if (lv.stride <= prev_stride) {
      throw std::invalid_argument("PyramidSpec: strides must be strictly increasing");
    }
    prev_stride = lv.stride;
    if (lv.base_size <= 0.0) {
      throw std::invalid_argument("PyramidSpec: base_size must be positive (" + lv.name + ")");
    }
    if (lv.aspect_ratios.size() != 3) {
      throw std::invalid_argument("PyramidSpec: expected 3 aspect ratios per level (" +
                                  lv.name + ")");
    }
    for (double r : lv.aspect_ratios) {
      if (r <= 0.0) {
        throw std::invalid_argument("PyramidSpec: aspect ratios must be positive");
      }
    }
  }
}

PyramidSpec default_pyramid_spec() {
  PyramidSpec spec;
  const int strides[5] = {4, 8, 16, 32, 64};
  const double bases[5] = {32, 64, 128, 256, 512};
  for (int i = 0; i < 5; ++i) {
    LevelSpec lv;
    lv.name = "p" + std::to_string(i + 2);
    lv.stride = strides[i];
    lv.base_size = bases[i];
    lv.aspect_ratios = {0.5, 1.0, 2.0};
    spec.levels.push_back(std::move(lv));
  }
  return spec;
}

FeatureShape feature_shape(std::int64_t image_w, std::int64_t image_h, int stride) {
  if (image_w <= 0 || image_h <= 0 || stride <= 0) {
    throw std::invalid_argument("feature_shape: dimensions and stride must be positive");
  }
  const auto s = static_cast<std::int64_t>(stride);
  return FeatureShape{(image_h + s - 1) / s, (image_w + s - 1) / s};
}

int AnchorSet::level_of(std::int64_t id) const {
  for (std::size_t l = 0; l < levels.size(); ++l) {
    if (id >= levels[l].begin && id < levels[l].end) return static_cast<int>(l);
  }
  throw std::out_of_range("AnchorSet::level_of: anchor id out of range");
}

AnchorSet generate_anchors(const PyramidSpec& spec, std::int64_t image_w,
                           std::int64_t image_h) {
  spec.validate();
  AnchorSet out;
  std::int64_t total = 0;
  for (const auto& lv : spec.levels) {
    const auto fs = feature_shape(image_w, image_h, lv.stride);
    total += 3 * fs.h * fs.w;
  }
  out.boxes.reserve(static_cast<std::size_t>(total));
  out.tags.reserve(static_cast<std::size_t>(total));

  for (std::size_t l = 0; l < spec.levels.size(); ++l) {
    const auto& lv = spec.levels[l];
    const auto fs = feature_shape(image_w, image_h, lv.stride);
    LevelRange range;
    range.name = lv.name;
    range.begin = out.total();
    range.feat_h = fs.h;
    range.feat_w = fs.w;

    // Precompute per-ratio half extents: w = base * sqrt(r), h = base / sqrt(r),
    // so w/h = r and w*h = base^2.
    double half_w[3];
    double half_h[3];
    for (int k = 0; k < 3; ++k) {
      const double sr = std::sqrt(lv.aspect_ratios[static_cast<std::size_t>(k)]);
      half_w[k] = 0.5 * lv.base_size * sr;
      half_h[k] = 0.5 * lv.base_size / sr;
    }

    const double stride = static_cast<double>(lv.stride);
    for (std::int64_t row = 0; row < fs.h; ++row) {
      const double cy = (static_cast<double>(row) + 0.5) * stride;
      for (std::int64_t col = 0; col < fs.w; ++col) {
        const double cx = (static_cast<double>(col) + 0.5) * stride;
        for (int k = 0; k < 3; ++k) {
          out.boxes.push_back(Box{cx - half_w[k], cy - half_h[k],
                                  cx + half_w[k], cy + half_h[k]});
          out.tags.push_back(AnchorTag{static_cast<std::int32_t>(l),
                                       static_cast<std::int32_t>(row),
                                       static_cast<std::int32_t>(col),
                                       static_cast<std::int32_t>(k)});
        }
      }
    }
    range.end = out.total();
    out.levels.push_back(std::move(range));
  }
  return out;
}

}  // namespace htrpn
