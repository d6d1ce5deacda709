#include "htrpn/coco.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include <json.hpp>

#include "htrpn/matcher.hpp"

namespace htrpn {

namespace {

using nlohmann::json;

json parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path);
  }
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("malformed JSON in " + path + " at byte " +
                             std::to_string(e.byte) + ": " + e.what());
  }
}

const json& require(const json& j, const char* key, const std::string& context) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw std::runtime_error(context + ": missing field '" + key + "'");
  }
  return *it;
}

std::vector<std::int64_t> id_list(const json& j) {
  std::vector<std::int64_t> out;
  for (const auto& v : j) out.push_back(v.get<std::int64_t>());
  return out;
}

}  // namespace

void CategorySplit::validate() const {
  for (std::int64_t id : heldout) {
    if (base.count(id)) {
      throw std::invalid_argument("category split: id " + std::to_string(id) +
                                  " appears in both base and heldout");
    }
  }
}

CategorySplit load_split(const std::string& path) {
  const json j = parse_file(path);
  CategorySplit split;
  for (std::int64_t id : id_list(require(j, "base", path))) split.base.insert(id);
  for (std::int64_t id : id_list(require(j, "heldout", path))) split.heldout.insert(id);
  split.validate();
  return split;
}

Dataset load_coco(const std::string& path, const CategorySplit& split) {
  split.validate();
  const json j = parse_file(path);

  Dataset ds;
  ds.split = split;

  std::unordered_set<std::int64_t> image_ids;
  for (const auto& im : require(j, "images", path)) {
    CocoImage image;
    image.id = require(im, "id", "image").get<std::int64_t>();
    image.width = require(im, "width", "image").get<double>();
    image.height = require(im, "height", "image").get<double>();
    if (!image_ids.insert(image.id).second) {
      throw std::runtime_error("duplicate image id " + std::to_string(image.id));
    }
    ds.images.push_back(image);
  }
  std::sort(ds.images.begin(), ds.images.end(),
            [](const CocoImage& a, const CocoImage& b) { return a.id < b.id; });

  if (j.contains("categories")) {
    for (const auto& cat : j["categories"]) {
      ds.category_names[require(cat, "id", "category").get<std::int64_t>()] =
          cat.value("name", "");
    }
  }

  std::vector<std::int64_t> dangling;
  for (const auto& an : require(j, "annotations", path)) {
    const auto id = require(an, "id", "annotation").get<std::int64_t>();
    const auto image_id = require(an, "image_id", "annotation").get<std::int64_t>();
    const auto& bbox = require(an, "bbox", "annotation " + std::to_string(id));
    if (!bbox.is_array() || bbox.size() != 4) {
      throw std::runtime_error("annotation " + std::to_string(id) +
                               ": bbox must be [x, y, w, h]");
    }
    const std::array<double, 4> xywh{bbox[0].get<double>(), bbox[1].get<double>(),
                                     bbox[2].get<double>(), bbox[3].get<double>()};
    if (xywh[2] < 0.0 || xywh[3] < 0.0) {
      throw std::runtime_error("annotation " + std::to_string(id) +
                               ": negative box size");
    }
    if (!image_ids.count(image_id)) {
      dangling.push_back(id);
      continue;
    }
    const Box box{xywh[0], xywh[1], xywh[0] + xywh[2], xywh[1] + xywh[3]};
    const auto category_id = require(an, "category_id", "annotation").get<std::int64_t>();
    if (split.is_heldout(category_id)) {
      ds.novel.push_back({image_id, xywh, box});
    } else {
      ds.annotations.push_back({id, image_id, category_id, xywh, box});
    }
  }

  if (!dangling.empty()) {
    std::ostringstream msg;
    msg << "annotations reference missing images; offending annotation ids:";
    for (std::int64_t id : dangling) msg << ' ' << id;
    throw std::runtime_error(msg.str());
  }
  return ds;
}

PoolStats pool_stats(const Dataset& ds, const PyramidSpec& spec,
                     double feasibility_iou) {
  spec.validate();
  if (!(feasibility_iou >= 0.0 && feasibility_iou <= 1.0)) {
    throw std::invalid_argument("pool_stats: feasibility_iou must lie in [0, 1]");
  }

  std::unordered_map<std::int64_t, std::vector<Box>> labeled;
  for (const auto& an : ds.annotations) labeled[an.image_id].push_back(an.box);
  std::unordered_map<std::int64_t, std::vector<Box>> novel;
  for (const auto& nb : ds.novel) novel[nb.image_id].push_back(nb.box);

  PoolStats stats;
  stats.feasibility_iou = feasibility_iou;
  stats.total_images = static_cast<std::int64_t>(ds.images.size());
  for (const auto& level : spec.levels) stats.level_names.push_back(level.name);
  const std::size_t num_levels = spec.levels.size();
  stats.mean_negative_per_level.assign(num_levels, 0.0);
  stats.min_negative_per_level.assign(num_levels, 0);
  stats.max_negative_per_level.assign(num_levels, 0);

  // Anchor grids depend only on the image size; reuse across same-size images.
  std::map<std::pair<double, double>, AnchorSet> grid_cache;

  std::vector<std::vector<std::int64_t>> pools_per_level(num_levels);
  for (const auto& image : ds.images) {
    const auto key = std::make_pair(image.width, image.height);
    auto it = grid_cache.find(key);
    if (it == grid_cache.end()) {
      it = grid_cache.emplace(key, generate_anchors(spec,
                                       static_cast<std::int64_t>(std::ceil(image.width)),
                                       static_cast<std::int64_t>(std::ceil(image.height))))
               .first;
    }
    const AnchorSet& anchors = it->second;

    const auto lab_it = labeled.find(image.id);
    const std::vector<Box> empty;
    const std::vector<Box>& gt = lab_it == labeled.end() ? empty : lab_it->second;
    const MatchResult match = match_anchors(anchors, gt);

    ImageSummary summary;
    summary.image_id = image.id;
    summary.total_anchors = anchors.total();
    summary.labeled_boxes = static_cast<std::int64_t>(gt.size());

    for (std::size_t l = 0; l < num_levels; ++l) {
      const LevelRange& range = match.levels[l];
      PoolRow row;
      row.image_id = image.id;
      row.level = range.name;
      row.stride = spec.levels[l].stride;
      row.total_anchors = range.count();
      for (std::int64_t a = range.begin; a < range.end; ++a) {
        switch (match.status[static_cast<std::size_t>(a)]) {
          case AnchorStatus::Negative: ++row.negative_pool; break;
          case AnchorStatus::Active: ++row.active_count; break;
          case AnchorStatus::Ignore: ++row.ignore_count; break;
        }
      }
      summary.negative_total += row.negative_pool;
      pools_per_level[l].push_back(row.negative_pool);
      stats.rows.push_back(std::move(row));
    }

    const auto nov_it = novel.find(image.id);
    if (nov_it != novel.end()) {
      summary.novel_boxes = static_cast<std::int64_t>(nov_it->second.size());
      for (const Box& anchor : anchors.boxes) {
        for (const Box& nb : nov_it->second) {
          if (iou(anchor, nb) >= feasibility_iou) {
            summary.novel_feasible = true;
            break;
          }
        }
        if (summary.novel_feasible) break;
      }
    }
    if (summary.novel_feasible) ++stats.feasible_images;
    stats.images.push_back(std::move(summary));
  }

  stats.negative_histograms.assign(num_levels, {});
  for (std::size_t l = 0; l < num_levels; ++l) {
    const auto& pools = pools_per_level[l];
    if (pools.empty()) continue;
    double sum = 0.0;
    std::int64_t lo = pools.front();
    std::int64_t hi = pools.front();
    for (std::int64_t v : pools) {
      sum += static_cast<double>(v);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    stats.mean_negative_per_level[l] = sum / static_cast<double>(pools.size());
    stats.min_negative_per_level[l] = lo;
    stats.max_negative_per_level[l] = hi;
    for (std::int64_t v : pools) {
      const std::size_t bin = hi > 0
          ? std::min<std::size_t>(9, static_cast<std::size_t>(10.0 * static_cast<double>(v) /
                                                              static_cast<double>(hi)))
          : 0;
      ++stats.negative_histograms[l][bin];
    }
  }
  return stats;
}

}  // namespace htrpn
