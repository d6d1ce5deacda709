#include "htrpn/report.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace htrpn {

std::string number_text(double v) {
  return nlohmann::json(v).dump();
}

std::string anchors_csv(const AnchorSet& anchors, const PyramidSpec& spec) {
  std::ostringstream out;
  out << "level,stride,base_size,feat_h,feat_w,anchors\n";
  for (std::size_t l = 0; l < anchors.levels.size(); ++l) {
    const LevelRange& range = anchors.levels[l];
    out << range.name << ',' << spec.levels[l].stride << ','
        << number_text(spec.levels[l].base_size) << ',' << range.feat_h << ','
        << range.feat_w << ',' << range.count() << '\n';
  }
  out << "total,,,,," << anchors.total() << '\n';
  return out.str();
}

nlohmann::ordered_json anchors_json(const AnchorSet& anchors, const PyramidSpec& spec) {
  nlohmann::ordered_json levels = nlohmann::ordered_json::array();
  for (std::size_t l = 0; l < anchors.levels.size(); ++l) {
    const LevelRange& range = anchors.levels[l];
    levels.push_back({{"level", range.name},
                      {"stride", spec.levels[l].stride},
                      {"base_size", spec.levels[l].base_size},
                      {"feat_h", range.feat_h},
                      {"feat_w", range.feat_w},
                      {"anchors", range.count()}});
  }
  return {{"levels", levels}, {"total", anchors.total()}};
}

std::string coverage_csv(const CoverageReport& report) {
  std::ostringstream out;
  out << "trial,hit_random,hit_hsamp\n";
  for (std::int64_t t = 0; t < report.trials; ++t) {
    out << t << ',' << int(report.hits_random[static_cast<std::size_t>(t)]) << ','
        << int(report.hits_hsamp[static_cast<std::size_t>(t)]) << '\n';
  }
  out << "mean," << number_text(report.p_random) << ',' << number_text(report.p_hsamp)
      << '\n';
  out << "stderr," << number_text(report.se_random) << ','
      << number_text(report.se_hsamp) << '\n';
  return out.str();
}

nlohmann::ordered_json coverage_json(const CoverageReport& report) {
  return {{"trials", report.trials},
          {"coverage_iou", report.coverage_iou},
          {"random", {{"p", report.p_random}, {"se", report.se_random}}},
          {"hsamp", {{"p", report.p_hsamp}, {"se", report.se_hsamp}}},
          {"paired_diff", {{"mean", report.diff_mean}, {"se", report.diff_se}}}};
}

std::string batch_stats_csv(const BatchStatsReport& report) {
  std::ostringstream out;
  out << "trial,label0,label1,label2,batch,fg_bg_ratio\n";
  for (std::size_t t = 0; t < report.per_trial.size(); ++t) {
    const BatchStats& s = report.per_trial[t];
    out << t << ',' << s.label0 << ',' << s.label1 << ',' << s.label2 << ','
        << s.batch << ',' << number_text(s.fg_bg_ratio) << '\n';
  }
  out << "mean," << number_text(report.mean_label0) << ','
      << number_text(report.mean_label1) << ',' << number_text(report.mean_label2)
      << ",," << number_text(report.mean_fg_bg) << '\n';
  return out.str();
}

nlohmann::ordered_json batch_stats_json(const BatchStatsReport& report) {
  return {{"trials", report.trials},
          {"mean_label0", report.mean_label0},
          {"mean_label1", report.mean_label1},
          {"mean_label2", report.mean_label2},
          {"se_label2", report.se_label2},
          {"mean_fg_bg_ratio", report.mean_fg_bg}};
}

std::string pool_stats_csv(const PoolStats& stats) {
  std::ostringstream out;
  out << "image_id,level,stride,total_anchors,negative_pool,active,ignore,novel_feasible\n";
  std::size_t image_index = 0;
  const std::size_t num_levels = stats.level_names.size();
  for (std::size_t r = 0; r < stats.rows.size(); ++r) {
    const PoolRow& row = stats.rows[r];
    image_index = r / num_levels;
    const bool feasible = stats.images[image_index].novel_feasible;
    out << row.image_id << ',' << row.level << ',' << row.stride << ','
        << row.total_anchors << ',' << row.negative_pool << ',' << row.active_count
        << ',' << row.ignore_count << ',' << (feasible ? 1 : 0) << '\n';
  }
  return out.str();
}

nlohmann::ordered_json pool_stats_json(const PoolStats& stats) {
  nlohmann::ordered_json per_level = nlohmann::ordered_json::array();
  for (std::size_t l = 0; l < stats.level_names.size(); ++l) {
    per_level.push_back({{"level", stats.level_names[l]},
                         {"mean_negative_pool", stats.mean_negative_per_level[l]},
                         {"min_negative_pool", stats.min_negative_per_level[l]},
                         {"max_negative_pool", stats.max_negative_per_level[l]},
                         {"histogram", stats.negative_histograms[l]}});
  }
  nlohmann::ordered_json images = nlohmann::ordered_json::array();
  for (const ImageSummary& s : stats.images) {
    images.push_back({{"image_id", s.image_id},
                      {"total_anchors", s.total_anchors},
                      {"negative_total", s.negative_total},
                      {"labeled_boxes", s.labeled_boxes},
                      {"novel_boxes", s.novel_boxes},
                      {"novel_feasible", s.novel_feasible}});
  }
  return {{"total_images", stats.total_images},
          {"feasible_images", stats.feasible_images},
          {"feasibility_iou", stats.feasibility_iou},
          {"per_level", per_level},
          {"images", images}};
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write " + path);
  }
  out << content;
}

}  // namespace htrpn
