#include "htrpn/config.hpp"

#include <fstream>
#include <stdexcept>

namespace htrpn {

namespace {

using nlohmann::json;

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& context) {
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed) {
      if (key == a) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw std::invalid_argument("config: unknown key '" + key + "' in " + context);
    }
  }
}

template <typename T>
void read_into(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

void parse_pyramid(const json& j, PyramidSpec& spec) {
  check_keys(j, {"levels"}, "pyramid");
  if (auto it = j.find("levels"); it != j.end()) {
    PyramidSpec parsed;
    for (const auto& lv : *it) {
      check_keys(lv, {"name", "stride", "base_size", "aspect_ratios"}, "pyramid level");
      LevelSpec level;
      read_into(lv, "name", level.name);
      read_into(lv, "stride", level.stride);
      read_into(lv, "base_size", level.base_size);
      read_into(lv, "aspect_ratios", level.aspect_ratios);
      parsed.levels.push_back(std::move(level));
    }
    if (parsed.levels.size() != 5) {
      throw std::invalid_argument("config: pyramid.levels must describe the five levels p2..p6");
    }
    spec = std::move(parsed);
  }
}

void parse_sample(const json& j, SampleConfig& cfg) {
  check_keys(j, {"batch_size", "positive_cap", "strategy"}, "sample");
  read_into(j, "batch_size", cfg.batch_size);
  read_into(j, "positive_cap", cfg.positive_cap);
  if (auto it = j.find("strategy"); it != j.end()) {
    cfg.strategy = strategy_from_name(it->get<std::string>());
  }
}

void parse_loss(const json& j, LossWeights& w) {
  check_keys(j, {"alpha", "lambda", "tau", "phi", "thre_cls"}, "loss");
  read_into(j, "alpha", w.alpha);
  read_into(j, "lambda", w.lambda);
  read_into(j, "tau", w.tau);
  read_into(j, "phi", w.phi);
  read_into(j, "thre_cls", w.thre_cls);
}

void parse_scene(const json& j, SceneConfig& cfg) {
  check_keys(j,
             {"image_w", "image_h", "base_count_min", "base_count_max",
              "novel_count_min", "novel_count_max", "base_scale_min",
              "base_scale_max", "novel_scale_min", "novel_scale_max",
              "aspect_min", "aspect_max", "num_base_classes", "p_confuse",
              "score_noise", "overlap_iou", "thre_cls"},
             "scene");
  read_into(j, "image_w", cfg.image_w);
  read_into(j, "image_h", cfg.image_h);
  read_into(j, "base_count_min", cfg.base_count_min);
  read_into(j, "base_count_max", cfg.base_count_max);
  read_into(j, "novel_count_min", cfg.novel_count_min);
  read_into(j, "novel_count_max", cfg.novel_count_max);
  read_into(j, "base_scale_min", cfg.base_scale_min);
  read_into(j, "base_scale_max", cfg.base_scale_max);
  read_into(j, "novel_scale_min", cfg.novel_scale_min);
  read_into(j, "novel_scale_max", cfg.novel_scale_max);
  read_into(j, "aspect_min", cfg.aspect_min);
  read_into(j, "aspect_max", cfg.aspect_max);
  read_into(j, "num_base_classes", cfg.num_base_classes);
  read_into(j, "p_confuse", cfg.p_confuse);
  read_into(j, "score_noise", cfg.score_noise);
  read_into(j, "overlap_iou", cfg.overlap_iou);
  read_into(j, "thre_cls", cfg.thre_cls);
}

void parse_experiment(const json& j, ExperimentConfig& cfg) {
  check_keys(j, {"trials", "coverage_iou", "stats_trials"}, "experiment");
  read_into(j, "trials", cfg.trials);
  read_into(j, "coverage_iou", cfg.coverage_iou);
  read_into(j, "stats_trials", cfg.stats_trials);
}

void parse_rank(const json& j, RankConfig& cfg) {
  check_keys(j, {"k", "op"}, "rank");
  read_into(j, "k", cfg.k);
  if (auto it = j.find("op"); it != j.end()) {
    cfg.op = combine_op_from_name(it->get<std::string>());
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  if (trials < 1 || stats_trials < 1) {
    throw std::invalid_argument("experiment: trial counts must be >= 1");
  }
  if (!(coverage_iou >= 0.0 && coverage_iou <= 1.0)) {
    throw std::invalid_argument("experiment: coverage_iou must lie in [0, 1]");
  }
}

void RankConfig::validate() const {
  if (k < 1) throw std::invalid_argument("rank: k must be >= 1");
}

void RunConfig::validate() const {
  pyramid.validate();
  sample.validate();
  loss.validate();
  scene.validate();
  experiment.validate();
  rank.validate();
  if (threads < 0) throw std::invalid_argument("config: threads must be >= 0");
  if (out_dir.empty()) throw std::invalid_argument("config: out_dir must be set");
}

void RunConfig::reseed(std::uint64_t seed) {
  master_seed = seed;
  scene.seed = seed;
  sample.seed = seed;
}

RunConfig default_run_config() {
  RunConfig cfg;
  cfg.reseed(cfg.master_seed);
  return cfg;
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  check_keys(j,
             {"pyramid", "sample", "loss", "scene", "experiment", "rank",
              "master_seed", "out_dir", "threads"},
             "top level");
  RunConfig cfg = default_run_config();
  if (auto it = j.find("pyramid"); it != j.end()) parse_pyramid(*it, cfg.pyramid);
  if (auto it = j.find("sample"); it != j.end()) parse_sample(*it, cfg.sample);
  if (auto it = j.find("loss"); it != j.end()) parse_loss(*it, cfg.loss);
  if (auto it = j.find("scene"); it != j.end()) parse_scene(*it, cfg.scene);
  if (auto it = j.find("experiment"); it != j.end()) parse_experiment(*it, cfg.experiment);
  if (auto it = j.find("rank"); it != j.end()) parse_rank(*it, cfg.rank);
  read_into(j, "master_seed", cfg.master_seed);
  read_into(j, "out_dir", cfg.out_dir);
  read_into(j, "threads", cfg.threads);
  cfg.reseed(cfg.master_seed);
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open config " + path);
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("malformed config " + path + " at byte " +
                             std::to_string(e.byte) + ": " + e.what());
  }
  return run_config_from_json(j);
}

nlohmann::ordered_json run_config_to_json(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json levels = nlohmann::ordered_json::array();
  for (const auto& level : cfg.pyramid.levels) {
    levels.push_back({{"name", level.name},
                      {"stride", level.stride},
                      {"base_size", level.base_size},
                      {"aspect_ratios", level.aspect_ratios}});
  }
  j["pyramid"] = {{"levels", levels}};
  j["sample"] = {{"batch_size", cfg.sample.batch_size},
                 {"positive_cap", cfg.sample.positive_cap},
                 {"strategy", strategy_name(cfg.sample.strategy)}};
  j["loss"] = {{"alpha", cfg.loss.alpha},
               {"lambda", cfg.loss.lambda},
               {"tau", cfg.loss.tau},
               {"phi", cfg.loss.phi},
               {"thre_cls", cfg.loss.thre_cls}};
  j["scene"] = {{"image_w", cfg.scene.image_w},
                {"image_h", cfg.scene.image_h},
                {"base_count_min", cfg.scene.base_count_min},
                {"base_count_max", cfg.scene.base_count_max},
                {"novel_count_min", cfg.scene.novel_count_min},
                {"novel_count_max", cfg.scene.novel_count_max},
                {"base_scale_min", cfg.scene.base_scale_min},
                {"base_scale_max", cfg.scene.base_scale_max},
                {"novel_scale_min", cfg.scene.novel_scale_min},
                {"novel_scale_max", cfg.scene.novel_scale_max},
                {"aspect_min", cfg.scene.aspect_min},
                {"aspect_max", cfg.scene.aspect_max},
                {"num_base_classes", cfg.scene.num_base_classes},
                {"p_confuse", cfg.scene.p_confuse},
                {"score_noise", cfg.scene.score_noise},
                {"overlap_iou", cfg.scene.overlap_iou},
                {"thre_cls", cfg.scene.thre_cls}};
  j["experiment"] = {{"trials", cfg.experiment.trials},
                     {"coverage_iou", cfg.experiment.coverage_iou},
                     {"stats_trials", cfg.experiment.stats_trials}};
  j["rank"] = {{"k", cfg.rank.k}, {"op", combine_op_name(cfg.rank.op)}};
  j["master_seed"] = cfg.master_seed;
  j["out_dir"] = cfg.out_dir;
  j["threads"] = cfg.threads;
  return j;
}

}  // namespace htrpn
