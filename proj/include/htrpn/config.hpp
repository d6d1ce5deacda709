#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "htrpn/losses.hpp"
#include "htrpn/pyramid.hpp"
#include "htrpn/sampler.hpp"
#include "htrpn/sim.hpp"
#include "htrpn/ternary.hpp"

namespace htrpn {

struct ExperimentConfig {
  std::int64_t trials = 10000;        // paired coverage trials
  double coverage_iou = 0.3;
  std::int64_t stats_trials = 1000;   // batch-statistics trials

  void validate() const;
};

struct RankConfig {
  std::int64_t k = 1000;
  CombineOp op = CombineOp::Max;

  void validate() const;
};

// One config drives every subcommand. The master seed is the only seed knob;
// scene and sampler streams are derived from it.
struct RunConfig {
  PyramidSpec pyramid = default_pyramid_spec();
  SampleConfig sample;
  LossWeights loss;
  SceneConfig scene;
  ExperimentConfig experiment;
  RankConfig rank;
  std::uint64_t master_seed = 7;
  std::string out_dir = "out";
  int threads = 1;

  void validate() const;
  void reseed(std::uint64_t seed);  // set master_seed and propagate
};

RunConfig default_run_config();

// Fields present in the JSON override the defaults; unknown keys are errors.
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);

nlohmann::ordered_json run_config_to_json(const RunConfig& cfg);

inline constexpr const char* kConfigEnvVar = "HTRPN_CONFIG";

}  // namespace htrpn
