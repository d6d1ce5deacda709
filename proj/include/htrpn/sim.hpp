#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "htrpn/geometry.hpp"
#include "htrpn/pyramid.hpp"
#include "htrpn/sampler.hpp"

namespace htrpn {

// Synthetic-scene knobs. Novel objects default to the large-scale regime so
// their qualifying anchors concentrate at the sparse upper pyramid levels.
struct SceneConfig {
  double image_w = 800.0;
  double image_h = 800.0;
  std::int64_t base_count_min = 2;
  std::int64_t base_count_max = 6;
  std::int64_t novel_count_min = 1;
  std::int64_t novel_count_max = 2;
  double base_scale_min = 32.0;
  double base_scale_max = 128.0;
  double novel_scale_min = 256.0;
  double novel_scale_max = 512.0;
  double aspect_min = 0.5;
  double aspect_max = 2.0;
  std::int64_t num_base_classes = 15;
  double p_confuse = 0.5;    // chance an anchor on a novel box scores above the gate
  double score_noise = 0.0;  // gaussian spread added to every synthetic score
  double overlap_iou = 0.3;  // IoU at which an anchor "sees" a novel box
  double thre_cls = 0.75;
  std::uint64_t seed = 7;

  void validate() const;
};

// A box with its class identity and a prototype per-class score vector. For
// novel boxes `class_id` is the base class the object resembles.
struct ScoredBox {
  Box box;
  std::int64_t class_id = -1;
  std::vector<double> scores;
};

struct Scene {
  std::vector<ScoredBox> labeled;  // annotated base objects
  std::vector<ScoredBox> novel;    // present but unlabeled

  std::vector<Box> labeled_boxes() const;
  std::vector<Box> novel_boxes() const;
};

struct CoverageReport {
  std::int64_t trials = 0;
  double coverage_iou = 0.3;
  double p_random = 0.0;
  double se_random = 0.0;
  double p_hsamp = 0.0;
  double se_hsamp = 0.0;
  double diff_mean = 0.0;  // hsamp - random, paired per trial
  double diff_se = 0.0;
  std::vector<std::uint8_t> hits_random;  // one flag per trial
  std::vector<std::uint8_t> hits_hsamp;
};

struct BatchStats {
  std::int64_t label0 = 0;
  std::int64_t label1 = 0;
  std::int64_t label2 = 0;
  std::int64_t batch = 0;  // realized batch size
  double fg_bg_ratio = 0.0;
};

struct BatchStatsReport {
  std::int64_t trials = 0;
  double mean_label0 = 0.0;
  double mean_label1 = 0.0;
  double mean_label2 = 0.0;
  double se_label2 = 0.0;
  double mean_fg_bg = 0.0;
  std::vector<BatchStats> per_trial;
};

// Owns the anchor grid so repeated trials reuse it.
class Harness {
 public:
  Harness(PyramidSpec spec, SceneConfig scene);

  const PyramidSpec& pyramid() const { return spec_; }
  const SceneConfig& scene_config() const { return scene_; }
  const AnchorSet& anchors() const { return anchors_; }

 private:
  PyramidSpec spec_;
  SceneConfig scene_;
  AnchorSet anchors_;
};

// Boxes placed fully inside the image per the configured distributions;
// deterministic in cfg.seed.
Scene generate_scene(const SceneConfig& cfg);

// Per-class score vector for each requested anchor. Anchors overlapping a
// novel box (IoU >= cfg.overlap_iou) pass the confidence gate with probability
// p_confuse; everything else stays below thre_cls until noise is added. Each
// anchor draws from its own id-derived stream, so scores are independent of
// which other anchors were requested.
std::vector<std::vector<double>> synth_class_scores(const Scene& scene,
                                                    const SceneConfig& cfg,
                                                    const AnchorSet& anchors,
                                                    std::span<const std::int64_t> ids,
                                                    std::uint64_t seed);

// Paired Monte-Carlo: each trial draws one scene and one positive set, then
// samples negatives under both strategies and tests whether any sampled
// negative overlaps a novel box at `coverage_iou`.
CoverageReport coverage_experiment(const Harness& harness, std::int64_t trials,
                                   double coverage_iou, const SampleConfig& sample,
                                   int threads = 1);

// match -> sample -> assign_ternary -> count labels for one scene.
BatchStats batch_statistics(const Harness& harness, const Scene& scene,
                            Strategy strategy, const SampleConfig& sample,
                            std::uint64_t seed);

BatchStatsReport batch_stats_experiment(const Harness& harness, std::int64_t trials,
                                        Strategy strategy, const SampleConfig& sample,
                                        int threads = 1);

}  // namespace htrpn
