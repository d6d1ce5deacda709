#include "htrpn/sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "htrpn/matcher.hpp"
#include "htrpn/parallel.hpp"
#include "htrpn/rng.hpp"
#include "htrpn/ternary.hpp"

namespace htrpn {

void SceneConfig::validate() const {
  if (!(image_w > 0.0) || !(image_h > 0.0)) {
    throw std::invalid_argument("SceneConfig: image size must be positive");
  }
  if (base_count_min < 0 || base_count_max < base_count_min ||
      novel_count_min < 0 || novel_count_max < novel_count_min) {
    throw std::invalid_argument("SceneConfig: bad object count range");
  }
  if (!(base_scale_min > 0.0) || base_scale_max < base_scale_min ||
      !(novel_scale_min > 0.0) || novel_scale_max < novel_scale_min) {
    throw std::invalid_argument("SceneConfig: bad scale range");
  }
  if (!(aspect_min > 0.0) || aspect_max < aspect_min) {
    throw std::invalid_argument("SceneConfig: bad aspect range");
  }
  if (num_base_classes < 1) {
    throw std::invalid_argument("SceneConfig: need at least one base class");
  }
  for (double p : {p_confuse, overlap_iou, thre_cls}) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::invalid_argument("SceneConfig: probabilities must lie in [0, 1]");
    }
  }
  if (score_noise < 0.0) {
    throw std::invalid_argument("SceneConfig: score_noise must be >= 0");
  }
}

std::vector<Box> Scene::labeled_boxes() const {
  std::vector<Box> out;
  out.reserve(labeled.size());
  for (const auto& b : labeled) out.push_back(b.box);
  return out;
}

std::vector<Box> Scene::novel_boxes() const {
  std::vector<Box> out;
  out.reserve(novel.size());
  for (const auto& b : novel) out.push_back(b.box);
  return out;
}

Harness::Harness(PyramidSpec spec, SceneConfig scene)
    : spec_(std::move(spec)), scene_(scene) {
  spec_.validate();
  scene_.validate();
  anchors_ = generate_anchors(spec_,
                              static_cast<std::int64_t>(std::ceil(scene_.image_w)),
                              static_cast<std::int64_t>(std::ceil(scene_.image_h)));
}

namespace {

Box place_box(Rng& rng, double image_w, double image_h, double scale_lo,
              double scale_hi, double ar_lo, double ar_hi) {
  const double scale = rng.uniform(scale_lo, scale_hi);
  const double root = std::sqrt(rng.uniform(ar_lo, ar_hi));
  const double w = std::min(scale * root, image_w);
  const double h = std::min(scale / root, image_h);
  const double cx = w / 2.0 + rng.real01() * (image_w - w);
  const double cy = h / 2.0 + rng.real01() * (image_h - h);
  return {cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0};
}

// One score per base class: the box's own class lands strictly above the
// gate, every other class strictly below it.
std::vector<double> prototype_scores(Rng& rng, std::int64_t num_classes,
                                     std::int64_t cls, double thre_cls) {
  std::vector<double> scores(static_cast<std::size_t>(num_classes));
  for (std::int64_t c = 0; c < num_classes; ++c) {
    scores[static_cast<std::size_t>(c)] =
        c == cls ? thre_cls + (1.0 - thre_cls) * (1.0 - rng.real01())
                 : thre_cls * rng.real01();
  }
  return scores;
}

ScoredBox draw_object(Rng& rng, const SceneConfig& cfg, bool novel) {
  ScoredBox out;
  out.box = novel ? place_box(rng, cfg.image_w, cfg.image_h, cfg.novel_scale_min,
                              cfg.novel_scale_max, cfg.aspect_min, cfg.aspect_max)
                  : place_box(rng, cfg.image_w, cfg.image_h, cfg.base_scale_min,
                              cfg.base_scale_max, cfg.aspect_min, cfg.aspect_max);
  out.class_id = rng.uniform_int(0, cfg.num_base_classes - 1);
  out.scores = prototype_scores(rng, cfg.num_base_classes, out.class_id, cfg.thre_cls);
  return out;
}

}  // namespace

Scene generate_scene(const SceneConfig& cfg) {
  cfg.validate();
  Rng rng(derive_seed(cfg.seed, kSaltScene));
  const std::int64_t n_base = rng.uniform_int(cfg.base_count_min, cfg.base_count_max);
  const std::int64_t n_novel = rng.uniform_int(cfg.novel_count_min, cfg.novel_count_max);
  Scene scene;
  scene.labeled.reserve(static_cast<std::size_t>(n_base));
  scene.novel.reserve(static_cast<std::size_t>(n_novel));
  for (std::int64_t i = 0; i < n_base; ++i) {
    scene.labeled.push_back(draw_object(rng, cfg, false));
  }
  for (std::int64_t i = 0; i < n_novel; ++i) {
    scene.novel.push_back(draw_object(rng, cfg, true));
  }
  return scene;
}

std::vector<std::vector<double>> synth_class_scores(const Scene& scene,
                                                    const SceneConfig& cfg,
                                                    const AnchorSet& anchors,
                                                    std::span<const std::int64_t> ids,
                                                    std::uint64_t seed) {
  cfg.validate();
  std::vector<std::vector<double>> out;
  out.reserve(ids.size());
  for (std::int64_t id : ids) {
    const Box& anchor = anchors.boxes[static_cast<std::size_t>(id)];
    const ScoredBox* seen = nullptr;
    double best = cfg.overlap_iou;
    for (const auto& nb : scene.novel) {
      const double v = iou(anchor, nb.box);
      if (v >= best) {
        best = v;
        seen = &nb;
      }
    }

    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(id)));
    std::vector<double> scores;
    if (seen != nullptr && rng.real01() < cfg.p_confuse) {
      scores = prototype_scores(rng, cfg.num_base_classes, seen->class_id, cfg.thre_cls);
    } else {
      scores = prototype_scores(rng, cfg.num_base_classes, -1, cfg.thre_cls);
    }
    if (cfg.score_noise > 0.0) {
      for (double& s : scores) {
        s = std::clamp(s + rng.normal(0.0, cfg.score_noise), 0.0, 1.0);
      }
    }
    out.push_back(std::move(scores));
  }
  return out;
}

namespace {

bool covers_novel(const AnchorSet& anchors, std::span<const std::int64_t> ids,
                  const Scene& scene, double coverage_iou) {
  for (std::int64_t id : ids) {
    const Box& anchor = anchors.boxes[static_cast<std::size_t>(id)];
    for (const auto& nb : scene.novel) {
      if (iou(anchor, nb.box) >= coverage_iou) return true;
    }
  }
  return false;
}

// Mean and standard error of a Bernoulli sample.
void bernoulli_stats(std::span<const std::uint8_t> hits, double* p, double* se) {
  const auto n = static_cast<double>(hits.size());
  double sum = 0.0;
  for (auto h : hits) sum += h;
  *p = sum / n;
  *se = n > 1 ? std::sqrt(*p * (1.0 - *p) / n) : 0.0;
}

}  // namespace

CoverageReport coverage_experiment(const Harness& harness, std::int64_t trials,
                                   double coverage_iou, const SampleConfig& sample,
                                   int threads) {
  if (trials < 1) throw std::invalid_argument("coverage_experiment: trials must be >= 1");
  if (!(coverage_iou >= 0.0 && coverage_iou <= 1.0)) {
    throw std::invalid_argument("coverage_experiment: coverage_iou must lie in [0, 1]");
  }
  sample.validate();

  CoverageReport report;
  report.trials = trials;
  report.coverage_iou = coverage_iou;
  report.hits_random.assign(static_cast<std::size_t>(trials), 0);
  report.hits_hsamp.assign(static_cast<std::size_t>(trials), 0);

  const SceneConfig& scene_cfg = harness.scene_config();
  parallel_for(trials, threads, [&](std::int64_t t) {
    const std::uint64_t trial_seed =
        derive_seed(scene_cfg.seed, static_cast<std::uint64_t>(t));
    SceneConfig cfg_t = scene_cfg;
    cfg_t.seed = trial_seed;
    const Scene scene = generate_scene(cfg_t);
    const MatchResult match = match_anchors(harness.anchors(), scene.labeled_boxes());

    SampleConfig sample_t = sample;
    sample_t.seed = derive_seed(trial_seed, kSaltSample);
    for (Strategy strategy : {Strategy::Random, Strategy::HSamp}) {
      sample_t.strategy = strategy;
      const SampledBatch batch = sample_batch(match, sample_t);
      const bool hit = covers_novel(harness.anchors(), batch.negatives, scene, coverage_iou);
      auto& hits = strategy == Strategy::Random ? report.hits_random : report.hits_hsamp;
      hits[static_cast<std::size_t>(t)] = hit ? 1 : 0;
    }
  });

  bernoulli_stats(report.hits_random, &report.p_random, &report.se_random);
  bernoulli_stats(report.hits_hsamp, &report.p_hsamp, &report.se_hsamp);

  // Paired differences: common scenes and positives, so the spread of the
  // per-trial difference is what the comparison should be judged against.
  double mean = 0.0;
  for (std::int64_t t = 0; t < trials; ++t) {
    mean += static_cast<double>(report.hits_hsamp[static_cast<std::size_t>(t)]) -
            static_cast<double>(report.hits_random[static_cast<std::size_t>(t)]);
  }
  mean /= static_cast<double>(trials);
  double var = 0.0;
  for (std::int64_t t = 0; t < trials; ++t) {
    const double d = static_cast<double>(report.hits_hsamp[static_cast<std::size_t>(t)]) -
                     static_cast<double>(report.hits_random[static_cast<std::size_t>(t)]) - mean;
    var += d * d;
  }
  report.diff_mean = mean;
  report.diff_se = trials > 1
      ? std::sqrt(var / static_cast<double>(trials - 1) / static_cast<double>(trials))
      : 0.0;
  return report;
}

BatchStats batch_statistics(const Harness& harness, const Scene& scene,
                            Strategy strategy, const SampleConfig& sample,
                            std::uint64_t seed) {
  const MatchResult match = match_anchors(harness.anchors(), scene.labeled_boxes());
  SampleConfig cfg = sample;
  cfg.strategy = strategy;
  cfg.seed = derive_seed(seed, kSaltSample);
  const SampledBatch batch = sample_batch(match, cfg);

  const auto scores = synth_class_scores(scene, harness.scene_config(), harness.anchors(),
                                         batch.negatives, derive_seed(seed, kSaltScores));
  const auto labels = assign_ternary(batch, scores, harness.scene_config().thre_cls);

  BatchStats stats;
  stats.batch = static_cast<std::int64_t>(labels.size());
  for (int label : labels) {
    if (label == kLabelTrueNegative) ++stats.label0;
    if (label == kLabelPositive) ++stats.label1;
    if (label == kLabelPotentialNovel) ++stats.label2;
  }
  const std::int64_t background = stats.label0 + stats.label2;
  stats.fg_bg_ratio = background > 0
      ? static_cast<double>(stats.label1) / static_cast<double>(background)
      : 0.0;
  return stats;
}

BatchStatsReport batch_stats_experiment(const Harness& harness, std::int64_t trials,
                                        Strategy strategy, const SampleConfig& sample,
                                        int threads) {
  if (trials < 1) throw std::invalid_argument("batch_stats_experiment: trials must be >= 1");
  sample.validate();

  BatchStatsReport report;
  report.trials = trials;
  report.per_trial.resize(static_cast<std::size_t>(trials));

  const std::uint64_t root = derive_seed(harness.scene_config().seed, kSaltBatchStats);
  parallel_for(trials, threads, [&](std::int64_t t) {
    const std::uint64_t trial_seed = derive_seed(root, static_cast<std::uint64_t>(t));
    SceneConfig cfg_t = harness.scene_config();
    cfg_t.seed = trial_seed;
    const Scene scene = generate_scene(cfg_t);
    report.per_trial[static_cast<std::size_t>(t)] =
        batch_statistics(harness, scene, strategy, sample, trial_seed);
  });

  for (const auto& s : report.per_trial) {
    report.mean_label0 += static_cast<double>(s.label0);
    report.mean_label1 += static_cast<double>(s.label1);
    report.mean_label2 += static_cast<double>(s.label2);
    report.mean_fg_bg += s.fg_bg_ratio;
  }
  const auto n = static_cast<double>(trials);
  report.mean_label0 /= n;
  report.mean_label1 /= n;
  report.mean_label2 /= n;
  report.mean_fg_bg /= n;

  double var = 0.0;
  for (const auto& s : report.per_trial) {
    const double d = static_cast<double>(s.label2) - report.mean_label2;
    var += d * d;
  }
  report.se_label2 = trials > 1 ? std::sqrt(var / (n - 1.0) / n) : 0.0;
  return report;
}

}  // namespace htrpn
