#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "htrpn/coco.hpp"
#include "htrpn/config.hpp"
#include "htrpn/losses.hpp"
#include "htrpn/matcher.hpp"
#include "htrpn/report.hpp"
#include "htrpn/rng.hpp"
#include "htrpn/sampler.hpp"
#include "htrpn/sim.hpp"
#include "htrpn/ternary.hpp"

namespace {

using namespace htrpn;

void ensure_out_dir(const RunConfig& cfg) {
  std::filesystem::create_directories(cfg.out_dir);
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

void write_json(const RunConfig& cfg, const std::string& name,
                const nlohmann::ordered_json& j) {
  write_text_file(out_path(cfg, name), j.dump(2) + "\n");
}

int cmd_anchors(const RunConfig& cfg, std::int64_t image_size) {
  const std::int64_t size = image_size > 0
      ? image_size
      : static_cast<std::int64_t>(std::ceil(cfg.scene.image_w));
  const AnchorSet anchors = generate_anchors(cfg.pyramid, size, size);
  const std::string csv = anchors_csv(anchors, cfg.pyramid);
  std::cout << csv;
  ensure_out_dir(cfg);
  write_text_file(out_path(cfg, "anchors.csv"), csv);
  write_json(cfg, "anchors.json", anchors_json(anchors, cfg.pyramid));
  std::cerr << "[anchors] " << anchors.total() << " anchors on a " << size << "x"
            << size << " image; reports in " << cfg.out_dir << "\n";
  return 0;
}

int cmd_sample_compare(const RunConfig& cfg, std::int64_t m, std::int64_t trials,
                       std::int64_t image_size) {
  if (m < 0 || trials < 1) {
    throw std::invalid_argument("sample-compare: need m >= 0 and trials >= 1");
  }
  const std::int64_t size = image_size > 0
      ? image_size
      : static_cast<std::int64_t>(std::ceil(cfg.scene.image_w));
  const AnchorSet anchors = generate_anchors(cfg.pyramid, size, size);
  const MatchResult match = match_anchors(anchors, {});
  const NegativePools pools = NegativePools::from_match(match);
  const std::size_t num_levels = pools.per_level.size();
  const auto total = static_cast<double>(pools.total());

  std::ostringstream csv;
  csv << "trial,strategy";
  for (const auto& name : pools.level_names) csv << ',' << name;
  csv << '\n';

  std::vector<double> mean_random(num_levels, 0.0);
  std::vector<double> mean_hsamp(num_levels, 0.0);
  for (std::int64_t t = 0; t < trials; ++t) {
    const std::uint64_t seed = derive_seed(cfg.master_seed, static_cast<std::uint64_t>(t));
    const NegativeSample r = sample_random(pools, m, seed);
    const NegativeSample h = sample_hsamp(pools, m, seed);
    csv << t << ",random";
    for (std::size_t l = 0; l < num_levels; ++l) {
      csv << ',' << r.per_level[l];
      mean_random[l] += static_cast<double>(r.per_level[l]);
    }
    csv << '\n' << t << ",hsamp";
    for (std::size_t l = 0; l < num_levels; ++l) {
      csv << ',' << h.per_level[l];
      mean_hsamp[l] += static_cast<double>(h.per_level[l]);
    }
    csv << '\n';
  }
  for (std::size_t l = 0; l < num_levels; ++l) {
    mean_random[l] /= static_cast<double>(trials);
    mean_hsamp[l] /= static_cast<double>(trials);
  }

  // Hypergeometric reference for the flat sampler: drawing m of N anchors
  // with K at the level gives mean m*K/N.
  nlohmann::ordered_json levels = nlohmann::ordered_json::array();
  std::cout << "level,pool,random_mean,random_expected,hsamp_mean\n";
  for (std::size_t l = 0; l < num_levels; ++l) {
    const auto pool = static_cast<double>(pools.per_level[l].size());
    const double expected = total > 0.0 ? static_cast<double>(m) * pool / total : 0.0;
    std::cout << pools.level_names[l] << ',' << pools.per_level[l].size() << ','
              << number_text(mean_random[l]) << ',' << number_text(expected) << ','
              << number_text(mean_hsamp[l]) << '\n';
    levels.push_back({{"level", pools.level_names[l]},
                      {"pool", pools.per_level[l].size()},
                      {"random_mean", mean_random[l]},
                      {"random_expected", expected},
                      {"hsamp_mean", mean_hsamp[l]}});
  }

  ensure_out_dir(cfg);
  write_text_file(out_path(cfg, "sample_compare.csv"), csv.str());
  write_json(cfg, "sample_compare.json",
             {{"m", m}, {"trials", trials}, {"levels", levels}});
  std::cerr << "[sample-compare] " << trials << " paired trials, m=" << m
            << "; reports in " << cfg.out_dir << "\n";
  return 0;
}

// Direct transcription of the weighted contrastive mean, kept deliberately
// naive so the optimized path has something independent to disagree with.
double naive_tcon(const ContrastiveBatch& b, double tau, double phi) {
  const auto n = static_cast<std::size_t>(b.size());
  const auto d = static_cast<std::size_t>(b.dim);
  std::vector<std::vector<double>> z(n, std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    double norm = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      norm += b.features[i * d + c] * b.features[i * d + c];
    }
    norm = std::sqrt(norm);
    for (std::size_t c = 0; c < d; ++c) z[i][c] = b.features[i * d + c] / norm;
  }
  auto zdot = [&](std::size_t a, std::size_t c) {
    double acc = 0.0;
    for (std::size_t k = 0; k < d; ++k) acc += z[a][k] * z[c][k];
    return acc;
  };
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (b.ious[i] < phi) continue;
    std::size_t same = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (b.labels[j] == b.labels[i]) ++same;
    }
    if (same < 2) continue;
    double li = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || b.labels[j] != b.labels[i]) continue;
      double den = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        if (k != i) den += std::exp(zdot(i, k) / tau);
      }
      li += std::log(std::exp(zdot(i, j) / tau) / den);
    }
    acc += -li / static_cast<double>(same - 1);
  }
  return acc / static_cast<double>(n);
}

ContrastiveBatch random_batch(Rng& rng, std::int64_t n_min, std::int64_t n_max,
                              std::int64_t dim, int num_labels) {
  ContrastiveBatch b;
  const std::int64_t n = rng.uniform_int(n_min, n_max);
  b.dim = dim;
  b.features.resize(static_cast<std::size_t>(n * dim));
  for (double& f : b.features) f = rng.normal(0.0, 1.0);
  b.labels.resize(static_cast<std::size_t>(n));
  for (int& l : b.labels) l = static_cast<int>(rng.uniform_int(0, num_labels - 1));
  b.ious.resize(static_cast<std::size_t>(n));
  for (double& v : b.ious) v = rng.real01();
  return b;
}

int cmd_losscheck(const RunConfig& cfg, std::int64_t oracle_batches,
                  std::int64_t grad_batches, bool inject_perturbation) {
  const double tau = cfg.loss.tau;
  const double phi = cfg.loss.phi;
  bool all_pass = true;
  nlohmann::ordered_json report;

  {
    Rng rng(derive_seed(cfg.master_seed, 0x6f7261636cull));
    double max_diff = 0.0;
    for (std::int64_t b = 0; b < oracle_batches; ++b) {
      const ContrastiveBatch batch =
          random_batch(rng, 1, 8, rng.uniform_int(2, 16), 4);
      max_diff = std::max(max_diff,
                          std::abs(tcon_loss(batch, tau, phi) - naive_tcon(batch, tau, phi)));
    }
    const bool pass = max_diff <= 1e-12;
    all_pass = all_pass && pass;
    std::cout << "oracle_equivalence: " << (pass ? "PASS" : "FAIL")
              << " batches=" << oracle_batches << " max_abs_diff=" << number_text(max_diff)
              << "\n";
    report["oracle_equivalence"] = {{"pass", pass},
                                    {"batches", oracle_batches},
                                    {"max_abs_diff", max_diff}};
  }

  {
    Rng rng(derive_seed(cfg.master_seed, 0x67726164ull));
    double max_rel = 0.0;
    const double h = 1e-5;
    for (std::int64_t b = 0; b < grad_batches; ++b) {
      ContrastiveBatch batch = random_batch(rng, 2, 6, 128, 3);
      std::vector<double> analytic = sup_con_grad(batch, tau, phi);
      if (inject_perturbation && !analytic.empty()) {
        analytic[0] += 1e-3;
      }
      for (std::size_t c = 0; c < batch.features.size(); ++c) {
        const double kept = batch.features[c];
        batch.features[c] = kept + h;
        const double up = tcon_loss(batch, tau, phi);
        batch.features[c] = kept - h;
        const double down = tcon_loss(batch, tau, phi);
        batch.features[c] = kept;
        const double fd = (up - down) / (2.0 * h);
        // Coordinates near zero are compared absolutely via the 1e-4 floor.
        const double rel = std::abs(analytic[c] - fd) /
                           std::max({std::abs(analytic[c]), std::abs(fd), 1e-4});
        max_rel = std::max(max_rel, rel);
      }
    }
    const bool pass = max_rel < 1e-5;
    all_pass = all_pass && pass;
    std::cout << "gradient_check: " << (pass ? "PASS" : "FAIL")
              << " batches=" << grad_batches << " max_rel_err=" << number_text(max_rel)
              << "\n";
    report["gradient_check"] = {{"pass", pass},
                                {"batches", grad_batches},
                                {"max_rel_err", max_rel},
                                {"perturbed", inject_perturbation}};
  }

  {
    Rng rng(derive_seed(cfg.master_seed, 0x6964656eull));
    double max_residual = 0.0;
    for (int i = 0; i < 1000; ++i) {
      LossParts parts;
      parts.cls = rng.uniform(0.0, 2.0);
      parts.bbox = rng.uniform(0.0, 2.0);
      parts.obj = rng.uniform(0.0, 2.0);
      parts.tcon = rng.uniform(0.0, 2.0);
      parts.contra = rng.uniform(0.0, 2.0);
      const LossBreakdown bd = total_loss(parts, cfg.loss);
      const double r1 = std::abs(bd.l_tobj - (bd.l_obj + cfg.loss.lambda * bd.l_tcon));
      const double r2 = std::abs(bd.total - (bd.l_cls + bd.l_bbox + bd.l_tobj +
                                             cfg.loss.alpha * bd.l_contra));
      max_residual = std::max({max_residual, r1, r2});
    }
    const bool pass = max_residual <= 1e-12;
    all_pass = all_pass && pass;
    std::cout << "decomposition_identities: " << (pass ? "PASS" : "FAIL")
              << " max_residual=" << number_text(max_residual) << "\n";
    report["decomposition_identities"] = {{"pass", pass}, {"max_residual", max_residual}};
  }

  {
    // Three proposals where max- and sum-combination disagree: a strongly
    // negative label-2 logit drags the sum down but cannot hurt the max.
    const std::vector<Proposal> props{
        {{}, {0.0, 2.0, -3.0}, 0.0, {}},   // A
        {{}, {0.0, -1.0, 3.5}, 0.0, {}},   // B
        {{}, {0.0, 1.0, 1.0}, 0.0, {}},    // C
    };
    const auto top_max = rank_proposals(props, RankStage::FineTune, 2, CombineOp::Max);
    const auto top_sum = rank_proposals(props, RankStage::FineTune, 2, CombineOp::Sum);
    const auto name = [](std::size_t i) { return std::string(1, char('A' + i)); };
    const bool pass = top_max == std::vector<std::size_t>{1, 0} &&
                      top_sum == std::vector<std::size_t>{1, 2};
    all_pass = all_pass && pass;
    std::cout << "ranking_divergence: " << (pass ? "PASS" : "FAIL") << " top2_max="
              << name(top_max[0]) << name(top_max[1]) << " top2_sum="
              << name(top_sum[0]) << name(top_sum[1]) << "\n";
    report["ranking_divergence"] = {{"pass", pass},
                                    {"top2_max", {name(top_max[0]), name(top_max[1])}},
                                    {"top2_sum", {name(top_sum[0]), name(top_sum[1])}},
                                    {"configured_op", combine_op_name(cfg.rank.op)}};
  }

  std::cout << "losscheck: " << (all_pass ? "PASS" : "FAIL") << "\n";
  report["pass"] = all_pass;
  ensure_out_dir(cfg);
  write_json(cfg, "losscheck.json", report);
  return all_pass ? 0 : 1;
}

int cmd_simulate(const RunConfig& cfg) {
  const Harness harness(cfg.pyramid, cfg.scene);
  std::cerr << "[simulate] coverage: " << cfg.experiment.trials << " paired trials\n";
  const CoverageReport coverage = coverage_experiment(
      harness, cfg.experiment.trials, cfg.experiment.coverage_iou, cfg.sample,
      cfg.threads);
  std::cerr << "[simulate] batch stats: " << cfg.experiment.stats_trials << " trials\n";
  const BatchStatsReport stats = batch_stats_experiment(
      harness, cfg.experiment.stats_trials, cfg.sample.strategy, cfg.sample,
      cfg.threads);

  std::cout << "metric,value,stderr\n";
  std::cout << "coverage_random," << number_text(coverage.p_random) << ','
            << number_text(coverage.se_random) << '\n';
  std::cout << "coverage_hsamp," << number_text(coverage.p_hsamp) << ','
            << number_text(coverage.se_hsamp) << '\n';
  std::cout << "coverage_paired_diff," << number_text(coverage.diff_mean) << ','
            << number_text(coverage.diff_se) << '\n';
  std::cout << "mean_label2," << number_text(stats.mean_label2) << ','
            << number_text(stats.se_label2) << '\n';
  std::cout << "mean_fg_bg_ratio," << number_text(stats.mean_fg_bg) << ",\n";

  ensure_out_dir(cfg);
  write_text_file(out_path(cfg, "coverage.csv"), coverage_csv(coverage));
  write_json(cfg, "coverage.json", coverage_json(coverage));
  write_text_file(out_path(cfg, "batch_stats.csv"), batch_stats_csv(stats));
  write_json(cfg, "batch_stats.json", batch_stats_json(stats));
  std::cerr << "[simulate] reports in " << cfg.out_dir << "\n";
  return 0;
}

int cmd_stats(const RunConfig& cfg, const std::string& annotations,
              const std::string& split_path, double feasibility_iou) {
  const CategorySplit split = load_split(split_path);
  const Dataset ds = load_coco(annotations, split);
  const PoolStats stats = pool_stats(ds, cfg.pyramid, feasibility_iou);

  std::cout << "key,value\n";
  std::cout << "images," << stats.total_images << '\n';
  std::cout << "feasible_images," << stats.feasible_images << '\n';
  std::cout << "labeled_annotations," << ds.annotations.size() << '\n';
  std::cout << "novel_boxes," << ds.novel.size() << '\n';
  for (std::size_t l = 0; l < stats.level_names.size(); ++l) {
    std::cout << "mean_negative_" << stats.level_names[l] << ','
              << number_text(stats.mean_negative_per_level[l]) << '\n';
  }

  ensure_out_dir(cfg);
  write_text_file(out_path(cfg, "pool_stats.csv"), pool_stats_csv(stats));
  write_json(cfg, "pool_stats.json", pool_stats_json(stats));
  std::cerr << "[stats] " << stats.total_images << " images; reports in "
            << cfg.out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hierarchical ternary region proposal toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  if (const char* env = std::getenv(kConfigEnvVar)) config_path = env;
  app.add_option("--config", config_path, "JSON config path (default: $HTRPN_CONFIG)");
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "master seed override");
  std::string out_dir;
  auto* out_opt = app.add_option("--out-dir", out_dir, "report directory override");
  int threads = 0;
  auto* threads_opt = app.add_option("--threads", threads, "worker threads (0 = auto)");

  auto* anchors_cmd = app.add_subcommand("anchors", "per-level anchor count table");
  std::int64_t image_size = 0;
  anchors_cmd->add_option("--image-size", image_size, "square image size in pixels");
  anchors_cmd->fallthrough();

  auto* compare_cmd =
      app.add_subcommand("sample-compare", "per-level negative counts, both samplers");
  std::int64_t m = 218;
  std::int64_t compare_trials = 10000;
  std::int64_t compare_image_size = 0;
  compare_cmd->add_option("--m", m, "negatives per draw");
  compare_cmd->add_option("--trials", compare_trials, "paired trials");
  compare_cmd->add_option("--image-size", compare_image_size, "square image size");
  compare_cmd->fallthrough();

  auto* losscheck_cmd =
      app.add_subcommand("losscheck", "gradient and oracle checks for the loss stack");
  std::int64_t oracle_batches = 1000;
  std::int64_t grad_batches = 100;
  bool inject = false;
  double tau_override = 0.0;
  double phi_override = -1.0;
  std::string rank_op;
  losscheck_cmd->add_option("--batches", oracle_batches, "oracle-equivalence batches");
  losscheck_cmd->add_option("--grad-batches", grad_batches, "finite-difference batches");
  losscheck_cmd->add_flag("--inject-perturbation", inject,
                          "corrupt the analytic gradient (negative control)");
  auto* tau_opt = losscheck_cmd->add_option("--tau", tau_override, "temperature override");
  auto* phi_opt = losscheck_cmd->add_option("--phi", phi_override, "IoU clip override");
  auto* rank_opt = losscheck_cmd->add_option("--rank-op", rank_op, "max or sum");
  losscheck_cmd->fallthrough();

  auto* simulate_cmd =
      app.add_subcommand("simulate", "coverage and batch-statistics experiments");
  std::int64_t sim_trials = 0;
  double coverage_iou = -1.0;
  std::int64_t stats_trials = 0;
  double thre_cls = -1.0;
  simulate_cmd->add_option("--trials", sim_trials, "paired coverage trials");
  simulate_cmd->add_option("--coverage-iou", coverage_iou, "novel-coverage IoU bar");
  simulate_cmd->add_option("--stats-trials", stats_trials, "batch-statistics trials");
  simulate_cmd->add_option("--thre-cls", thre_cls, "label-2 confidence gate");
  simulate_cmd->fallthrough();

  auto* stats_cmd = app.add_subcommand("stats", "annotation pool statistics");
  std::string annotations_path;
  std::string split_path;
  double feasibility_iou = 0.3;
  stats_cmd->add_option("--annotations", annotations_path, "COCO annotation JSON")
      ->required();
  stats_cmd->add_option("--split", split_path, "category split JSON")->required();
  stats_cmd->add_option("--feasibility-iou", feasibility_iou,
                        "IoU bar for novel coverage feasibility");
  stats_cmd->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    RunConfig cfg =
        config_path.empty() ? default_run_config() : load_run_config(config_path);
    if (*seed_opt) cfg.reseed(seed);
    if (*out_opt) cfg.out_dir = out_dir;
    if (*threads_opt) cfg.threads = threads;

    if (app.got_subcommand(anchors_cmd)) {
      return cmd_anchors(cfg, image_size);
    }
    if (app.got_subcommand(compare_cmd)) {
      return cmd_sample_compare(cfg, m, compare_trials, compare_image_size);
    }
    if (app.got_subcommand(losscheck_cmd)) {
      if (*tau_opt) cfg.loss.tau = tau_override;
      if (*phi_opt) cfg.loss.phi = phi_override;
      if (*rank_opt) cfg.rank.op = combine_op_from_name(rank_op);
      cfg.loss.validate();
      return cmd_losscheck(cfg, oracle_batches, grad_batches, inject);
    }
    if (app.got_subcommand(simulate_cmd)) {
      if (sim_trials > 0) cfg.experiment.trials = sim_trials;
      if (coverage_iou >= 0.0) cfg.experiment.coverage_iou = coverage_iou;
      if (stats_trials > 0) cfg.experiment.stats_trials = stats_trials;
      if (thre_cls >= 0.0) {
        cfg.scene.thre_cls = thre_cls;
        cfg.loss.thre_cls = thre_cls;
      }
      cfg.validate();
      return cmd_simulate(cfg);
    }
    if (app.got_subcommand(stats_cmd)) {
      return cmd_stats(cfg, annotations_path, split_path, feasibility_iou);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
