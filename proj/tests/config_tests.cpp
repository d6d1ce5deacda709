#include <doctest.h>

#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "htrpn/config.hpp"

using namespace htrpn;
using nlohmann::json;

namespace {

std::string data(const std::string& name) {
  return std::string(TEST_DATA_DIR) + "/" + name;
}

}  // namespace

TEST_CASE("defaults are self-consistent") {
  const RunConfig cfg = default_run_config();
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.master_seed == 7);
  CHECK(cfg.scene.seed == 7);
  CHECK(cfg.sample.seed == 7);
  CHECK(cfg.sample.batch_size == 256);
  CHECK(cfg.sample.positive_cap == 128);
  CHECK(cfg.sample.strategy == Strategy::HSamp);
  CHECK(cfg.loss.alpha == 0.5);
  CHECK(cfg.loss.lambda == 0.5);
  CHECK(cfg.loss.tau == 0.2);
  CHECK(cfg.loss.phi == 0.7);
  CHECK(cfg.loss.thre_cls == 0.75);
  CHECK(cfg.experiment.trials == 10000);
  CHECK(cfg.experiment.coverage_iou == 0.3);
  CHECK(cfg.rank.k == 1000);
  CHECK(cfg.rank.op == CombineOp::Max);
  CHECK(cfg.pyramid.levels.size() == 5);
}

TEST_CASE("an empty document keeps every default") {
  const RunConfig cfg = run_config_from_json(json::object());
  const RunConfig defaults = default_run_config();
  CHECK(run_config_to_json(cfg).dump() == run_config_to_json(defaults).dump());
}

TEST_CASE("present fields override, absent fields persist") {
  const json j{{"loss", {{"tau", 0.3}}},
               {"sample", {{"strategy", "random"}, {"batch_size", 128}}},
               {"master_seed", 42}};
  const RunConfig cfg = run_config_from_json(j);
  CHECK(cfg.loss.tau == 0.3);
  CHECK(cfg.loss.alpha == 0.5);  // untouched
  CHECK(cfg.sample.strategy == Strategy::Random);
  CHECK(cfg.sample.batch_size == 128);
  CHECK(cfg.sample.positive_cap == 128);
  CHECK(cfg.master_seed == 42);
  CHECK(cfg.scene.seed == 42);   // the master seed reaches every stream
  CHECK(cfg.sample.seed == 42);
}

TEST_CASE("unknown keys are rejected at every level") {
  CHECK_THROWS_AS(run_config_from_json(json{{"verbose", true}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(run_config_from_json(json{{"loss", {{"tua", 0.2}}}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(run_config_from_json(json{{"scene", {{"widht", 80}}}}),
                  std::invalid_argument);
}

TEST_CASE("bad values are rejected") {
  CHECK_THROWS_AS(run_config_from_json(json{{"sample", {{"positive_cap", 512}}}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(run_config_from_json(json{{"sample", {{"strategy", "greedy"}}}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(run_config_from_json(json{{"rank", {{"op", "avg"}}}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(run_config_from_json(json{{"rank", {{"k", 0}}}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(run_config_from_json(json{{"loss", {{"tau", 0.0}}}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(run_config_from_json(json{{"threads", -2}}),
                  std::invalid_argument);
}

TEST_CASE("a custom pyramid must describe all five levels") {
  json level{{"name", "p2"},
             {"stride", 4},
             {"base_size", 32.0},
             {"aspect_ratios", {0.5, 1.0, 2.0}}};
  json four = json::array({level, level, level, level});
  CHECK_THROWS_AS(run_config_from_json(json{{"pyramid", {{"levels", four}}}}),
                  std::invalid_argument);

  json levels = json::array();
  const int strides[5] = {4, 8, 16, 32, 64};
  const double bases[5] = {16.0, 32.0, 64.0, 128.0, 256.0};
  for (int i = 0; i < 5; ++i) {
    levels.push_back({{"name", "p" + std::to_string(i + 2)},
                      {"stride", strides[i]},
                      {"base_size", bases[i]},
                      {"aspect_ratios", {0.5, 1.0, 2.0}}});
  }
  const RunConfig cfg = run_config_from_json(json{{"pyramid", {{"levels", levels}}}});
  CHECK(cfg.pyramid.levels[0].base_size == 16.0);
  CHECK(cfg.pyramid.levels[4].stride == 64);
}

TEST_CASE("serialization round trips") {
  RunConfig cfg = default_run_config();
  cfg.reseed(99);
  cfg.scene.image_w = 640.0;
  cfg.sample.strategy = Strategy::Random;
  cfg.rank.op = CombineOp::Sum;
  cfg.out_dir = "elsewhere";
  const auto dumped = run_config_to_json(cfg);
  const RunConfig back = run_config_from_json(dumped);
  CHECK(run_config_to_json(back).dump() == dumped.dump());
  CHECK(back.scene.image_w == 640.0);
  CHECK(back.master_seed == 99);
  CHECK(back.rank.op == CombineOp::Sum);
}

TEST_CASE("the shipped default config is an exact echo of the built-ins") {
  const RunConfig cfg =
      load_run_config(std::string(TEST_DATA_DIR) + "/../../configs/default.json");
  CHECK(run_config_to_json(cfg).dump() ==
        run_config_to_json(default_run_config()).dump());
}

TEST_CASE("config files load with diagnostics") {
  {
    std::ofstream out("config_tests_tmp.json", std::ios::binary);
    out << R"({"master_seed": 17, "experiment": {"trials": 5}})";
  }
  const RunConfig cfg = load_run_config("config_tests_tmp.json");
  CHECK(cfg.master_seed == 17);
  CHECK(cfg.experiment.trials == 5);

  CHECK_THROWS_AS(load_run_config("no_such_config.json"), std::runtime_error);
  try {
    load_run_config(data("malformed.json"));
    FAIL("malformed config should throw");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("byte") != std::string::npos);
  }
}
