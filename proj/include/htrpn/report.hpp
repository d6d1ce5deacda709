#pragma once

#include <string>

#include <json.hpp>

#include "htrpn/coco.hpp"
#include "htrpn/pyramid.hpp"
#include "htrpn/sim.hpp"

namespace htrpn {

// Shortest round-trip decimal text for a double, shared by every CSV and JSON
// writer so reports are byte-stable.
std::string number_text(double v);

std::string anchors_csv(const AnchorSet& anchors, const PyramidSpec& spec);
nlohmann::ordered_json anchors_json(const AnchorSet& anchors, const PyramidSpec& spec);

// One row per trial, then `mean` and `stderr` rows.
std::string coverage_csv(const CoverageReport& report);
nlohmann::ordered_json coverage_json(const CoverageReport& report);

std::string batch_stats_csv(const BatchStatsReport& report);
nlohmann::ordered_json batch_stats_json(const BatchStatsReport& report);

std::string pool_stats_csv(const PoolStats& stats);
nlohmann::ordered_json pool_stats_json(const PoolStats& stats);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace htrpn
