#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "xmodal/metrics.hpp"

namespace xmodal {

struct TooFewAxes : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One scores document per task, as produced by cmd_score.
using ScoresJson = nlohmann::ordered_json;

struct ReportTables {
  std::string markdown;  // main / OCR / conditional / VDP tables, 2 decimals
  std::string csv;       // same cells at full precision, RFC-4180
};

ReportTables build_tables(const std::vector<ScoresJson>& per_task_scores);

struct RadarEntry {
  std::string task;
  double text_acc = 0.0;
  double image_acc = 0.0;
};

// Standalone SVG: one axis per task at angle 2*pi*i/N, two closed polygons
// (text and image accuracy), labeled axes and a legend. Radius is affine in
// accuracy: acc=0 at the inner ring, acc=1 at the outer ring.
std::string radar_svg(const std::vector<RadarEntry>& per_task);

inline constexpr double kRadarInnerRadius = 40.0;
inline constexpr double kRadarOuterRadius = 240.0;
inline constexpr double kRadarCenter = 300.0;

}  // namespace xmodal
