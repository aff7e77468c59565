#pragma once

#include <filesystem>
#include <limits>
#include <utility>
#include <string>
#include <vector>

namespace crowdnav::plots {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Series {
  std::string label;
  std::vector<Point> points;
  /// Optional band, one (low, high) pair per point.
  std::vector<Point> band;
  bool line = false;
};

struct Figure {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  /// Horizontal reference line, skipped when NaN.
  double reference_y = std::numeric_limits<double>::quiet_NaN();
};

struct Range {
  double min = 0.0;
  double max = 1.0;
};

/// Padded range covering every point and band value of the figure.
std::pair<Range, Range> data_range(const Figure& figure);

/// Standalone SVG. The root element carries the plotted ranges as
/// data-x-min/max and data-y-min/max; every marker carries data-x/data-y.
std::string render_svg(const Figure& figure);

/// Reads metrics.csv, curve.csv and distance.csv from `report_dir` and writes
/// curve.svg, safety_time.svg, ade_safety.svg, ade_time.svg and
/// error_distance.svg next to them. Inputs are validated before any file is
/// written. Returns the written paths.
std::vector<std::filesystem::path> emit_plots(const std::filesystem::path& report_dir);

}  // namespace crowdnav::plots
