#include "crowdnav/plots.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include <fmt/format.h>

#include "crowdnav/csv.hpp"
#include "crowdnav/error.hpp"

namespace crowdnav::plots {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 150.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 55.0;

const char* color(std::size_t i) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                  "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};
  return palette[i % 8];
}

std::string escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

Range pad(double lo, double hi) {
  if (!(hi > lo)) {
    const double w = std::max(1.0, std::abs(lo) * 0.1);
    return {lo - w, hi + w};
  }
  const double m = 0.05 * (hi - lo);
  return {lo - m, hi + m};
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

}  // namespace

std::pair<Range, Range> data_range(const Figure& figure) {
  double x0 = std::numeric_limits<double>::infinity();
  double x1 = -x0;
  double y0 = x0;
  double y1 = -x0;
  auto take = [&](double x, double y) {
    if (!std::isfinite(x) || !std::isfinite(y)) return;
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  };
  for (const Series& s : figure.series) {
    for (std::size_t i = 0; i < s.points.size(); ++i) {
      take(s.points[i].x, s.points[i].y);
      if (i < s.band.size()) {
        take(s.points[i].x, s.band[i].x);
        take(s.points[i].x, s.band[i].y);
      }
    }
  }
  if (std::isfinite(figure.reference_y) && std::isfinite(x0)) take(x0, figure.reference_y);
  if (!std::isfinite(x0)) return {Range{}, Range{}};
  return {pad(x0, x1), pad(y0, y1)};
}

std::string render_svg(const Figure& figure) {
  const auto [xr, yr] = data_range(figure);
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xr.min) / (xr.max - xr.min) * pw; };
  auto py = [&](double y) { return kTop + ph - (y - yr.min) / (yr.max - yr.min) * ph; };

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\" "
      "data-x-min=\"{:.6f}\" data-x-max=\"{:.6f}\" data-y-min=\"{:.6f}\" data-y-max=\"{:.6f}\">\n",
      kWidth, kHeight, kWidth, kHeight, xr.min, xr.max, yr.min, yr.max);
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += fmt::format("<text x=\"{:.1f}\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\" "
                     "text-anchor=\"middle\">{}</text>\n",
                     kLeft + pw / 2, escape(figure.title));
  svg += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" "
                     "fill=\"none\" stroke=\"black\"/>\n",
                     kLeft, kTop, pw, ph);
  for (int i = 0; i <= 5; ++i) {
    const double fx = xr.min + (xr.max - xr.min) * i / 5.0;
    const double fy = yr.min + (yr.max - yr.min) * i / 5.0;
    svg += fmt::format("<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{0:.1f}\" y2=\"{2:.1f}\" stroke=\"black\"/>"
                       "<text x=\"{0:.1f}\" y=\"{3:.1f}\" font-family=\"sans-serif\" font-size=\"11\" "
                       "text-anchor=\"middle\">{4:.3g}</text>\n",
                       px(fx), kTop + ph, kTop + ph + 5, kTop + ph + 18, fx);
    svg += fmt::format("<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{2:.1f}\" y2=\"{1:.1f}\" stroke=\"black\"/>"
                       "<text x=\"{3:.1f}\" y=\"{4:.1f}\" font-family=\"sans-serif\" font-size=\"11\" "
                       "text-anchor=\"end\">{5:.3g}</text>\n",
                       kLeft - 5, py(fy), kLeft, kLeft - 8, py(fy) + 4, fy);
  }
  svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"13\" "
                     "text-anchor=\"middle\">{}</text>\n",
                     kLeft + pw / 2, kHeight - 12, escape(figure.x_label));
  svg += fmt::format("<text x=\"16\" y=\"{0:.1f}\" font-family=\"sans-serif\" font-size=\"13\" "
                     "text-anchor=\"middle\" transform=\"rotate(-90 16 {0:.1f})\">{1}</text>\n",
                     kTop + ph / 2, escape(figure.y_label));
  if (std::isfinite(figure.reference_y)) {
    svg += fmt::format("<line x1=\"{0:.1f}\" y1=\"{2:.1f}\" x2=\"{1:.1f}\" y2=\"{2:.1f}\" "
                       "stroke=\"gray\" stroke-dasharray=\"5,4\"/>\n",
                       kLeft, kLeft + pw, py(figure.reference_y));
  }

  for (std::size_t si = 0; si < figure.series.size(); ++si) {
    const Series& s = figure.series[si];
    const char* c = color(si);
    if (!s.band.empty() && s.band.size() == s.points.size()) {
      std::string poly;
      for (std::size_t i = 0; i < s.points.size(); ++i) {
        poly += fmt::format("{:.2f},{:.2f} ", px(s.points[i].x), py(s.band[i].y));
      }
      for (std::size_t i = s.points.size(); i-- > 0;) {
        poly += fmt::format("{:.2f},{:.2f} ", px(s.points[i].x), py(s.band[i].x));
      }
      svg += fmt::format("<polygon points=\"{}\" fill=\"{}\" fill-opacity=\"0.2\" stroke=\"none\"/>\n",
                         poly, c);
    }
    if (s.line && s.points.size() > 1) {
      std::string pts;
      for (const Point& p : s.points) pts += fmt::format("{:.2f},{:.2f} ", px(p.x), py(p.y));
      svg += fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"/>\n",
                         pts, c);
    }
    for (const Point& p : s.points) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) continue;
      svg += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"{}\" fill=\"{}\" "
                         "data-x=\"{:.6f}\" data-y=\"{:.6f}\"/>\n",
                         px(p.x), py(p.y), s.line ? 2.5 : 3.5, c, p.x, p.y);
    }
    const double ly = kTop + 10 + 18.0 * static_cast<double>(si);
    svg += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"12\" height=\"12\" fill=\"{}\"/>"
                       "<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" "
                       "font-size=\"12\">{}</text>\n",
                       kLeft + pw + 12, ly - 10, c, kLeft + pw + 30, ly, escape(s.label));
  }
  svg += "</svg>\n";
  return svg;
}

std::vector<std::filesystem::path> emit_plots(const std::filesystem::path& report_dir) {
  const auto metrics_path = report_dir / "metrics.csv";
  const auto curve_path = report_dir / "curve.csv";
  const auto distance_path = report_dir / "distance.csv";
  for (const auto& p : {metrics_path, curve_path, distance_path}) {
    if (!std::filesystem::is_regular_file(p)) throw ValidationError("missing input " + p.string());
  }
  const csv::Table metrics = csv::read(metrics_path);
  const csv::Table curve = csv::read(curve_path);
  const csv::Table dist = csv::read(distance_path);
  if (metrics.rows.empty()) throw ValidationError("no trials in " + metrics_path.string());

  // Series keyed by model in first-seen order.
  auto by_model = [](const csv::Table& t, auto&& point) {
    std::vector<Series> out;
    std::map<std::string, std::size_t> index;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const std::string& m = t.text(r, "model");
      if (!index.contains(m)) {
        index.emplace(m, out.size());
        out.push_back(Series{m, {}, {}, false});
      }
      point(out[index.at(m)], r);
    }
    return out;
  };

  Figure curve_fig{"Multistep prediction error", "prediction step", "min error over samples (m)", {}};
  curve_fig.series = by_model(curve, [&](Series& s, std::size_t r) {
    const double y = curve.number(r, "err_min");
    const double ci = curve.number(r, "ci95");
    s.points.push_back({curve.number(r, "step"), y});
    s.band.push_back({y - ci, y + ci});
    s.line = true;
  });

  auto finite_or_nan = [](double v) {
    return std::isfinite(v) ? v : std::numeric_limits<double>::quiet_NaN();
  };
  Figure safety_fig{"Safety vs time to goal", "time to goal (s)", "safety (m)", {}};
  safety_fig.series = by_model(metrics, [&](Series& s, std::size_t r) {
    s.points.push_back({metrics.number(r, "time_to_goal"), finite_or_nan(metrics.number(r, "safety"))});
  });
  safety_fig.reference_y = 0.0;

  Figure ade_safety{"Prediction error vs safety", "ADE (m)", "safety (m)", {}};
  ade_safety.series = by_model(metrics, [&](Series& s, std::size_t r) {
    s.points.push_back({finite_or_nan(metrics.number(r, "ade")), finite_or_nan(metrics.number(r, "safety"))});
  });
  Figure ade_time{"Prediction error vs time to goal", "ADE (m)", "time to goal (s)", {}};
  ade_time.series = by_model(metrics, [&](Series& s, std::size_t r) {
    s.points.push_back({finite_or_nan(metrics.number(r, "ade")), metrics.number(r, "time_to_goal")});
  });
  Figure dist_fig{"Prediction error vs distance from the robot", "robot-human distance (m)",
                  "ADE (m)", {}};
  dist_fig.series = by_model(dist, [&](Series& s, std::size_t r) {
    s.points.push_back({dist.number(r, "distance"), dist.number(r, "error")});
  });

  const std::pair<const char*, const Figure*> outputs[] = {
      {"curve.svg", &curve_fig},           {"safety_time.svg", &safety_fig},
      {"ade_safety.svg", &ade_safety},     {"ade_time.svg", &ade_time},
      {"error_distance.svg", &dist_fig},
  };
  std::vector<std::pair<std::filesystem::path, std::string>> rendered;
  for (const auto& [name, fig] : outputs) rendered.emplace_back(report_dir / name, render_svg(*fig));
  std::vector<std::filesystem::path> written;
  for (const auto& [path, text] : rendered) {
    write_file(path, text);
    written.push_back(path);
  }
  return written;
}

}  // namespace crowdnav::plots
