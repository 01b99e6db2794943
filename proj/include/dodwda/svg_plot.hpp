#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "dodwda/errors.hpp"
#include "dodwda/scenario.hpp"
#include "dodwda/trace_io.hpp"

namespace dodwda::sim {

/// One named series of (x, y) points for a line chart.
struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
};

namespace plot_detail {

constexpr double kWidth = 880, kHeight = 520;
constexpr double kLeft = 72, kRight = 200, kTop = 48, kBottom = 56;

inline const char* palette(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                 "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
                                 "#bcbd22", "#e377c2"};
  return colors[i % 10];
}

struct Range {
  double lo = 0.0, hi = 1.0;
  void widen(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
};

inline std::vector<double> ticks(double lo, double hi, int target = 6) {
  std::vector<double> out;
  double span = hi - lo;
  if (!(span > 0.0)) return {lo};
  double raw = span / target;
  double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 2.5, 5.0, 10.0})
    if (mag * m >= raw) {
      step = mag * m;
      break;
    }
  double first = std::ceil(lo / step) * step;
  for (double v = first; v <= hi + step * 1e-9; v += step) out.push_back(v);
  return out;
}

inline std::string trim_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace plot_detail

/// Renders one static line chart as an SVG file. Pure function of the
/// series content; log_y plots log10 of the values with untouched labels.
inline void write_line_chart(const std::string& path, const std::string& title,
                             const std::string& x_label,
                             const std::string& y_label,
                             const std::vector<Series>& series,
                             bool log_y = false) {
  using namespace plot_detail;
  if (series.empty())
    throw contract_violation_error("chart needs at least one series");

  auto transform = [log_y](double v) {
    return log_y ? std::log10(std::max(v, 1e-12)) : v;
  };

  Range xr, yr;
  bool first_point = true;
  for (const Series& s : series) {
    if (s.x.size() != s.y.size())
      throw contract_violation_error("series x/y lengths differ");
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      double yv = transform(s.y[k]);
      if (first_point) {
        xr.lo = xr.hi = s.x[k];
        yr.lo = yr.hi = yv;
        first_point = false;
      } else {
        xr.widen(s.x[k]);
        yr.widen(yv);
      }
    }
  }
  if (first_point)
    throw contract_violation_error("chart series contain no points");
  if (xr.hi == xr.lo) xr.hi = xr.lo + 1.0;
  if (yr.hi == yr.lo) yr.hi = yr.lo + 1.0;
  double ypad = 0.05 * (yr.hi - yr.lo);
  yr.lo -= ypad;
  yr.hi += ypad;

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto sx = [&](double v) { return kLeft + (v - xr.lo) / (xr.hi - xr.lo) * plot_w; };
  auto sy = [&](double v) {
    return kTop + plot_h - (transform(v) - yr.lo) / (yr.hi - yr.lo) * plot_h;
  };

  std::ofstream out(path, std::ios::binary);
  if (!out) throw error("cannot open chart output file: " + path);
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
      << kHeight << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"28\" font-size=\"17\""
      << " font-family=\"sans-serif\" text-anchor=\"middle\">" << title
      << "</text>\n";

  // axes, ticks, grid
  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w
      << "\" height=\"" << plot_h
      << "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  for (double tx : ticks(xr.lo, xr.hi)) {
    double px = sx(tx);
    out << "<line x1=\"" << px << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << px
        << "\" y2=\"" << kTop + plot_h + 5
        << "\" stroke=\"#333333\" stroke-width=\"1\"/>\n"
        << "<text x=\"" << px << "\" y=\"" << kTop + plot_h + 20
        << "\" font-size=\"12\" font-family=\"sans-serif\" "
           "text-anchor=\"middle\">"
        << trim_number(tx) << "</text>\n";
  }
  for (double ty : ticks(yr.lo, yr.hi)) {
    double py = kTop + plot_h - (ty - yr.lo) / (yr.hi - yr.lo) * plot_h;
    out << "<line x1=\"" << kLeft << "\" y1=\"" << py << "\" x2=\""
        << kLeft + plot_w << "\" y2=\"" << py
        << "\" stroke=\"#e0e0e0\" stroke-width=\"1\"/>\n"
        << "<text x=\"" << kLeft - 8 << "\" y=\"" << py + 4
        << "\" font-size=\"12\" font-family=\"sans-serif\" text-anchor=\"end\">"
        << (log_y ? ("1e" + trim_number(ty)) : trim_number(ty)) << "</text>\n";
  }
  out << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 14
      << "\" font-size=\"13\" font-family=\"sans-serif\" "
         "text-anchor=\"middle\">"
      << x_label << "</text>\n"
      << "<text x=\"20\" y=\"" << kTop + plot_h / 2
      << "\" font-size=\"13\" font-family=\"sans-serif\" text-anchor=\"middle\""
      << " transform=\"rotate(-90 20 " << kTop + plot_h / 2 << ")\">" << y_label
      << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const Series& s = series[si];
    out << "<polyline fill=\"none\" stroke=\"" << palette(si)
        << "\" stroke-width=\"1.4\""
        << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << " points=\"";
    for (std::size_t k = 0; k < s.x.size(); ++k)
      out << sx(s.x[k]) << ',' << sy(s.y[k]) << ' ';
    out << "\"/>\n";
    double ly = kTop + 16 + 18 * static_cast<double>(si);
    out << "<line x1=\"" << kLeft + plot_w + 12 << "\" y1=\"" << ly - 4
        << "\" x2=\"" << kLeft + plot_w + 40 << "\" y2=\"" << ly - 4
        << "\" stroke=\"" << palette(si) << "\" stroke-width=\"2\""
        << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>\n"
        << "<text x=\"" << kLeft + plot_w + 46 << "\" y=\"" << ly
        << "\" font-size=\"12\" font-family=\"sans-serif\">" << s.label
        << "</text>\n";
  }
  out << "</svg>\n";
  if (!out) throw error("failed while writing chart file: " + path);
}

/// Emits the four scenario charts: per-agent dual tracking, aggregate
/// setpoint tracking, local tracking against virtual setpoints, and the
/// average absolute regret against the averaged bound.
inline std::vector<std::string> render_plots(const ScenarioTrace& trace,
                                             const std::string& output_dir) {
  if (trace.rounds < 1 || trace.engine.decisions.empty())
    throw contract_violation_error("cannot render charts from an empty trace");

  std::filesystem::create_directories(output_dir);
  std::vector<double> rounds_axis(trace.rounds + 1);
  for (int t = 0; t <= trace.rounds; ++t) rounds_axis[t] = t;

  std::vector<std::string> files;

  {  // (a) dual variables vs centralized dual optimum
    std::vector<Series> series;
    for (int i = 0; i < trace.agents; ++i) {
      Series s{"agent " + std::to_string(i + 1), rounds_axis, {}, false};
      s.y.resize(trace.rounds + 1);
      for (int t = 0; t <= trace.rounds; ++t)
        s.y[t] = trace.engine.decisions[t][i](0);
      series.push_back(std::move(s));
    }
    Series star{"centralized", rounds_axis, {}, true};
    star.y.assign(trace.nu_star.begin(), trace.nu_star.end());
    series.push_back(std::move(star));
    std::string path = output_dir + "/dual_tracking.svg";
    write_line_chart(path, "Dual variables vs centralized optimum", "round",
                     "dual variable", series);
    files.push_back(path);
  }

  {  // (b) aggregate adjustment vs setpoint
    Series total{"sum of adjustments", rounds_axis, {}, false};
    total.y.resize(trace.rounds + 1);
    for (int t = 0; t <= trace.rounds; ++t) {
      double sum = 0.0;
      for (int i = 0; i < trace.agents; ++i) sum += trace.adjustments[t][i];
      total.y[t] = sum;
    }
    Series target{"setpoint", rounds_axis, {}, true};
    target.y.assign(trace.setpoints.begin(), trace.setpoints.end());
    std::string path = output_dir + "/aggregate_tracking.svg";
    write_line_chart(path, "Aggregate setpoint tracking", "round",
                     "power adjustment (kW)", {total, target});
    files.push_back(path);
  }

  {  // (c) per-building adjustments vs virtual setpoints
    std::vector<Series> series;
    for (int i = 0; i < trace.agents; ++i) {
      Series s{"building " + std::to_string(i + 1), rounds_axis, {}, false};
      s.y.resize(trace.rounds + 1);
      for (int t = 0; t <= trace.rounds; ++t) s.y[t] = trace.adjustments[t][i];
      series.push_back(std::move(s));
    }
    for (int i = 0; i < trace.agents; ++i) {
      Series s{"virtual " + std::to_string(i + 1), rounds_axis, {}, true};
      s.y.resize(trace.rounds + 1);
      for (int t = 0; t <= trace.rounds; ++t)
        s.y[t] = trace.virtual_setpoint(i, t);
      series.push_back(std::move(s));
    }
    std::string path = output_dir + "/local_tracking.svg";
    write_line_chart(path, "Local setpoint tracking", "round",
                     "power adjustment (kW)", series);
    files.push_back(path);
  }

  {  // (d) average absolute regret vs averaged bound
    std::vector<double> t_axis(trace.rounds);
    Series avg{"average absolute regret", {}, {}, false};
    Series bound{"averaged bound", {}, {}, true};
    for (int t = 1; t <= trace.rounds; ++t) {
      t_axis[t - 1] = t;
      avg.y.push_back(trace.average_abs_regret[t]);
      bound.y.push_back(trace.bound.total / t);
    }
    avg.x = t_axis;
    bound.x = t_axis;
    std::string path = output_dir + "/regret.svg";
    write_line_chart(path, "Average absolute network regret", "round",
                     "regret", {avg, bound}, /*log_y=*/true);
    files.push_back(path);
  }

  return files;
}

}  // namespace dodwda::sim
