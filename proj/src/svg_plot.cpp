#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dprl/harness.hpp"

namespace dprl {

namespace {

constexpr int kWidth = 980;
constexpr int kHeight = 620;
constexpr int kMarginLeft = 80;
constexpr int kMarginRight = 250;
constexpr int kMarginTop = 50;
constexpr int kMarginBottom = 60;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#e377c2",
                          "#7f7f7f", "#bcbd22", "#aec7e8", "#ff9896",
                          "#98df8a", "#c5b0d5", "#ffbb78", "#c49c94"};
constexpr std::size_t kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);

std::string coord(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", value);
  return buf;
}

std::string tick_label(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", value);
  return buf;
}

// Tick spacing of the form {1,2,5} * 10^k covering range/target ticks.
double nice_step(double range, int target_ticks) {
  if (range <= 0.0) return 1.0;
  const double raw = range / target_ticks;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double mult : {1.0, 2.0, 5.0, 10.0}) {
    if (mult * mag >= raw) return mult * mag;
  }
  return 10.0 * mag;
}

void escape_into(std::ostringstream& out, const std::string& text) {
  for (char c : text) {
    switch (c) {
      case '&': out << "&amp;"; break;
      case '<': out << "&lt;"; break;
      case '>': out << "&gt;"; break;
      default: out << c;
    }
  }
}

}  // namespace

void emit_plot(const std::vector<PlotSeries>& series, const std::string& path) {
  if (series.empty()) {
    throw std::invalid_argument("emit_plot: no series");
  }
  std::size_t max_len = 0;
  double max_y = 0.0;
  for (const PlotSeries& s : series) {
    max_len = std::max(max_len, s.mean.size());
    for (std::size_t t = 0; t < s.mean.size(); ++t) {
      const double sd = t < s.std_dev.size() ? s.std_dev[t] : 0.0;
      max_y = std::max(max_y, s.mean[t] + sd);
    }
  }
  if (max_len == 0) {
    throw std::invalid_argument("emit_plot: series are empty");
  }
  const double x_max = static_cast<double>(max_len);
  const double y_max = max_y > 0.0 ? 1.05 * max_y : 1.0;

  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  const double plot_h = kHeight - kMarginTop - kMarginBottom;
  const auto x_pos = [&](double episode) {
    return kMarginLeft + plot_w * (episode / x_max);
  };
  const auto y_pos = [&](double value) {
    return kMarginTop + plot_h * (1.0 - value / y_max);
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' '
      << kHeight << "\">\n";
  svg << "<rect width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kMarginLeft + plot_w / 2 << "\" y=\"28\" "
         "text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"17\">"
         "Cumulative regret</text>\n";

  // Grid and ticks.
  const double x_step = nice_step(x_max, 6);
  for (double x = 0.0; x <= x_max + 1e-9; x += x_step) {
    const double px = x_pos(x);
    svg << "<line x1=\"" << coord(px) << "\" y1=\"" << kMarginTop << "\" x2=\""
        << coord(px) << "\" y2=\"" << kMarginTop + plot_h
        << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg << "<text x=\"" << coord(px) << "\" y=\"" << kMarginTop + plot_h + 22
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"12\">"
        << tick_label(x) << "</text>\n";
  }
  const double y_step = nice_step(y_max, 6);
  for (double y = 0.0; y <= y_max + 1e-9; y += y_step) {
    const double py = y_pos(y);
    svg << "<line x1=\"" << kMarginLeft << "\" y1=\"" << coord(py) << "\" x2=\""
        << kMarginLeft + plot_w << "\" y2=\"" << coord(py)
        << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << coord(py + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">"
        << tick_label(y) << "</text>\n";
  }
  svg << "<rect x=\"" << kMarginLeft << "\" y=\"" << kMarginTop << "\" width=\""
      << plot_w << "\" height=\"" << plot_h
      << "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  svg << "<text x=\"" << kMarginLeft + plot_w / 2 << "\" y=\""
      << kHeight - 14
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"14\">episode</text>\n";
  svg << "<text x=\"22\" y=\"" << kMarginTop + plot_h / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\" "
         "transform=\"rotate(-90 22 "
      << kMarginTop + plot_h / 2 << ")\">cumulative regret</text>\n";

  // Keep files small on long runs: stride the polylines, always keeping the
  // final point.
  for (std::size_t i = 0; i < series.size(); ++i) {
    const PlotSeries& s = series[i];
    if (s.mean.empty()) continue;
    const char* color = kPalette[i % kPaletteSize];
    const std::size_t n = s.mean.size();
    const std::size_t stride = std::max<std::size_t>(1, n / 800);
    std::vector<std::size_t> points;
    for (std::size_t t = 0; t < n; t += stride) {
      points.push_back(t);
    }
    if (points.back() != n - 1) {
      points.push_back(n - 1);
    }

    const bool has_band = !s.std_dev.empty() &&
                          std::any_of(s.std_dev.begin(), s.std_dev.end(),
                                      [](double v) { return v > 0.0; });
    if (has_band) {
      svg << "<polygon fill=\"" << color << "\" fill-opacity=\"0.15\" "
             "stroke=\"none\" points=\"";
      for (std::size_t t : points) {
        const double sd = t < s.std_dev.size() ? s.std_dev[t] : 0.0;
        svg << coord(x_pos(static_cast<double>(t + 1))) << ','
            << coord(y_pos(std::min(y_max, s.mean[t] + sd))) << ' ';
      }
      for (auto it = points.rbegin(); it != points.rend(); ++it) {
        const double sd = *it < s.std_dev.size() ? s.std_dev[*it] : 0.0;
        svg << coord(x_pos(static_cast<double>(*it + 1))) << ','
            << coord(y_pos(std::max(0.0, s.mean[*it] - sd))) << ' ';
      }
      svg << "\"/>\n";
    }

    svg << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.8\" points=\"";
    for (std::size_t t : points) {
      svg << coord(x_pos(static_cast<double>(t + 1))) << ','
          << coord(y_pos(std::max(0.0, std::min(y_max, s.mean[t])))) << ' ';
    }
    svg << "\"/>\n";

    // Legend entry.
    const double ly = kMarginTop + 12 + 22.0 * static_cast<double>(i);
    const double lx = kWidth - kMarginRight + 18;
    svg << "<line x1=\"" << coord(lx) << "\" y1=\"" << coord(ly) << "\" x2=\""
        << coord(lx + 26) << "\" y2=\"" << coord(ly) << "\" stroke=\"" << color
        << "\" stroke-width=\"2.5\"/>\n";
    svg << "<text x=\"" << coord(lx + 32) << "\" y=\"" << coord(ly + 4)
        << "\" font-family=\"sans-serif\" font-size=\"12\">";
    escape_into(svg, s.label);
    svg << "</text>\n";
  }
  svg << "</svg>\n";

  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("emit_plot: cannot open '" + path + "'");
  }
  out << svg.str();
}

void emit_plot(const std::vector<AggregateResult>& results,
               const std::string& path) {
  std::vector<PlotSeries> series;
  series.reserve(results.size());
  for (const AggregateResult& result : results) {
    series.push_back({result.group_id, result.mean_cumulative, result.std_cumulative});
  }
  emit_plot(series, path);
}

}  // namespace dprl
