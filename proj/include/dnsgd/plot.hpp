#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dnsgd/error.hpp"
#include "dnsgd/metrics.hpp"

namespace dnsgd {

// One curve: x/y value pairs plus a legend label.
struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

// One plot panel with axis captions.
struct Panel {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
};

namespace detail {

inline const char* series_color(std::size_t index) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                  "#9467bd", "#ff7f0e", "#8c564b"};
  return palette[index % (sizeof palette / sizeof palette[0])];
}

inline std::string format_tick(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.4g", value);
  return buffer;
}

}  // namespace detail

// Renders panels side by side as a standalone SVG. With log_scale_y, y values
// are plotted on a log10 axis (nonpositive values are clamped to the smallest
// positive value in the panel).
inline std::string render_svg(const std::vector<Panel>& panels, bool log_scale_y) {
  const double panel_w = 380.0, panel_h = 300.0;
  const double ml = 62.0, mr = 16.0, mt = 34.0, mb = 46.0;
  const double width = panel_w * static_cast<double>(panels.size());

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << panel_h << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (std::size_t p = 0; p < panels.size(); ++p) {
    const Panel& panel = panels[p];
    const double x0 = panel_w * static_cast<double>(p) + ml;
    const double y0 = mt;
    const double plot_w = panel_w - ml - mr;
    const double plot_h = panel_h - mt - mb;

    // Data ranges; y optionally in log10 space.
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    double smallest_positive = xmin;
    for (const Series& s : panel.series)
      for (double v : s.y)
        if (v > 0.0) smallest_positive = std::min(smallest_positive, v);
    if (!std::isfinite(smallest_positive)) smallest_positive = 1e-12;
    const auto y_value = [&](double v) {
      if (!log_scale_y) return v;
      return std::log10(std::max(v, smallest_positive));
    };
    for (const Series& s : panel.series)
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        xmin = std::min(xmin, s.x[i]);
        xmax = std::max(xmax, s.x[i]);
        ymin = std::min(ymin, y_value(s.y[i]));
        ymax = std::max(ymax, y_value(s.y[i]));
      }
    if (!std::isfinite(xmin)) { xmin = 0.0; xmax = 1.0; ymin = 0.0; ymax = 1.0; }
    if (xmax - xmin < 1e-12) { xmin -= 0.5; xmax += 0.5; }
    if (ymax - ymin < 1e-12) { ymin -= 0.5; ymax += 0.5; }

    const auto sx = [&](double v) { return x0 + (v - xmin) / (xmax - xmin) * plot_w; };
    const auto sy = [&](double v) {
      return y0 + plot_h - (y_value(v) - ymin) / (ymax - ymin) * plot_h;
    };

    svg << "<g class=\"panel\">\n"
        << "<rect x=\"" << x0 << "\" y=\"" << y0 << "\" width=\"" << plot_w
        << "\" height=\"" << plot_h << "\" fill=\"none\" stroke=\"#444\"/>\n"
        << "<text x=\"" << x0 + plot_w / 2 << "\" y=\"" << y0 - 12
        << "\" text-anchor=\"middle\" font-size=\"13\">" << panel.title << "</text>\n"
        << "<text x=\"" << x0 + plot_w / 2 << "\" y=\"" << y0 + plot_h + 32
        << "\" text-anchor=\"middle\">" << panel.x_label << "</text>\n"
        << "<text x=\"" << x0 - 48 << "\" y=\"" << y0 + plot_h / 2
        << "\" text-anchor=\"middle\" transform=\"rotate(-90 " << x0 - 48 << ' '
        << y0 + plot_h / 2 << ")\">" << panel.y_label
        << (log_scale_y ? " (log)" : "") << "</text>\n";

    // Axis ticks: ends plus midpoint.
    for (double t : {0.0, 0.5, 1.0}) {
      const double xv = xmin + t * (xmax - xmin);
      const double yv = ymin + t * (ymax - ymin);
      const double xpix = x0 + t * plot_w;
      const double ypix = y0 + plot_h - t * plot_h;
      svg << "<line x1=\"" << xpix << "\" y1=\"" << y0 + plot_h << "\" x2=\"" << xpix
          << "\" y2=\"" << y0 + plot_h + 4 << "\" stroke=\"#444\"/>\n"
          << "<text x=\"" << xpix << "\" y=\"" << y0 + plot_h + 16
          << "\" text-anchor=\"middle\">" << detail::format_tick(xv) << "</text>\n"
          << "<line x1=\"" << x0 - 4 << "\" y1=\"" << ypix << "\" x2=\"" << x0
          << "\" y2=\"" << ypix << "\" stroke=\"#444\"/>\n"
          << "<text x=\"" << x0 - 6 << "\" y=\"" << ypix + 4
          << "\" text-anchor=\"end\">"
          << detail::format_tick(log_scale_y ? std::pow(10.0, yv) : yv) << "</text>\n";
    }

    for (std::size_t si = 0; si < panel.series.size(); ++si) {
      const Series& s = panel.series[si];
      if (s.x.empty()) continue;
      svg << "<polyline fill=\"none\" stroke=\"" << detail::series_color(si)
          << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i)
        svg << sx(s.x[i]) << ',' << sy(s.y[i]) << ' ';
      svg << "\"/>\n"
          << "<text x=\"" << x0 + plot_w - 6 << "\" y=\""
          << y0 + 14 + 14 * static_cast<double>(si)
          << "\" text-anchor=\"end\" fill=\"" << detail::series_color(si) << "\">"
          << s.label << "</text>\n";
    }
    svg << "</g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

// The standard three-panel comparison figure: batch train loss vs step, test
// loss vs epoch, batch train loss vs wall-clock seconds.
inline std::vector<Panel> comparison_panels(
    const std::vector<std::pair<std::string, MetricsLog>>& runs) {
  Panel by_step{"train loss vs step", "step", "loss", {}};
  Panel by_epoch{"test loss vs epoch", "epoch", "loss", {}};
  Panel by_time{"train loss vs time", "seconds", "loss", {}};
  for (const auto& [label, log] : runs) {
    Series step_series{label, {}, {}}, time_series{label, {}, {}};
    for (const IterationRecord& it : log.iterations) {
      step_series.x.push_back(static_cast<double>(it.step));
      step_series.y.push_back(it.train_batch_loss);
      time_series.x.push_back(it.elapsed_s);
      time_series.y.push_back(it.train_batch_loss);
    }
    Series epoch_series{label, {}, {}};
    for (const EpochRecord& e : log.epochs) {
      epoch_series.x.push_back(static_cast<double>(e.epoch));
      epoch_series.y.push_back(e.test_loss);
    }
    by_step.series.push_back(std::move(step_series));
    by_epoch.series.push_back(std::move(epoch_series));
    by_time.series.push_back(std::move(time_series));
  }
  return {std::move(by_step), std::move(by_epoch), std::move(by_time)};
}

// Writes the SVG atomically (temp file, then rename).
inline void write_svg(const std::vector<Panel>& panels, bool log_scale_y,
                      const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream file(tmp, std::ios::binary);
    if (!file) throw Error("write_svg: cannot open '" + tmp + "'");
    file << render_svg(panels, log_scale_y);
    if (!file) throw Error("write_svg: write failed for '" + tmp + "'");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace dnsgd
