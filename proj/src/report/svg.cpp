#include "stabprobe/report/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace stabprobe::report {
namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
constexpr std::size_t kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);

constexpr const char* kUndefinedFill = "#bdbdbd";

struct Rgb {
  int r, g, b;
};

std::string to_hex(Rgb c) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", c.r, c.g, c.b);
  return buf;
}

Rgb lerp(Rgb a, Rgb b, double t) {
  auto ch = [&](int x, int y) { return static_cast<int>(std::lround(x + (y - x) * t)); };
  return {ch(a.r, b.r), ch(a.g, b.g), ch(a.b, b.b)};
}

}  // namespace

std::string diverging_color(double value) {
  const Rgb blue{0x21, 0x66, 0xac};
  const Rgb white{0xf7, 0xf7, 0xf7};
  const Rgb red{0xb2, 0x18, 0x2b};
  const double v = std::clamp(value, -1.0, 1.0);
  if (v < 0.0) return to_hex(lerp(white, blue, -v));
  return to_hex(lerp(white, red, v));
}

std::string trajectory_svg(const std::vector<TrajectorySeries>& series) {
  const double width = 640.0, height = 420.0;
  const double left = 56.0, right = width - 150.0, top = 24.0, bottom = height - 44.0;

  double x_min = 0.0, x_max = 1.0, y_min = 1e9, y_max = -1e9;
  bool have_x = false;
  for (const auto& s : series) {
    for (std::size_t t = 0; t < s.stats.checkpoints.size(); ++t) {
      const double x = static_cast<double>(s.stats.checkpoints[t]);
      if (!have_x) {
        x_min = x_max = x;
        have_x = true;
      } else {
        x_min = std::min(x_min, x);
        x_max = std::max(x_max, x);
      }
      y_min = std::min(y_min, s.stats.mean_acc[t] - s.stats.std_acc[t]);
      y_max = std::max(y_max, s.stats.mean_acc[t] + s.stats.std_acc[t]);
      if (s.overlay_run) {
        y_min = std::min(y_min, (*s.overlay_run)[t]);
        y_max = std::max(y_max, (*s.overlay_run)[t]);
      }
    }
  }
  if (!have_x) {
    y_min = 0.0;
    y_max = 1.0;
  }
  if (x_max == x_min) {
    x_min -= 1.0;
    x_max += 1.0;
  }
  const double y_pad = std::max(0.02, (y_max - y_min) * 0.08);
  y_min -= y_pad;
  y_max += y_pad;

  auto sx = [&](double x) { return left + (x - x_min) / (x_max - x_min) * (right - left); };
  auto sy = [&](double y) { return bottom - (y - y_min) / (y_max - y_min) * (bottom - top); };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  out << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";

  // axes and ticks
  out << "<line x1=\"" << fmt(left) << "\" y1=\"" << fmt(bottom) << "\" x2=\"" << fmt(right)
      << "\" y2=\"" << fmt(bottom) << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << fmt(left) << "\" y1=\"" << fmt(top) << "\" x2=\"" << fmt(left)
      << "\" y2=\"" << fmt(bottom) << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double yv = y_min + (y_max - y_min) * k / 4.0;
    const double y = sy(yv);
    out << "<line x1=\"" << fmt(left - 4) << "\" y1=\"" << fmt(y) << "\" x2=\"" << fmt(left)
        << "\" y2=\"" << fmt(y) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << fmt(left - 8) << "\" y=\"" << fmt(y + 4)
        << "\" font-size=\"11\" text-anchor=\"end\" font-family=\"sans-serif\">" << fmt(yv)
        << "</text>\n";
    const double xv = x_min + (x_max - x_min) * k / 4.0;
    const double x = sx(xv);
    out << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(bottom) << "\" x2=\"" << fmt(x)
        << "\" y2=\"" << fmt(bottom + 4) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(bottom + 18)
        << "\" font-size=\"11\" text-anchor=\"middle\" font-family=\"sans-serif\">"
        << fmt(xv) << "</text>\n";
  }
  out << "<text x=\"" << fmt((left + right) / 2) << "\" y=\"" << fmt(height - 8)
      << "\" font-size=\"12\" text-anchor=\"middle\" font-family=\"sans-serif\">checkpoint"
      << "</text>\n";
  out << "<text x=\"14\" y=\"" << fmt((top + bottom) / 2)
      << "\" font-size=\"12\" text-anchor=\"middle\" font-family=\"sans-serif\" transform=\""
      << "rotate(-90 14 " << fmt((top + bottom) / 2) << ")\">accuracy</text>\n";

  for (std::size_t d = 0; d < series.size(); ++d) {
    const auto& s = series[d];
    const char* color = kPalette[d % kPaletteSize];
    const std::size_t T = s.stats.checkpoints.size();

    // +-1 std band
    if (T >= 2) {
      out << "<polygon fill=\"" << color << "\" fill-opacity=\"0.18\" stroke=\"none\" points=\"";
      for (std::size_t t = 0; t < T; ++t) {
        out << fmt(sx(static_cast<double>(s.stats.checkpoints[t]))) << ','
            << fmt(sy(s.stats.mean_acc[t] + s.stats.std_acc[t])) << ' ';
      }
      for (std::size_t t = T; t-- > 0;) {
        out << fmt(sx(static_cast<double>(s.stats.checkpoints[t]))) << ','
            << fmt(sy(s.stats.mean_acc[t] - s.stats.std_acc[t]));
        if (t != 0) out << ' ';
      }
      out << "\"/>\n";
      out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t t = 0; t < T; ++t) {
        if (t) out << ' ';
        out << fmt(sx(static_cast<double>(s.stats.checkpoints[t]))) << ','
            << fmt(sy(s.stats.mean_acc[t]));
      }
      out << "\"/>\n";
    } else {
      // degenerate single-checkpoint band: a point with an error bar
      const double x = sx(static_cast<double>(s.stats.checkpoints[0]));
      out << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(sy(s.stats.mean_acc[0] - s.stats.std_acc[0]))
          << "\" x2=\"" << fmt(x) << "\" y2=\"" << fmt(sy(s.stats.mean_acc[0] + s.stats.std_acc[0]))
          << "\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n";
      out << "<circle cx=\"" << fmt(x) << "\" cy=\"" << fmt(sy(s.stats.mean_acc[0]))
          << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }

    if (s.overlay_run && T >= 2) {
      out << "<polyline fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"1\" stroke-dasharray=\"4 3\" points=\"";
      for (std::size_t t = 0; t < T; ++t) {
        if (t) out << ' ';
        out << fmt(sx(static_cast<double>(s.stats.checkpoints[t]))) << ','
            << fmt(sy((*s.overlay_run)[t]));
      }
      out << "\"/>\n";
    }

    // legend
    const double ly = top + 16.0 * static_cast<double>(d);
    out << "<line x1=\"" << fmt(right + 10) << "\" y1=\"" << fmt(ly) << "\" x2=\""
        << fmt(right + 30) << "\" y2=\"" << fmt(ly) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << fmt(right + 34) << "\" y=\"" << fmt(ly + 4)
        << "\" font-size=\"11\" font-family=\"sans-serif\">" << s.label << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string heatmap_svg(const std::vector<std::string>& labels,
                        const std::vector<double>& values,
                        const std::vector<std::uint8_t>& defined_flags,
                        const HeatmapOptions& options) {
  const std::size_t n = labels.size();
  const std::size_t factor = n <= options.render_cap ? 1 : (n + options.render_cap - 1) / options.render_cap;
  const std::size_t m = (n + factor - 1) / factor;

  // Average defined cells into the reduced grid.
  std::vector<double> grid(m * m, 0.0);
  std::vector<std::uint8_t> grid_defined(m * m, 0);
  for (std::size_t gi = 0; gi < m; ++gi) {
    for (std::size_t gj = 0; gj < m; ++gj) {
      double sum = 0.0;
      std::size_t count = 0;
      for (std::size_t i = gi * factor; i < std::min(n, (gi + 1) * factor); ++i) {
        for (std::size_t j = gj * factor; j < std::min(n, (gj + 1) * factor); ++j) {
          if (defined_flags[i * n + j]) {
            sum += values[i * n + j];
            ++count;
          }
        }
      }
      if (count > 0) {
        grid[gi * m + gj] = sum / static_cast<double>(count);
        grid_defined[gi * m + gj] = 1;
      }
    }
  }

  const bool labelled = options.show_labels && factor == 1 && n <= 40;
  const double label_space = labelled ? 90.0 : 10.0;
  const double grid_px = 520.0;
  const double cell = grid_px / static_cast<double>(m);
  const double left = label_space, top = labelled ? 90.0 : 40.0;
  const double width = left + grid_px + 90.0;
  const double height = top + grid_px + 20.0;

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  out << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  if (!options.title.empty()) {
    out << "<text x=\"" << fmt(left) << "\" y=\"20\" font-size=\"13\" font-family=\"sans-serif\">"
        << options.title << "</text>\n";
  }
  for (std::size_t gi = 0; gi < m; ++gi) {
    for (std::size_t gj = 0; gj < m; ++gj) {
      const std::string fill = grid_defined[gi * m + gj]
                                   ? diverging_color(grid[gi * m + gj])
                                   : std::string(kUndefinedFill);
      out << "<rect x=\"" << fmt(left + cell * static_cast<double>(gj)) << "\" y=\""
          << fmt(top + cell * static_cast<double>(gi)) << "\" width=\"" << fmt(cell)
          << "\" height=\"" << fmt(cell) << "\" fill=\"" << fill << "\"/>\n";
    }
  }
  if (labelled) {
    for (std::size_t i = 0; i < n; ++i) {
      const double cy = top + cell * (static_cast<double>(i) + 0.5);
      out << "<text x=\"" << fmt(left - 6) << "\" y=\"" << fmt(cy + 4)
          << "\" font-size=\"10\" text-anchor=\"end\" font-family=\"sans-serif\">" << labels[i]
          << "</text>\n";
      const double cx = left + cell * (static_cast<double>(i) + 0.5);
      out << "<text x=\"" << fmt(cx) << "\" y=\"" << fmt(top - 6)
          << "\" font-size=\"10\" text-anchor=\"start\" font-family=\"sans-serif\" transform=\""
          << "rotate(-60 " << fmt(cx) << " " << fmt(top - 6) << ")\">" << labels[i]
          << "</text>\n";
    }
  }
  // color scale: 21 swatches from +1 down to -1
  const double bar_x = left + grid_px + 20.0;
  const double bar_h = grid_px / 2.0;
  for (int k = 0; k <= 20; ++k) {
    const double v = 1.0 - 2.0 * k / 20.0;
    out << "<rect x=\"" << fmt(bar_x) << "\" y=\"" << fmt(top + bar_h * k / 21.0)
        << "\" width=\"16\" height=\"" << fmt(bar_h / 21.0 + 0.5) << "\" fill=\""
        << diverging_color(v) << "\"/>\n";
  }
  out << "<text x=\"" << fmt(bar_x + 20) << "\" y=\"" << fmt(top + 8)
      << "\" font-size=\"10\" font-family=\"sans-serif\">1</text>\n";
  out << "<text x=\"" << fmt(bar_x + 20) << "\" y=\"" << fmt(top + bar_h / 2 + 4)
      << "\" font-size=\"10\" font-family=\"sans-serif\">0</text>\n";
  out << "<text x=\"" << fmt(bar_x + 20) << "\" y=\"" << fmt(top + bar_h)
      << "\" font-size=\"10\" font-family=\"sans-serif\">-1</text>\n";
  out << "</svg>\n";
  return out.str();
}

}  // namespace stabprobe::report
