#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stabprobe/stats.hpp"

namespace stabprobe::report {

/// One dataset's band in the trajectory figure: mean line, +-1 std shadow,
/// optional dashed single-run overlay.
struct TrajectorySeries {
  std::string label;
  TrajectoryStats stats;
  std::optional<std::vector<double>> overlay_run;
};

/// Multi-dataset band plot. Output is deterministic: fixed palette, fixed
/// coordinate formatting, no timestamps.
std::string trajectory_svg(const std::vector<TrajectorySeries>& series);

/// Diverging [-1, 1] color, blue - white - red, 0 at neutral.
std::string diverging_color(double value);

struct HeatmapOptions {
  std::string title;
  // Matrices larger than this are averaged down to at most render_cap
  // cells per side; the exact values live in the CSV next to the figure.
  std::size_t render_cap = 256;
  bool show_labels = true;
};

std::string heatmap_svg(const std::vector<std::string>& labels,
                        const std::vector<double>& values,
                        const std::vector<std::uint8_t>& defined_flags,
                        const HeatmapOptions& options);

}  // namespace stabprobe::report
