#pragma once

#include <span>
#include <vector>

namespace stabprobe {

/// Spearman coefficient, or `undefined` when either input series is
/// constant (zero rank variance carries no ordering information).
struct RankCorrelation {
  double value = 0.0;
  bool defined = false;

  static RankCorrelation undefined() { return {}; }
  static RankCorrelation of(double v) { return {v, true}; }
};

/// Fractional (average-tie) ranks, 1-based: tied values share the mean of
/// the positions they occupy.
std::vector<double> average_ranks(std::span<const double> values);

/// Spearman rank correlation: Pearson correlation of fractional ranks.
/// Exact 1.0 / -1.0 are returned for identical / mirrored rank vectors.
RankCorrelation spearman(std::span<const double> x, std::span<const double> y);

/// Centers `ranks` in place around their exact mean (n+1)/2 and returns the
/// L2 norm of the centered vector; 0 means the series was constant.
double center_ranks(std::span<double> ranks);

}  // namespace stabprobe
