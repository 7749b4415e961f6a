#include "stabprobe/rank.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stabprobe/error.hpp"

namespace stabprobe {

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (values[a] != values[b]) return values[a] < values[b];
    return a < b;
  });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    // positions i..j (0-based) share the average 1-based rank
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double center_ranks(std::span<double> ranks) {
  // Rank sums are n(n+1)/2 with or without ties, so the mean is exact.
  const double mean = 0.5 * static_cast<double>(ranks.size() + 1);
  double sq = 0.0;
  for (double& r : ranks) {
    r -= mean;
    sq += r * r;
  }
  return std::sqrt(sq);
}

RankCorrelation spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    fail(ErrorCode::LengthMismatch,
         "series lengths differ: " + std::to_string(x.size()) + " vs " +
             std::to_string(y.size()));
  }
  if (x.size() < 2) {
    fail(ErrorCode::SeriesTooShort, "need at least 2 observations, got " +
                                        std::to_string(x.size()));
  }
  std::vector<double> rx = average_ranks(x);
  std::vector<double> ry = average_ranks(y);

  const double mean = 0.5 * static_cast<double>(rx.size() + 1);
  bool x_constant = true, y_constant = true;
  bool identical = true, mirrored = true;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    x_constant = x_constant && rx[i] == mean;
    y_constant = y_constant && ry[i] == mean;
    identical = identical && rx[i] == ry[i];
    mirrored = mirrored && rx[i] == 2.0 * mean - ry[i];
  }
  if (x_constant || y_constant) return RankCorrelation::undefined();
  if (identical) return RankCorrelation::of(1.0);
  if (mirrored) return RankCorrelation::of(-1.0);

  double dot = 0.0, nx = 0.0, ny = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double a = rx[i] - mean;
    const double b = ry[i] - mean;
    dot += a * b;
    nx += a * a;
    ny += b * b;
  }
  const double r = dot / std::sqrt(nx * ny);
  return RankCorrelation::of(std::clamp(r, -1.0, 1.0));
}

}  // namespace stabprobe
