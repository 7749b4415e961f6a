#pragma once

#include <cstddef>
#include <span>

namespace stabprobe {

// Length of the leaf blocks of the reduction tree. The tree shape is a pure
// function of the input length, so sums are bitwise reproducible no matter
// how many OpenMP threads compute the leaves.
inline constexpr std::size_t kSumBlock = 2048;

/// Fixed-shape blocked sum: leaf blocks of kSumBlock elements are summed
/// left-to-right, block partials are combined by recursive halving.
double fixed_sum(std::span<const double> xs);

double fixed_mean(std::span<const double> xs);

/// Two-pass sample variance (divisor n-1) on top of fixed_sum.
double sample_variance(std::span<const double> xs);

/// Two-pass sample covariance (divisor n-1); spans must have equal length.
double sample_covariance(std::span<const double> xs, std::span<const double> ys);

}  // namespace stabprobe
