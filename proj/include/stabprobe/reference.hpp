#pragma once

#include <span>

#include "stabprobe/example_correlation.hpp"
#include "stabprobe/rank.hpp"
#include "stabprobe/stats.hpp"
#include "stabprobe/tensor.hpp"

namespace stabprobe::reference {

/// Serial, textbook implementations of the parallel kernels. They trade
/// speed for obviousness and act as oracles in tests and as baselines in
/// the benchmark target. Keep them independent of the optimized paths:
/// no shared summation or ranking helpers.

/// O(n^2) ranking (count smaller/equal per element) + direct Pearson.
RankCorrelation spearman(std::span<const double> x, std::span<const double> y);

/// Naive accumulation for every moment; cov_term always via the explicit
/// pairwise sum.
VarianceDecomposition decompose_variance(const FinalSlice& slice);

/// Per-pair spearman over pooled (seed, checkpoint) series, double loop.
ExampleCorrelationMatrix example_correlation_matrix(const PredictionTensor& tensor);

}  // namespace stabprobe::reference
