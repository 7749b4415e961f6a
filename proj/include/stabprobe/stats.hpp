#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stabprobe/tensor.hpp"

namespace stabprobe {

/// Per-checkpoint mean and sample standard deviation (divisor S-1) of
/// per-run accuracies: the band plot series.
struct TrajectoryStats {
  std::vector<std::int64_t> checkpoints;
  std::vector<double> mean_acc;
  std::vector<double> std_acc;
};

/// Accuracy-variance decomposition across runs:
///
///   total_var = idp_var + cov_term
///   idp_var   = (1/N^2) sum_i Var(C_i)
///   cov_term  = (2/N^2) sum_{i<j} Cov(C_i, C_j)
///
/// All moments use the S-1 divisor, which is what makes the identity hold
/// exactly in-sample.
struct VarianceDecomposition {
  double total_var = 0.0;
  double idp_var = 0.0;
  double cov_term = 0.0;
  double sqrt_total = 0.0;
  double sqrt_idp = 0.0;
  double sqrt_abs_cov = 0.0;
};

VarianceDecomposition make_decomposition(double total_var, double idp_var, double cov_term);

/// How cov_term is obtained. `fast` derives it from the algebraic identity
/// in O(S*N); `pairwise` evaluates the explicit O(S*N^2) covariance sum and
/// exists as the independent cross-check (CLI flag --slow-path).
enum class CovPath { fast, pairwise };

/// Mean score: Acc = (1/N) sum_i C_i.
double accuracy(std::span<const double> scores);

TrajectoryStats trajectory(const PredictionTensor& tensor);

VarianceDecomposition decompose_variance(const FinalSlice& slice, CovPath path = CovPath::fast);

/// (std_d / std_ref) * sqrt(n_d / n_ref): deviation relative to a reference
/// dataset with the size-driven component removed (assuming independent
/// predictions; the decomposition above shows where that assumption bends).
double normalized_deviation(double std_d, std::size_t n_d, double std_ref, std::size_t n_ref);

/// One decomposition row per dataset; the pct_* fields carry the square
/// roots scaled into percentage points (score scale x100).
struct DecompositionRow {
  std::string dataset;
  VarianceDecomposition decomposition;
  double pct_sqrt_total = 0.0;
  double pct_sqrt_idp = 0.0;
  double pct_sqrt_abs_cov = 0.0;
};

std::vector<DecompositionRow> decomposition_table(const std::vector<PredictionTensor>& tensors,
                                                  CovPath path = CovPath::fast);

}  // namespace stabprobe
