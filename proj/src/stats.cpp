#include "stabprobe/stats.hpp"

#include <cassert>
#include <cmath>

#include "stabprobe/error.hpp"
#include "stabprobe/summation.hpp"

namespace stabprobe {

VarianceDecomposition make_decomposition(double total_var, double idp_var, double cov_term) {
  VarianceDecomposition d;
  d.total_var = total_var;
  d.idp_var = idp_var;
  d.cov_term = cov_term;
  d.sqrt_total = std::sqrt(total_var);
  d.sqrt_idp = std::sqrt(idp_var);
  d.sqrt_abs_cov = std::sqrt(std::fabs(cov_term));
  return d;
}

double accuracy(std::span<const double> scores) {
  assert(!scores.empty());
  return fixed_mean(scores);
}

TrajectoryStats trajectory(const PredictionTensor& tensor) {
  const std::size_t S = tensor.run_count();
  if (S < 2) {
    fail(ErrorCode::InsufficientRuns,
         "trajectory statistics need >= 2 runs, got " + std::to_string(S));
  }
  TrajectoryStats stats;
  stats.checkpoints = tensor.checkpoints();
  stats.mean_acc.resize(tensor.checkpoint_count());
  stats.std_acc.resize(tensor.checkpoint_count());
  std::vector<double> accs(S);
  for (std::size_t t = 0; t < tensor.checkpoint_count(); ++t) {
    for (std::size_t s = 0; s < S; ++s) accs[s] = accuracy(tensor.cell_row(s, t));
    stats.mean_acc[t] = fixed_mean(accs);
    stats.std_acc[t] = std::sqrt(sample_variance(accs));
  }
  return stats;
}

namespace {

// Explicit sum over example pairs: (2/N^2) sum_{i<j} Cov(C_i, C_j).
// Per-row partial sums are combined by fixed_sum, so the result does not
// depend on the OpenMP schedule.
double pairwise_cov_term(const FinalSlice& slice, std::span<const double> centered) {
  const std::size_t S = slice.run_count;
  const std::size_t N = slice.example_count();
  if (N < 2) return 0.0;
  std::vector<double> row_sums(N - 1, 0.0);
#pragma omp parallel for schedule(dynamic, 16)
  for (long long ii = 0; ii < static_cast<long long>(N - 1); ++ii) {
    const std::size_t i = static_cast<std::size_t>(ii);
    double acc = 0.0;
    for (std::size_t j = i + 1; j < N; ++j) {
      double dot = 0.0;
      for (std::size_t s = 0; s < S; ++s) {
        dot += centered[s * N + i] * centered[s * N + j];
      }
      acc += dot;
    }
    row_sums[i] = acc;
  }
  const double pair_sum = fixed_sum(row_sums) / static_cast<double>(S - 1);
  return 2.0 * pair_sum / (static_cast<double>(N) * static_cast<double>(N));
}

}  // namespace

VarianceDecomposition decompose_variance(const FinalSlice& slice, CovPath path) {
  const std::size_t S = slice.run_count;
  const std::size_t N = slice.example_count();
  if (S < 2) {
    fail(ErrorCode::InsufficientRuns,
         "variance decomposition needs >= 2 runs, got " + std::to_string(S));
  }
  assert(N >= 1);

  std::vector<double> accs(S);
  for (std::size_t s = 0; s < S; ++s) accs[s] = accuracy(slice.run_row(s));
  const double total_var = sample_variance(accs);

  // Per-example means and variances across runs.
  std::vector<double> means(N);
  std::vector<double> vars(N);
#pragma omp parallel for schedule(static)
  for (long long ii = 0; ii < static_cast<long long>(N); ++ii) {
    const std::size_t i = static_cast<std::size_t>(ii);
    double sum = 0.0;
    for (std::size_t s = 0; s < S; ++s) sum += slice.scores[s * N + i];
    const double mean = sum / static_cast<double>(S);
    double sq = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
      const double d = slice.scores[s * N + i] - mean;
      sq += d * d;
    }
    means[i] = mean;
    vars[i] = sq / static_cast<double>(S - 1);
  }
  const double idp_var = fixed_sum(vars) / (static_cast<double>(N) * static_cast<double>(N));

  double cov_term;
  if (path == CovPath::fast) {
    cov_term = total_var - idp_var;
  } else {
    std::vector<double> centered(S * N);
#pragma omp parallel for schedule(static)
    for (long long ii = 0; ii < static_cast<long long>(N); ++ii) {
      const std::size_t i = static_cast<std::size_t>(ii);
      for (std::size_t s = 0; s < S; ++s) {
        centered[s * N + i] = slice.scores[s * N + i] - means[i];
      }
    }
    cov_term = pairwise_cov_term(slice, centered);
  }
  return make_decomposition(total_var, idp_var, cov_term);
}

double normalized_deviation(double std_d, std::size_t n_d, double std_ref, std::size_t n_ref) {
  if (std_d < 0.0 || n_d == 0 || n_ref == 0) {
    throw std::invalid_argument("normalized_deviation: invalid inputs");
  }
  if (std_ref <= 0.0) {
    fail(ErrorCode::ZeroReferenceStd, "reference standard deviation must be positive");
  }
  return (std_d / std_ref) * std::sqrt(static_cast<double>(n_d) / static_cast<double>(n_ref));
}

std::vector<DecompositionRow> decomposition_table(const std::vector<PredictionTensor>& tensors,
                                                  CovPath path) {
  std::vector<DecompositionRow> rows;
  rows.reserve(tensors.size());
  for (const auto& tensor : tensors) {
    DecompositionRow row;
    row.dataset = tensor.meta().name;
    row.decomposition = decompose_variance(final_slice(tensor), path);
    row.pct_sqrt_total = 100.0 * row.decomposition.sqrt_total;
    row.pct_sqrt_idp = 100.0 * row.decomposition.sqrt_idp;
    row.pct_sqrt_abs_cov = 100.0 * row.decomposition.sqrt_abs_cov;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace stabprobe
