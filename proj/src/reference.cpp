#include "stabprobe/reference.hpp"

#include <algorithm>
#include <cmath>

#include "stabprobe/error.hpp"

namespace stabprobe::reference {
namespace {

std::vector<double> naive_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t smaller = 0, equal = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (values[j] < values[i]) ++smaller;
      if (values[j] == values[i]) ++equal;
    }
    // 1-based average rank of a tie group of size `equal`
    ranks[i] = static_cast<double>(smaller) + 0.5 * static_cast<double>(equal + 1);
  }
  return ranks;
}

RankCorrelation pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double dot = 0.0, vx = 0.0, vy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    dot += (x[i] - mx) * (y[i] - my);
    vx += (x[i] - mx) * (x[i] - mx);
    vy += (y[i] - my) * (y[i] - my);
  }
  if (vx == 0.0 || vy == 0.0) return RankCorrelation::undefined();
  const double r = dot / std::sqrt(vx) / std::sqrt(vy);
  return RankCorrelation::of(std::clamp(r, -1.0, 1.0));
}

}  // namespace

RankCorrelation spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail(ErrorCode::LengthMismatch, "series lengths differ");
  if (x.size() < 2) fail(ErrorCode::SeriesTooShort, "need at least 2 observations");
  return pearson(naive_ranks(x), naive_ranks(y));
}

VarianceDecomposition decompose_variance(const FinalSlice& slice) {
  const std::size_t S = slice.run_count;
  const std::size_t N = slice.example_count();
  if (S < 2) fail(ErrorCode::InsufficientRuns, "need >= 2 runs");

  std::vector<double> accs(S, 0.0);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t i = 0; i < N; ++i) accs[s] += slice.scores[s * N + i];
    accs[s] /= static_cast<double>(N);
  }
  double acc_mean = 0.0;
  for (double a : accs) acc_mean += a;
  acc_mean /= static_cast<double>(S);
  double total_var = 0.0;
  for (double a : accs) total_var += (a - acc_mean) * (a - acc_mean);
  total_var /= static_cast<double>(S - 1);

  std::vector<double> means(N, 0.0);
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t s = 0; s < S; ++s) means[i] += slice.scores[s * N + i];
    means[i] /= static_cast<double>(S);
  }
  double idp_var = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    double v = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
      const double d = slice.scores[s * N + i] - means[i];
      v += d * d;
    }
    idp_var += v / static_cast<double>(S - 1);
  }
  idp_var /= static_cast<double>(N) * static_cast<double>(N);

  double cov_term = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = i + 1; j < N; ++j) {
      double cov = 0.0;
      for (std::size_t s = 0; s < S; ++s) {
        cov += (slice.scores[s * N + i] - means[i]) * (slice.scores[s * N + j] - means[j]);
      }
      cov_term += cov / static_cast<double>(S - 1);
    }
  }
  cov_term *= 2.0 / (static_cast<double>(N) * static_cast<double>(N));

  return make_decomposition(total_var, idp_var, cov_term);
}

ExampleCorrelationMatrix example_correlation_matrix(const PredictionTensor& tensor) {
  const std::size_t S = tensor.run_count();
  const std::size_t T = tensor.checkpoint_count();
  const std::size_t N = tensor.example_count();
  if (S * T < 2) fail(ErrorCode::TooFewObservations, "need >= 2 pooled observations");

  std::vector<std::vector<double>> series(N, std::vector<double>(S * T));
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t s = 0; s < S; ++s) {
      for (std::size_t t = 0; t < T; ++t) series[i][s * T + t] = tensor.score(s, t, i);
    }
  }

  ExampleCorrelationMatrix m;
  m.axis = ObservationAxis::pooled_seed_checkpoint;
  m.example_ids = tensor.example_ids();
  m.values.assign(N * N, 0.0);
  m.defined_flags.assign(N * N, 0);
  for (std::size_t i = 0; i < N; ++i) {
    const RankCorrelation self = spearman(series[i], series[i]);
    if (self.defined) {
      m.values[i * N + i] = 1.0;
      m.defined_flags[i * N + i] = 1;
    }
    for (std::size_t j = i + 1; j < N; ++j) {
      const RankCorrelation r = spearman(series[i], series[j]);
      if (r.defined) {
        m.values[i * N + j] = m.values[j * N + i] = r.value;
        m.defined_flags[i * N + j] = m.defined_flags[j * N + i] = 1;
      }
    }
  }
  return m;
}

}  // namespace stabprobe::reference
