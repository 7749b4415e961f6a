#include "stabprobe/summation.hpp"

#include <cassert>
#include <vector>

namespace stabprobe {
namespace {

double linear_sum(std::span<const double> xs) {
  double acc = 0.0;
  for (double x : xs) acc += x;
  return acc;
}

// Recursive halving over block partials; shape depends only on the count.
double halving_combine(std::span<const double> partials) {
  const std::size_t n = partials.size();
  if (n == 1) return partials[0];
  if (n == 2) return partials[0] + partials[1];
  const std::size_t mid = n / 2;
  return halving_combine(partials.first(mid)) + halving_combine(partials.subspan(mid));
}

}  // namespace

double fixed_sum(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n == 0) return 0.0;
  if (n <= kSumBlock) return linear_sum(xs);

  const std::size_t nblocks = (n + kSumBlock - 1) / kSumBlock;
  std::vector<double> partial(nblocks);
#pragma omp parallel for schedule(static)
  for (long long b = 0; b < static_cast<long long>(nblocks); ++b) {
    const std::size_t begin = static_cast<std::size_t>(b) * kSumBlock;
    const std::size_t len = std::min(kSumBlock, n - begin);
    partial[static_cast<std::size_t>(b)] = linear_sum(xs.subspan(begin, len));
  }
  return halving_combine(partial);
}

double fixed_mean(std::span<const double> xs) {
  assert(!xs.empty());
  return fixed_sum(xs) / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
  const std::size_t n = xs.size();
  assert(n >= 2);
  const double mean = fixed_mean(xs);
  if (n <= kSumBlock) {
    double acc = 0.0;
    for (double x : xs) {
      const double d = x - mean;
      acc += d * d;
    }
    return acc / static_cast<double>(n - 1);
  }
  std::vector<double> sq(n);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(n); ++i) {
    const double d = xs[static_cast<std::size_t>(i)] - mean;
    sq[static_cast<std::size_t>(i)] = d * d;
  }
  return fixed_sum(sq) / static_cast<double>(n - 1);
}

double sample_covariance(std::span<const double> xs, std::span<const double> ys) {
  const std::size_t n = xs.size();
  assert(n == ys.size());
  assert(n >= 2);
  const double mx = fixed_mean(xs);
  const double my = fixed_mean(ys);
  if (n <= kSumBlock) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += (xs[i] - mx) * (ys[i] - my);
    return acc / static_cast<double>(n - 1);
  }
  std::vector<double> prod(n);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(n); ++i) {
    const std::size_t k = static_cast<std::size_t>(i);
    prod[k] = (xs[k] - mx) * (ys[k] - my);
  }
  return fixed_sum(prod) / static_cast<double>(n - 1);
}

}  // namespace stabprobe
