#include "stabprobe/example_correlation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "stabprobe/det_rng.hpp"
#include "stabprobe/error.hpp"
#include "stabprobe/summation.hpp"

namespace stabprobe {

const char* to_string(ObservationAxis axis) {
  return axis == ObservationAxis::pooled_seed_checkpoint ? "pooled_seed_checkpoint"
                                                         : "per_seed_mean";
}

namespace {

constexpr std::size_t kTile = 128;

std::vector<std::size_t> choose_examples(std::size_t n,
                                         const std::optional<SubsampleSpec>& subsample) {
  std::vector<std::size_t> indices(n);
  std::iota(indices.begin(), indices.end(), std::size_t{0});
  if (!subsample || subsample->count >= n) return indices;
  DetRng rng(subsample->seed);
  // Partial Fisher-Yates, then restore input order among the chosen.
  for (std::size_t i = 0; i < subsample->count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.next_below(n - i));
    std::swap(indices[i], indices[j]);
  }
  indices.resize(subsample->count);
  std::sort(indices.begin(), indices.end());
  return indices;
}

// Correlation of two centered rank vectors with exact +-1 detection for
// identical / mirrored series.
inline std::pair<double, bool> rank_vector_correlation(const double* a, const double* b,
                                                       std::size_t len, double norm_a,
                                                       double norm_b) {
  if (norm_a == 0.0 || norm_b == 0.0) return {0.0, false};
  double dot = 0.0;
  bool identical = true, mirrored = true;
  for (std::size_t m = 0; m < len; ++m) {
    dot += a[m] * b[m];
    identical = identical && a[m] == b[m];
    mirrored = mirrored && a[m] == -b[m];
  }
  if (identical) return {1.0, true};
  if (mirrored) return {-1.0, true};
  return {std::clamp(dot / (norm_a * norm_b), -1.0, 1.0), true};
}

struct TileJob {
  std::size_t bi, bj;
};

template <typename CellFn>
void for_each_upper_cell_tiled(std::size_t n, CellFn&& cell) {
  std::vector<TileJob> jobs;
  const std::size_t tiles = (n + kTile - 1) / kTile;
  for (std::size_t bi = 0; bi < tiles; ++bi) {
    for (std::size_t bj = bi; bj < tiles; ++bj) jobs.push_back({bi, bj});
  }
#pragma omp parallel for schedule(dynamic)
  for (long long k = 0; k < static_cast<long long>(jobs.size()); ++k) {
    const auto [bi, bj] = jobs[static_cast<std::size_t>(k)];
    const std::size_t i_end = std::min(n, (bi + 1) * kTile);
    const std::size_t j_end = std::min(n, (bj + 1) * kTile);
    for (std::size_t i = bi * kTile; i < i_end; ++i) {
      for (std::size_t j = std::max(i + 1, bj * kTile); j < j_end; ++j) {
        cell(i, j);
      }
    }
  }
}

}  // namespace

ExampleCorrelationMatrix example_correlation_matrix(
    const PredictionTensor& tensor,
    const std::optional<SubsampleSpec>& subsample,
    ObservationAxis axis) {
  const std::size_t S = tensor.run_count();
  const std::size_t T = tensor.checkpoint_count();
  if (axis == ObservationAxis::pooled_seed_checkpoint && S * T < 2) {
    fail(ErrorCode::TooFewObservations,
         "pooled axis needs >= 2 (seed, checkpoint) observations, got " + std::to_string(S * T));
  }
  if (axis == ObservationAxis::per_seed_mean && T < 2) {
    fail(ErrorCode::TooFewObservations,
         "per-seed axis needs >= 2 checkpoints, got " + std::to_string(T));
  }

  const auto indices = choose_examples(tensor.example_count(), subsample);
  const std::size_t n = indices.size();

  ExampleCorrelationMatrix m;
  m.axis = axis;
  m.example_ids.resize(n);
  for (std::size_t i = 0; i < n; ++i) m.example_ids[i] = tensor.example_ids()[indices[i]];
  m.values.assign(n * n, 0.0);
  m.defined_flags.assign(n * n, 0);

  if (axis == ObservationAxis::pooled_seed_checkpoint) {
    const std::size_t M = S * T;
    std::vector<double> ranks(n * M);
    std::vector<double> norms(n);
#pragma omp parallel for schedule(static)
    for (long long ii = 0; ii < static_cast<long long>(n); ++ii) {
      const std::size_t i = static_cast<std::size_t>(ii);
      std::vector<double> series(M);
      for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t t = 0; t < T; ++t) {
          series[s * T + t] = tensor.score(s, t, indices[i]);
        }
      }
      auto r = average_ranks(series);
      std::copy(r.begin(), r.end(), ranks.begin() + i * M);
      norms[i] = center_ranks({ranks.data() + i * M, M});
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (norms[i] > 0.0) {
        m.values[i * n + i] = 1.0;
        m.defined_flags[i * n + i] = 1;
      }
    }
    for_each_upper_cell_tiled(n, [&](std::size_t i, std::size_t j) {
      const auto [v, defined] = rank_vector_correlation(
          ranks.data() + i * M, ranks.data() + j * M, M, norms[i], norms[j]);
      if (defined) {
        m.values[i * n + j] = m.values[j * n + i] = v;
        m.defined_flags[i * n + j] = m.defined_flags[j * n + i] = 1;
      }
    });
    return m;
  }

  // per_seed_mean: rank each example's checkpoint series separately per
  // seed; a pair's cell is the mean over seeds where both sides vary.
  std::vector<double> ranks(n * S * T);
  std::vector<double> norms(n * S);
#pragma omp parallel for schedule(static)
  for (long long ii = 0; ii < static_cast<long long>(n); ++ii) {
    const std::size_t i = static_cast<std::size_t>(ii);
    std::vector<double> series(T);
    for (std::size_t s = 0; s < S; ++s) {
      for (std::size_t t = 0; t < T; ++t) series[t] = tensor.score(s, t, indices[i]);
      auto r = average_ranks(series);
      double* dst = ranks.data() + (i * S + s) * T;
      std::copy(r.begin(), r.end(), dst);
      norms[i * S + s] = center_ranks({dst, T});
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    bool any = false;
    for (std::size_t s = 0; s < S; ++s) any = any || norms[i * S + s] > 0.0;
    if (any) {
      m.values[i * n + i] = 1.0;
      m.defined_flags[i * n + i] = 1;
    }
  }
  for_each_upper_cell_tiled(n, [&](std::size_t i, std::size_t j) {
    double sum = 0.0;
    std::size_t defined_seeds = 0;
    for (std::size_t s = 0; s < S; ++s) {
      const auto [v, defined] =
          rank_vector_correlation(ranks.data() + (i * S + s) * T, ranks.data() + (j * S + s) * T,
                                  T, norms[i * S + s], norms[j * S + s]);
      if (defined) {
        sum += v;
        ++defined_seeds;
      }
    }
    if (defined_seeds > 0) {
      const double v = sum / static_cast<double>(defined_seeds);
      m.values[i * n + j] = m.values[j * n + i] = v;
      m.defined_flags[i * n + j] = m.defined_flags[j * n + i] = 1;
    }
  });
  return m;
}

namespace {

struct PairKey {
  double covariance;
  std::size_t i, j;  // positions in the slice
};

}  // namespace

std::vector<CorrelatedPair> top_covariance_pairs(const FinalSlice& slice, std::size_t k) {
  const std::size_t S = slice.run_count;
  const std::size_t N = slice.example_count();
  if (S < 2) {
    fail(ErrorCode::InsufficientRuns,
         "covariance ranking needs >= 2 runs, got " + std::to_string(S));
  }
  if (N < 2 || k == 0) return {};

  // Centered columns, example-major for pair dot products.
  std::vector<double> centered(N * S);
#pragma omp parallel for schedule(static)
  for (long long ii = 0; ii < static_cast<long long>(N); ++ii) {
    const std::size_t i = static_cast<std::size_t>(ii);
    double sum = 0.0;
    for (std::size_t s = 0; s < S; ++s) sum += slice.scores[s * N + i];
    const double mean = sum / static_cast<double>(S);
    for (std::size_t s = 0; s < S; ++s) centered[i * S + s] = slice.scores[s * N + i] - mean;
  }

  // Pair name in id order; the comparison key for ties.
  auto id_pair = [&](std::size_t i, std::size_t j) {
    const std::string& a = slice.example_ids[i];
    const std::string& b = slice.example_ids[j];
    return a <= b ? std::make_pair(a, b) : std::make_pair(b, a);
  };
  auto better = [&](const PairKey& x, const PairKey& y) {
    if (x.covariance != y.covariance) return x.covariance > y.covariance;
    return id_pair(x.i, x.j) < id_pair(y.i, y.j);
  };

  // Chunked scan: each chunk keeps its own k best, merged afterwards. The
  // selected set is a pure function of the total order, so the OpenMP
  // schedule cannot change the result.
  const std::size_t chunk = 64;
  const std::size_t n_chunks = (N + chunk - 1) / chunk;
  std::vector<std::vector<PairKey>> per_chunk(n_chunks);
#pragma omp parallel for schedule(dynamic)
  for (long long c = 0; c < static_cast<long long>(n_chunks); ++c) {
    auto& local = per_chunk[static_cast<std::size_t>(c)];
    const std::size_t i_begin = static_cast<std::size_t>(c) * chunk;
    const std::size_t i_end = std::min(N, i_begin + chunk);
    for (std::size_t i = i_begin; i < i_end; ++i) {
      for (std::size_t j = i + 1; j < N; ++j) {
        double dot = 0.0;
        for (std::size_t s = 0; s < S; ++s) dot += centered[i * S + s] * centered[j * S + s];
        const PairKey key{dot / static_cast<double>(S - 1), i, j};
        if (local.size() < k) {
          local.push_back(key);
          std::push_heap(local.begin(), local.end(), better);  // worst at front
        } else if (better(key, local.front())) {
          std::pop_heap(local.begin(), local.end(), better);
          local.back() = key;
          std::push_heap(local.begin(), local.end(), better);
        }
      }
    }
  }

  std::vector<PairKey> all;
  for (const auto& local : per_chunk) all.insert(all.end(), local.begin(), local.end());
  std::sort(all.begin(), all.end(), better);
  if (all.size() > k) all.resize(k);

  std::vector<CorrelatedPair> result;
  result.reserve(all.size());
  for (const auto& key : all) {
    CorrelatedPair pair;
    auto names = id_pair(key.i, key.j);
    pair.example_a = std::move(names.first);
    pair.example_b = std::move(names.second);
    pair.covariance = key.covariance;
    std::vector<double> col_i(S), col_j(S);
    for (std::size_t s = 0; s < S; ++s) {
      col_i[s] = slice.scores[s * N + key.i];
      col_j[s] = slice.scores[s * N + key.j];
    }
    pair.correlation = spearman(col_i, col_j);
    result.push_back(std::move(pair));
  }
  return result;
}

std::vector<CorrelationBlock> correlation_blocks(const ExampleCorrelationMatrix& matrix,
                                                 double tau) {
  const std::size_t n = matrix.size();
  if (n < 2) return {};

  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (matrix.defined(i, j) && matrix.value(i, j) >= tau) {
        parent[find(i)] = find(j);
      }
    }
  }

  std::vector<std::vector<std::size_t>> members_by_root(n);
  for (std::size_t i = 0; i < n; ++i) members_by_root[find(i)].push_back(i);

  std::vector<CorrelationBlock> blocks;
  for (const auto& members : members_by_root) {
    if (members.size() < 2) continue;
    CorrelationBlock block;
    block.member_ids.reserve(members.size());
    for (std::size_t i : members) block.member_ids.push_back(matrix.example_ids[i]);
    std::vector<double> pair_values;
    for (std::size_t a = 0; a < members.size(); ++a) {
      for (std::size_t b = a + 1; b < members.size(); ++b) {
        if (matrix.defined(members[a], members[b])) {
          pair_values.push_back(matrix.value(members[a], members[b]));
        }
      }
    }
    block.mean_internal_correlation = pair_values.empty() ? 0.0 : fixed_mean(pair_values);
    blocks.push_back(std::move(block));
  }
  std::sort(blocks.begin(), blocks.end(), [](const CorrelationBlock& a, const CorrelationBlock& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return *std::min_element(a.member_ids.begin(), a.member_ids.end()) <
           *std::min_element(b.member_ids.begin(), b.member_ids.end());
  });
  return blocks;
}

}  // namespace stabprobe
