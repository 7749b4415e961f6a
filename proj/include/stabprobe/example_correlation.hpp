#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stabprobe/rank.hpp"
#include "stabprobe/tensor.hpp"

namespace stabprobe {

/// What counts as one observation of an example when correlating a pair:
/// every (seed, checkpoint) cell pooled into one series, or a per-seed
/// Spearman over checkpoints averaged across seeds (the same seed-average
/// shape as the dataset-level correlation).
enum class ObservationAxis { pooled_seed_checkpoint, per_seed_mean };

const char* to_string(ObservationAxis axis);

/// Deterministic uniform subsample (without replacement) of the example
/// axis; caps the O(n^2) matrix cost.
struct SubsampleSpec {
  std::size_t count = 0;
  std::uint64_t seed = 0;
};

struct ExampleCorrelationMatrix {
  std::vector<std::string> example_ids;  // row/column order = tensor input order
  ObservationAxis axis = ObservationAxis::pooled_seed_checkpoint;
  std::vector<double> values;               // n x n row-major
  std::vector<std::uint8_t> defined_flags;  // n x n

  std::size_t size() const { return example_ids.size(); }
  double value(std::size_t i, std::size_t j) const { return values[i * size() + j]; }
  bool defined(std::size_t i, std::size_t j) const { return defined_flags[i * size() + j] != 0; }
};

ExampleCorrelationMatrix example_correlation_matrix(
    const PredictionTensor& tensor,
    const std::optional<SubsampleSpec>& subsample = {},
    ObservationAxis axis = ObservationAxis::pooled_seed_checkpoint);

/// A pair of examples ranked by the sample covariance of their
/// final-checkpoint scores across runs; correlation is the Spearman of the
/// same two score columns.
struct CorrelatedPair {
  std::string example_a;  // lexicographically smaller id
  std::string example_b;
  double covariance = 0.0;
  RankCorrelation correlation;
};

/// The k largest-covariance pairs, descending; ties broken by (a, b) id
/// order, so output is a total order independent of run permutation.
std::vector<CorrelatedPair> top_covariance_pairs(const FinalSlice& slice, std::size_t k);

/// Connected component of examples whose pairwise correlations reach the
/// block threshold; the paper's template-induced groups.
struct CorrelationBlock {
  std::vector<std::string> member_ids;  // matrix order
  double mean_internal_correlation = 0.0;

  std::size_t size() const { return member_ids.size(); }
};

/// Components of the graph with edges {(i,j) : defined corr >= tau};
/// singletons dropped, blocks sorted by size descending then smallest
/// member id. The internal mean includes sub-threshold pairs.
std::vector<CorrelationBlock> correlation_blocks(const ExampleCorrelationMatrix& matrix,
                                                 double tau);

}  // namespace stabprobe
