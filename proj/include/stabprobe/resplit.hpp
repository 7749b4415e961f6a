#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stabprobe/tensor.hpp"

namespace stabprobe {

/// An 80/20-style partition of one dataset's example ids, produced by a
/// seeded uniform shuffle so the same seed always yields the same split.
struct SplitSpec {
  double dev_fraction = 0.8;
  std::uint64_t rng_seed = 0;
  std::vector<std::string> dev_ids;
  std::vector<std::string> test_ids;
};

SplitSpec make_split(const PredictionTensor& tensor, double dev_fraction,
                     std::uint64_t rng_seed);

/// Outcome of per-run checkpoint selection: each run's best checkpoint on
/// the selector, evaluated on the held-out test part.
struct ResplitReport {
  std::string selector_name;  // "self-dev" or the external dataset name
  std::vector<std::string> runs;
  std::vector<std::int64_t> per_run_selected_checkpoint;
  std::vector<double> per_run_test_acc;
  double test_mean = 0.0;
  double test_std = 0.0;  // sample std, S-1 divisor
};

/// Per run, picks the checkpoint maximizing accuracy on the selector
/// (an external dataset's full example set, or the target's dev part when
/// `selector == nullptr`), breaking ties toward the earliest checkpoint,
/// then evaluates the chosen checkpoints on the test part.
ResplitReport select_and_evaluate(const PredictionTensor& target, const SplitSpec& split,
                                  const PredictionTensor* selector = nullptr);

}  // namespace stabprobe
