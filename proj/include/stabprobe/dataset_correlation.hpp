#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stabprobe/tensor.hpp"

namespace stabprobe {

/// Inclusive range of checkpoint values (not positions); used to drop
/// warm-up checkpoints from trajectory analyses.
struct CheckpointRange {
  std::int64_t first = 0;
  std::int64_t last = INT64_MAX;

  bool contains(std::int64_t c) const { return c >= first && c <= last; }
};

/// Symmetric matrix of seed-averaged Spearman correlations between the
/// accuracy trajectories of dataset pairs:
///
///   Corr_{i,j} = (1/|S|) sum_s Spearman[(a^i_{t,s})_t, (a^j_{t,s})_t]
///
/// Seeds whose correlation is undefined (a constant trajectory) are
/// excluded from the average and counted in undefined_count; a cell is
/// undefined only when every seed is.
struct DatasetCorrelationMatrix {
  std::vector<std::string> names;
  std::vector<double> values;               // D x D row-major
  std::vector<std::uint8_t> defined_flags;  // D x D
  std::vector<std::size_t> undefined_count; // D x D seed-level exclusions

  std::size_t size() const { return names.size(); }
  double value(std::size_t i, std::size_t j) const { return values[i * names.size() + j]; }
  bool defined(std::size_t i, std::size_t j) const {
    return defined_flags[i * names.size() + j] != 0;
  }
  std::size_t undefined(std::size_t i, std::size_t j) const {
    return undefined_count[i * names.size() + j];
  }
};

DatasetCorrelationMatrix dataset_correlation(const std::vector<PredictionTensor>& tensors,
                                             const std::optional<CheckpointRange>& range = {});

}  // namespace stabprobe
