#include "stabprobe/dataset_correlation.hpp"

#include "stabprobe/error.hpp"
#include "stabprobe/rank.hpp"
#include "stabprobe/stats.hpp"
#include "stabprobe/summation.hpp"

namespace stabprobe {
namespace {

std::vector<std::size_t> selected_checkpoints(const PredictionTensor& tensor,
                                              const std::optional<CheckpointRange>& range) {
  std::vector<std::size_t> positions;
  for (std::size_t t = 0; t < tensor.checkpoint_count(); ++t) {
    if (!range || range->contains(tensor.checkpoints()[t])) positions.push_back(t);
  }
  return positions;
}

}  // namespace

DatasetCorrelationMatrix dataset_correlation(const std::vector<PredictionTensor>& tensors,
                                             const std::optional<CheckpointRange>& range) {
  if (tensors.empty()) fail(ErrorCode::AxisMismatch, "no tensors given");
  const auto& first = tensors.front();
  for (const auto& t : tensors) {
    if (t.runs() != first.runs() || t.checkpoints() != first.checkpoints()) {
      fail(ErrorCode::AxisMismatch,
           "dataset '" + t.meta().name + "' has different run/checkpoint axes than '" +
               first.meta().name + "'");
    }
  }
  const auto positions = selected_checkpoints(first, range);
  if (positions.size() < 2) {
    fail(ErrorCode::SeriesTooShort, "need >= 2 checkpoints in range, got " +
                                        std::to_string(positions.size()));
  }
  const std::size_t D = tensors.size();
  const std::size_t S = first.run_count();
  const std::size_t T = positions.size();

  // Per-dataset, per-seed accuracy trajectories over the selected checkpoints.
  std::vector<std::vector<double>> traj(D * S, std::vector<double>(T));
  for (std::size_t d = 0; d < D; ++d) {
    for (std::size_t s = 0; s < S; ++s) {
      auto& series = traj[d * S + s];
      for (std::size_t k = 0; k < T; ++k) {
        series[k] = accuracy(tensors[d].cell_row(s, positions[k]));
      }
    }
  }

  DatasetCorrelationMatrix m;
  m.names.resize(D);
  for (std::size_t d = 0; d < D; ++d) m.names[d] = tensors[d].meta().name;
  m.values.assign(D * D, 0.0);
  m.defined_flags.assign(D * D, 0);
  m.undefined_count.assign(D * D, 0);

  std::vector<std::pair<std::size_t, std::size_t>> cells;
  for (std::size_t i = 0; i < D; ++i) {
    for (std::size_t j = i; j < D; ++j) cells.emplace_back(i, j);
  }

#pragma omp parallel for schedule(dynamic)
  for (long long c = 0; c < static_cast<long long>(cells.size()); ++c) {
    const auto [i, j] = cells[static_cast<std::size_t>(c)];
    std::vector<double> seed_values;
    seed_values.reserve(S);
    std::size_t undefined = 0;
    for (std::size_t s = 0; s < S; ++s) {
      const RankCorrelation r = spearman(traj[i * S + s], traj[j * S + s]);
      if (r.defined) {
        seed_values.push_back(r.value);
      } else {
        ++undefined;
      }
    }
    const std::size_t a = i * D + j;
    const std::size_t b = j * D + i;
    m.undefined_count[a] = m.undefined_count[b] = undefined;
    if (!seed_values.empty()) {
      const double v = fixed_mean(seed_values);
      m.values[a] = m.values[b] = v;
      m.defined_flags[a] = m.defined_flags[b] = 1;
    }
  }
  return m;
}

}  // namespace stabprobe
