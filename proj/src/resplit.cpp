#include "stabprobe/resplit.hpp"

#include <cmath>
#include <unordered_map>

#include "stabprobe/det_rng.hpp"
#include "stabprobe/error.hpp"
#include "stabprobe/stats.hpp"
#include "stabprobe/summation.hpp"

namespace stabprobe {

SplitSpec make_split(const PredictionTensor& tensor, double dev_fraction,
                     std::uint64_t rng_seed) {
  if (!(dev_fraction > 0.0 && dev_fraction < 1.0)) {
    throw std::invalid_argument("dev_fraction must lie in (0, 1)");
  }
  const std::size_t N = tensor.example_count();
  if (N < 5) {
    fail(ErrorCode::DatasetTooSmall, "re-split needs >= 5 examples, got " + std::to_string(N));
  }
  const std::size_t n_dev =
      static_cast<std::size_t>(std::llround(dev_fraction * static_cast<double>(N)));
  if (n_dev == 0) {
    fail(ErrorCode::DatasetTooSmall, "dev fraction leaves the dev set empty");
  }
  if (n_dev >= N) {
    fail(ErrorCode::EmptyTestSet, "dev fraction leaves no test examples");
  }
  std::vector<std::string> ids = tensor.example_ids();
  DetRng rng(rng_seed);
  rng.shuffle(ids);

  SplitSpec split;
  split.dev_fraction = dev_fraction;
  split.rng_seed = rng_seed;
  split.dev_ids.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_dev));
  split.test_ids.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_dev), ids.end());
  return split;
}

namespace {

std::vector<std::size_t> id_positions(const PredictionTensor& tensor,
                                      const std::vector<std::string>& ids) {
  std::unordered_map<std::string, std::size_t> index;
  index.reserve(tensor.example_count());
  for (std::size_t i = 0; i < tensor.example_count(); ++i) index[tensor.example_ids()[i]] = i;
  std::vector<std::size_t> positions;
  positions.reserve(ids.size());
  for (const auto& id : ids) {
    const auto it = index.find(id);
    if (it == index.end()) {
      fail(ErrorCode::AxisMismatch, "split id not present in tensor: " + id);
    }
    positions.push_back(it->second);
  }
  return positions;
}

double subset_accuracy(const PredictionTensor& tensor, std::size_t run, std::size_t checkpoint,
                       const std::vector<std::size_t>& positions) {
  const auto row = tensor.cell_row(run, checkpoint);
  std::vector<double> values(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) values[i] = row[positions[i]];
  return fixed_mean(values);
}

}  // namespace

ResplitReport select_and_evaluate(const PredictionTensor& target, const SplitSpec& split,
                                  const PredictionTensor* selector) {
  const std::size_t S = target.run_count();
  const std::size_t T = target.checkpoint_count();
  if (S < 2) {
    fail(ErrorCode::InsufficientRuns,
         "selection statistics need >= 2 runs, got " + std::to_string(S));
  }
  if (selector != nullptr &&
      (selector->runs() != target.runs() || selector->checkpoints() != target.checkpoints())) {
    fail(ErrorCode::AxisMismatch,
         "selector tensor '" + selector->meta().name + "' has different run/checkpoint axes");
  }
  if (split.test_ids.empty()) fail(ErrorCode::EmptyTestSet, "split has no test examples");

  const auto dev_positions = selector == nullptr ? id_positions(target, split.dev_ids)
                                                 : std::vector<std::size_t>{};
  const auto test_positions = id_positions(target, split.test_ids);
  if (selector == nullptr && dev_positions.empty()) {
    fail(ErrorCode::DatasetTooSmall, "split has no dev examples");
  }

  ResplitReport report;
  report.selector_name = selector == nullptr ? "self-dev" : selector->meta().name;
  report.runs = target.runs();
  report.per_run_selected_checkpoint.resize(S);
  report.per_run_test_acc.resize(S);

#pragma omp parallel for schedule(static)
  for (long long ss = 0; ss < static_cast<long long>(S); ++ss) {
    const std::size_t s = static_cast<std::size_t>(ss);
    std::size_t best_t = 0;
    double best_score = -1.0;
    for (std::size_t t = 0; t < T; ++t) {
      const double score = selector == nullptr
                               ? subset_accuracy(target, s, t, dev_positions)
                               : accuracy(selector->cell_row(s, t));
      if (score > best_score) {  // strict: ties keep the earliest checkpoint
        best_score = score;
        best_t = t;
      }
    }
    report.per_run_selected_checkpoint[s] = target.checkpoints()[best_t];
    report.per_run_test_acc[s] = subset_accuracy(target, s, best_t, test_positions);
  }

  report.test_mean = fixed_mean(report.per_run_test_acc);
  report.test_std = std::sqrt(sample_variance(report.per_run_test_acc));
  return report;
}

}  // namespace stabprobe
