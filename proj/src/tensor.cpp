#include "stabprobe/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "stabprobe/error.hpp"

namespace stabprobe {

const char* to_string(DatasetKind kind) {
  return kind == DatasetKind::standard ? "standard" : "analysis";
}

DatasetKind dataset_kind_from_string(const std::string& text) {
  if (text == "standard") return DatasetKind::standard;
  if (text == "analysis") return DatasetKind::analysis;
  fail(ErrorCode::FormatError, "unknown dataset kind: " + text);
}

namespace {

void require_unique(const std::vector<std::string>& values, const char* axis) {
  std::unordered_set<std::string> seen;
  for (const auto& v : values) {
    if (!seen.insert(v).second) {
      fail(ErrorCode::MetaMismatch, std::string(axis) + " axis has duplicate entry: " + v);
    }
  }
}

}  // namespace

PredictionTensor::PredictionTensor(DatasetMeta meta,
                                   std::vector<std::string> runs,
                                   std::vector<std::int64_t> checkpoints,
                                   std::vector<std::string> example_ids,
                                   std::vector<double> scores)
    : meta_(std::move(meta)),
      runs_(std::move(runs)),
      checkpoints_(std::move(checkpoints)),
      example_ids_(std::move(example_ids)),
      scores_(std::move(scores)) {
  if (runs_.empty()) fail(ErrorCode::MetaMismatch, "tensor requires at least one run");
  if (checkpoints_.empty()) fail(ErrorCode::MetaMismatch, "tensor requires at least one checkpoint");
  if (example_ids_.empty()) fail(ErrorCode::MetaMismatch, "tensor requires at least one example");
  require_unique(runs_, "run");
  require_unique(example_ids_, "example");
  for (std::size_t i = 0; i + 1 < checkpoints_.size(); ++i) {
    if (checkpoints_[i] >= checkpoints_[i + 1]) {
      fail(ErrorCode::MetaMismatch, "checkpoints must be strictly increasing");
    }
  }
  if (checkpoints_.front() < 0) {
    fail(ErrorCode::MetaMismatch, "checkpoints must be non-negative");
  }
  const std::size_t expected = runs_.size() * checkpoints_.size() * example_ids_.size();
  if (scores_.size() != expected) {
    fail(ErrorCode::MetaMismatch,
         "score block has " + std::to_string(scores_.size()) + " cells, expected " +
             std::to_string(expected));
  }
  for (double s : scores_) {
    if (!(s >= 0.0 && s <= 1.0)) {  // also rejects NaN
      fail(ErrorCode::ScoreOutOfRange, "score " + std::to_string(s) + " outside [0, 1]");
    }
  }
  if (meta_.size != example_ids_.size()) {
    fail(ErrorCode::MetaMismatch,
         "meta size " + std::to_string(meta_.size) + " != example count " +
             std::to_string(example_ids_.size()));
  }
}

std::size_t PredictionTensor::checkpoint_position(std::int64_t checkpoint) const {
  const auto it = std::lower_bound(checkpoints_.begin(), checkpoints_.end(), checkpoint);
  if (it == checkpoints_.end() || *it != checkpoint) {
    fail(ErrorCode::UnknownCheckpoint,
         "checkpoint " + std::to_string(checkpoint) + " not present in tensor");
  }
  return static_cast<std::size_t>(it - checkpoints_.begin());
}

std::size_t PredictionTensor::example_position(const std::string& example_id) const {
  const auto it = std::find(example_ids_.begin(), example_ids_.end(), example_id);
  if (it == example_ids_.end()) {
    fail(ErrorCode::AxisMismatch, "example id not present in tensor: " + example_id);
  }
  return static_cast<std::size_t>(it - example_ids_.begin());
}

namespace {

FinalSlice slice_at_position(const PredictionTensor& tensor, std::size_t position) {
  FinalSlice slice;
  slice.checkpoint = tensor.checkpoints()[position];
  slice.run_count = tensor.run_count();
  slice.example_ids = tensor.example_ids();
  slice.scores.resize(tensor.run_count() * tensor.example_count());
  for (std::size_t s = 0; s < tensor.run_count(); ++s) {
    const auto row = tensor.cell_row(s, position);
    std::copy(row.begin(), row.end(), slice.scores.begin() + s * tensor.example_count());
  }
  return slice;
}

}  // namespace

FinalSlice final_slice(const PredictionTensor& tensor) {
  return slice_at_position(tensor, tensor.checkpoint_count() - 1);
}

FinalSlice final_slice(const PredictionTensor& tensor, std::int64_t at) {
  return slice_at_position(tensor, tensor.checkpoint_position(at));
}

}  // namespace stabprobe
