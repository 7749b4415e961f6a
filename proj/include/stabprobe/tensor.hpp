#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace stabprobe {

enum class DatasetKind { standard, analysis };

const char* to_string(DatasetKind kind);
DatasetKind dataset_kind_from_string(const std::string& text);

struct DatasetMeta {
  std::string name;
  std::size_t size = 0;  // example count N
  DatasetKind kind = DatasetKind::standard;

  bool operator==(const DatasetMeta&) const = default;
};

/// Dense [runs x checkpoints x examples] block of per-example scores.
/// Scores are correctness indicators or per-example metrics in [0, 1].
/// Immutable after construction; safe to share across threads.
class PredictionTensor {
 public:
  PredictionTensor(DatasetMeta meta,
                   std::vector<std::string> runs,
                   std::vector<std::int64_t> checkpoints,
                   std::vector<std::string> example_ids,
                   std::vector<double> scores);

  const DatasetMeta& meta() const { return meta_; }
  const std::vector<std::string>& runs() const { return runs_; }
  const std::vector<std::int64_t>& checkpoints() const { return checkpoints_; }
  const std::vector<std::string>& example_ids() const { return example_ids_; }

  std::size_t run_count() const { return runs_.size(); }
  std::size_t checkpoint_count() const { return checkpoints_.size(); }
  std::size_t example_count() const { return example_ids_.size(); }

  double score(std::size_t run, std::size_t checkpoint, std::size_t example) const {
    return scores_[(run * checkpoints_.size() + checkpoint) * example_ids_.size() + example];
  }

  /// Contiguous example scores for one (run, checkpoint) cell row.
  std::span<const double> cell_row(std::size_t run, std::size_t checkpoint) const {
    return {scores_.data() + (run * checkpoints_.size() + checkpoint) * example_ids_.size(),
            example_ids_.size()};
  }

  std::span<const double> raw_scores() const { return scores_; }

  /// Position of a checkpoint value; throws UnknownCheckpoint.
  std::size_t checkpoint_position(std::int64_t checkpoint) const;

  /// Position of an example id; throws AxisMismatch when absent.
  std::size_t example_position(const std::string& example_id) const;

  bool operator==(const PredictionTensor& other) const = default;

 private:
  DatasetMeta meta_;
  std::vector<std::string> runs_;
  std::vector<std::int64_t> checkpoints_;
  std::vector<std::string> example_ids_;
  std::vector<double> scores_;  // row-major [run][checkpoint][example]
};

/// The [runs x examples] plane of one checkpoint, detached from its tensor.
struct FinalSlice {
  std::int64_t checkpoint = 0;
  std::size_t run_count = 0;
  std::vector<std::string> example_ids;
  std::vector<double> scores;  // row-major [run][example]

  std::size_t example_count() const { return example_ids.size(); }

  std::span<const double> run_row(std::size_t run) const {
    return {scores.data() + run * example_ids.size(), example_ids.size()};
  }
};

/// Plane at the given checkpoint value; defaults to the last checkpoint.
FinalSlice final_slice(const PredictionTensor& tensor);
FinalSlice final_slice(const PredictionTensor& tensor, std::int64_t at);

}  // namespace stabprobe
