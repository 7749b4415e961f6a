#pragma once

#include <filesystem>
#include <optional>

#include "stabprobe/tensor.hpp"

namespace stabprobe {

/// Reads a JSONL prediction log into a dense tensor. One object per line:
///
///   {"run_id": "...", "checkpoint": 12, "dataset": "...",
///    "example_id": "...", "score": 0.5}
///
/// Records may arrive in any order; axes come out sorted (runs and example
/// ids lexicographic, checkpoints ascending). Every (run, checkpoint,
/// example) cell must be present exactly once; partial grids are rejected
/// rather than imputed.
PredictionTensor ingest_jsonl(const std::filesystem::path& path,
                              const std::optional<DatasetMeta>& expected_meta = {});

/// Writes a tensor back out as a JSONL prediction log (the inverse of
/// ingest_jsonl up to line order, which is run-major).
void write_jsonl(const PredictionTensor& tensor, const std::filesystem::path& path);

}  // namespace stabprobe
