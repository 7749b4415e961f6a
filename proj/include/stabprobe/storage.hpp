#pragma once

#include <filesystem>

#include "stabprobe/tensor.hpp"

namespace stabprobe {

/// Single-file tensor container, magic "STABPROBE1". Byte layout is
/// documented in docs/tensor_format.md and pinned by a golden-file test.
/// Round-trips are bit-exact: load(save(t)) == t on all axes and scores.
void save_tensor(const PredictionTensor& tensor, const std::filesystem::path& path);
PredictionTensor load_tensor(const std::filesystem::path& path);

}  // namespace stabprobe
