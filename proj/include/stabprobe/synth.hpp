#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "stabprobe/stats.hpp"
#include "stabprobe/tensor.hpp"

namespace stabprobe {

/// Block-latent Bernoulli model: per (run, checkpoint, block) a latent
/// coin b ~ Bernoulli(q) is drawn and every member example reports b
/// flipped independently with probability eps. The simplest process with
/// tunable inter-example covariance and closed-form moments:
///
///   p             = q(1-eps) + (1-q)eps
///   Var(C_i)      = p(1-p)
///   Cov within    = q(1-q)(1-2eps)^2
///   Cov across    = 0
///
/// checkpoint_persistence > 0 carries each block latent to the next
/// checkpoint with that probability (redrawn otherwise), adding temporal
/// structure for trajectory tests while keeping the marginal moments.
struct BlockModelSpec {
  std::size_t n_examples = 0;
  std::vector<std::size_t> block_sizes;  // partition of n_examples
  std::size_t n_runs = 0;
  std::size_t n_checkpoints = 1;
  double block_base_rate = 0.5;  // q
  double flip_noise = 0.0;       // eps in [0, 0.5)
  double checkpoint_persistence = 0.0;
  std::uint64_t rng_seed = 0;
  std::string dataset_name = "synthetic";

  void validate() const;
};

/// Reads a spec from JSON. `block_sizes` may be given as an explicit array
/// or via the shorthand `block_size` (uniform blocks; must divide
/// n_examples).
BlockModelSpec load_block_model_spec(const std::filesystem::path& json_path);

/// Deterministic generation: identical spec -> identical tensor. Example
/// ids are contiguous per block, so block structure is visible in input
/// order like template-grouped analysis sets.
PredictionTensor generate(const BlockModelSpec& spec);

/// Population decomposition implied by the model; the analytic oracle the
/// empirical decomposition converges to.
VarianceDecomposition predicted_decomposition(const BlockModelSpec& spec);

}  // namespace stabprobe
