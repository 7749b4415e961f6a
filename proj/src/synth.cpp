#include "stabprobe/synth.hpp"

#include <fstream>
#include <numeric>

#include <json.hpp>

#include "stabprobe/det_rng.hpp"
#include "stabprobe/error.hpp"

namespace stabprobe {

void BlockModelSpec::validate() const {
  if (n_examples == 0) fail(ErrorCode::FormatError, "n_examples must be positive");
  if (n_runs == 0) fail(ErrorCode::FormatError, "n_runs must be positive");
  if (n_checkpoints == 0) fail(ErrorCode::FormatError, "n_checkpoints must be positive");
  if (block_sizes.empty()) fail(ErrorCode::FormatError, "block_sizes must be non-empty");
  const std::size_t total = std::accumulate(block_sizes.begin(), block_sizes.end(), std::size_t{0});
  if (total != n_examples) {
    fail(ErrorCode::FormatError, "block_sizes sum to " + std::to_string(total) +
                                     ", expected n_examples = " + std::to_string(n_examples));
  }
  for (std::size_t b : block_sizes) {
    if (b == 0) fail(ErrorCode::FormatError, "block sizes must be positive");
  }
  if (!(block_base_rate > 0.0 && block_base_rate < 1.0)) {
    fail(ErrorCode::FormatError, "block_base_rate must lie in (0, 1)");
  }
  if (!(flip_noise >= 0.0 && flip_noise < 0.5)) {
    fail(ErrorCode::FormatError, "flip_noise must lie in [0, 0.5)");
  }
  if (!(checkpoint_persistence >= 0.0 && checkpoint_persistence < 1.0)) {
    fail(ErrorCode::FormatError, "checkpoint_persistence must lie in [0, 1)");
  }
}

BlockModelSpec load_block_model_spec(const std::filesystem::path& json_path) {
  std::ifstream in(json_path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + json_path.string());
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::FormatError, json_path.string() + ": " + e.what());
  }
  BlockModelSpec spec;
  try {
    spec.n_examples = obj.at("n_examples").get<std::size_t>();
    spec.n_runs = obj.at("n_runs").get<std::size_t>();
    spec.n_checkpoints = obj.value("n_checkpoints", std::size_t{1});
    spec.block_base_rate = obj.at("block_base_rate").get<double>();
    spec.flip_noise = obj.value("flip_noise", 0.0);
    spec.checkpoint_persistence = obj.value("checkpoint_persistence", 0.0);
    spec.rng_seed = obj.at("rng_seed").get<std::uint64_t>();
    spec.dataset_name = obj.value("dataset_name", std::string("synthetic"));
    if (obj.contains("block_sizes") == obj.contains("block_size")) {
      fail(ErrorCode::FormatError,
           json_path.string() + ": give exactly one of block_sizes / block_size");
    }
    if (obj.contains("block_sizes")) {
      spec.block_sizes = obj.at("block_sizes").get<std::vector<std::size_t>>();
    } else {
      const auto uniform = obj.at("block_size").get<std::size_t>();
      if (uniform == 0 || spec.n_examples % uniform != 0) {
        fail(ErrorCode::FormatError, "block_size must divide n_examples");
      }
      spec.block_sizes.assign(spec.n_examples / uniform, uniform);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::FormatError, json_path.string() + ": " + e.what());
  }
  spec.validate();
  return spec;
}

namespace {

std::string padded_label(const char* prefix, std::size_t value, std::size_t max_value) {
  std::size_t width = 1;
  for (std::size_t v = max_value; v >= 10; v /= 10) ++width;
  std::string digits = std::to_string(value);
  return std::string(prefix) + std::string(width - digits.size(), '0') + digits;
}

}  // namespace

PredictionTensor generate(const BlockModelSpec& spec) {
  spec.validate();
  const std::size_t S = spec.n_runs;
  const std::size_t T = spec.n_checkpoints;
  const std::size_t N = spec.n_examples;
  const std::size_t B = spec.block_sizes.size();

  std::vector<std::string> runs(S);
  for (std::size_t s = 0; s < S; ++s) runs[s] = padded_label("run", s, S - 1);
  std::vector<std::int64_t> checkpoints(T);
  std::iota(checkpoints.begin(), checkpoints.end(), std::int64_t{0});
  std::vector<std::string> example_ids(N);
  for (std::size_t i = 0; i < N; ++i) example_ids[i] = padded_label("ex", i, N - 1);

  // One stream, fixed draw order: run-major, checkpoint, block, members.
  DetRng rng(spec.rng_seed);
  std::vector<double> scores(S * T * N);
  std::vector<int> latent(B);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t t = 0; t < T; ++t) {
      double* row = scores.data() + (s * T + t) * N;
      std::size_t offset = 0;
      for (std::size_t g = 0; g < B; ++g) {
        const bool carry = t > 0 && spec.checkpoint_persistence > 0.0 &&
                           rng.bernoulli(spec.checkpoint_persistence);
        if (!carry) latent[g] = rng.bernoulli(spec.block_base_rate) ? 1 : 0;
        for (std::size_t m = 0; m < spec.block_sizes[g]; ++m) {
          const bool flip = rng.bernoulli(spec.flip_noise);
          row[offset + m] = static_cast<double>(flip ? 1 - latent[g] : latent[g]);
        }
        offset += spec.block_sizes[g];
      }
    }
  }

  DatasetMeta meta;
  meta.name = spec.dataset_name;
  meta.size = N;
  meta.kind = DatasetKind::analysis;
  return PredictionTensor(std::move(meta), std::move(runs), std::move(checkpoints),
                          std::move(example_ids), std::move(scores));
}

VarianceDecomposition predicted_decomposition(const BlockModelSpec& spec) {
  spec.validate();
  const double q = spec.block_base_rate;
  const double eps = spec.flip_noise;
  const double n = static_cast<double>(spec.n_examples);

  const double p = q * (1.0 - eps) + (1.0 - q) * eps;
  const double idp_var = p * (1.0 - p) / n;

  const double within = q * (1.0 - q) * (1.0 - 2.0 * eps) * (1.0 - 2.0 * eps);
  double pair_count = 0.0;
  for (std::size_t b : spec.block_sizes) {
    const double k = static_cast<double>(b);
    pair_count += k * (k - 1.0) / 2.0;
  }
  const double cov_term = 2.0 / (n * n) * pair_count * within;
  return make_decomposition(idp_var + cov_term, idp_var, cov_term);
}

}  // namespace stabprobe
