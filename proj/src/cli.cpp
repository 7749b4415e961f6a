#include "stabprobe/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>
#include <json.hpp>

#include "stabprobe/dataset_correlation.hpp"
#include "stabprobe/error.hpp"
#include "stabprobe/example_correlation.hpp"
#include "stabprobe/jsonl.hpp"
#include "stabprobe/report/manifest.hpp"
#include "stabprobe/report/svg.hpp"
#include "stabprobe/report/tables.hpp"
#include "stabprobe/resplit.hpp"
#include "stabprobe/stats.hpp"
#include "stabprobe/storage.hpp"
#include "stabprobe/summation.hpp"
#include "stabprobe/synth.hpp"
#include "stabprobe/version.hpp"

namespace stabprobe {
namespace {

namespace fs = std::filesystem;
using report::format_fixed;
using report::format_full;
using report::ManifestBuilder;
using report::Table;

void apply_threads(int threads) {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

std::optional<CheckpointRange> parse_checkpoint_range(const std::string& text) {
  if (text.empty()) return {};
  const auto sep = text.find("..");
  if (sep == std::string::npos) {
    fail(ErrorCode::FormatError, "--checkpoint-range expects A..B, got '" + text + "'");
  }
  CheckpointRange range;
  try {
    range.first = std::stoll(text.substr(0, sep));
    range.last = std::stoll(text.substr(sep + 2));
  } catch (const std::exception&) {
    fail(ErrorCode::FormatError, "--checkpoint-range expects A..B, got '" + text + "'");
  }
  if (range.last < range.first) {
    fail(ErrorCode::FormatError, "--checkpoint-range is empty: '" + text + "'");
  }
  return range;
}

std::vector<PredictionTensor> load_tensors(const std::vector<std::string>& paths) {
  std::vector<PredictionTensor> tensors;
  tensors.reserve(paths.size());
  for (const auto& p : paths) tensors.push_back(load_tensor(p));
  return tensors;
}

void write_table(ManifestBuilder& manifest, const fs::path& out_dir, const std::string& stem,
                 const std::string& format, const Table& table) {
  const bool csv = format == "csv";
  const fs::path path = out_dir / (stem + (csv ? ".csv" : ".md"));
  report::emit_file(manifest, path, csv ? report::to_csv(table) : report::to_markdown(table));
  std::cout << "wrote " << path.string() << '\n';
}

void write_text(ManifestBuilder& manifest, const fs::path& path, const std::string& content) {
  report::emit_file(manifest, path, content);
  std::cout << "wrote " << path.string() << '\n';
}

// ---------------------------------------------------------------- ingest

struct IngestArgs {
  std::string in;
  std::string out;
  std::string dataset;
  std::size_t expect_size = 0;
  std::string kind;
};

int cmd_ingest(const IngestArgs& args) {
  std::optional<DatasetMeta> expected;
  if (!args.dataset.empty() || args.expect_size != 0 || !args.kind.empty()) {
    DatasetMeta meta;
    meta.name = args.dataset;
    meta.size = args.expect_size;
    meta.kind = args.kind.empty() ? DatasetKind::standard : dataset_kind_from_string(args.kind);
    expected = meta;
  }
  const PredictionTensor tensor = ingest_jsonl(args.in, expected);
  save_tensor(tensor, args.out);
  std::cout << "ingested " << tensor.meta().name << ": S=" << tensor.run_count()
            << " T=" << tensor.checkpoint_count() << " N=" << tensor.example_count() << " -> "
            << args.out << '\n';
  return 0;
}

// ------------------------------------------------------------- decompose

struct DecomposeArgs {
  std::vector<std::string> tensors;
  std::string out_dir;
  std::string format = "md";
  bool slow_path = false;
};

int cmd_decompose(const DecomposeArgs& args) {
  const auto tensors = load_tensors(args.tensors);
  const auto rows =
      decomposition_table(tensors, args.slow_path ? CovPath::pairwise : CovPath::fast);

  Table table;
  table.columns = {"dataset", "sqrt_total_pp", "sqrt_idp_pp", "sqrt_abs_cov_pp", "cov_term"};
  for (const auto& row : rows) {
    table.rows.push_back({row.dataset, format_fixed(row.pct_sqrt_total, 2),
                          format_fixed(row.pct_sqrt_idp, 2), format_fixed(row.pct_sqrt_abs_cov, 2),
                          format_full(row.decomposition.cov_term)});
  }

  fs::create_directories(args.out_dir);
  ManifestBuilder manifest("decompose", kToolVersion);
  for (const auto& p : args.tensors) manifest.add_input(p);
  manifest.set_config("format", args.format);
  manifest.set_config("slow_path", args.slow_path);
  manifest.set_config("checkpoint", "last");
  write_table(manifest, args.out_dir, "decomposition", args.format, table);
  manifest.write(args.out_dir);
  return 0;
}

// --------------------------------------------------------------- normdev

struct MetricRow {
  std::string model;
  std::string dataset;
  double mean = 0.0;
  double std_dev = 0.0;
  std::size_t size = 0;
  std::string kind;
};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::vector<MetricRow> read_metric_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::FormatError, path.string() + ": empty file");
  if (split_csv_line(line) != std::vector<std::string>{"model", "dataset", "mean", "std", "size",
                                                       "kind"}) {
    fail(ErrorCode::FormatError,
         path.string() + ": header must be model,dataset,mean,std,size,kind");
  }
  std::vector<MetricRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 6) {
      fail(ErrorCode::FormatError,
           path.string() + ":" + std::to_string(line_no) + ": expected 6 fields");
    }
    MetricRow row;
    row.model = fields[0];
    row.dataset = fields[1];
    try {
      row.mean = std::stod(fields[2]);
      row.std_dev = std::stod(fields[3]);
      row.size = static_cast<std::size_t>(std::stoull(fields[4]));
    } catch (const std::exception&) {
      fail(ErrorCode::FormatError,
           path.string() + ":" + std::to_string(line_no) + ": bad numeric field");
    }
    row.kind = fields[5];
    rows.push_back(std::move(row));
  }
  return rows;
}

struct NormdevArgs {
  std::string fixture;
  std::vector<std::string> tensors;
  std::string model_label = "model";
  std::string reference;
  std::vector<std::string> datasets;
  std::string out_dir;
  std::string format = "md";
};

int cmd_normdev(const NormdevArgs& args) {
  std::vector<MetricRow> rows;
  if (!args.fixture.empty()) {
    rows = read_metric_csv(args.fixture);
  } else {
    for (const auto& path : args.tensors) {
      const PredictionTensor tensor = load_tensor(path);
      const FinalSlice slice = final_slice(tensor);
      if (slice.run_count < 2) {
        fail(ErrorCode::InsufficientRuns,
             "tensor '" + tensor.meta().name + "' needs >= 2 runs for a deviation");
      }
      std::vector<double> accs(slice.run_count);
      for (std::size_t s = 0; s < slice.run_count; ++s) accs[s] = accuracy(slice.run_row(s));
      MetricRow row;
      row.model = args.model_label;
      row.dataset = tensor.meta().name;
      row.mean = 100.0 * fixed_mean(accs);
      row.std_dev = 100.0 * std::sqrt(sample_variance(accs));
      row.size = tensor.example_count();
      row.kind = to_string(tensor.meta().kind);
      rows.push_back(std::move(row));
    }
  }

  // first-appearance orders
  std::vector<std::string> models;
  std::vector<std::string> datasets;
  for (const auto& row : rows) {
    if (std::find(models.begin(), models.end(), row.model) == models.end()) {
      models.push_back(row.model);
    }
    if (std::find(datasets.begin(), datasets.end(), row.dataset) == datasets.end()) {
      datasets.push_back(row.dataset);
    }
  }
  if (!args.datasets.empty()) {
    std::vector<std::string> filtered;
    for (const auto& d : datasets) {
      if (std::find(args.datasets.begin(), args.datasets.end(), d) != args.datasets.end()) {
        filtered.push_back(d);
      }
    }
    datasets = std::move(filtered);
  }

  auto find_row = [&](const std::string& model, const std::string& dataset) -> const MetricRow* {
    for (const auto& row : rows) {
      if (row.model == model && row.dataset == dataset) return &row;
    }
    return nullptr;
  };

  Table table;
  table.columns.push_back("model");
  for (const auto& d : datasets) table.columns.push_back(d);
  for (const auto& model : models) {
    const MetricRow* ref = find_row(model, args.reference);
    if (ref == nullptr) {
      std::cout << "note: model '" << model << "' has no " << args.reference
                << " row, skipped\n";
      continue;
    }
    std::vector<std::string> cells{model};
    for (const auto& d : datasets) {
      const MetricRow* row = find_row(model, d);
      cells.push_back(row == nullptr ? std::string()
                                     : format_fixed(normalized_deviation(row->std_dev, row->size,
                                                                         ref->std_dev, ref->size),
                                                    2));
    }
    table.rows.push_back(std::move(cells));
  }

  fs::create_directories(args.out_dir);
  ManifestBuilder manifest("normdev", kToolVersion);
  if (!args.fixture.empty()) manifest.add_input(args.fixture);
  for (const auto& p : args.tensors) manifest.add_input(p);
  manifest.set_config("reference", args.reference);
  manifest.set_config("datasets", args.datasets);
  manifest.set_config("format", args.format);
  write_table(manifest, args.out_dir, "normdev", args.format, table);
  manifest.write(args.out_dir);
  return 0;
}

// ------------------------------------------------------------------ traj

struct TrajArgs {
  std::vector<std::string> tensors;
  std::string out_dir;
  std::string overlay_run;
  std::string checkpoint_range;
};

TrajectoryStats restrict_range(const TrajectoryStats& stats,
                               const std::optional<CheckpointRange>& range) {
  if (!range) return stats;
  TrajectoryStats out;
  for (std::size_t t = 0; t < stats.checkpoints.size(); ++t) {
    if (range->contains(stats.checkpoints[t])) {
      out.checkpoints.push_back(stats.checkpoints[t]);
      out.mean_acc.push_back(stats.mean_acc[t]);
      out.std_acc.push_back(stats.std_acc[t]);
    }
  }
  if (out.checkpoints.empty()) {
    fail(ErrorCode::SeriesTooShort, "checkpoint range selects no checkpoints");
  }
  return out;
}

int cmd_traj(const TrajArgs& args) {
  const auto range = parse_checkpoint_range(args.checkpoint_range);
  const auto tensors = load_tensors(args.tensors);

  std::vector<report::TrajectorySeries> series;
  for (const auto& tensor : tensors) {
    report::TrajectorySeries s;
    s.label = tensor.meta().name;
    s.stats = restrict_range(trajectory(tensor), range);
    if (!args.overlay_run.empty()) {
      const auto it = std::find(tensor.runs().begin(), tensor.runs().end(), args.overlay_run);
      if (it == tensor.runs().end()) {
        fail(ErrorCode::AxisMismatch, "overlay run '" + args.overlay_run + "' not in tensor '" +
                                          tensor.meta().name + "'");
      }
      const std::size_t run = static_cast<std::size_t>(it - tensor.runs().begin());
      std::vector<double> overlay;
      for (std::size_t t = 0; t < tensor.checkpoint_count(); ++t) {
        if (!range || range->contains(tensor.checkpoints()[t])) {
          overlay.push_back(accuracy(tensor.cell_row(run, t)));
        }
      }
      s.overlay_run = std::move(overlay);
    }
    series.push_back(std::move(s));
  }

  Table table;
  table.columns = {"dataset", "checkpoint", "mean_acc", "std_acc", "overlay_acc"};
  for (const auto& s : series) {
    for (std::size_t t = 0; t < s.stats.checkpoints.size(); ++t) {
      table.rows.push_back({s.label, std::to_string(s.stats.checkpoints[t]),
                            format_full(s.stats.mean_acc[t]), format_full(s.stats.std_acc[t]),
                            s.overlay_run ? format_full((*s.overlay_run)[t]) : std::string()});
    }
  }

  fs::create_directories(args.out_dir);
  ManifestBuilder manifest("traj", kToolVersion);
  for (const auto& p : args.tensors) manifest.add_input(p);
  manifest.set_config("overlay_run", args.overlay_run);
  manifest.set_config("checkpoint_range", args.checkpoint_range);
  write_text(manifest, fs::path(args.out_dir) / "traj.svg", report::trajectory_svg(series));
  {
    const fs::path csv_path = fs::path(args.out_dir) / "traj.csv";
    report::emit_file(manifest, csv_path, report::to_csv(table));
    std::cout << "wrote " << csv_path.string() << '\n';
  }
  manifest.write(args.out_dir);
  return 0;
}

// --------------------------------------------------------- corr-datasets

struct CorrDatasetsArgs {
  std::vector<std::string> tensors;
  std::string out_dir;
  std::string checkpoint_range;
};

Table matrix_values_table(const std::vector<std::string>& names,
                          const std::vector<double>& values,
                          const std::vector<std::uint8_t>& defined_flags) {
  Table table;
  table.columns.push_back("dataset");
  for (const auto& n : names) table.columns.push_back(n);
  const std::size_t D = names.size();
  for (std::size_t i = 0; i < D; ++i) {
    std::vector<std::string> row{names[i]};
    for (std::size_t j = 0; j < D; ++j) {
      row.push_back(defined_flags[i * D + j] ? format_full(values[i * D + j]) : "nan");
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

int cmd_corr_datasets(const CorrDatasetsArgs& args) {
  const auto range = parse_checkpoint_range(args.checkpoint_range);
  const auto tensors = load_tensors(args.tensors);
  const DatasetCorrelationMatrix m = dataset_correlation(tensors, range);

  Table undefined;
  undefined.columns.push_back("dataset");
  for (const auto& n : m.names) undefined.columns.push_back(n);
  for (std::size_t i = 0; i < m.size(); ++i) {
    std::vector<std::string> row{m.names[i]};
    for (std::size_t j = 0; j < m.size(); ++j) {
      row.push_back(std::to_string(m.undefined(i, j)));
    }
    undefined.rows.push_back(std::move(row));
  }

  report::HeatmapOptions options;
  options.title = "dataset trajectory correlation (Spearman, seed-averaged)";

  fs::create_directories(args.out_dir);
  ManifestBuilder manifest("corr-datasets", kToolVersion);
  for (const auto& p : args.tensors) manifest.add_input(p);
  manifest.set_config("checkpoint_range", args.checkpoint_range);
  write_text(manifest, fs::path(args.out_dir) / "corr_datasets.csv",
             report::to_csv(matrix_values_table(m.names, m.values, m.defined_flags)));
  write_text(manifest, fs::path(args.out_dir) / "corr_datasets_undefined.csv",
             report::to_csv(undefined));
  write_text(manifest, fs::path(args.out_dir) / "corr_datasets.svg",
             report::heatmap_svg(m.names, m.values, m.defined_flags, options));
  manifest.write(args.out_dir);
  return 0;
}

// --------------------------------------------------------- corr-examples

struct CorrExamplesArgs {
  std::string tensor;
  std::string out_dir;
  std::size_t subsample = 0;
  std::uint64_t subsample_seed = 0;
  bool full_matrix = false;
  std::string axis = "pooled";
  double tau = 0.9;
  std::size_t top_pairs = 10;
  std::size_t render_cap = 256;
};

constexpr std::size_t kDefaultExampleCap = 2000;

int cmd_corr_examples(const CorrExamplesArgs& args) {
  const PredictionTensor tensor = load_tensor(args.tensor);
  const ObservationAxis axis = args.axis == "per-seed-mean"
                                   ? ObservationAxis::per_seed_mean
                                   : ObservationAxis::pooled_seed_checkpoint;
  if (args.axis != "pooled" && args.axis != "per-seed-mean") {
    fail(ErrorCode::FormatError, "--axis must be pooled or per-seed-mean");
  }

  std::optional<SubsampleSpec> subsample;
  if (args.subsample > 0) {
    subsample = SubsampleSpec{args.subsample, args.subsample_seed};
  } else if (!args.full_matrix && tensor.example_count() > kDefaultExampleCap) {
    subsample = SubsampleSpec{kDefaultExampleCap, args.subsample_seed};
    std::cout << "note: " << tensor.example_count() << " examples capped to "
              << kDefaultExampleCap << " (override with --subsample or --full-matrix)\n";
  }

  const ExampleCorrelationMatrix m = example_correlation_matrix(tensor, subsample, axis);
  const auto blocks = correlation_blocks(m, args.tau);
  const auto pairs = top_covariance_pairs(final_slice(tensor), args.top_pairs);

  std::ostringstream blocks_jsonl;
  for (const auto& block : blocks) {
    nlohmann::json obj{{"members", block.member_ids},
                       {"mean_corr", block.mean_internal_correlation}};
    blocks_jsonl << obj.dump() << '\n';
  }

  Table pair_table;
  pair_table.columns = {"example_a", "example_b", "covariance", "spearman"};
  for (const auto& pair : pairs) {
    pair_table.rows.push_back({pair.example_a, pair.example_b, format_full(pair.covariance),
                               pair.correlation.defined ? format_full(pair.correlation.value)
                                                        : "nan"});
  }

  report::HeatmapOptions options;
  options.title = std::string("inter-example correlation (") + to_string(axis) + ")";
  options.render_cap = args.render_cap;

  fs::create_directories(args.out_dir);
  ManifestBuilder manifest("corr-examples", kToolVersion);
  manifest.add_input(args.tensor);
  manifest.set_config("axis", to_string(axis));
  manifest.set_config("tau", args.tau);
  manifest.set_config("top_pairs", args.top_pairs);
  if (subsample) {
    manifest.set_config("subsample", subsample->count);
    manifest.set_config("subsample_seed", subsample->seed);
  }
  write_text(manifest, fs::path(args.out_dir) / "corr_examples.csv",
             report::to_csv(matrix_values_table(m.example_ids, m.values, m.defined_flags)));
  write_text(manifest, fs::path(args.out_dir) / "corr_examples.svg",
             report::heatmap_svg(m.example_ids, m.values, m.defined_flags, options));
  write_text(manifest, fs::path(args.out_dir) / "blocks.jsonl", blocks_jsonl.str());
  write_text(manifest, fs::path(args.out_dir) / "top_pairs.csv", report::to_csv(pair_table));
  manifest.write(args.out_dir);
  return 0;
}

// --------------------------------------------------------------- resplit

struct ResplitArgs {
  std::string tensor;
  std::vector<std::string> selectors{"self-dev"};
  double dev_fraction = 0.8;
  std::uint64_t split_seed = 0;
  std::size_t repeat = 1;
  std::string out_dir;
  std::string format = "md";
};

int cmd_resplit(const ResplitArgs& args) {
  const PredictionTensor target = load_tensor(args.tensor);

  std::vector<std::pair<std::string, std::optional<PredictionTensor>>> selectors;
  for (const auto& sel : args.selectors) {
    if (sel == "self-dev") {
      selectors.emplace_back("self-dev", std::nullopt);
    } else {
      selectors.emplace_back(sel, load_tensor(sel));
    }
  }

  Table table;
  table.columns = {"selector", "split_seed", "test_mean_pp", "test_std_pp"};
  std::vector<std::vector<double>> selector_means(selectors.size());
  for (std::size_t r = 0; r < args.repeat; ++r) {
    const std::uint64_t seed = args.split_seed + r;
    const SplitSpec split = make_split(target, args.dev_fraction, seed);
    for (std::size_t k = 0; k < selectors.size(); ++k) {
      const auto& [label, selector] = selectors[k];
      const ResplitReport report =
          select_and_evaluate(target, split, selector ? &*selector : nullptr);
      table.rows.push_back({report.selector_name, std::to_string(seed),
                            format_fixed(100.0 * report.test_mean, 2),
                            format_fixed(100.0 * report.test_std, 2)});
      selector_means[k].push_back(report.test_mean);
    }
  }
  if (args.repeat > 1) {
    for (std::size_t k = 0; k < selectors.size(); ++k) {
      const double mean = fixed_mean(selector_means[k]);
      const double spread = std::sqrt(sample_variance(selector_means[k]));
      table.rows.push_back({selectors[k].first + " (over " + std::to_string(args.repeat) +
                                " splits)",
                            "-", format_fixed(100.0 * mean, 2), format_fixed(100.0 * spread, 2)});
    }
  }

  fs::create_directories(args.out_dir);
  ManifestBuilder manifest("resplit", kToolVersion);
  manifest.add_input(args.tensor);
  for (const auto& [label, selector] : selectors) {
    if (selector) manifest.add_input(label);
  }
  manifest.set_config("dev_fraction", args.dev_fraction);
  manifest.set_config("split_seed", args.split_seed);
  manifest.set_config("repeat", args.repeat);
  manifest.set_config("format", args.format);
  write_table(manifest, args.out_dir, "resplit", args.format, table);
  manifest.write(args.out_dir);
  return 0;
}

// ----------------------------------------------------------------- synth

struct SynthArgs {
  std::string spec;
  std::string out_jsonl;
  std::string out_tensor;
};

int cmd_synth(const SynthArgs& args) {
  const BlockModelSpec spec = load_block_model_spec(args.spec);
  const PredictionTensor tensor = generate(spec);
  if (!args.out_jsonl.empty()) {
    write_jsonl(tensor, args.out_jsonl);
    std::cout << "wrote " << args.out_jsonl << '\n';
  }
  if (!args.out_tensor.empty()) {
    save_tensor(tensor, args.out_tensor);
    std::cout << "wrote " << args.out_tensor << '\n';
  }
  const VarianceDecomposition predicted = predicted_decomposition(spec);
  std::cout << "predicted decomposition: total_var=" << format_full(predicted.total_var)
            << " idp_var=" << format_full(predicted.idp_var)
            << " cov_term=" << format_full(predicted.cov_term) << '\n';
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"stabprobe: decomposes evaluation instability across training runs"};
  app.require_subcommand(1);

  int threads = 0;

  IngestArgs ingest_args;
  auto* ingest = app.add_subcommand("ingest", "validate a JSONL prediction log into a tensor file");
  ingest->add_option("--in", ingest_args.in, "JSONL prediction log")->required();
  ingest->add_option("--out", ingest_args.out, "output tensor file")->required();
  ingest->add_option("--dataset", ingest_args.dataset, "expected dataset name");
  ingest->add_option("--expect-size", ingest_args.expect_size, "expected example count");
  ingest->add_option("--kind", ingest_args.kind, "dataset kind: standard|analysis");

  DecomposeArgs decompose_args;
  auto* decompose = app.add_subcommand("decompose", "variance decomposition table per dataset");
  decompose->add_option("--tensor", decompose_args.tensors, "tensor file (repeatable)")
      ->required();
  decompose->add_option("--out-dir", decompose_args.out_dir, "output directory")->required();
  decompose->add_option("--format", decompose_args.format, "md|csv")
      ->check(CLI::IsMember({"md", "csv"}));
  decompose->add_flag("--slow-path", decompose_args.slow_path,
                      "explicit pairwise covariance sum (oracle path)");

  NormdevArgs normdev_args;
  auto* normdev = app.add_subcommand("normdev", "size-normalized relative deviation table");
  normdev->add_option("--fixture", normdev_args.fixture,
                      "CSV of published numbers (model,dataset,mean,std,size,kind)");
  normdev->add_option("--tensor", normdev_args.tensors, "tensor file (repeatable)");
  normdev->add_option("--model", normdev_args.model_label, "model label for tensor mode");
  normdev->add_option("--reference", normdev_args.reference, "reference dataset name")
      ->required();
  normdev->add_option("--datasets", normdev_args.datasets, "dataset filter")->delimiter(',');
  normdev->add_option("--out-dir", normdev_args.out_dir, "output directory")->required();
  normdev->add_option("--format", normdev_args.format, "md|csv")
      ->check(CLI::IsMember({"md", "csv"}));

  TrajArgs traj_args;
  auto* traj = app.add_subcommand("traj", "trajectory band plot (mean +- std across runs)");
  traj->add_option("--tensor", traj_args.tensors, "tensor file (repeatable)")->required();
  traj->add_option("--out-dir", traj_args.out_dir, "output directory")->required();
  traj->add_option("--overlay-run", traj_args.overlay_run, "dashed single-run overlay");
  traj->add_option("--checkpoint-range", traj_args.checkpoint_range, "inclusive range A..B");

  CorrDatasetsArgs corr_datasets_args;
  auto* corr_datasets =
      app.add_subcommand("corr-datasets", "seed-averaged trajectory correlation matrix");
  corr_datasets->add_option("--tensor", corr_datasets_args.tensors, "tensor file (repeatable)")
      ->required();
  corr_datasets->add_option("--out-dir", corr_datasets_args.out_dir, "output directory")
      ->required();
  corr_datasets->add_option("--checkpoint-range", corr_datasets_args.checkpoint_range,
                            "inclusive range A..B");

  CorrExamplesArgs corr_examples_args;
  auto* corr_examples =
      app.add_subcommand("corr-examples", "inter-example correlation matrix and blocks");
  corr_examples->add_option("--tensor", corr_examples_args.tensor, "tensor file")->required();
  corr_examples->add_option("--out-dir", corr_examples_args.out_dir, "output directory")
      ->required();
  corr_examples->add_option("--subsample", corr_examples_args.subsample,
                            "cap the example axis to this many (seeded, deterministic)");
  corr_examples->add_option("--subsample-seed", corr_examples_args.subsample_seed,
                            "seed for the subsample");
  corr_examples->add_flag("--full-matrix", corr_examples_args.full_matrix,
                          "disable the default 2000-example cap");
  corr_examples->add_option("--axis", corr_examples_args.axis, "pooled|per-seed-mean");
  corr_examples->add_option("--tau", corr_examples_args.tau, "block threshold in (0,1]")
      ->check(CLI::Range(0.0, 1.0));
  corr_examples->add_option("--top-pairs", corr_examples_args.top_pairs,
                            "largest-covariance pairs to report");
  corr_examples->add_option("--render-cap", corr_examples_args.render_cap,
                            "max heatmap cells per side");

  ResplitArgs resplit_args;
  auto* resplit = app.add_subcommand("resplit", "dev/test re-split checkpoint selection");
  resplit->add_option("--tensor", resplit_args.tensor, "target analysis tensor")->required();
  resplit->add_option("--selector", resplit_args.selectors,
                      "'self-dev' or an external tensor file (repeatable)");
  resplit->add_option("--dev-fraction", resplit_args.dev_fraction, "dev share, default 0.8");
  resplit->add_option("--split-seed", resplit_args.split_seed, "shuffle seed");
  resplit->add_option("--repeat", resplit_args.repeat, "repeat over consecutive seeds");
  resplit->add_option("--out-dir", resplit_args.out_dir, "output directory")->required();
  resplit->add_option("--format", resplit_args.format, "md|csv")
      ->check(CLI::IsMember({"md", "csv"}));

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "generate a block-model prediction tensor");
  synth->add_option("--spec", synth_args.spec, "block model JSON spec")->required();
  synth->add_option("--out-jsonl", synth_args.out_jsonl, "JSONL prediction log output");
  synth->add_option("--out-tensor", synth_args.out_tensor, "tensor file output");

  for (auto* sub : {ingest, decompose, normdev, traj, corr_datasets, corr_examples, resplit,
                    synth}) {
    sub->add_option("--threads", threads, "OpenMP thread count (0 = library default)");
  }

  std::vector<const char*> argv;
  argv.push_back("stabprobe");
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 64;
  }

  apply_threads(threads);
  try {
    if (app.got_subcommand(ingest)) return cmd_ingest(ingest_args);
    if (app.got_subcommand(decompose)) return cmd_decompose(decompose_args);
    if (app.got_subcommand(normdev)) {
      if (normdev_args.fixture.empty() == normdev_args.tensors.empty()) {
        fail(ErrorCode::FormatError, "normdev needs exactly one of --fixture / --tensor");
      }
      return cmd_normdev(normdev_args);
    }
    if (app.got_subcommand(traj)) return cmd_traj(traj_args);
    if (app.got_subcommand(corr_datasets)) return cmd_corr_datasets(corr_datasets_args);
    if (app.got_subcommand(corr_examples)) return cmd_corr_examples(corr_examples_args);
    if (app.got_subcommand(resplit)) return cmd_resplit(resplit_args);
    if (app.got_subcommand(synth)) {
      if (synth_args.out_jsonl.empty() && synth_args.out_tensor.empty()) {
        fail(ErrorCode::FormatError, "synth needs --out-jsonl and/or --out-tensor");
      }
      return cmd_synth(synth_args);
    }
  } catch (const Error& e) {
    nlohmann::json diag{{"error", to_string(e.code())}, {"message", e.what()}};
    std::cerr << diag.dump() << '\n';
    return 2;
  } catch (const std::exception& e) {
    nlohmann::json diag{{"error", "Internal"}, {"message", e.what()}};
    std::cerr << diag.dump() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace stabprobe
