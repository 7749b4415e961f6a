// Acceptance suite: one test case per criterion, each printing a single
// [acceptance] PASS/FAIL line. Run via ctest or directly as
// build/tests/stabprobe_acceptance.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <json.hpp>

#include "stabprobe/cli.hpp"
#include "stabprobe/rank.hpp"
#include "stabprobe/reference.hpp"
#include "stabprobe/resplit.hpp"
#include "stabprobe/stats.hpp"
#include "stabprobe/synth.hpp"
#include "test_support.hpp"

using namespace stabprobe;
using stabprobe::test::TempDir;

namespace {

struct CliResult {
  int exit_code = 0;
  std::string out;
  std::string err;
};

CliResult run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  auto* old_out = std::cout.rdbuf(out.rdbuf());
  auto* old_err = std::cerr.rdbuf(err.rdbuf());
  CliResult result;
  result.exit_code = run_cli(args);
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  result.out = out.str();
  result.err = err.str();
  return result;
}

void report_line(int criterion, const std::string& name, bool pass, const std::string& extra) {
  std::printf("[acceptance] criterion %d (%s): %s%s%s\n", criterion, name.c_str(),
              pass ? "PASS" : "FAIL", extra.empty() ? "" : " — ", extra.c_str());
  std::fflush(stdout);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

// model -> dataset -> value, parsed from a normdev grid CSV
std::map<std::string, std::map<std::string, double>> parse_grid(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  REQUIRE(std::getline(in, line));
  const auto header = split_csv(line);
  std::map<std::string, std::map<std::string, double>> grid;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    for (std::size_t i = 1; i < fields.size(); ++i) {
      if (!fields[i].empty()) grid[fields[0]][header[i]] = std::stod(fields[i]);
    }
  }
  return grid;
}

double elapsed_s(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

const std::vector<std::string> kNliDatasets{
    "MNLI-m", "MNLI-mm", "SNLI",  "BREAK-NLI", "HANS", "SNLI-hard", "STR-L", "STR-S",
    "STR-NE", "STR-O",   "STR-A", "STR-NU",    "SICK", "EQU-NAT",   "EQU-SYN"};

// Published normalized deviations (8 models x 15 datasets).
const std::map<std::string, std::vector<double>> kPublishedNli{
    {"ESIM", {1.00, 0.57, 0.73, 3.84, 0.82, 0.73, 0.77, 0.73, 3.57, 4.63, 2.58, 2.79, 1.47, 1.19, 2.70}},
    {"ESIM+ELMo", {1.00, 2.00, 1.50, 11.5, 4.55, 2.48, 3.10, 2.20, 7.50, 15.5, 6.38, 8.36, 2.28, 2.36, 8.45}},
    {"BERT-B", {1.00, 0.83, 0.48, 1.43, 10.95, 0.95, 1.39, 1.04, 2.70, 3.70, 1.46, 13.65, 1.48, 1.03, 13.17}},
    {"RoBERTa-B", {1.00, 1.46, 0.64, 2.82, 15.42, 1.47, 1.27, 2.17, 5.45, 8.45, 5.55, 25.75, 2.91, 2.29, 22.68}},
    {"XLNet-B", {1.00, 0.48, 0.37, 2.03, 6.60, 0.75, 0.59, 0.92, 1.96, 7.19, 2.07, 13.33, 0.82, 1.15, 13.33}},
    {"BERT-L", {1.00, 1.13, 0.56, 2.86, 18.47, 1.37, 1.31, 2.63, 9.19, 10.13, 2.39, 21.88, 1.71, 1.41, 20.36}},
    {"RoBERTa-L", {1.00, 0.88, 0.69, 1.03, 10.27, 1.01, 1.12, 1.20, 12.13, 10.13, 4.51, 27.38, 1.71, 1.21, 22.36}},
    {"XLNet-L", {1.00, 0.90, 0.69, 1.06, 10.67, 0.85, 0.89, 1.45, 16.21, 11.84, 4.26, 15.93, 1.50, 1.31, 19.93}}};

std::string join_datasets(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) {
    if (!out.empty()) out += ',';
    out += n;
  }
  return out;
}

}  // namespace

TEST_CASE("criterion 1: NLI normalized-deviation regression") {
  TempDir dir("acc1");
  const auto fixture = stabprobe::test::fixtures_dir() / "paper_appendix.csv";
  const auto start = std::chrono::steady_clock::now();
  const auto r = run({"normdev", "--fixture", fixture.string(), "--reference", "MNLI-m",
                      "--datasets", join_datasets(kNliDatasets), "--out-dir",
                      (dir.path() / "out").string(), "--format", "csv"});
  const double seconds = elapsed_s(start);
  REQUIRE(r.exit_code == 0);

  const auto grid =
      parse_grid(stabprobe::test::read_file(dir.path() / "out" / "normdev.csv"));
  std::size_t cells = 0, violations = 0;
  for (const auto& [model, published] : kPublishedNli) {
    REQUIRE(grid.count(model) == 1);
    for (std::size_t d = 0; d < kNliDatasets.size(); ++d) {
      REQUIRE(grid.at(model).count(kNliDatasets[d]) == 1);
      const double got = grid.at(model).at(kNliDatasets[d]);
      const double want = published[d];
      ++cells;
      if (std::fabs(got - want) > 0.3) {
        ++violations;
        std::printf("[acceptance]   cell %s/%s: computed %.2f, paper %.2f, |delta| %.2f > 0.3\n",
                    model.c_str(), kNliDatasets[d].c_str(), got, want, std::fabs(got - want));
      }
    }
  }
  // spot anchors
  const bool anchors = std::fabs(grid.at("BERT-B").at("HANS") - 10.95) <= 0.3 &&
                       std::fabs(grid.at("RoBERTa-L").at("STR-NU") - 27.38) <= 0.3 &&
                       std::fabs(grid.at("XLNet-B").at("SICK") - 0.82) <= 0.3;

  const bool pass = violations == 0 && anchors && seconds < 1.0 && cells == 120;
  std::ostringstream extra;
  extra << cells << " cells, " << violations << " outside +-0.3, anchors "
        << (anchors ? "ok" : "FAILED") << ", " << std::fixed << std::setprecision(2) << seconds
        << " s";
  report_line(1, "normdev NLI vs published table", pass, extra.str());
  CHECK(violations == 0);
  CHECK(anchors);
  CHECK(seconds < 1.0);
}

TEST_CASE("criterion 2: RC normalized-deviation regression") {
  TempDir dir("acc2");
  const auto fixture = stabprobe::test::fixtures_dir() / "paper_appendix.csv";
  const auto r = run({"normdev", "--fixture", fixture.string(), "--reference", "SQuAD",
                      "--datasets", "SQuAD,AddSent,AddOneSent", "--out-dir",
                      (dir.path() / "out").string(), "--format", "csv"});
  REQUIRE(r.exit_code == 0);
  const auto grid =
      parse_grid(stabprobe::test::read_file(dir.path() / "out" / "normdev.csv"));

  const std::map<std::string, std::map<std::string, double>> published{
      {"BERT-B", {{"SQuAD", 1.00}, {"AddSent", 2.61}, {"AddOneSent", 1.58}}},
      {"XLNet-B", {{"SQuAD", 1.00}, {"AddSent", 1.78}, {"AddOneSent", 1.00}}}};
  std::size_t violations = 0;
  double worst = 0.0;
  for (const auto& [model, row] : published) {
    REQUIRE(grid.count(model) == 1);
    for (const auto& [dataset, want] : row) {
      REQUIRE(grid.at(model).count(dataset) == 1);
      const double delta = std::fabs(grid.at(model).at(dataset) - want);
      worst = std::max(worst, delta);
      if (delta > 0.15) ++violations;
    }
  }
  std::ostringstream extra;
  extra << "worst |delta| " << std::fixed << std::setprecision(3) << worst << " (limit 0.15)";
  report_line(2, "normdev RC vs published table", violations == 0, extra.str());
  CHECK(violations == 0);
}

TEST_CASE("criterion 3: decomposition identity property") {
  std::mt19937_64 rng(2024);
  const auto start = std::chrono::steady_clock::now();
  double worst_identity = 0.0, worst_slow = 0.0;
  const int trials = 1000;
  for (int iter = 0; iter < trials; ++iter) {
    const std::size_t S = 2 + rng() % 19;   // [2, 20]
    const std::size_t N = 1 + rng() % 200;  // [1, 200]
    const bool binary = iter % 2 == 0;
    const auto slice =
        stabprobe::test::make_slice(S, N, stabprobe::test::random_scores(rng, S * N, binary));
    const auto fast = decompose_variance(slice, CovPath::fast);
    const auto slow = decompose_variance(slice, CovPath::pairwise);
    worst_identity = std::max(worst_identity,
                              std::fabs(slow.total_var - slow.idp_var - slow.cov_term));
    worst_identity =
        std::max(worst_identity, std::fabs(fast.total_var - fast.idp_var - fast.cov_term));
    worst_slow =
        std::max(worst_slow, std::fabs(slow.cov_term - (fast.total_var - fast.idp_var)));
  }
  const double seconds = elapsed_s(start);
  const bool pass = worst_identity <= 1e-12 && worst_slow <= 1e-12 && seconds < 10.0;
  std::ostringstream extra;
  extra << trials << " matrices, worst identity " << std::scientific << std::setprecision(2)
        << worst_identity << ", worst slow-vs-fast " << worst_slow << ", " << std::fixed
        << std::setprecision(2) << seconds << " s";
  report_line(3, "Var(Acc) = idp + cov identity", pass, extra.str());
  CHECK(worst_identity <= 1e-12);
  CHECK(worst_slow <= 1e-12);
  CHECK(seconds < 10.0);
}

TEST_CASE("criterion 4: synthetic oracle convergence") {
  const auto start = std::chrono::steady_clock::now();
  std::size_t checked = 0, violations = 0;
  VarianceDecomposition singleton_emp{}, block50_emp{};
  for (const auto& entry :
       std::filesystem::directory_iterator(stabprobe::test::fixtures_dir() / "synth")) {
    if (entry.path().extension() != ".json") continue;
    const auto spec = load_block_model_spec(entry.path());
    REQUIRE(spec.n_runs == 2000);
    const auto predicted = predicted_decomposition(spec);
    const auto empirical = decompose_variance(final_slice(generate(spec)));
    ++checked;

    auto check_term = [&](const char* term, double emp, double pred) {
      // zero-covariance specs: bound by sampling noise instead of a ratio
      const bool ok = pred == 0.0
                          ? std::fabs(emp) < 3.0 * std::sqrt(2.0 / 2000.0) * empirical.idp_var
                          : std::fabs(emp - pred) / std::fabs(pred) <= 0.10;
      if (!ok) {
        ++violations;
        std::printf("[acceptance]   %s %s: empirical %.6g vs predicted %.6g\n",
                    spec.dataset_name.c_str(), term, emp, pred);
      }
    };
    check_term("total_var", empirical.total_var, predicted.total_var);
    check_term("idp_var", empirical.idp_var, predicted.idp_var);
    check_term("cov_term", empirical.cov_term, predicted.cov_term);

    if (spec.dataset_name == "singleton_q50_e10") singleton_emp = empirical;
    if (spec.dataset_name == "block50_q50_e10") block50_emp = empirical;
  }
  const double ratio = block50_emp.total_var / singleton_emp.total_var;
  const double idp_gap =
      std::fabs(block50_emp.idp_var - singleton_emp.idp_var) / singleton_emp.idp_var;
  const double seconds = elapsed_s(start);
  const bool contrast = ratio >= 5.0 && idp_gap <= 0.10;
  const bool pass = checked == 10 && violations == 0 && contrast && seconds < 60.0;
  std::ostringstream extra;
  extra << checked << " specs, " << violations << " term violations, total_var ratio "
        << std::fixed << std::setprecision(1) << ratio << "x (need >= 5), idp gap "
        << std::setprecision(3) << idp_gap << ", " << std::setprecision(2) << seconds << " s";
  report_line(4, "block-model decomposition oracle", pass, extra.str());
  CHECK(checked == 10);
  CHECK(violations == 0);
  CHECK(contrast);
  CHECK(seconds < 60.0);
}

TEST_CASE("criterion 5: spearman kernel vs brute-force oracle") {
  double worst = 0.0;
  std::size_t mismatches = 0, compared = 0;

  // all binary vector pairs up to length 10
  for (std::size_t len = 2; len <= 10; ++len) {
    std::vector<double> x(len), y(len);
    for (std::uint64_t a = 0; a < (1ULL << len); ++a) {
      for (std::size_t i = 0; i < len; ++i) x[i] = (a >> i) & 1 ? 1.0 : 0.0;
      for (std::uint64_t b = 0; b < (1ULL << len); ++b) {
        for (std::size_t i = 0; i < len; ++i) y[i] = (b >> i) & 1 ? 1.0 : 0.0;
        const auto fast = spearman(x, y);
        const auto oracle = reference::spearman(x, y);
        ++compared;
        if (fast.defined != oracle.defined) {
          ++mismatches;
        } else if (fast.defined) {
          worst = std::max(worst, std::fabs(fast.value - oracle.value));
        }
      }
    }
  }

  // random real vectors
  std::mt19937_64 rng(616);
  for (int iter = 0; iter < 10'000; ++iter) {
    const std::size_t len = 2 + rng() % 59;
    std::vector<double> x(len), y(len);
    for (std::size_t i = 0; i < len; ++i) {
      x[i] = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      y[i] = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    }
    const auto fast = spearman(x, y);
    const auto oracle = reference::spearman(x, y);
    ++compared;
    if (fast.defined != oracle.defined) {
      ++mismatches;
    } else if (fast.defined) {
      worst = std::max(worst, std::fabs(fast.value - oracle.value));
    }
  }

  const auto ties = spearman(std::vector<double>{1, 1, 0, 0}, std::vector<double>{1, 0, 1, 0});
  const bool tie_ok = ties.defined && ties.value == 0.0;
  const bool pass = mismatches == 0 && worst <= 1e-12 && tie_ok;
  std::ostringstream extra;
  extra << compared << " pairs, worst |delta| " << std::scientific << std::setprecision(2)
        << worst << ", tie case " << (tie_ok ? "exact" : "WRONG");
  report_line(5, "spearman vs rank-then-pearson oracle", pass, extra.str());
  CHECK(mismatches == 0);
  CHECK(worst <= 1e-12);
  CHECK(tie_ok);
}

TEST_CASE("criterion 6: duplication halves idp_var, keeps total_var") {
  std::mt19937_64 rng(77);
  double worst_idp = 0.0, worst_total = 0.0;
  for (int iter = 0; iter < 100; ++iter) {
    const std::size_t S = 2 + rng() % 9;
    const std::size_t N = 1 + rng() % 50;
    const auto scores = stabprobe::test::random_scores(rng, S * N, iter % 2);
    const auto base = decompose_variance(stabprobe::test::make_slice(S, N, scores));

    std::vector<double> doubled(S * 2 * N);
    for (std::size_t s = 0; s < S; ++s) {
      for (std::size_t i = 0; i < N; ++i) {
        doubled[s * 2 * N + i] = scores[s * N + i];
        doubled[s * 2 * N + N + i] = scores[s * N + i];
      }
    }
    const auto dup = decompose_variance(stabprobe::test::make_slice(S, 2 * N, doubled));
    worst_idp = std::max(worst_idp, std::fabs(dup.idp_var - base.idp_var / 2.0));
    worst_total = std::max(worst_total, std::fabs(dup.total_var - base.total_var));
  }
  const bool pass = worst_idp <= 1e-14 && worst_total <= 1e-12;
  std::ostringstream extra;
  extra << "100 tensors, worst idp halving error " << std::scientific << std::setprecision(2)
        << worst_idp << ", worst total drift " << worst_total;
  report_line(6, "example-duplication property", pass, extra.str());
  CHECK(worst_idp <= 1e-14);
  CHECK(worst_total <= 1e-12);
}

TEST_CASE("criterion 7: re-split selection beats external selection") {
  int wins = 0;
  const int trials = 100;
  for (int seed = 0; seed < trials; ++seed) {
    BlockModelSpec target_spec;
    target_spec.n_examples = 100;
    target_spec.block_sizes.assign(5, 20);
    target_spec.n_runs = 10;
    target_spec.n_checkpoints = 10;
    target_spec.block_base_rate = 0.5;
    target_spec.flip_noise = 0.05;
    target_spec.rng_seed = 9000 + static_cast<std::uint64_t>(seed);
    target_spec.dataset_name = "target";
    const auto target = generate(target_spec);

    BlockModelSpec selector_spec = target_spec;
    selector_spec.block_sizes.assign(100, 1);
    selector_spec.rng_seed = 50000 + static_cast<std::uint64_t>(seed);
    selector_spec.dataset_name = "external";
    const auto selector = generate(selector_spec);

    const auto split = make_split(target, 0.8, static_cast<std::uint64_t>(seed));
    const auto self_report = select_and_evaluate(target, split);
    const auto ext_report = select_and_evaluate(target, split, &selector);
    if (self_report.test_mean > ext_report.test_mean) ++wins;
  }
  const bool pass = wins >= 80;
  std::ostringstream extra;
  extra << wins << "/100 strict wins (need >= 80)";
  report_line(7, "self-dev beats external selector", pass, extra.str());
  CHECK(wins >= 80);
}

TEST_CASE("criterion 8: byte-identical outputs across reruns and thread counts") {
  TempDir dir("acc8");

  // shared inputs
  const auto target_spec = dir.path() / "target.json";
  stabprobe::test::write_file(target_spec, R"({
    "n_examples": 60, "block_size": 12, "n_runs": 6, "n_checkpoints": 8,
    "block_base_rate": 0.5, "flip_noise": 0.1, "rng_seed": 41, "dataset_name": "target"
  })");
  const auto external_spec = dir.path() / "external.json";
  stabprobe::test::write_file(external_spec, R"({
    "n_examples": 50, "block_size": 1, "n_runs": 6, "n_checkpoints": 8,
    "block_base_rate": 0.5, "flip_noise": 0.1, "rng_seed": 43, "dataset_name": "external"
  })");
  REQUIRE(run({"synth", "--spec", target_spec.string(), "--out-jsonl",
               (dir.path() / "target.jsonl").string(), "--out-tensor",
               (dir.path() / "target.stp").string()})
              .exit_code == 0);
  REQUIRE(run({"synth", "--spec", external_spec.string(), "--out-tensor",
               (dir.path() / "external.stp").string()})
              .exit_code == 0);
  const auto fixture = stabprobe::test::fixtures_dir() / "paper_appendix.csv";

  // each command as a function of an output directory
  using Command = std::function<std::vector<std::string>(const std::string&)>;
  const std::vector<std::pair<std::string, Command>> commands{
      {"ingest",
       [&](const std::string& out) {
         std::filesystem::create_directories(out);
         return std::vector<std::string>{"ingest", "--in", (dir.path() / "target.jsonl").string(),
                                         "--out", out + "/t.stp", "--kind", "analysis"};
       }},
      {"decompose",
       [&](const std::string& out) {
         return std::vector<std::string>{"decompose", "--tensor",
                                         (dir.path() / "target.stp").string(), "--out-dir", out,
                                         "--format", "csv", "--slow-path"};
       }},
      {"normdev",
       [&](const std::string& out) {
         return std::vector<std::string>{"normdev", "--fixture", fixture.string(),
                                         "--reference", "MNLI-m", "--out-dir", out,
                                         "--format", "md"};
       }},
      {"traj",
       [&](const std::string& out) {
         return std::vector<std::string>{"traj", "--tensor", (dir.path() / "target.stp").string(),
                                         "--overlay-run", "run0", "--out-dir", out};
       }},
      {"corr-datasets",
       [&](const std::string& out) {
         return std::vector<std::string>{
             "corr-datasets", "--tensor", (dir.path() / "target.stp").string(), "--tensor",
             (dir.path() / "external.stp").string(), "--out-dir", out};
       }},
      {"corr-examples",
       [&](const std::string& out) {
         return std::vector<std::string>{"corr-examples", "--tensor",
                                         (dir.path() / "target.stp").string(), "--subsample",
                                         "40", "--subsample-seed", "5", "--out-dir", out};
       }},
      {"resplit",
       [&](const std::string& out) {
         return std::vector<std::string>{"resplit", "--tensor",
                                         (dir.path() / "target.stp").string(), "--selector",
                                         "self-dev", "--selector",
                                         (dir.path() / "external.stp").string(), "--out-dir", out,
                                         "--format", "csv"};
       }},
      {"synth",
       [&](const std::string& out) {
         std::filesystem::create_directories(out);
         return std::vector<std::string>{"synth", "--spec", target_spec.string(), "--out-jsonl",
                                         out + "/x.jsonl", "--out-tensor", out + "/x.stp"};
       }},
  };

  std::size_t command_failures = 0;
  for (const auto& [name, make_args] : commands) {
    const std::vector<std::pair<std::string, int>> variants{
        {"t1a", 1}, {"t1b", 1}, {"t8a", 8}, {"t8b", 8}};
    std::vector<std::filesystem::path> out_dirs;
    bool exit_ok = true;
    for (const auto& [tag, threads] : variants) {
      const auto out = dir.path() / (name + "_" + tag);
      auto args = make_args(out.string());
      args.push_back("--threads");
      args.push_back(std::to_string(threads));
      exit_ok = exit_ok && run(args).exit_code == 0;
      out_dirs.push_back(out);
    }

    bool identical = exit_ok;
    // gather relative file lists
    std::vector<std::string> files;
    for (const auto& entry : std::filesystem::directory_iterator(out_dirs[0])) {
      files.push_back(entry.path().filename().string());
    }
    std::sort(files.begin(), files.end());
    for (std::size_t v = 1; v < out_dirs.size() && identical; ++v) {
      for (const auto& file : files) {
        const auto a = out_dirs[0] / file;
        const auto b = out_dirs[v] / file;
        if (!std::filesystem::exists(b)) {
          identical = false;
          break;
        }
        if (file == "manifest.json") {
          auto ja = nlohmann::json::parse(stabprobe::test::read_file(a));
          auto jb = nlohmann::json::parse(stabprobe::test::read_file(b));
          ja.erase("generated_at");
          jb.erase("generated_at");
          if (ja != jb) {
            identical = false;
            break;
          }
        } else if (stabprobe::test::read_file(a) != stabprobe::test::read_file(b)) {
          identical = false;
          break;
        }
      }
    }
    if (!identical) {
      ++command_failures;
      std::printf("[acceptance]   command %s is not byte-deterministic\n", name.c_str());
    }
  }
#ifdef _OPENMP
  omp_set_num_threads(1);
#endif
  const bool pass = command_failures == 0;
  std::ostringstream extra;
  extra << commands.size() << " commands x {1, 8} threads x 2 runs"
        << (pass ? "" : (", " + std::to_string(command_failures) + " unstable"));
  report_line(8, "CLI determinism", pass, extra.str());
  CHECK(command_failures == 0);
}
