#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <iostream>
#include <sstream>

#include <json.hpp>

#include "stabprobe/cli.hpp"
#include "stabprobe/storage.hpp"
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

std::string hand_example_jsonl() {
  std::string lines;
  const std::vector<std::pair<std::string, std::vector<double>>> runs{
      {"r0", {1, 0}}, {"r1", {0, 1}}};
  for (const auto& [run, scores] : runs) {
    for (std::size_t n = 0; n < scores.size(); ++n) {
      nlohmann::json obj{{"run_id", run},
                         {"checkpoint", 0},
                         {"dataset", "toy"},
                         {"example_id", "e" + std::to_string(n)},
                         {"score", scores[n]}};
      lines += obj.dump() + "\n";
    }
  }
  return lines;
}

}  // namespace

TEST_CASE("ingest then decompose reproduces the hand example row") {
  TempDir dir("cli_decompose");
  const auto log = dir.path() / "log.jsonl";
  stabprobe::test::write_file(log, hand_example_jsonl());

  auto r = run({"ingest", "--in", log.string(), "--out", (dir.path() / "t.stp").string()});
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("S=2 T=1 N=2") != std::string::npos);

  r = run({"decompose", "--tensor", (dir.path() / "t.stp").string(), "--out-dir",
           (dir.path() / "out").string(), "--format", "csv", "--slow-path"});
  CHECK(r.exit_code == 0);
  const auto csv = stabprobe::test::read_file(dir.path() / "out" / "decomposition.csv");
  CHECK(csv.find("toy,0.00,50.00,50.00,-0.25") != std::string::npos);
  CHECK(std::filesystem::exists(dir.path() / "out" / "manifest.json"));
}

TEST_CASE("validation failures exit 2 with a JSON diagnostic") {
  TempDir dir("cli_err");
  const auto log = dir.path() / "bad.jsonl";
  stabprobe::test::write_file(
      log, R"({"run_id": "r0", "checkpoint": 0, "dataset": "d", "example_id": "e", "score": 1.5})"
               "\n");
  const auto r =
      run({"ingest", "--in", log.string(), "--out", (dir.path() / "t.stp").string()});
  CHECK(r.exit_code == 2);
  const auto diag = nlohmann::json::parse(r.err);
  CHECK(diag["error"] == "ScoreOutOfRange");
}

TEST_CASE("usage errors exit 64, help exits 0") {
  CHECK(run({"decompose", "--no-such-flag"}).exit_code == 64);
  CHECK(run({"no-such-command"}).exit_code == 64);
  CHECK(run({"--help"}).exit_code == 0);
  CHECK(run({}).exit_code == 64);  // a subcommand is required
}

TEST_CASE("synth emits both formats consistently") {
  TempDir dir("cli_synth");
  const auto spec = dir.path() / "spec.json";
  stabprobe::test::write_file(spec, R"({
    "n_examples": 10, "block_size": 5, "n_runs": 3, "n_checkpoints": 2,
    "block_base_rate": 0.5, "flip_noise": 0.1, "rng_seed": 5, "dataset_name": "syn"
  })");
  const auto r = run({"synth", "--spec", spec.string(), "--out-jsonl",
                      (dir.path() / "syn.jsonl").string(), "--out-tensor",
                      (dir.path() / "syn.stp").string()});
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("predicted decomposition") != std::string::npos);

  auto ingest = run({"ingest", "--in", (dir.path() / "syn.jsonl").string(), "--out",
                     (dir.path() / "reingested.stp").string(), "--kind", "analysis"});
  CHECK(ingest.exit_code == 0);
  CHECK(load_tensor(dir.path() / "syn.stp") == load_tensor(dir.path() / "reingested.stp"));

  CHECK(run({"synth", "--spec", spec.string()}).exit_code == 2);  // no output chosen
}

TEST_CASE("normdev fixture mode computes the grid against the reference") {
  TempDir dir("cli_normdev");
  const auto fixture = dir.path() / "metrics.csv";
  stabprobe::test::write_file(fixture,
                              "model,dataset,mean,std,size,kind\n"
                              "m1,ref,80.00,0.50,1000,standard\n"
                              "m1,hard,60.00,1.00,4000,analysis\n"
                              "m2,ref,75.00,0.25,1000,standard\n");
  const auto r = run({"normdev", "--fixture", fixture.string(), "--reference", "ref",
                      "--out-dir", (dir.path() / "out").string(), "--format", "csv"});
  CHECK(r.exit_code == 0);
  const auto csv = stabprobe::test::read_file(dir.path() / "out" / "normdev.csv");
  // (1.00/0.50)*sqrt(4000/1000) = 4.00
  CHECK(csv.find("m1,1.00,4.00") != std::string::npos);
  CHECK(csv.find("m2,1.00,") != std::string::npos);  // m2 has no 'hard' row -> blank

  CHECK(run({"normdev", "--reference", "ref", "--out-dir", (dir.path() / "out2").string()})
            .exit_code == 2);  // neither fixture nor tensors
}

TEST_CASE("traj succeeds on a single-checkpoint tensor") {
  TempDir dir("cli_traj");
  const auto log = dir.path() / "log.jsonl";
  stabprobe::test::write_file(log, hand_example_jsonl());
  run({"ingest", "--in", log.string(), "--out", (dir.path() / "t.stp").string()});

  const auto r = run({"traj", "--tensor", (dir.path() / "t.stp").string(), "--out-dir",
                      (dir.path() / "out").string()});
  CHECK(r.exit_code == 0);
  const auto svg = stabprobe::test::read_file(dir.path() / "out" / "traj.svg");
  CHECK(svg.find("<svg") == 0);
  CHECK(svg.find("circle") != std::string::npos);
  CHECK(std::filesystem::exists(dir.path() / "out" / "traj.csv"));
}

TEST_CASE("corr-examples emits matrix, blocks, top pairs") {
  TempDir dir("cli_corr");
  const auto spec = dir.path() / "spec.json";
  stabprobe::test::write_file(spec, R"({
    "n_examples": 12, "block_size": 4, "n_runs": 6, "n_checkpoints": 5,
    "block_base_rate": 0.5, "flip_noise": 0.0, "rng_seed": 8, "dataset_name": "blocks"
  })");
  run({"synth", "--spec", spec.string(), "--out-tensor", (dir.path() / "t.stp").string()});

  const auto r = run({"corr-examples", "--tensor", (dir.path() / "t.stp").string(), "--out-dir",
                      (dir.path() / "out").string(), "--tau", "0.9", "--top-pairs", "3"});
  CHECK(r.exit_code == 0);

  // noise-free blocks of 4 are perfectly coherent: three blocks survive
  std::istringstream blocks(stabprobe::test::read_file(dir.path() / "out" / "blocks.jsonl"));
  std::string line;
  std::size_t block_count = 0;
  while (std::getline(blocks, line)) {
    const auto obj = nlohmann::json::parse(line);
    CHECK(obj["members"].size() == 4);
    CHECK(obj["mean_corr"] == 1.0);
    ++block_count;
  }
  CHECK(block_count == 3);

  const auto pairs = stabprobe::test::read_file(dir.path() / "out" / "top_pairs.csv");
  CHECK(pairs.find("example_a,example_b,covariance,spearman") == 0);
  CHECK(std::filesystem::exists(dir.path() / "out" / "corr_examples.svg"));
  CHECK(std::filesystem::exists(dir.path() / "out" / "corr_examples.csv"));
}

TEST_CASE("corr-datasets emits the matrix with unit diagonal") {
  TempDir dir("cli_corrd");
  const auto spec = dir.path() / "spec.json";
  stabprobe::test::write_file(spec, R"({
    "n_examples": 8, "block_size": 2, "n_runs": 4, "n_checkpoints": 6,
    "block_base_rate": 0.5, "flip_noise": 0.2, "rng_seed": 13, "dataset_name": "a"
  })");
  run({"synth", "--spec", spec.string(), "--out-tensor", (dir.path() / "a.stp").string()});
  stabprobe::test::write_file(spec, R"({
    "n_examples": 8, "block_size": 2, "n_runs": 4, "n_checkpoints": 6,
    "block_base_rate": 0.5, "flip_noise": 0.2, "rng_seed": 14, "dataset_name": "b"
  })");
  run({"synth", "--spec", spec.string(), "--out-tensor", (dir.path() / "b.stp").string()});

  const auto r = run({"corr-datasets", "--tensor", (dir.path() / "a.stp").string(), "--tensor",
                      (dir.path() / "b.stp").string(), "--out-dir",
                      (dir.path() / "out").string()});
  CHECK(r.exit_code == 0);
  const auto csv = stabprobe::test::read_file(dir.path() / "out" / "corr_datasets.csv");
  CHECK(csv.find("dataset,a,b") == 0);
  CHECK(csv.find("a,1,") != std::string::npos);
  CHECK(std::filesystem::exists(dir.path() / "out" / "corr_datasets_undefined.csv"));
  CHECK(std::filesystem::exists(dir.path() / "out" / "corr_datasets.svg"));
}

TEST_CASE("resplit reports self-dev and external selectors") {
  TempDir dir("cli_resplit");
  const auto spec = dir.path() / "spec.json";
  stabprobe::test::write_file(spec, R"({
    "n_examples": 40, "block_size": 8, "n_runs": 5, "n_checkpoints": 6,
    "block_base_rate": 0.5, "flip_noise": 0.1, "rng_seed": 17, "dataset_name": "target"
  })");
  run({"synth", "--spec", spec.string(), "--out-tensor", (dir.path() / "t.stp").string()});
  stabprobe::test::write_file(spec, R"({
    "n_examples": 30, "block_size": 1, "n_runs": 5, "n_checkpoints": 6,
    "block_base_rate": 0.5, "flip_noise": 0.1, "rng_seed": 18, "dataset_name": "ext"
  })");
  run({"synth", "--spec", spec.string(), "--out-tensor", (dir.path() / "ext.stp").string()});

  const auto r = run({"resplit", "--tensor", (dir.path() / "t.stp").string(), "--selector",
                      "self-dev", "--selector", (dir.path() / "ext.stp").string(), "--out-dir",
                      (dir.path() / "out").string(), "--format", "csv", "--repeat", "2"});
  CHECK(r.exit_code == 0);
  const auto csv = stabprobe::test::read_file(dir.path() / "out" / "resplit.csv");
  CHECK(csv.find("selector,split_seed,test_mean_pp,test_std_pp") == 0);
  CHECK(csv.find("self-dev,0,") != std::string::npos);
  CHECK(csv.find("ext,1,") != std::string::npos);
  CHECK(csv.find("self-dev (over 2 splits)") != std::string::npos);
}

TEST_CASE("report bytes are identical across reruns") {
  TempDir dir("cli_det");
  const auto log = dir.path() / "log.jsonl";
  stabprobe::test::write_file(log, hand_example_jsonl());
  run({"ingest", "--in", log.string(), "--out", (dir.path() / "t.stp").string()});

  for (const char* out : {"out1", "out2"}) {
    run({"decompose", "--tensor", (dir.path() / "t.stp").string(), "--out-dir",
         (dir.path() / out).string(), "--format", "md"});
  }
  CHECK(stabprobe::test::read_file(dir.path() / "out1" / "decomposition.md") ==
        stabprobe::test::read_file(dir.path() / "out2" / "decomposition.md"));
}
