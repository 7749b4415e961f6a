#include "stabprobe/jsonl.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "stabprobe/error.hpp"

namespace stabprobe {
namespace {

struct Record {
  std::string run_id;
  std::int64_t checkpoint = 0;
  std::string dataset;
  std::string example_id;
  double score = 0.0;
};

Record parse_record(const std::string& line, std::size_t line_no) {
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::FormatError, "line " + std::to_string(line_no) + ": " + e.what());
  }
  if (!obj.is_object()) {
    fail(ErrorCode::FormatError, "line " + std::to_string(line_no) + ": not a JSON object");
  }
  Record r;
  try {
    r.run_id = obj.at("run_id").get<std::string>();
    r.checkpoint = obj.at("checkpoint").get<std::int64_t>();
    r.dataset = obj.at("dataset").get<std::string>();
    r.example_id = obj.at("example_id").get<std::string>();
    r.score = obj.at("score").get<double>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::FormatError, "line " + std::to_string(line_no) + ": " + e.what());
  }
  if (r.checkpoint < 0) {
    fail(ErrorCode::FormatError,
         "line " + std::to_string(line_no) + ": negative checkpoint " +
             std::to_string(r.checkpoint));
  }
  if (!(r.score >= 0.0 && r.score <= 1.0)) {
    fail(ErrorCode::ScoreOutOfRange,
         "line " + std::to_string(line_no) + ": score " + std::to_string(r.score) +
             " outside [0, 1]");
  }
  return r;
}

bool blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

template <typename Fn>
void for_each_record(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    fn(parse_record(line, line_no), line_no);
  }
}

}  // namespace

PredictionTensor ingest_jsonl(const std::filesystem::path& path,
                              const std::optional<DatasetMeta>& expected_meta) {
  // Pass 1: discover the axes.
  std::set<std::string> run_set;
  std::set<std::int64_t> checkpoint_set;
  std::set<std::string> example_set;
  std::string dataset_name;
  for_each_record(path, [&](const Record& r, std::size_t line_no) {
    if (dataset_name.empty()) {
      dataset_name = r.dataset;
    } else if (dataset_name != r.dataset) {
      fail(ErrorCode::MetaMismatch,
           "line " + std::to_string(line_no) + ": dataset '" + r.dataset +
               "' differs from '" + dataset_name + "'");
    }
    run_set.insert(r.run_id);
    checkpoint_set.insert(r.checkpoint);
    example_set.insert(r.example_id);
  });
  if (run_set.empty()) fail(ErrorCode::FormatError, path.string() + ": no records");

  std::vector<std::string> runs(run_set.begin(), run_set.end());
  std::vector<std::int64_t> checkpoints(checkpoint_set.begin(), checkpoint_set.end());
  std::vector<std::string> example_ids(example_set.begin(), example_set.end());

  std::unordered_map<std::string, std::size_t> run_index;
  for (std::size_t i = 0; i < runs.size(); ++i) run_index[runs[i]] = i;
  std::unordered_map<std::int64_t, std::size_t> checkpoint_index;
  for (std::size_t i = 0; i < checkpoints.size(); ++i) checkpoint_index[checkpoints[i]] = i;
  std::unordered_map<std::string, std::size_t> example_index;
  for (std::size_t i = 0; i < example_ids.size(); ++i) example_index[example_ids[i]] = i;

  const std::size_t T = checkpoints.size();
  const std::size_t N = example_ids.size();

  // Pass 2: fill the dense block; NaN marks still-unseen cells.
  std::vector<double> scores(runs.size() * T * N, std::numeric_limits<double>::quiet_NaN());
  for_each_record(path, [&](const Record& r, std::size_t line_no) {
    const std::size_t cell = (run_index[r.run_id] * T + checkpoint_index[r.checkpoint]) * N +
                             example_index[r.example_id];
    if (!std::isnan(scores[cell])) {
      fail(ErrorCode::DuplicateCell,
           "line " + std::to_string(line_no) + ": duplicate cell (" + r.run_id + ", " +
               std::to_string(r.checkpoint) + ", " + r.example_id + ")");
    }
    scores[cell] = r.score;
  });
  for (std::size_t s = 0; s < runs.size(); ++s) {
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t n = 0; n < N; ++n) {
        if (std::isnan(scores[(s * T + t) * N + n])) {
          fail(ErrorCode::MissingCell,
               "missing cell (" + runs[s] + ", " + std::to_string(checkpoints[t]) + ", " +
                   example_ids[n] + ")");
        }
      }
    }
  }

  DatasetMeta meta;
  meta.name = dataset_name;
  meta.size = N;
  meta.kind = DatasetKind::standard;
  if (expected_meta) {
    if (!expected_meta->name.empty() && expected_meta->name != dataset_name) {
      fail(ErrorCode::MetaMismatch,
           "expected dataset '" + expected_meta->name + "', file contains '" + dataset_name + "'");
    }
    if (expected_meta->size != 0 && expected_meta->size != N) {
      fail(ErrorCode::MetaMismatch,
           "expected " + std::to_string(expected_meta->size) + " examples, observed " +
               std::to_string(N));
    }
    meta.kind = expected_meta->kind;
  }
  return PredictionTensor(std::move(meta), std::move(runs), std::move(checkpoints),
                          std::move(example_ids), std::move(scores));
}

void write_jsonl(const PredictionTensor& tensor, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  for (std::size_t s = 0; s < tensor.run_count(); ++s) {
    for (std::size_t t = 0; t < tensor.checkpoint_count(); ++t) {
      for (std::size_t n = 0; n < tensor.example_count(); ++n) {
        nlohmann::json obj{{"run_id", tensor.runs()[s]},
                           {"checkpoint", tensor.checkpoints()[t]},
                           {"dataset", tensor.meta().name},
                           {"example_id", tensor.example_ids()[n]},
                           {"score", tensor.score(s, t, n)}};
        out << obj.dump() << '\n';
      }
    }
  }
  if (!out) fail(ErrorCode::IoError, "write failed: " + path.string());
}

}  // namespace stabprobe
