#pragma once

#include <string>
#include <vector>

namespace stabprobe::report {

/// Rectangular table with pre-formatted cells; rendered as Markdown or CSV.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

std::string to_markdown(const Table& table);
std::string to_csv(const Table& table);

/// Fixed-point formatting used across all emitted reports so identical
/// values always produce identical bytes.
std::string format_fixed(double value, int decimals);

/// Shortest-roundtrip formatting for raw values (matrix CSVs, manifests).
std::string format_full(double value);

std::string csv_escape(const std::string& cell);

}  // namespace stabprobe::report
