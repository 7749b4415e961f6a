#pragma once

#include <filesystem>
#include <span>
#include <string>

#include <json.hpp>

namespace stabprobe::report {

std::string sha256_hex(std::span<const unsigned char> data);
std::string sha256_file(const std::filesystem::path& path);

/// Collects the provenance of one CLI invocation: inputs, configuration,
/// and each emitted file with its content hash. Written last, as
/// manifest.json in the output directory. The generated_at timestamp is
/// the only non-deterministic byte in a report bundle.
class ManifestBuilder {
 public:
  ManifestBuilder(std::string command, std::string tool_version);

  void add_input(const std::filesystem::path& path);
  void set_config(const std::string& key, const nlohmann::json& value);
  void add_output(const std::filesystem::path& path);

  void write(const std::filesystem::path& out_dir) const;
  nlohmann::json json() const { return doc_; }

 private:
  nlohmann::json doc_;
};

/// Writes a whole file and registers it with the manifest.
void emit_file(ManifestBuilder& manifest, const std::filesystem::path& path,
               const std::string& content);

}  // namespace stabprobe::report
