#include "stabprobe/report/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <vector>

#include <openssl/evp.h>

#include "stabprobe/error.hpp"

namespace stabprobe::report {

std::string sha256_hex(std::span<const unsigned char> data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    char buf[3];
    std::snprintf(buf, sizeof(buf), "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  std::vector<unsigned char> data((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return sha256_hex(data);
}

namespace {

std::string utc_now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

ManifestBuilder::ManifestBuilder(std::string command, std::string tool_version) {
  doc_["tool"] = "stabprobe";
  doc_["version"] = std::move(tool_version);
  doc_["command"] = std::move(command);
  doc_["generated_at"] = utc_now_iso8601();
  doc_["inputs"] = nlohmann::json::array();
  doc_["config"] = nlohmann::json::object();
  doc_["outputs"] = nlohmann::json::array();
}

void ManifestBuilder::add_input(const std::filesystem::path& path) {
  doc_["inputs"].push_back({{"path", path.string()}, {"sha256", sha256_file(path)}});
}

void ManifestBuilder::set_config(const std::string& key, const nlohmann::json& value) {
  doc_["config"][key] = value;
}

void ManifestBuilder::add_output(const std::filesystem::path& path) {
  doc_["outputs"].push_back({{"path", path.filename().string()},
                             {"sha256", sha256_file(path)},
                             {"bytes", std::filesystem::file_size(path)}});
}

void ManifestBuilder::write(const std::filesystem::path& out_dir) const {
  std::ofstream out(out_dir / "manifest.json", std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write manifest in " + out_dir.string());
  out << doc_.dump(2) << '\n';
}

void emit_file(ManifestBuilder& manifest, const std::filesystem::path& path,
               const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  out << content;
  out.flush();
  if (!out) fail(ErrorCode::IoError, "write failed: " + path.string());
  out.close();
  manifest.add_output(path);
}

}  // namespace stabprobe::report
