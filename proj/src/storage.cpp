#include "stabprobe/storage.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "stabprobe/error.hpp"

namespace stabprobe {
namespace {

constexpr char kMagic[10] = {'S', 'T', 'A', 'B', 'P', 'R', 'O', 'B', 'E', '1'};

std::uint64_t fnv1a64(const unsigned char* data, std::size_t size, std::uint64_t hash) {
  for (std::size_t i = 0; i < size; ++i) {
    hash ^= data[i];
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;

class Writer {
 public:
  explicit Writer(std::ofstream& out) : out_(out) {}

  void bytes(const void* data, std::size_t size) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    hash_ = fnv1a64(static_cast<const unsigned char*>(data), size, hash_);
  }
  void u8(std::uint8_t v) { bytes(&v, 1); }
  void u64(std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(buf, 8);
  }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v) {
    std::uint64_t raw = std::bit_cast<std::uint64_t>(v);
    u64(raw);
  }
  void str(const std::string& s) {
    u64(s.size());
    bytes(s.data(), s.size());
  }
  std::uint64_t hash() const { return hash_; }

 private:
  std::ofstream& out_;
  std::uint64_t hash_ = kFnvOffset;
};

class Reader {
 public:
  explicit Reader(std::vector<unsigned char> data) : data_(std::move(data)) {}

  void bytes(void* out, std::size_t size) {
    if (pos_ + size > data_.size()) {
      fail(ErrorCode::FormatError, "truncated tensor file");
    }
    std::memcpy(out, data_.data() + pos_, size);
    pos_ += size;
  }
  std::uint8_t u8() {
    std::uint8_t v;
    bytes(&v, 1);
    return v;
  }
  std::uint64_t u64() {
    unsigned char buf[8];
    bytes(buf, 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
  }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const std::uint64_t len = u64();
    if (len > data_.size() - pos_) fail(ErrorCode::FormatError, "truncated tensor file");
    std::string s(reinterpret_cast<const char*>(data_.data() + pos_), len);
    pos_ += len;
    return s;
  }
  std::size_t pos() const { return pos_; }
  const std::vector<unsigned char>& data() const { return data_; }

 private:
  std::vector<unsigned char> data_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_tensor(const PredictionTensor& tensor, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  Writer w(out);
  w.bytes(kMagic, sizeof(kMagic));
  w.u8(tensor.meta().kind == DatasetKind::standard ? 0 : 1);
  w.str(tensor.meta().name);
  w.u64(tensor.run_count());
  for (const auto& r : tensor.runs()) w.str(r);
  w.u64(tensor.checkpoint_count());
  for (std::int64_t c : tensor.checkpoints()) w.i64(c);
  w.u64(tensor.example_count());
  for (const auto& e : tensor.example_ids()) w.str(e);
  for (double s : tensor.raw_scores()) w.f64(s);
  const std::uint64_t digest = w.hash();
  w.u64(digest);
  out.flush();
  if (!out) fail(ErrorCode::IoError, "write failed: " + path.string());
}

PredictionTensor load_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  std::vector<unsigned char> data((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (data.size() < sizeof(kMagic) + 8) fail(ErrorCode::FormatError, "truncated tensor file");

  // Trailing 8 bytes are the FNV-1a digest of everything before them.
  const std::size_t body = data.size() - 8;
  const std::uint64_t expected = fnv1a64(data.data(), body, kFnvOffset);
  std::uint64_t stored = 0;
  for (int i = 0; i < 8; ++i) stored |= static_cast<std::uint64_t>(data[body + i]) << (8 * i);
  if (stored != expected) fail(ErrorCode::FormatError, "tensor file checksum mismatch");

  Reader r(std::move(data));
  char magic[sizeof(kMagic)];
  r.bytes(magic, sizeof(kMagic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    fail(ErrorCode::FormatError, "not a STABPROBE1 tensor file");
  }
  DatasetMeta meta;
  const std::uint8_t kind = r.u8();
  if (kind > 1) fail(ErrorCode::FormatError, "unknown dataset kind byte");
  meta.kind = kind == 0 ? DatasetKind::standard : DatasetKind::analysis;
  meta.name = r.str();

  const std::uint64_t S = r.u64();
  std::vector<std::string> runs(S);
  for (auto& run : runs) run = r.str();
  const std::uint64_t T = r.u64();
  std::vector<std::int64_t> checkpoints(T);
  for (auto& c : checkpoints) c = r.i64();
  const std::uint64_t N = r.u64();
  std::vector<std::string> example_ids(N);
  for (auto& e : example_ids) e = r.str();

  const std::uint64_t remaining = (r.data().size() - r.pos()) / 8;
  if (S == 0 || T == 0 || N == 0 || S > remaining || T > remaining / S ||
      N > remaining / (S * T)) {
    fail(ErrorCode::FormatError, "tensor file dimensions inconsistent with size");
  }
  std::vector<double> scores(S * T * N);
  for (auto& s : scores) s = r.f64();
  if (r.pos() != r.data().size() - 8) {
    fail(ErrorCode::FormatError, "trailing bytes in tensor file");
  }
  meta.size = N;
  return PredictionTensor(std::move(meta), std::move(runs), std::move(checkpoints),
                          std::move(example_ids), std::move(scores));
}

}  // namespace stabprobe
