#include "arnn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include <zlib.h>

#include "arnn/errors.hpp"

namespace arnn {

namespace {

constexpr char kMagic[8] = {'A', 'R', 'N', 'N', 'C', 'K', 'P', 'T'};
constexpr std::size_t kHeaderSize = 16;
constexpr std::size_t kTrailerSize = 4;

class Writer {
 public:
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
  void raw(const char* p, std::size_t len) { bytes_.insert(bytes_.end(), p, p + len); }
  void matrix(const Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        f64(m(i, j));
      }
    }
  }
  std::vector<std::uint8_t> finish() {
    const auto crc = crc32_of(bytes_);
    u32(crc);
    return std::move(bytes_);
  }

 private:
  void put(std::uint64_t v, int width) {
    for (int b = 0; b < width; ++b) {
      bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
    }
  }
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  double f64() { return std::bit_cast<double>(get(8)); }
  Matrix matrix(Eigen::Index rows, Eigen::Index cols) {
    need(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols) * 8);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) {
        m(i, j) = f64();
      }
    }
    return m;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t len) const {
    if (bytes_.size() - pos_ < len) {
      throw ParseError("checkpoint truncated", 0);
    }
  }
  std::uint64_t get(int width) {
    need(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int b = 0; b < width; ++b) {
      v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * b);
    }
    return v;
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

Writer start(CheckpointType type) {
  Writer w;
  w.raw(kMagic, sizeof kMagic);
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(type));
  return w;
}

// Validates header and checksum, returns a reader over the payload.
Reader open_payload(std::span<const std::uint8_t> bytes, CheckpointType expected) {
  const auto type = checkpoint_type(bytes);
  if (type != expected) {
    throw ParseError("checkpoint holds a different model type", 0);
  }
  return Reader(bytes.subspan(kHeaderSize, bytes.size() - kHeaderSize - kTrailerSize));
}

// Upper bound on dimensions read from a file.
constexpr std::uint64_t kMaxDimension = 1u << 16;

}  // namespace

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  std::size_t offset = 0;
  while (offset < bytes.size()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - offset, 1u << 30));
    crc = crc32(crc, bytes.data() + offset, chunk);
    offset += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

std::vector<std::uint8_t> encode_checkpoint(const ArnnModel& model) {
  auto w = start(CheckpointType::Arnn);
  w.u64(model.size());
  w.f64(model.total_rate());
  w.matrix(model.wx_plus());
  w.matrix(model.wy_plus());
  return w.finish();
}

std::vector<std::uint8_t> encode_checkpoint(const MlpModel& model) {
  model.validate();
  auto w = start(CheckpointType::Mlp);
  const auto sizes = model.layer_sizes();
  w.u32(static_cast<std::uint32_t>(sizes.size()));
  for (auto s : sizes) {
    w.u64(s);
  }
  for (std::size_t k = 0; k < model.weights.size(); ++k) {
    w.matrix(model.weights[k]);
    for (Eigen::Index i = 0; i < model.biases[k].size(); ++i) {
      w.f64(model.biases[k](i));
    }
  }
  return w.finish();
}

CheckpointType checkpoint_type(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderSize + kTrailerSize) {
    throw ParseError("checkpoint too short", 0);
  }
  if (std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw ParseError("not a checkpoint (bad magic)", 0);
  }
  const auto body = bytes.first(bytes.size() - kTrailerSize);
  Reader trailer(bytes.last(kTrailerSize));
  if (trailer.u32() != crc32_of(body)) {
    throw ParseError("checkpoint checksum mismatch", 0);
  }
  Reader header(bytes.subspan(8, 8));
  const auto version = header.u32();
  if (version != kCheckpointVersion) {
    throw ParseError("unsupported checkpoint version " + std::to_string(version), 0);
  }
  const auto type = header.u32();
  if (type != static_cast<std::uint32_t>(CheckpointType::Arnn) &&
      type != static_cast<std::uint32_t>(CheckpointType::Mlp)) {
    throw ParseError("unknown checkpoint payload type " + std::to_string(type), 0);
  }
  return static_cast<CheckpointType>(type);
}

ArnnModel decode_arnn_checkpoint(std::span<const std::uint8_t> bytes) {
  auto r = open_payload(bytes, CheckpointType::Arnn);
  const auto n = r.u64();
  if (n > kMaxDimension) {
    throw ParseError("checkpoint network size out of range", 0);
  }
  const double w = r.f64();
  const auto sn = static_cast<Eigen::Index>(n);
  Matrix wx = r.matrix(sn, sn);
  Matrix wy = r.matrix(sn, sn);
  if (r.remaining() != 0) {
    throw ParseError("trailing bytes in ARNN checkpoint", 0);
  }
  return ArnnModel(w, std::move(wx), std::move(wy));
}

MlpModel decode_mlp_checkpoint(std::span<const std::uint8_t> bytes) {
  auto r = open_payload(bytes, CheckpointType::Mlp);
  const auto layers = r.u32();
  if (layers < 2 || layers > 64) {
    throw ParseError("checkpoint layer count out of range", 0);
  }
  std::vector<Eigen::Index> sizes;
  for (std::uint32_t k = 0; k < layers; ++k) {
    const auto s = r.u64();
    if (s == 0 || s > kMaxDimension) {
      throw ParseError("checkpoint layer size out of range", 0);
    }
    sizes.push_back(static_cast<Eigen::Index>(s));
  }
  MlpModel m;
  for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
    m.weights.push_back(r.matrix(sizes[k + 1], sizes[k]));
    Vector b(sizes[k + 1]);
    for (Eigen::Index i = 0; i < b.size(); ++i) {
      b(i) = r.f64();
    }
    m.biases.push_back(std::move(b));
  }
  if (r.remaining() != 0) {
    throw ParseError("trailing bytes in MLP checkpoint", 0);
  }
  m.validate();
  return m;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw IoError("write failed for " + path.string());
  }
}

void save_checkpoint(const std::filesystem::path& path, const ArnnModel& model) {
  write_file_bytes(path, encode_checkpoint(model));
}

void save_checkpoint(const std::filesystem::path& path, const MlpModel& model) {
  write_file_bytes(path, encode_checkpoint(model));
}

ArnnModel load_arnn_checkpoint(const std::filesystem::path& path) {
  return decode_arnn_checkpoint(read_file_bytes(path));
}

MlpModel load_mlp_checkpoint(const std::filesystem::path& path) {
  return decode_mlp_checkpoint(read_file_bytes(path));
}

}  // namespace arnn
