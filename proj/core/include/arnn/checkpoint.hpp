#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "arnn/mlp.hpp"
#include "arnn/model.hpp"

namespace arnn {

// Binary checkpoint container, all integers and doubles little-endian:
//
//   offset  size  field
//   0       8     magic "ARNNCKPT"
//   8       4     u32 format version (1)
//   12      4     u32 payload type (1 = ARNN, 2 = MLP)
//   16      ...   payload
//   end-4   4     u32 CRC-32 (zlib polynomial) of every preceding byte
//
// ARNN payload: u64 n, f64 W, n*n f64 W+ row-major, n*n f64 w+ row-major.
// MLP payload:  u32 layer count L, L x u64 layer sizes, then for each of the
//               L-1 transitions the weight matrix (rows = next layer size)
//               row-major followed by the bias vector.

inline constexpr std::uint32_t kCheckpointVersion = 1;

enum class CheckpointType : std::uint32_t { Arnn = 1, Mlp = 2 };

std::vector<std::uint8_t> encode_checkpoint(const ArnnModel& model);
std::vector<std::uint8_t> encode_checkpoint(const MlpModel& model);

/// Reads the header only; throws ParseError on bad magic, version or checksum.
CheckpointType checkpoint_type(std::span<const std::uint8_t> bytes);

ArnnModel decode_arnn_checkpoint(std::span<const std::uint8_t> bytes);
MlpModel decode_mlp_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::filesystem::path& path, const ArnnModel& model);
void save_checkpoint(const std::filesystem::path& path, const MlpModel& model);
ArnnModel load_arnn_checkpoint(const std::filesystem::path& path);
MlpModel load_mlp_checkpoint(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

/// zlib CRC-32 of a byte range.
std::uint32_t crc32_of(std::span<const std::uint8_t> bytes);

}  // namespace arnn
