#pragma once

// Binary checkpoint layout (all integers little-endian):
//
//   "CABERT01"                              8-byte magic
//   u32 n, n bytes                          JSON config record
//   per parameter, in CaBertModel::parameters() order:
//     u32 n, n bytes                        name
//     u32 rank, rank x u32                  dimensions
//     numel x f32                           values
//   u32                                     CRC-32 of every preceding byte

#include <cstdint>
#include <filesystem>
#include <string>

#include "ctxgate/model.hpp"

namespace ctxgate {

inline constexpr char kCheckpointMagic[8] = {'C', 'A', 'B', 'E', 'R', 'T', '0', '1'};

/// Serving metadata stored in the config record next to the model shape.
struct CheckpointInfo {
  std::string vocab_file;        // relative to the checkpoint's directory
  std::size_t context_turns = 0; // prior turns the model was trained with

  friend bool operator==(const CheckpointInfo&, const CheckpointInfo&) = default;
};

struct Checkpoint {
  CaBertModel<float> model;
  CheckpointInfo info;
  std::uint32_t checksum = 0;

  /// Stable identifier for the weights: the checksum as 8 lowercase hex digits.
  std::string model_id() const;
};

void save_checkpoint(const CaBertModel<float>& model, const std::filesystem::path& path,
                     const CheckpointInfo& info = {});

Checkpoint read_checkpoint(const std::filesystem::path& path);

inline CaBertModel<float> load_checkpoint(const std::filesystem::path& path) {
  return read_checkpoint(path).model;
}

/// Same format, in memory.
std::string serialize_checkpoint(const CaBertModel<float>& model, const CheckpointInfo& info = {});
Checkpoint parse_checkpoint(const std::string& bytes);

std::uint32_t crc32_of(const void* data, std::size_t size);

}  // namespace ctxgate
