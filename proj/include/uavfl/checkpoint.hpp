#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "uavfl/model_params.hpp"

namespace uavfl {

/// Binary parameter checkpoint, version 1. All integers and reals are
/// little-endian.
///
///   magic        8 bytes  "UAVFLCKP"
///   version      u32      1
///   block_count  u32
///   per block:
///     name_len   u32, name bytes (UTF-8, no terminator)
///     rank       u32, dims u64[rank]
///     count      u64      number of f64 values (product of dims)
///     values     f64[count]
struct CheckpointBlock {
  std::string name;
  ModelParams params;
};

inline constexpr char kCheckpointMagic[8] = {'U', 'A', 'V', 'F',
                                             'L', 'C', 'K', 'P'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(std::ostream& out,
                      const std::vector<CheckpointBlock>& blocks);
std::vector<CheckpointBlock> read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path,
                     const std::vector<CheckpointBlock>& blocks);
std::vector<CheckpointBlock> load_checkpoint(const std::filesystem::path& path);

/// Text form: one "block <name>" line, one "shape d0 d1 ..." line, then one
/// value per line printed with 17 significant digits.
void dump_checkpoint_text(std::ostream& out,
                          const std::vector<CheckpointBlock>& blocks);

}  // namespace uavfl
