#include "uavfl/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "uavfl/errors.hpp"

namespace uavfl {
namespace {

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian platforms are not supported");

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) {
      std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
    }
    std::memcpy(&v, bytes, sizeof(T));
  }
  return v;
}

template <typename T>
void put(std::ostream& out, T v) {
  v = to_little(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw FormatError("checkpoint: unexpected end of file");
  return to_little(v);
}

constexpr std::uint64_t kMaxCount = std::uint64_t{1} << 32;

}  // namespace

void write_checkpoint(std::ostream& out,
                      const std::vector<CheckpointBlock>& blocks) {
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(blocks.size()));
  for (const auto& block : blocks) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(block.name.size()));
    out.write(block.name.data(),
              static_cast<std::streamsize>(block.name.size()));
    put<std::uint32_t>(out,
                       static_cast<std::uint32_t>(block.params.shape.size()));
    for (auto d : block.params.shape) put<std::uint64_t>(out, d);
    put<std::uint64_t>(out, block.params.values.size());
    for (double v : block.params.values) put<double>(out, v);
  }
  if (!out) throw FormatError("checkpoint: write failed");
}

std::vector<CheckpointBlock> read_checkpoint(std::istream& in) {
  char magic[sizeof(kCheckpointMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw FormatError("checkpoint: bad magic");
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw FormatError("checkpoint: unsupported version " +
                      std::to_string(version));
  }
  const auto count = get<std::uint32_t>(in);
  std::vector<CheckpointBlock> blocks;
  blocks.reserve(count);
  for (std::uint32_t b = 0; b < count; ++b) {
    CheckpointBlock block;
    const auto name_len = get<std::uint32_t>(in);
    if (name_len > 4096) throw FormatError("checkpoint: block name too long");
    block.name.resize(name_len);
    in.read(block.name.data(), name_len);
    const auto rank = get<std::uint32_t>(in);
    if (rank > 64) throw FormatError("checkpoint: rank too large");
    std::uint64_t product = 1;
    for (std::uint32_t r = 0; r < rank; ++r) {
      const auto d = get<std::uint64_t>(in);
      block.params.shape.push_back(static_cast<std::size_t>(d));
      product *= d;
    }
    const auto n = get<std::uint64_t>(in);
    if (n > kMaxCount) throw FormatError("checkpoint: block too large");
    if (rank > 0 && n != product) {
      throw FormatError("checkpoint: value count does not match shape");
    }
    block.params.values.resize(static_cast<std::size_t>(n));
    for (auto& v : block.params.values) v = get<double>(in);
    blocks.push_back(std::move(block));
  }
  return blocks;
}

void save_checkpoint(const std::filesystem::path& path,
                     const std::vector<CheckpointBlock>& blocks) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("checkpoint: cannot open " + path.string());
  write_checkpoint(out, blocks);
}

std::vector<CheckpointBlock> load_checkpoint(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("checkpoint: cannot open " + path.string());
  return read_checkpoint(in);
}

void dump_checkpoint_text(std::ostream& out,
                          const std::vector<CheckpointBlock>& blocks) {
  out << "uavfl-checkpoint v" << kCheckpointVersion << '\n';
  for (const auto& block : blocks) {
    out << "block " << block.name << '\n' << "shape";
    for (auto d : block.params.shape) out << ' ' << d;
    out << '\n' << "count " << block.params.values.size() << '\n';
    out << std::setprecision(17);
    for (double v : block.params.values) out << v << '\n';
  }
}

}  // namespace uavfl
