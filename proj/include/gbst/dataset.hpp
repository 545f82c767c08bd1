#pragma once

#include "gbst/spectral.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace gbst {

/// M square residual blocks of 16-bit samples, stored row-major block after
/// block. On disk ("GBSR" v1, little-endian):
///   "GBSR" | u8 version=1 | u16 N | u32 M | M*N*N x i16
struct ResidualDataset {
  int block_size = 0;
  std::vector<std::int16_t> samples;

  std::size_t block_count() const;
  Block block(std::size_t index) const;
  void append(const Block& block);  // rounds half away from zero; throws Overflow outside i16
};

inline constexpr std::uint8_t kGbsrVersion = 1;

void write_gbsr(std::ostream& out, const ResidualDataset& dataset);
ResidualDataset read_gbsr(std::istream& in);

void save_gbsr(const std::filesystem::path& path, const ResidualDataset& dataset);
ResidualDataset load_gbsr(const std::filesystem::path& path);

}  // namespace gbst
