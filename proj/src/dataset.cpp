#include "gbst/dataset.hpp"

#include "gbst/error.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

namespace gbst {

std::size_t ResidualDataset::block_count() const {
  if (block_size <= 0) return 0;
  return samples.size() / (static_cast<std::size_t>(block_size) * block_size);
}

Block ResidualDataset::block(std::size_t index) const {
  const std::size_t n = static_cast<std::size_t>(block_size);
  Block b(block_size, block_size);
  const std::int16_t* p = samples.data() + index * n * n;
  for (int r = 0; r < block_size; ++r) {
    for (int c = 0; c < block_size; ++c) b(r, c) = *p++;
  }
  return b;
}

void ResidualDataset::append(const Block& block) {
  if (block.rows() != block_size || block.cols() != block_size) {
    throw Error(ErrorCode::InconsistentBlockSize,
                "block is " + std::to_string(block.rows()) + "x" + std::to_string(block.cols()) +
                    ", dataset expects " + std::to_string(block_size));
  }
  for (int r = 0; r < block_size; ++r) {
    for (int c = 0; c < block_size; ++c) {
      const double v = std::round(block(r, c));
      if (!(v >= -32768.0 && v <= 32767.0)) {
        throw Error(ErrorCode::Overflow, "sample " + std::to_string(block(r, c)) +
                                             " does not fit in 16 bits");
      }
      samples.push_back(static_cast<std::int16_t>(v));
    }
  }
}

namespace {

template <typename T>
void put_le(std::ostream& out, T value) {
  using U = std::make_unsigned_t<T>;
  U u = static_cast<U>(value);
  std::array<char, sizeof(T)> bytes{};
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<char>((u >> (8 * i)) & 0xFF);
  out.write(bytes.data(), bytes.size());
}

template <typename T>
T get_le(std::istream& in, const char* field) {
  std::array<unsigned char, sizeof(T)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
    throw Error(ErrorCode::FormatError, std::string("truncated GBSR stream reading ") + field);
  }
  std::make_unsigned_t<T> u = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    u |= static_cast<std::make_unsigned_t<T>>(bytes[i]) << (8 * i);
  }
  return static_cast<T>(u);
}

}  // namespace

void write_gbsr(std::ostream& out, const ResidualDataset& dataset) {
  out.write("GBSR", 4);
  put_le<std::uint8_t>(out, kGbsrVersion);
  put_le<std::uint16_t>(out, static_cast<std::uint16_t>(dataset.block_size));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(dataset.block_count()));
  for (std::int16_t s : dataset.samples) put_le<std::int16_t>(out, s);
  if (!out) throw Error(ErrorCode::IoError, "failed writing GBSR stream");
}

ResidualDataset read_gbsr(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (in.gcount() != 4 || std::string_view(magic.data(), 4) != "GBSR") {
    throw Error(ErrorCode::FormatError, "missing GBSR magic");
  }
  const auto version = get_le<std::uint8_t>(in, "version");
  if (version != kGbsrVersion) {
    throw Error(ErrorCode::FormatError, "unsupported GBSR version " + std::to_string(version));
  }
  ResidualDataset ds;
  ds.block_size = get_le<std::uint16_t>(in, "block size");
  if (ds.block_size < 1) throw Error(ErrorCode::FormatError, "block size 0");
  const auto count = get_le<std::uint32_t>(in, "block count");

  const std::size_t total = static_cast<std::size_t>(count) * ds.block_size * ds.block_size;
  ds.samples.resize(total);
  std::vector<unsigned char> raw(total * 2);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
    throw Error(ErrorCode::FormatError, "truncated GBSR payload: expected " +
                                            std::to_string(raw.size()) + " bytes, got " +
                                            std::to_string(in.gcount()));
  }
  for (std::size_t i = 0; i < total; ++i) {
    ds.samples[i] = static_cast<std::int16_t>(
        static_cast<std::uint16_t>(raw[2 * i] | (static_cast<unsigned>(raw[2 * i + 1]) << 8)));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorCode::FormatError, "trailing bytes after GBSR payload");
  }
  return ds;
}

void save_gbsr(const std::filesystem::path& path, const ResidualDataset& dataset) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  write_gbsr(out, dataset);
}

ResidualDataset load_gbsr(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return read_gbsr(in);
}

}  // namespace gbst
