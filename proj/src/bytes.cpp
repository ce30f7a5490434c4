#include "nvc/bytes.hpp"

#include <fstream>
#include <iterator>

#include <zlib.h>

namespace nvc {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::uint32_t crc32_of(std::span<const std::uint8_t> data, std::uint32_t seed) {
  return static_cast<std::uint32_t>(
      ::crc32(seed, data.data(), static_cast<uInt>(data.size())));
}

}  // namespace nvc
