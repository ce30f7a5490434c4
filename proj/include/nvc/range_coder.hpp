#pragma once

// Byte-renormalizing range coder (56-bit window) over 16-bit cumulative
// frequency tables. Carry propagation follows the classic cache/carry scheme,
// so the emitted stream is a plain big-endian byte sequence with no length
// prefix.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nvc {

class EntropyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Alphabet {
  std::int32_t min = 0;
  std::int32_t max = 0;

  std::size_t size() const { return static_cast<std::size_t>(max - min + 1); }
  bool contains(std::int32_t s) const { return s >= min && s <= max; }
  std::int32_t clamp(std::int32_t s) const { return s < min ? min : (s > max ? max : s); }
  friend bool operator==(const Alphabet&, const Alphabet&) = default;
};

class CdfTable {
 public:
  static constexpr std::uint32_t kPrecisionBits = 16;
  static constexpr std::uint32_t kTotal = 1u << kPrecisionBits;

  CdfTable() = default;
  // Frequencies must each be >= 1 and sum to kTotal.
  CdfTable(std::int32_t min_symbol, std::span<const std::uint32_t> freqs);

  Alphabet alphabet() const {
    return {min_symbol_, min_symbol_ + static_cast<std::int32_t>(cum_.size()) - 2};
  }
  std::size_t size() const { return cum_.size() - 1; }
  std::uint32_t low(std::size_t i) const { return cum_[i]; }
  std::uint32_t freq(std::size_t i) const { return cum_[i + 1] - cum_[i]; }
  std::span<const std::uint32_t> cumulative() const { return cum_; }
  std::vector<std::uint32_t> frequencies() const;
  double probability(std::int32_t symbol) const {
    return static_cast<double>(freq(static_cast<std::size_t>(symbol - min_symbol_))) / kTotal;
  }

  // Index i with cum[i] <= target < cum[i + 1].
  std::size_t find(std::uint32_t target) const;

  friend bool operator==(const CdfTable&, const CdfTable&) = default;

 private:
  std::int32_t min_symbol_ = 0;
  std::vector<std::uint32_t> cum_{0, kTotal};
};

class RangeEncoder {
 public:
  // Throws EntropyError if the symbol is outside the table's alphabet.
  void encode(std::int32_t symbol, const CdfTable& table);
  std::vector<std::uint8_t> finish();

 private:
  void shift_low();

  std::uint64_t low_ = 0;
  std::uint64_t range_ = (std::uint64_t{1} << 56) - 1;
  std::uint8_t cache_ = 0;
  std::uint64_t cache_size_ = 1;
  bool started_ = false;
  std::vector<std::uint8_t> out_;
};

class RangeDecoder {
 public:
  explicit RangeDecoder(std::span<const std::uint8_t> bytes);

  // Throws EntropyError on a truncated or inconsistent stream.
  std::int32_t decode(const CdfTable& table);
  std::size_t consumed() const { return pos_; }

 private:
  std::uint8_t next_byte();

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
  std::uint64_t range_ = (std::uint64_t{1} << 56) - 1;
  std::uint64_t code_ = 0;
};

// Codes symbols[i] with tables[table_index[i]].
std::vector<std::uint8_t> encode_symbols(std::span<const std::int32_t> symbols,
                                         std::span<const std::uint16_t> table_index,
                                         std::span<const CdfTable> tables);
// Decodes table_index.size() symbols; the stream must be consumed exactly.
std::vector<std::int32_t> decode_symbols(std::span<const std::uint8_t> bytes,
                                         std::span<const std::uint16_t> table_index,
                                         std::span<const CdfTable> tables);

}  // namespace nvc
