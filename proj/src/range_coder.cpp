#include "nvc/range_coder.hpp"

#include <algorithm>

namespace nvc {

namespace {
// 56-bit coding window with a carry bit above it; range stays >= 2^48, so
// the 16-bit frequency scaling loses at most 2^-32 of the range per symbol.
constexpr int kWindowBits = 56;
constexpr std::uint64_t kWindowMask = (std::uint64_t{1} << kWindowBits) - 1;
constexpr std::uint64_t kTop = std::uint64_t{1} << (kWindowBits - 8);
constexpr std::uint64_t kTopByteMask = kWindowMask >> 8;
// The encoder's first byte is always zero (the interval starts inside the
// window), so it is not emitted and the decoder starts with one byte less.
constexpr int kFlushBytes = kWindowBits / 8 + 1;
constexpr int kInitBytes = kWindowBits / 8;
}  // namespace

CdfTable::CdfTable(std::int32_t min_symbol, std::span<const std::uint32_t> freqs)
    : min_symbol_(min_symbol) {
  if (freqs.empty()) throw std::invalid_argument("cdf table needs at least one symbol");
  cum_.assign(freqs.size() + 1, 0);
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    if (freqs[i] == 0) {
      throw std::invalid_argument("cdf table symbol " + std::to_string(min_symbol + static_cast<int>(i)) +
                                  " has zero frequency");
    }
    total += freqs[i];
    if (total > kTotal) break;
    cum_[i + 1] = static_cast<std::uint32_t>(total);
  }
  if (total != kTotal) {
    throw std::invalid_argument("cdf table frequencies sum to " + std::to_string(total) +
                                ", expected " + std::to_string(kTotal));
  }
}

std::vector<std::uint32_t> CdfTable::frequencies() const {
  std::vector<std::uint32_t> f(size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = freq(i);
  return f;
}

std::size_t CdfTable::find(std::uint32_t target) const {
  const auto it = std::upper_bound(cum_.begin() + 1, cum_.end(), target);
  return static_cast<std::size_t>(it - cum_.begin()) - 1;
}

void RangeEncoder::encode(std::int32_t symbol, const CdfTable& table) {
  if (!table.alphabet().contains(symbol)) {
    throw EntropyError("symbol " + std::to_string(symbol) + " outside alphabet [" +
                       std::to_string(table.alphabet().min) + ", " +
                       std::to_string(table.alphabet().max) + "]");
  }
  const auto i = static_cast<std::size_t>(symbol - table.alphabet().min);
  const std::uint64_t r = range_ >> CdfTable::kPrecisionBits;
  low_ += r * table.low(i);
  range_ = r * table.freq(i);
  while (range_ < kTop) {
    range_ <<= 8;
    shift_low();
  }
}

void RangeEncoder::shift_low() {
  if ((low_ & kWindowMask) < (std::uint64_t{0xFF} << (kWindowBits - 8)) || (low_ >> kWindowBits) != 0) {
    const auto carry = static_cast<std::uint8_t>(low_ >> kWindowBits);
    std::uint8_t pending = cache_;
    do {
      if (started_) out_.push_back(static_cast<std::uint8_t>(pending + carry));
      started_ = true;
      pending = 0xFF;
    } while (--cache_size_ != 0);
    cache_ = static_cast<std::uint8_t>(low_ >> (kWindowBits - 8));
  }
  ++cache_size_;
  low_ = (low_ & kTopByteMask) << 8;
}

std::vector<std::uint8_t> RangeEncoder::finish() {
  for (int i = 0; i < kFlushBytes; ++i) shift_low();
  std::vector<std::uint8_t> out = std::move(out_);
  *this = RangeEncoder{};
  return out;
}

RangeDecoder::RangeDecoder(std::span<const std::uint8_t> bytes) : in_(bytes) {
  for (int i = 0; i < kInitBytes; ++i) code_ = (code_ << 8) | next_byte();
}

std::uint8_t RangeDecoder::next_byte() {
  if (pos_ >= in_.size()) {
    throw EntropyError("range decoder ran past the end of a " + std::to_string(in_.size()) +
                       "-byte stream");
  }
  return in_[pos_++];
}

std::int32_t RangeDecoder::decode(const CdfTable& table) {
  const std::uint64_t r = range_ >> CdfTable::kPrecisionBits;
  const std::uint64_t target = code_ / r;
  if (target >= CdfTable::kTotal) throw EntropyError("range decoder desynchronized");
  const std::size_t i = table.find(static_cast<std::uint32_t>(target));
  code_ -= r * table.low(i);
  range_ = r * table.freq(i);
  while (range_ < kTop) {
    code_ = (code_ << 8) | next_byte();
    range_ <<= 8;
  }
  return table.alphabet().min + static_cast<std::int32_t>(i);
}

std::vector<std::uint8_t> encode_symbols(std::span<const std::int32_t> symbols,
                                         std::span<const std::uint16_t> table_index,
                                         std::span<const CdfTable> tables) {
  if (symbols.size() != table_index.size()) {
    throw std::invalid_argument("encode_symbols: symbol and table index counts differ");
  }
  RangeEncoder enc;
  for (std::size_t i = 0; i < symbols.size(); ++i) enc.encode(symbols[i], tables[table_index[i]]);
  return enc.finish();
}

std::vector<std::int32_t> decode_symbols(std::span<const std::uint8_t> bytes,
                                         std::span<const std::uint16_t> table_index,
                                         std::span<const CdfTable> tables) {
  RangeDecoder dec(bytes);
  std::vector<std::int32_t> out(table_index.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = dec.decode(tables[table_index[i]]);
  if (dec.consumed() != bytes.size()) {
    throw EntropyError("stream has " + std::to_string(bytes.size() - dec.consumed()) +
                       " unused trailing bytes");
  }
  return out;
}

}  // namespace nvc
