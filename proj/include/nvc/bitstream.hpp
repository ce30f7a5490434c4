#pragma once

// "NVCR" stream container. Layout (little-endian):
//
//   header   magic "NVCR", version u8, width u32, height u32, colorspace u8,
//            mode u8, frame_count u32, base_qp u16 (Q8), gop_offsets 8 x i8,
//            model hash u32, codec config (7 bytes)
//   chunk    qp u16 (Q8), len_z u32, len_y1 u32, len_y2 u32, then the three
//            range-coded payloads back to back
//
// Nothing may follow the last chunk.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "nvc/bytes.hpp"
#include "nvc/model.hpp"

namespace nvc {

class RateModuleBank;

inline constexpr std::uint8_t kStreamVersion = 1;
inline constexpr std::size_t kStreamHeaderBytes = 40;
inline constexpr std::size_t kChunkHeaderBytes = 14;

// Parse failure inside a frame chunk; chunk_index says which one.
class StreamError : public FormatError {
 public:
  StreamError(const std::string& what, std::size_t offset, std::size_t chunk_index)
      : FormatError("chunk " + std::to_string(chunk_index) + ": " + what, offset),
        chunk_index_(chunk_index) {}
  std::size_t chunk_index() const { return chunk_index_; }

 private:
  std::size_t chunk_index_;
};

struct StreamHeader {
  std::uint32_t width = 0;   // original, before padding
  std::uint32_t height = 0;
  Precision mode = Precision::int16;
  std::uint32_t frame_count = 0;
  std::uint16_t base_qp_q8 = 0;
  std::array<std::int8_t, 8> gop_offsets{};
  std::uint32_t model_hash = 0;
  CodecConfig config;

  friend bool operator==(const StreamHeader&, const StreamHeader&) = default;
};

struct FrameChunk {
  std::uint16_t qp_q8 = 0;
  std::vector<std::uint8_t> z;
  std::vector<std::uint8_t> y1;
  std::vector<std::uint8_t> y2;

  std::size_t byte_size() const { return kChunkHeaderBytes + z.size() + y1.size() + y2.size(); }
  friend bool operator==(const FrameChunk&, const FrameChunk&) = default;
};

struct Bitstream {
  StreamHeader header;
  std::vector<FrameChunk> chunks;

  friend bool operator==(const Bitstream&, const Bitstream&) = default;
};

void write_stream_header(ByteWriter& w, const StreamHeader& h);
void write_chunk(ByteWriter& w, const FrameChunk& c);
std::vector<std::uint8_t> write_stream(const Bitstream& stream);

// Throws FormatError for header problems and StreamError for chunk problems.
StreamHeader read_stream_header(ByteReader& r);
Bitstream read_stream(std::span<const std::uint8_t> bytes);

// CRC-32 over the real-valued weight file followed by the bank file without its
// CRC trailer.
std::uint32_t model_hash(const ModelWeights& weights, const RateModuleBank& bank);

}  // namespace nvc
