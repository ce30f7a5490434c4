#include <gtest/gtest.h>

#include <zlib.h>

#include "nvc/bitstream.hpp"
#include "nvc/rate_control.hpp"

namespace nvc {
namespace {

StreamHeader sample_header(std::uint32_t frames) {
  StreamHeader h;
  h.width = 64;
  h.height = 48;
  h.mode = Precision::int16;
  h.frame_count = frames;
  h.base_qp_q8 = qp_to_q8(32);
  h.gop_offsets = QpSchedule::kDefaultOffsets;
  h.model_hash = 0xdeadbeef;
  return h;
}

Bitstream sample_stream(std::uint32_t frames) {
  Bitstream s;
  s.header = sample_header(frames);
  for (std::uint32_t i = 0; i < frames; ++i) {
    FrameChunk c;
    c.qp_q8 = static_cast<std::uint16_t>(256 * (30 + i));
    c.z.assign(5 + i, static_cast<std::uint8_t>(i));
    c.y1.assign(7 + 2 * i, 0xA0);
    c.y2.assign(i, 0x0B);
    s.chunks.push_back(c);
  }
  return s;
}

TEST(Bitstream, EmptyStreamIsHeaderOnly) {
  const Bitstream s = sample_stream(0);
  const auto bytes = write_stream(s);
  EXPECT_EQ(bytes.size(), kStreamHeaderBytes);
  EXPECT_EQ(read_stream(bytes), s);
}

TEST(Bitstream, FiveChunksRoundTrip) {
  const Bitstream s = sample_stream(5);
  const auto bytes = write_stream(s);
  std::size_t expected = kStreamHeaderBytes;
  for (const auto& c : s.chunks) expected += c.byte_size();
  EXPECT_EQ(bytes.size(), expected);
  EXPECT_EQ(read_stream(bytes), s);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "NVCR");
  EXPECT_EQ(bytes[4], kStreamVersion);
}

TEST(Bitstream, ChunkCountMustMatchHeader) {
  Bitstream s = sample_stream(3);
  s.chunks.pop_back();
  EXPECT_THROW(write_stream(s), std::invalid_argument);
}

TEST(Bitstream, TruncationNamesTheChunk) {
  const Bitstream s = sample_stream(5);
  const auto bytes = write_stream(s);
  std::size_t chunk3_start = kStreamHeaderBytes;
  for (int i = 0; i < 3; ++i) chunk3_start += s.chunks[static_cast<std::size_t>(i)].byte_size();
  for (std::size_t cut : {chunk3_start + 1, chunk3_start + kChunkHeaderBytes + 2}) {
    const std::vector<std::uint8_t> part(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(cut));
    try {
      read_stream(part);
      FAIL() << "no error at cut " << cut;
    } catch (const StreamError& e) {
      EXPECT_EQ(e.chunk_index(), 3u);
      EXPECT_NE(std::string(e.what()).find("chunk 3"), std::string::npos);
    }
  }
  const std::vector<std::uint8_t> header_only(bytes.begin(), bytes.begin() + 20);
  EXPECT_THROW(read_stream(header_only), FormatError);
}

TEST(Bitstream, HeaderErrors) {
  const auto bytes = write_stream(sample_stream(1));
  auto bad_magic = bytes;
  bad_magic[1] = 'X';
  EXPECT_THROW(read_stream(bad_magic), FormatError);
  auto bad_version = bytes;
  bad_version[4] = 9;
  EXPECT_THROW(read_stream(bad_version), FormatError);
  auto bad_mode = bytes;
  bad_mode[14] = 7;
  EXPECT_THROW(read_stream(bad_mode), FormatError);
  auto trailing = bytes;
  trailing.push_back(0);
  try {
    read_stream(trailing);
    FAIL();
  } catch (const StreamError&) {
    FAIL() << "trailing bytes are not a chunk error";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("trailing"), std::string::npos);
  }
}

TEST(Bitstream, ChunkQpRangeChecked) {
  Bitstream s = sample_stream(2);
  s.chunks[1].qp_q8 = 64 * 256;
  const auto bytes = write_stream(s);
  try {
    read_stream(bytes);
    FAIL();
  } catch (const StreamError& e) {
    EXPECT_EQ(e.chunk_index(), 1u);
  }
}

TEST(ModelHash, CrcOfWeightsThenBank) {
  CodecConfig cfg;
  cfg.latent_channels = 8;
  cfg.hyper_channels = 4;
  cfg.dc_blocks = 1;
  const ModelWeights w = generate_weights(cfg, 0);
  const RateModuleBank b = generate_bank(cfg, 0);
  auto joined = serialize_weights(w, false);
  const auto bank_bytes = serialize_bank(b);
  joined.insert(joined.end(), bank_bytes.begin(), bank_bytes.end() - 4);
  const auto ref = static_cast<std::uint32_t>(crc32(0L, joined.data(), static_cast<uInt>(joined.size())));
  EXPECT_EQ(model_hash(w, b), ref);
  EXPECT_NE(model_hash(generate_weights(cfg, 1), b), ref);
  EXPECT_NE(model_hash(w, generate_bank(cfg, 1)), ref);
}

}  // namespace
}  // namespace nvc
