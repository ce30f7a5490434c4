#include <gtest/gtest.h>

#include <fstream>
#include <iterator>

#include "nvc/pipeline.hpp"
#include "test_support.hpp"

namespace nvc {
namespace {

std::vector<std::uint8_t> read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("missing fixture " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct Golden {
  CodecModel model{load_weights(test::fixture("weights_seed0.nvcw"))};
  RateModuleBank bank = load_bank(test::fixture("bank_seed0.nvcb"));
  std::vector<Frame> video = load_yuv420(test::fixture("noise_64x64_8f.yuv"), 64, 64, 8);
  std::vector<std::uint8_t> stream = read_file(test::fixture("golden_int16_qp32.nvcr"));
  std::vector<Frame> recon = load_yuv420(test::fixture("golden_int16_qp32_recon.yuv"), 64, 64, 8);
};

const Golden& golden() {
  static const Golden g;
  return g;
}

TEST(Fixtures, SeedZeroFilesAreReproducible) {
  const CodecConfig config;
  EXPECT_EQ(serialize_weights(generate_weights(config, 0)), read_file(test::fixture("weights_seed0.nvcw")));
  EXPECT_EQ(serialize_bank(generate_bank(config, 0)), read_file(test::fixture("bank_seed0.nvcb")));
  EXPECT_EQ(golden().video, seeded_noise_video(Colorspace::yuv420, 64, 64, 8, 0));
}

TEST(Fixtures, GoldenStreamDecodesBitExactly) {
  for (auto par : {Parallelism::serial, Parallelism::overlapped}) {
    const DecodeResult r = decode_video(golden().stream, golden().model, golden().bank, DecodeSettings{par, 2, {}});
    EXPECT_EQ(r.frames, golden().recon) << to_string(par);
  }
}

TEST(Fixtures, GoldenStreamReEncodesIdentically) {
  CodecSettings s;
  s.mode = Precision::int16;
  s.schedule.base_qp = 32;
  EXPECT_EQ(encode_video(golden().video, golden().model, golden().bank, s).bytes, golden().stream);
}

TEST(Fixtures, TruncatedStreamNamesChunkTwo) {
  try {
    decode_video(read_file(test::fixture("truncated_chunk2.nvcr")), golden().model, golden().bank);
    FAIL();
  } catch (const StreamError& e) {
    EXPECT_EQ(e.chunk_index(), 2u);
  }
}

TEST(Fixtures, BadMagicRejected) {
  try {
    decode_video(read_file(test::fixture("bad_magic.nvcr")), golden().model, golden().bank);
    FAIL();
  } catch (const StreamError&) {
    FAIL() << "header error reported as chunk error";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 0u);
    EXPECT_NE(std::string(e.what()).find("magic"), std::string::npos);
  }
}

TEST(Fixtures, TrailingByteRejected) {
  EXPECT_THROW(decode_video(read_file(test::fixture("trailing_byte.nvcr")), golden().model, golden().bank),
               FormatError);
}

TEST(Fixtures, PaddedPayloadFailsAtChunkFourOnly) {
  const auto bytes = read_file(test::fixture("padded_payload_chunk4.nvcr"));
  try {
    decode_video(bytes, golden().model, golden().bank);
    FAIL();
  } catch (const StreamError& e) {
    EXPECT_EQ(e.chunk_index(), 4u);
  }
  // The frames before the damaged chunk decode exactly, and after skipping it
  // the session still accepts the remaining valid chunks.
  const Bitstream s = read_stream(bytes);
  Decoder dec(golden().model, golden().bank, Precision::int16);
  for (std::size_t t = 0; t < 4; ++t) EXPECT_EQ(dec.decode_frame(s.chunks[t], 64, 64), golden().recon[t]);
  const auto before = dec.latent();
  EXPECT_THROW(dec.decode_frame(s.chunks[4], 64, 64), EntropyError);
  EXPECT_EQ(dec.latent(), before);
  EXPECT_NO_THROW(dec.decode_frame(s.chunks[5], 64, 64));
}

}  // namespace
}  // namespace nvc
