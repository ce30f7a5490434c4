#include "nvc/bitstream.hpp"

#include "nvc/rate_control.hpp"

namespace nvc {

void write_stream_header(ByteWriter& w, const StreamHeader& h) {
  w.tag("NVCR");
  w.u8(kStreamVersion);
  w.u32(h.width);
  w.u32(h.height);
  w.u8(static_cast<std::uint8_t>(h.config.colorspace));
  w.u8(static_cast<std::uint8_t>(h.mode));
  w.u32(h.frame_count);
  w.u16(h.base_qp_q8);
  for (std::int8_t o : h.gop_offsets) w.i8(o);
  w.u32(h.model_hash);
  write_codec_config(w, h.config);
}

void write_chunk(ByteWriter& w, const FrameChunk& c) {
  w.u16(c.qp_q8);
  w.u32(static_cast<std::uint32_t>(c.z.size()));
  w.u32(static_cast<std::uint32_t>(c.y1.size()));
  w.u32(static_cast<std::uint32_t>(c.y2.size()));
  w.bytes(c.z);
  w.bytes(c.y1);
  w.bytes(c.y2);
}

std::vector<std::uint8_t> write_stream(const Bitstream& stream) {
  if (stream.chunks.size() != stream.header.frame_count) {
    throw std::invalid_argument("stream header announces " + std::to_string(stream.header.frame_count) +
                                " frames but holds " + std::to_string(stream.chunks.size()) + " chunks");
  }
  ByteWriter w;
  write_stream_header(w, stream.header);
  for (const FrameChunk& c : stream.chunks) write_chunk(w, c);
  return w.take();
}

StreamHeader read_stream_header(ByteReader& r) {
  r.expect_tag("NVCR", "stream");
  const std::size_t version_at = r.position();
  const std::uint8_t version = r.u8();
  if (version != kStreamVersion) {
    throw FormatError("unsupported stream version " + std::to_string(version), version_at);
  }
  StreamHeader h;
  h.width = r.u32();
  h.height = r.u32();
  const std::size_t cs_at = r.position();
  const std::uint8_t cs = r.u8();
  if (cs > 1) throw FormatError("unknown colorspace tag " + std::to_string(cs), cs_at);
  const std::size_t mode_at = r.position();
  const std::uint8_t mode = r.u8();
  if (mode > 1) throw FormatError("unknown mode tag " + std::to_string(mode), mode_at);
  h.mode = static_cast<Precision>(mode);
  h.frame_count = r.u32();
  const std::size_t qp_at = r.position();
  h.base_qp_q8 = r.u16();
  if (h.base_qp_q8 > kMaxQp * 256) throw FormatError("base qp out of range", qp_at);
  for (auto& o : h.gop_offsets) o = r.i8();
  h.model_hash = r.u32();
  const std::size_t config_at = r.position();
  try {
    h.config = read_codec_config(r);
    h.config.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("invalid codec config: ") + e.what(), config_at);
  }
  if (static_cast<std::uint8_t>(h.config.colorspace) != cs) {
    throw FormatError("colorspace tag disagrees with codec config", cs_at);
  }
  if (h.width == 0 || h.height == 0) throw FormatError("zero frame dimension", 5);
  if (h.config.colorspace == Colorspace::yuv420 && (h.width % 2 != 0 || h.height % 2 != 0)) {
    throw FormatError("odd frame dimension for 4:2:0", 5);
  }
  return h;
}

Bitstream read_stream(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  Bitstream s;
  s.header = read_stream_header(r);
  s.chunks.reserve(std::min<std::size_t>(s.header.frame_count, bytes.size() / kChunkHeaderBytes + 1));
  for (std::size_t i = 0; i < s.header.frame_count; ++i) {
    const std::size_t chunk_at = r.position();
    try {
      FrameChunk c;
      c.qp_q8 = r.u16();
      if (c.qp_q8 > kMaxQp * 256) throw StreamError("qp out of range", chunk_at, i);
      const std::size_t len_z = r.u32();
      const std::size_t len_y1 = r.u32();
      const std::size_t len_y2 = r.u32();
      const auto z = r.bytes(len_z, "z payload");
      const auto y1 = r.bytes(len_y1, "y step-1 payload");
      const auto y2 = r.bytes(len_y2, "y step-2 payload");
      c.z.assign(z.begin(), z.end());
      c.y1.assign(y1.begin(), y1.end());
      c.y2.assign(y2.begin(), y2.end());
      s.chunks.push_back(std::move(c));
    } catch (const StreamError&) {
      throw;
    } catch (const FormatError& e) {
      throw StreamError(e.message(), e.offset(), i);
    }
  }
  if (r.remaining() != 0) {
    throw FormatError(std::to_string(r.remaining()) + " trailing bytes after the last chunk", r.position());
  }
  return s;
}

std::uint32_t model_hash(const ModelWeights& weights, const RateModuleBank& bank) {
  const auto w = serialize_weights(weights, false);
  const auto b = serialize_bank(bank);
  // The bank's own CRC trailer is left out: a CRC over data plus its CRC is a
  // constant, which would make the hash blind to the bank.
  return crc32_of(std::span(b).first(b.size() - 4), crc32_of(w));
}

}  // namespace nvc
