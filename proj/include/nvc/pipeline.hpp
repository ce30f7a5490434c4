#pragma once

// Frame-level encode/decode sessions and whole-sequence helpers.
//
// In overlapped mode a session owns a second lane that performs range coding
// while the calling thread keeps running network inference:
//   encoder  z, y1, y2 are entropy coded as soon as their symbols exist, while
//            the hyper decoder, step-2 estimate and decode_latent continue;
//   decoder  z is decoded while the first extractor half runs, then y1 while
//            the second half runs, then y2.
// Both modes produce identical bytes and reconstructions.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "nvc/bitstream.hpp"
#include "nvc/model.hpp"
#include "nvc/rate_control.hpp"
#include "nvc/video_io.hpp"

namespace nvc {

enum class Parallelism : std::uint8_t { serial = 0, overlapped = 1 };
const char* to_string(Parallelism p);

// Stream and session mismatches (wrong weights, wrong bank, wrong config).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CodecSettings {
  Precision mode = Precision::int16;
  QpSchedule schedule;
  Parallelism parallelism = Parallelism::serial;
  int threads = 1;
  // Run reconstruction generation on the encoder side too; it never affects the stream.
  bool reconstruct_on_encode = false;
};

// Codes padded frames one at a time. The model and bank must outlive the session.
class Encoder {
 public:
  Encoder(const CodecModel& model, const RateModuleBank& bank, const CodecSettings& settings);
  ~Encoder();
  Encoder(const Encoder&) = delete;
  Encoder& operator=(const Encoder&) = delete;

  // frame must already be padded to config().pad_multiple().
  FrameChunk encode_frame(const Frame& frame);

  std::size_t frames_coded() const;
  // Encoder-side f_t of the last coded frame, in real units.
  std::vector<double> latent() const;
  // Padded reconstruction of the last frame; only with reconstruct_on_encode.
  const std::optional<Frame>& reconstruction() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

class Decoder {
 public:
  Decoder(const CodecModel& model, const RateModuleBank& bank, Precision mode,
          Parallelism parallelism = Parallelism::serial, int threads = 1);
  ~Decoder();
  Decoder(const Decoder&) = delete;
  Decoder& operator=(const Decoder&) = delete;

  // Returns the padded reconstruction. On any error the reference latent is
  // left untouched, so the session can continue with the next valid chunk.
  Frame decode_frame(const FrameChunk& chunk, int padded_width, int padded_height);

  std::size_t frames_decoded() const;
  std::vector<double> latent() const;

  // Nudges the largest-magnitude element of the decoded latent of the given
  // frame by one ulp of the session's real type before it is buffered. In int16
  // mode the nudge is applied in real units and re-quantized, which leaves the
  // value unchanged.
  void perturb_latent_at(std::size_t frame_index);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct EncodeResult {
  Bitstream stream;
  std::vector<std::uint8_t> bytes;
  std::vector<Frame> reconstructions;  // cropped; only with reconstruct_on_encode
  std::vector<std::vector<double>> latents;  // encoder-side f_t per frame
  std::vector<double> frame_seconds;
  double seconds = 0.0;
};

EncodeResult encode_video(const std::vector<Frame>& frames, const CodecModel& model,
                          const RateModuleBank& bank, const CodecSettings& settings);

struct DecodeSettings {
  Parallelism parallelism = Parallelism::serial;
  int threads = 1;
  std::optional<std::size_t> perturb_frame;
};

struct DecodeResult {
  StreamHeader header;
  std::vector<Frame> frames;  // cropped to the original size
  std::vector<std::vector<double>> latents;
  std::vector<double> frame_seconds;
  double seconds = 0.0;
};

// Throws ConfigError when the stream was made with different weights or bank.
DecodeResult decode_video(std::span<const std::uint8_t> bytes, const CodecModel& model,
                          const RateModuleBank& bank, const DecodeSettings& settings = {});

struct DriftRow {
  std::size_t frame = 0;
  double max_abs_diff = 0.0;  // +inf once the decoder lost sync
};

// Encodes, then decodes the stream in an independent session and compares the
// encoder-side and decoder-side latents frame by frame.
std::vector<DriftRow> drift_report(const std::vector<Frame>& frames, const CodecModel& model,
                                   const RateModuleBank& bank, const CodecSettings& settings,
                                   std::optional<std::size_t> perturb_frame = std::nullopt);

}  // namespace nvc
