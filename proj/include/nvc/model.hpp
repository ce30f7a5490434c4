#pragma once

// Conditional-coding network operating at a single 1/8 latent resolution.
//
//   frame --patch_embed--> x_lat --(q_e, F_e)--> encoder --> y --> hyper --> z
//   f_{t-1} --(q_f)--> context extractor --> F_p (entropy), F (decoder), F_e (encoder)
//   y_hat --(q_d, F)--> decoder --> f_t --(q_r)--> reconstruction --> frame
//
// Every stage is a stack of DC blocks plus 1x1 projections and is evaluated in
// either real (float) or int16 arithmetic; the member templates are instantiated
// for float and std::int16_t.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "nvc/quant.hpp"
#include "nvc/tensor.hpp"

namespace nvc {

class ByteReader;
class ByteWriter;

enum class Colorspace : std::uint8_t { yuv420 = 0, rgb = 1 };
enum class Precision : std::uint8_t { real = 0, int16 = 1 };

const char* to_string(Colorspace c);
const char* to_string(Precision p);
Colorspace parse_colorspace(const std::string& s);
Precision parse_precision(const std::string& s);

struct CodecConfig {
  int latent_channels = 32;
  int patch = 8;
  int dc_blocks = 2;  // per stage
  int hyper_channels = 16;
  Colorspace colorspace = Colorspace::yuv420;

  void validate() const;

  // Channels of the packed network input: RGB planes, or the 4 Y phases plus U and V.
  int input_channels() const { return colorspace == Colorspace::yuv420 ? 6 : 3; }
  // Factor applied by space_to_depth to the packed input (YUV420 is packed at half size).
  int patch_factor() const { return colorspace == Colorspace::yuv420 ? patch / 2 : patch; }
  int patch_dim() const { return input_channels() * patch_factor() * patch_factor(); }
  // Frames are padded to this multiple before coding.
  int pad_multiple() const { return colorspace == Colorspace::yuv420 ? 2 * patch : patch; }
  // Context-extractor blocks run before the entropy context is tapped.
  int extractor_split() const { return (dc_blocks + 1) / 2; }

  friend bool operator==(const CodecConfig&, const CodecConfig&) = default;
};

// Config block shared by the weight file and the stream header (7 bytes).
void write_codec_config(ByteWriter& w, const CodecConfig& c);
CodecConfig read_codec_config(ByteReader& r);

struct ConvLayer {
  std::string name;
  ConvSpec spec;
  std::vector<float> weight;
  std::vector<float> bias;
  QuantizedLayer quantized;
};

// expand (C -> 2C) -> WSiLU -> depth-wise 3x3 -> chunk -> a*b -> project (C -> C), plus input.
struct DcBlockWeights {
  ConvLayer expand;
  ConvLayer depthwise;
  ConvLayer project;
};

struct ModelWeights {
  CodecConfig config;

  ConvLayer patch_embed;

  struct {
    ConvLayer input;
    std::vector<DcBlockWeights> blocks;
    ConvLayer to_entropy;
    ConvLayer to_decoder;
    ConvLayer to_encoder;
  } extractor;

  struct {
    ConvLayer input;  // 2C -> C over concat(x * q_e, F_e)
    std::vector<DcBlockWeights> blocks;
    ConvLayer output;
  } encoder;

  struct {
    ConvLayer down;  // 3x3 stride 2, C -> Ch
    ConvLayer output;
  } hyper_encoder;

  struct {
    ConvLayer expand;  // Ch -> 4C, then depth_to_space(2)
    ConvLayer fuse;    // 2C -> C over concat(hyper, F_p)
    DcBlockWeights block;
    ConvLayer step1;   // C -> C: mean and raw scale of the first channel half
    ConvLayer step2_fuse;  // C + C/2 -> C over concat(feature, y1_hat)
    DcBlockWeights step2_block;
    ConvLayer step2;   // C -> C: mean and raw scale of the second channel half
  } prior;

  struct {
    ConvLayer input;  // 2C -> C over concat(y_hat * q_d, F)
    std::vector<DcBlockWeights> blocks;
    ConvLayer output;
  } decoder;

  struct {
    std::vector<DcBlockWeights> blocks;
    ConvLayer output;  // C -> patch_dim, then depth_to_space
  } reconstruction;

  // Fixed serialization order.
  std::vector<ConvLayer*> layers();
  std::vector<const ConvLayer*> layers() const;

  // Fills ConvLayer::quantized from the real parameters.
  void quantize(const QuantScheme& scheme = kDefaultScheme);
};

// Deterministic structured initialization: near-orthonormal patch embedding with
// its transpose as reconstruction, near-identity DC blocks, and a residual-style
// encoder/decoder pair around the temporal context. Same seed, same bytes.
ModelWeights generate_weights(const CodecConfig& config, std::uint64_t seed);

// "NVCW" weight container.
std::vector<std::uint8_t> serialize_weights(const ModelWeights& weights, bool include_int16 = true);
ModelWeights parse_weights(std::span<const std::uint8_t> bytes,
                           const QuantScheme& scheme = kDefaultScheme);
ModelWeights load_weights(const std::filesystem::path& path);
void save_weights(const ModelWeights& weights, const std::filesystem::path& path,
                  bool include_int16 = true);

struct ScaleVector {
  std::vector<float> real;
  std::vector<std::int16_t> fixed;  // K2 fixed point
};
ScaleVector make_scale_vector(std::span<const float> values,
                              const QuantScheme& scheme = kDefaultScheme);

template <typename T>
struct TemporalContext {
  Tensor<T> for_entropy;   // F_p, conditions the hyperprior
  Tensor<T> for_decoder;   // F
  Tensor<T> for_encoder;   // F_e

  static TemporalContext zeros(const Shape& latent);
};

template <typename T>
struct PriorParams {
  Tensor<T> mean;
  Tensor<T> scale;  // strictly positive, latent units
};

template <typename T>
struct HyperPrior {
  Tensor<T> feature;
  PriorParams<T> step1;
};

class CodecModel {
 public:
  explicit CodecModel(ModelWeights weights, QuantScheme scheme = kDefaultScheme);

  const CodecConfig& config() const { return weights_.config; }
  const ModelWeights& weights() const { return weights_; }
  const QuantScheme& scheme() const { return scheme_; }
  const ActivationLut& sigmoid_lut() const { return sigmoid_; }

  // Latent shape for a padded frame of the given size.
  Shape latent_shape(int height, int width) const;
  Shape hyper_shape(const Shape& latent) const;

  template <typename T>
  Tensor<T> dc_block(const Tensor<T>& x, const DcBlockWeights& block) const;

  template <typename T>
  Tensor<T> patch_embed(const Tensor<T>& frame) const;

  // The extractor runs in two parts so a decoder can overlap the first part
  // with entropy decoding of z: the head yields the intermediate feature and
  // the entropy context, the tail finishes the decoder and encoder contexts.
  template <typename T>
  Tensor<T> extract_context_head(const Tensor<T>& f_prev, const ScaleVector& q_f) const;
  template <typename T>
  Tensor<T> entropy_context(const Tensor<T>& head) const;
  template <typename T>
  void extract_context_tail(const Tensor<T>& head, TemporalContext<T>& ctx) const;
  template <typename T>
  TemporalContext<T> extract_context(const Tensor<T>& f_prev, const ScaleVector& q_f) const;

  template <typename T>
  Tensor<T> encode_latent(const Tensor<T>& x_lat, const Tensor<T>& f_e,
                          const ScaleVector& q_e) const;

  template <typename T>
  Tensor<T> hyper_encode(const Tensor<T>& y) const;

  template <typename T>
  HyperPrior<T> hyper_decode(const Tensor<T>& z_hat, const Tensor<T>& f_p) const;

  template <typename T>
  PriorParams<T> estimate_step2(const Tensor<T>& feature, const Tensor<T>& y1_hat) const;

  template <typename T>
  Tensor<T> decode_latent(const Tensor<T>& y_hat, const Tensor<T>& f,
                          const ScaleVector& q_d) const;

  template <typename T>
  Tensor<T> reconstruct(const Tensor<T>& f_t, const ScaleVector& q_r) const;

 private:
  ModelWeights weights_;
  QuantScheme scheme_;
  ActivationLut sigmoid_;
  ActivationLut softplus_;
};

}  // namespace nvc
