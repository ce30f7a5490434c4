#include "nvc/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "nvc/bytes.hpp"
#include "nvc/tensor_ops.hpp"

namespace nvc {

const char* to_string(Colorspace c) { return c == Colorspace::yuv420 ? "yuv420" : "rgb"; }
const char* to_string(Precision p) { return p == Precision::real ? "real" : "int16"; }

Colorspace parse_colorspace(const std::string& s) {
  if (s == "yuv420") return Colorspace::yuv420;
  if (s == "rgb") return Colorspace::rgb;
  throw std::invalid_argument("unknown colorspace '" + s + "'");
}

Precision parse_precision(const std::string& s) {
  if (s == "real") return Precision::real;
  if (s == "int16") return Precision::int16;
  throw std::invalid_argument("unknown mode '" + s + "'");
}

void CodecConfig::validate() const {
  if (patch != 8) throw std::invalid_argument("patch size must be 8");
  if (latent_channels < 3 || latent_channels % 2 != 0 || latent_channels > 4096) {
    throw std::invalid_argument("latent channels must be even and at least 3");
  }
  if (dc_blocks < 1 || dc_blocks > 64) throw std::invalid_argument("dc_blocks out of range");
  if (hyper_channels < 1 || hyper_channels > 4096) {
    throw std::invalid_argument("hyper channels out of range");
  }
}

// ---------------------------------------------------------------------------
// Layer bookkeeping

namespace {

void append_block(std::vector<ConvLayer*>& out, DcBlockWeights& b) {
  out.push_back(&b.expand);
  out.push_back(&b.depthwise);
  out.push_back(&b.project);
}

}  // namespace

std::vector<ConvLayer*> ModelWeights::layers() {
  std::vector<ConvLayer*> out{&patch_embed, &extractor.input};
  for (auto& b : extractor.blocks) append_block(out, b);
  out.insert(out.end(), {&extractor.to_entropy, &extractor.to_decoder, &extractor.to_encoder,
                         &encoder.input});
  for (auto& b : encoder.blocks) append_block(out, b);
  out.insert(out.end(), {&encoder.output, &hyper_encoder.down, &hyper_encoder.output,
                         &prior.expand, &prior.fuse});
  append_block(out, prior.block);
  out.insert(out.end(), {&prior.step1, &prior.step2_fuse});
  append_block(out, prior.step2_block);
  out.insert(out.end(), {&prior.step2, &decoder.input});
  for (auto& b : decoder.blocks) append_block(out, b);
  out.push_back(&decoder.output);
  for (auto& b : reconstruction.blocks) append_block(out, b);
  out.push_back(&reconstruction.output);
  return out;
}

std::vector<const ConvLayer*> ModelWeights::layers() const {
  auto mutable_layers = const_cast<ModelWeights*>(this)->layers();
  return {mutable_layers.begin(), mutable_layers.end()};
}

void ModelWeights::quantize(const QuantScheme& scheme) {
  for (ConvLayer* l : layers()) l->quantized = quantize_layer(l->weight, l->bias, l->spec, scheme);
}

// ---------------------------------------------------------------------------
// Seeded initialization

namespace {

class WeightRng {
 public:
  explicit WeightRng(std::uint64_t seed) : engine_(seed) {}
  // Uniform in [-bound, bound) built from raw engine bits so the sequence is
  // identical across standard library implementations.
  double uniform(double bound) {
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return (2.0 * u - 1.0) * bound;
  }

 private:
  std::mt19937_64 engine_;
};

ConvLayer make_layer(std::string name, const ConvSpec& spec) {
  ConvLayer l;
  l.name = std::move(name);
  l.spec = spec;
  l.weight.assign(spec.weight_count(), 0.0f);
  l.bias.assign(static_cast<std::size_t>(spec.out_channels), 0.0f);
  return l;
}

ConvLayer random_layer(std::string name, const ConvSpec& spec, double gain, WeightRng& rng) {
  ConvLayer l = make_layer(std::move(name), spec);
  const double fan_in = static_cast<double>(spec.in_per_group()) * spec.kernel_h * spec.kernel_w;
  const double bound = gain * std::sqrt(3.0 / fan_in);
  for (float& w : l.weight) w = static_cast<float>(rng.uniform(bound));
  return l;
}

// Pointwise layer equal to `diag` on the (o, o + offset) entries plus uniform noise.
ConvLayer near_identity(std::string name, int in, int out, double noise, WeightRng& rng,
                        std::initializer_list<std::pair<int, double>> diagonals = {{0, 1.0}}) {
  ConvLayer l = make_layer(std::move(name), pointwise(in, out));
  for (float& w : l.weight) w = static_cast<float>(rng.uniform(noise));
  for (auto [offset, value] : diagonals) {
    for (int o = 0; o < out; ++o) {
      if (o + offset < in) l.weight[static_cast<std::size_t>(o) * in + o + offset] += static_cast<float>(value);
    }
  }
  return l;
}

DcBlockWeights make_block(const std::string& name, int c, WeightRng& rng) {
  DcBlockWeights b;
  b.expand = random_layer(name + ".expand", pointwise(c, 2 * c), 1.0, rng);
  b.depthwise = random_layer(name + ".depthwise", depthwise(2 * c, 3), 0.5, rng);
  b.project = random_layer(name + ".project", pointwise(c, c), 0.05, rng);
  return b;
}

std::vector<DcBlockWeights> make_blocks(const std::string& name, int count, int c, WeightRng& rng) {
  std::vector<DcBlockWeights> blocks;
  for (int i = 0; i < count; ++i) blocks.push_back(make_block(name + "." + std::to_string(i), c, rng));
  return blocks;
}

// Rows: a DC row, then Gram-Schmidt-orthonormalized zero-mean random rows.
std::vector<double> patch_basis(int rows, int dim, WeightRng& rng) {
  std::vector<double> basis(static_cast<std::size_t>(rows) * dim, 0.0);
  auto row = [&](int r) { return basis.data() + static_cast<std::size_t>(r) * dim; };
  for (int r = 0; r < rows; ++r) {
    double* v = row(r);
    if (r == 0) {
      std::fill(v, v + dim, 1.0 / std::sqrt(static_cast<double>(dim)));
      continue;
    }
    for (int i = 0; i < dim; ++i) v[i] = rng.uniform(1.0);
    if (r >= dim) {
      for (int i = 0; i < dim; ++i) v[i] *= 0.1 / std::sqrt(static_cast<double>(dim));
      continue;
    }
    for (int p = 0; p < r; ++p) {
      const double* u = row(p);
      double dot = 0.0;
      for (int i = 0; i < dim; ++i) dot += u[i] * v[i];
      for (int i = 0; i < dim; ++i) v[i] -= dot * u[i];
    }
    double norm = 0.0;
    for (int i = 0; i < dim; ++i) norm += v[i] * v[i];
    norm = std::sqrt(norm);
    for (int i = 0; i < dim; ++i) v[i] /= norm;
  }
  return basis;
}

// Softplus inverses of the latent-domain prior scales: ~0.3 for the detail
// channels, ~1.5 for the DC channel, which carries most of the energy.
constexpr double kScaleBias = -1.05;
constexpr double kDcScaleBias = 1.2;

void set_scale_bias(ConvLayer& head, int half, bool has_dc) {
  for (int c = half; c < 2 * half; ++c) head.bias[static_cast<std::size_t>(c)] = static_cast<float>(kScaleBias);
  if (has_dc) head.bias[static_cast<std::size_t>(half)] = static_cast<float>(kDcScaleBias);
}

}  // namespace

ModelWeights generate_weights(const CodecConfig& config, std::uint64_t seed) {
  config.validate();
  WeightRng rng(seed);
  const int c = config.latent_channels;
  const int ch = config.hyper_channels;
  const int p = config.patch_dim();
  const int n = config.dc_blocks;

  ModelWeights m;
  m.config = config;

  m.patch_embed = make_layer("patch_embed", pointwise(p, c));
  m.reconstruction.output = make_layer("reconstruction.output", pointwise(c, p));
  const auto basis = patch_basis(c, p, rng);
  // The DC row is rescaled so that its mid-gray offset stays inside the int16
  // bias range (|b| < 4): DC = g * (mean - 0.5) with g = min(sqrt(p), 6).
  const double dc_gain = std::min(std::sqrt(static_cast<double>(p)), 6.0);
  const double dc_row_scale = dc_gain / std::sqrt(static_cast<double>(p));
  for (int r = 0; r < c; ++r) {
    for (int i = 0; i < p; ++i) {
      const double v = basis[static_cast<std::size_t>(r) * p + i];
      m.patch_embed.weight[static_cast<std::size_t>(r) * p + i] = static_cast<float>(r == 0 ? v * dc_row_scale : v);
      if (r < p) {
        m.reconstruction.output.weight[static_cast<std::size_t>(i) * c + r] =
            static_cast<float>(r == 0 ? v / dc_row_scale : v);
      }
    }
  }
  m.patch_embed.bias[0] = static_cast<float>(-0.5 * dc_gain);
  for (float& b : m.reconstruction.output.bias) b = 0.5f;

  m.extractor.input = near_identity("extractor.input", c, c, 0.01, rng, {{0, 1.15}});
  m.extractor.blocks = make_blocks("extractor.block", n, c, rng);
  m.extractor.to_entropy = near_identity("extractor.to_entropy", c, c, 0.02, rng);
  m.extractor.to_decoder = near_identity("extractor.to_decoder", c, c, 0.01, rng);
  m.extractor.to_encoder = near_identity("extractor.to_encoder", c, c, 0.01, rng);

  m.encoder.input = near_identity("encoder.input", 2 * c, c, 0.01, rng, {{0, 1.0}, {c, -1.0}});
  m.encoder.blocks = make_blocks("encoder.block", n, c, rng);
  m.encoder.output = near_identity("encoder.output", c, c, 0.01, rng);

  m.hyper_encoder.down = random_layer("hyper_encoder.down", dense(c, ch, 3, 2), 2.0, rng);
  m.hyper_encoder.output = near_identity("hyper_encoder.output", ch, ch, 0.05, rng);

  m.prior.expand = random_layer("prior.expand", pointwise(ch, 4 * c), 0.5, rng);
  m.prior.fuse = random_layer("prior.fuse", pointwise(2 * c, c), 0.5, rng);
  m.prior.block = make_block("prior.block", c, rng);
  m.prior.step1 = random_layer("prior.step1", pointwise(c, c), 0.05, rng);
  set_scale_bias(m.prior.step1, c / 2, true);
  m.prior.step2_fuse = random_layer("prior.step2_fuse", pointwise(c + c / 2, c), 0.5, rng);
  m.prior.step2_block = make_block("prior.step2_block", c, rng);
  m.prior.step2 = random_layer("prior.step2", pointwise(c, c), 0.05, rng);
  set_scale_bias(m.prior.step2, c / 2, false);

  m.decoder.input = near_identity("decoder.input", 2 * c, c, 0.01, rng, {{0, 1.0}, {c, 1.0}});
  m.decoder.blocks = make_blocks("decoder.block", n, c, rng);
  m.decoder.output = near_identity("decoder.output", c, c, 0.01, rng);

  m.reconstruction.blocks = make_blocks("reconstruction.block", n, c, rng);

  m.quantize();
  return m;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

constexpr char kWeightMagic[5] = "NVCW";
constexpr std::uint8_t kWeightVersion = 1;

}  // namespace

void write_codec_config(ByteWriter& w, const CodecConfig& c) {
  w.u16(static_cast<std::uint16_t>(c.latent_channels));
  w.u8(static_cast<std::uint8_t>(c.patch));
  w.u8(static_cast<std::uint8_t>(c.dc_blocks));
  w.u16(static_cast<std::uint16_t>(c.hyper_channels));
  w.u8(static_cast<std::uint8_t>(c.colorspace));
}

CodecConfig read_codec_config(ByteReader& r) {
  CodecConfig c;
  c.latent_channels = r.u16();
  c.patch = r.u8();
  c.dc_blocks = r.u8();
  c.hyper_channels = r.u16();
  const std::size_t at = r.position();
  const std::uint8_t cs = r.u8();
  if (cs > 1) throw FormatError("unknown colorspace tag " + std::to_string(cs), at);
  c.colorspace = static_cast<Colorspace>(cs);
  return c;
}

std::vector<std::uint8_t> serialize_weights(const ModelWeights& weights, bool include_int16) {
  ByteWriter w;
  w.tag(kWeightMagic);
  w.u8(kWeightVersion);
  write_codec_config(w, weights.config);
  const auto layers = weights.layers();
  w.u32(static_cast<std::uint32_t>(layers.size()));
  for (const ConvLayer* l : layers) {
    w.u16(static_cast<std::uint16_t>(l->name.size()));
    w.bytes({reinterpret_cast<const std::uint8_t*>(l->name.data()), l->name.size()});
    for (int v : {l->spec.in_channels, l->spec.out_channels, l->spec.kernel_h, l->spec.kernel_w,
                  l->spec.stride, l->spec.padding, l->spec.groups}) {
      w.u16(static_cast<std::uint16_t>(v));
    }
    w.u32(static_cast<std::uint32_t>(l->weight.size()));
    for (float v : l->weight) w.f32(v);
    for (float v : l->bias) w.f32(v);
    w.u8(include_int16 ? 1 : 0);
    if (include_int16) {
      for (auto v : l->quantized.weights) w.i16(v);
      for (auto v : l->quantized.bias) w.i16(v);
    }
  }
  return w.take();
}

ModelWeights parse_weights(std::span<const std::uint8_t> bytes, const QuantScheme& scheme) {
  ByteReader r(bytes);
  r.expect_tag(kWeightMagic, "weight file");
  const std::size_t version_at = r.position();
  if (const auto v = r.u8(); v != kWeightVersion) {
    throw FormatError("unsupported weight file version " + std::to_string(v), version_at);
  }
  const CodecConfig config = read_codec_config(r);
  try {
    config.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("invalid config in weight file: ") + e.what(), version_at + 1);
  }
  // The expected topology comes from the config; the file must match it layer by layer.
  ModelWeights m = generate_weights(config, 0);
  const auto layers = m.layers();
  const std::size_t count_at = r.position();
  if (const auto n = r.u32(); n != layers.size()) {
    throw FormatError("weight file has " + std::to_string(n) + " layers, expected " +
                          std::to_string(layers.size()), count_at);
  }
  for (ConvLayer* l : layers) {
    const std::size_t at = r.position();
    const auto name_len = r.u16();
    auto name = r.bytes(name_len, "layer name");
    if (std::string(name.begin(), name.end()) != l->name) {
      throw FormatError("unexpected layer '" + std::string(name.begin(), name.end()) +
                            "', expected '" + l->name + "'", at);
    }
    ConvSpec spec;
    for (int* field : {&spec.in_channels, &spec.out_channels, &spec.kernel_h, &spec.kernel_w,
                       &spec.stride, &spec.padding, &spec.groups}) {
      *field = r.u16();
    }
    if (!(spec == l->spec)) throw FormatError("layer '" + l->name + "' has unexpected shape", at);
    const std::size_t n_at = r.position();
    if (r.u32() != l->weight.size()) {
      throw FormatError("layer '" + l->name + "' weight count mismatch", n_at);
    }
    for (float& v : l->weight) v = r.f32();
    for (float& v : l->bias) v = r.f32();
    l->quantized = quantize_layer(l->weight, l->bias, l->spec, scheme);
    if (r.u8() != 0) {
      for (auto& v : l->quantized.weights) v = r.i16();
      for (auto& v : l->quantized.bias) v = r.i16();
    }
  }
  if (r.remaining() != 0) throw FormatError("trailing bytes after weight data", r.position());
  return m;
}

ModelWeights load_weights(const std::filesystem::path& path) {
  return parse_weights(read_file(path));
}

void save_weights(const ModelWeights& weights, const std::filesystem::path& path,
                  bool include_int16) {
  write_file(path, serialize_weights(weights, include_int16));
}

ScaleVector make_scale_vector(std::span<const float> values, const QuantScheme& scheme) {
  return ScaleVector{std::vector<float>(values.begin(), values.end()), quantize_scale(values, scheme)};
}

template <typename T>
TemporalContext<T> TemporalContext<T>::zeros(const Shape& latent) {
  return TemporalContext{Tensor<T>(latent), Tensor<T>(latent), Tensor<T>(latent)};
}

template struct TemporalContext<float>;
template struct TemporalContext<std::int16_t>;

// ---------------------------------------------------------------------------
// Evaluation

namespace {

template <typename T>
struct Ops;

template <>
struct Ops<float> {
  const CodecModel& model;
  RealTensor conv(const RealTensor& x, const ConvLayer& l) const {
    return conv2d(x, l.weight, l.bias, l.spec);
  }
  RealTensor act(const RealTensor& x) const { return wsilu(x, 4.0f); }
  RealTensor scale(const RealTensor& x, const ScaleVector& s) const {
    return channel_scale(x, s.real);
  }
  RealTensor gate(const RealTensor& a, const RealTensor& b) const { return multiply(a, b); }
  RealTensor sum(const RealTensor& a, const RealTensor& b) const { return add(a, b); }
  RealTensor positive(const RealTensor& x) const {
    RealTensor out = softplus(x);
    const float floor = static_cast<float>(model.scheme().quantum());
    for (float& v : out.data()) v += floor;
    return out;
  }
};

template <>
struct Ops<std::int16_t> {
  const CodecModel& model;
  const ActivationLut& softplus_lut;
  QTensor conv(const QTensor& x, const ConvLayer& l) const {
    return qconv(x, l.quantized, model.scheme());
  }
  QTensor act(const QTensor& x) const { return qwsilu(x, 4, model.sigmoid_lut(), model.scheme()); }
  QTensor scale(const QTensor& x, const ScaleVector& s) const {
    return qchannel_scale(x, s.fixed, model.scheme());
  }
  QTensor gate(const QTensor& a, const QTensor& b) const { return qmultiply(a, b, model.scheme()); }
  QTensor sum(const QTensor& a, const QTensor& b) const { return qadd(a, b); }
  QTensor positive(const QTensor& x) const {
    QTensor out = qlookup(x, softplus_lut);
    for (auto& v : out.data()) v = saturate_int16(static_cast<std::int64_t>(v) + 1);
    return out;
  }
};

template <typename T>
Tensor<T> run_blocks(const CodecModel& m, Tensor<T> x, std::span<const DcBlockWeights> blocks) {
  for (const auto& b : blocks) x = m.dc_block(x, b);
  return x;
}

template <typename T>
PriorParams<T> split_params(const Tensor<T>& raw, const auto& ops) {
  auto [mean, scale_raw] = chunk2(raw);
  return PriorParams<T>{std::move(mean), ops.positive(scale_raw)};
}

}  // namespace

CodecModel::CodecModel(ModelWeights weights, QuantScheme scheme)
    : weights_(std::move(weights)),
      scheme_(scheme),
      sigmoid_(build_sigmoid_lut(scheme)),
      softplus_(build_softplus_lut(scheme)) {
  weights_.config.validate();
}

Shape CodecModel::latent_shape(int height, int width) const {
  const int m = config().pad_multiple();
  if (height % m != 0 || width % m != 0) {
    throw std::invalid_argument("frame " + std::to_string(width) + "x" + std::to_string(height) +
                                " is not padded to a multiple of " + std::to_string(m));
  }
  return Shape{config().latent_channels, height / config().patch, width / config().patch};
}

Shape CodecModel::hyper_shape(const Shape& latent) const {
  return Shape{config().hyper_channels, (latent.height + 1) / 2, (latent.width + 1) / 2};
}

#define NVC_OPS(T) \
  [&]() {          \
    if constexpr (std::is_same_v<T, float>) return Ops<float>{*this}; \
    else return Ops<std::int16_t>{*this, softplus_}; \
  }()

template <typename T>
Tensor<T> CodecModel::dc_block(const Tensor<T>& x, const DcBlockWeights& block) const {
  if (x.channels() % 2 != 0) {
    throw std::invalid_argument("dc_block: odd channel count in " + to_string(x.shape()));
  }
  if (block.expand.spec.in_channels != x.channels()) {
    throw std::invalid_argument("dc_block: block expects " +
                                std::to_string(block.expand.spec.in_channels) +
                                " channels, got " + to_string(x.shape()));
  }
  const auto ops = NVC_OPS(T);
  Tensor<T> h = ops.act(ops.conv(x, block.expand));
  h = ops.conv(h, block.depthwise);
  auto [a, b] = chunk2(h);
  h = ops.conv(ops.gate(a, b), block.project);
  return ops.sum(x, h);
}

template <typename T>
Tensor<T> CodecModel::patch_embed(const Tensor<T>& frame) const {
  if (frame.channels() != config().input_channels()) {
    throw std::invalid_argument("patch_embed: expected " +
                                std::to_string(config().input_channels()) + " channels, got " +
                                to_string(frame.shape()));
  }
  const int f = config().patch_factor();
  if (frame.height() % f != 0 || frame.width() % f != 0) {
    throw std::invalid_argument("patch_embed: frame " + to_string(frame.shape()) +
                                " is not padded to a multiple of " + std::to_string(f));
  }
  const auto ops = NVC_OPS(T);
  return ops.conv(space_to_depth(frame, f), weights_.patch_embed);
}

template <typename T>
Tensor<T> CodecModel::extract_context_head(const Tensor<T>& f_prev, const ScaleVector& q_f) const {
  const auto ops = NVC_OPS(T);
  Tensor<T> h = ops.conv(ops.scale(f_prev, q_f), weights_.extractor.input);
  const auto& blocks = weights_.extractor.blocks;
  return run_blocks(*this, std::move(h),
                    std::span(blocks).first(static_cast<std::size_t>(config().extractor_split())));
}

template <typename T>
Tensor<T> CodecModel::entropy_context(const Tensor<T>& head) const {
  return NVC_OPS(T).conv(head, weights_.extractor.to_entropy);
}

template <typename T>
void CodecModel::extract_context_tail(const Tensor<T>& head, TemporalContext<T>& ctx) const {
  const auto ops = NVC_OPS(T);
  const auto& blocks = weights_.extractor.blocks;
  const Tensor<T> h = run_blocks(
      *this, head, std::span(blocks).subspan(static_cast<std::size_t>(config().extractor_split())));
  ctx.for_decoder = ops.conv(h, weights_.extractor.to_decoder);
  ctx.for_encoder = ops.conv(h, weights_.extractor.to_encoder);
}

template <typename T>
TemporalContext<T> CodecModel::extract_context(const Tensor<T>& f_prev,
                                               const ScaleVector& q_f) const {
  TemporalContext<T> ctx;
  const Tensor<T> head = extract_context_head(f_prev, q_f);
  ctx.for_entropy = entropy_context(head);
  extract_context_tail(head, ctx);
  return ctx;
}

template <typename T>
Tensor<T> CodecModel::encode_latent(const Tensor<T>& x_lat, const Tensor<T>& f_e,
                                    const ScaleVector& q_e) const {
  const auto ops = NVC_OPS(T);
  Tensor<T> h = ops.conv(concat_channels(ops.scale(x_lat, q_e), f_e), weights_.encoder.input);
  h = run_blocks(*this, std::move(h), std::span(weights_.encoder.blocks));
  return ops.conv(h, weights_.encoder.output);
}

template <typename T>
Tensor<T> CodecModel::hyper_encode(const Tensor<T>& y) const {
  const auto ops = NVC_OPS(T);
  return ops.conv(ops.act(ops.conv(y, weights_.hyper_encoder.down)), weights_.hyper_encoder.output);
}

template <typename T>
HyperPrior<T> CodecModel::hyper_decode(const Tensor<T>& z_hat, const Tensor<T>& f_p) const {
  const auto ops = NVC_OPS(T);
  Tensor<T> h = depth_to_space(ops.conv(z_hat, weights_.prior.expand), 2);
  h = crop(h, f_p.height(), f_p.width());
  h = ops.act(ops.conv(concat_channels(h, f_p), weights_.prior.fuse));
  HyperPrior<T> out;
  out.feature = dc_block(h, weights_.prior.block);
  out.step1 = split_params<T>(ops.conv(out.feature, weights_.prior.step1), ops);
  return out;
}

template <typename T>
PriorParams<T> CodecModel::estimate_step2(const Tensor<T>& feature, const Tensor<T>& y1_hat) const {
  const auto ops = NVC_OPS(T);
  Tensor<T> h = ops.act(ops.conv(concat_channels(feature, y1_hat), weights_.prior.step2_fuse));
  h = dc_block(h, weights_.prior.step2_block);
  return split_params<T>(ops.conv(h, weights_.prior.step2), ops);
}

template <typename T>
Tensor<T> CodecModel::decode_latent(const Tensor<T>& y_hat, const Tensor<T>& f,
                                    const ScaleVector& q_d) const {
  const auto ops = NVC_OPS(T);
  Tensor<T> h = ops.conv(concat_channels(ops.scale(y_hat, q_d), f), weights_.decoder.input);
  h = run_blocks(*this, std::move(h), std::span(weights_.decoder.blocks));
  return ops.conv(h, weights_.decoder.output);
}

template <typename T>
Tensor<T> CodecModel::reconstruct(const Tensor<T>& f_t, const ScaleVector& q_r) const {
  const auto ops = NVC_OPS(T);
  Tensor<T> h = run_blocks(*this, ops.scale(f_t, q_r), std::span(weights_.reconstruction.blocks));
  return depth_to_space(ops.conv(h, weights_.reconstruction.output), config().patch_factor());
}

#undef NVC_OPS

#define NVC_INSTANTIATE(T)                                                                        \
  template Tensor<T> CodecModel::dc_block(const Tensor<T>&, const DcBlockWeights&) const;         \
  template Tensor<T> CodecModel::patch_embed(const Tensor<T>&) const;                             \
  template Tensor<T> CodecModel::extract_context_head(const Tensor<T>&, const ScaleVector&) const; \
  template Tensor<T> CodecModel::entropy_context(const Tensor<T>&) const;                         \
  template void CodecModel::extract_context_tail(const Tensor<T>&, TemporalContext<T>&) const;    \
  template TemporalContext<T> CodecModel::extract_context(const Tensor<T>&, const ScaleVector&)   \
      const;                                                                                      \
  template Tensor<T> CodecModel::encode_latent(const Tensor<T>&, const Tensor<T>&,                \
                                               const ScaleVector&) const;                         \
  template Tensor<T> CodecModel::hyper_encode(const Tensor<T>&) const;                            \
  template HyperPrior<T> CodecModel::hyper_decode(const Tensor<T>&, const Tensor<T>&) const;      \
  template PriorParams<T> CodecModel::estimate_step2(const Tensor<T>&, const Tensor<T>&) const;   \
  template Tensor<T> CodecModel::decode_latent(const Tensor<T>&, const Tensor<T>&,                \
                                               const ScaleVector&) const;                         \
  template Tensor<T> CodecModel::reconstruct(const Tensor<T>&, const ScaleVector&) const;

NVC_INSTANTIATE(float)
NVC_INSTANTIATE(std::int16_t)

#undef NVC_INSTANTIATE

}  // namespace nvc
