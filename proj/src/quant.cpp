#include "nvc/quant.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "conv_kernel.hpp"

namespace nvc {

namespace {

#ifdef NDEBUG
using Accumulator = std::int32_t;
#else
// Debug builds accumulate wide and assert the int32 accumulator would not overflow.
using Accumulator = std::int64_t;
#endif

void require_same(const QTensor& a, const QTensor& b, const char* op) {
  if (!(a.shape() == b.shape())) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + to_string(a.shape()) +
                                " vs " + to_string(b.shape()));
  }
}

std::int16_t quantize_with(double v, double scale, std::size_t* saturated) {
  if (std::isnan(v)) return 0;
  const double r = std::round(scale * v);  // half away from zero
  if (r > 32767.0 || r < -32768.0) {
    if (saturated) ++*saturated;
    return r > 0 ? std::int16_t{32767} : std::int16_t{-32768};
  }
  return static_cast<std::int16_t>(r);
}

}  // namespace

std::int16_t saturate_int16(std::int64_t v) {
  if (v > 32767) return 32767;
  if (v < -32768) return -32768;
  return static_cast<std::int16_t>(v);
}

std::int64_t round_div(std::int64_t num, std::int64_t den) {
  assert(den > 0);
  return num >= 0 ? (num + den / 2) / den : (num - den / 2) / den;
}

std::int16_t quantize_value(double v, const QuantScheme& scheme) {
  return quantize_with(v, scheme.k1, nullptr);
}

double dequantize_value(std::int16_t v, const QuantScheme& scheme) {
  return static_cast<double>(v) / scheme.k1;
}

QTensor quantize_tensor(const RealTensor& t, const QuantScheme& scheme) {
  QTensor out(t.shape());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = quantize_value(t[i], scheme);
  return out;
}

RealTensor dequantize_tensor(const QTensor& t, const QuantScheme& scheme) {
  RealTensor out(t.shape());
  for (std::size_t i = 0; i < t.size(); ++i)
    out[i] = static_cast<float>(dequantize_value(t[i], scheme));
  return out;
}

QuantizedLayer quantize_layer(std::span<const float> weights, std::span<const float> bias,
                              const ConvSpec& spec, const QuantScheme& scheme) {
  spec.validate();
  if (weights.size() != spec.weight_count()) {
    throw std::invalid_argument("quantize_layer: expected " + std::to_string(spec.weight_count()) +
                                " weights, got " + std::to_string(weights.size()));
  }
  if (!bias.empty() && bias.size() != static_cast<std::size_t>(spec.out_channels)) {
    throw std::invalid_argument("quantize_layer: bias length does not match out_channels");
  }
  QuantizedLayer layer;
  layer.spec = spec;
  layer.weights.reserve(weights.size());
  auto track = [&](float f, std::int16_t q) {
    layer.max_weight_error =
        std::max(layer.max_weight_error, std::abs(static_cast<double>(q) / scheme.k2 - f));
  };
  for (float w : weights) {
    if (!std::isfinite(w)) throw std::invalid_argument("quantize_layer: non-finite weight");
    const std::int16_t q = quantize_with(w, scheme.k2, &layer.saturated);
    track(w, q);
    layer.weights.push_back(q);
  }
  layer.bias.assign(static_cast<std::size_t>(spec.out_channels), 0);
  for (std::size_t i = 0; i < bias.size(); ++i) {
    if (!std::isfinite(bias[i])) throw std::invalid_argument("quantize_layer: non-finite bias");
    layer.bias[i] = quantize_with(bias[i], scheme.k2, &layer.saturated);
    track(bias[i], layer.bias[i]);
  }
  return layer;
}

QTensor qconv(const QTensor& input, const QuantizedLayer& layer, const QuantScheme& scheme,
              std::size_t* saturated) {
  const Shape out_shape = layer.spec.output_shape(input.shape());
  if (layer.weights.size() != layer.spec.weight_count() ||
      layer.bias.size() != static_cast<std::size_t>(layer.spec.out_channels)) {
    throw std::invalid_argument("qconv: layer parameters do not match its spec");
  }
  QTensor out(out_shape);
  std::vector<std::size_t> clipped(static_cast<std::size_t>(layer.spec.out_channels), 0);
  detail::conv_accumulate<Accumulator>(
      input, std::span<const std::int16_t>(layer.weights), layer.spec, out_shape,
      [&](int oc) { return static_cast<Accumulator>(layer.bias[oc]) * scheme.k1; },
      [&](int oc, std::span<const Accumulator> acc) {
        auto dst = out.channel(oc);
        std::size_t n = 0;
        for (std::size_t i = 0; i < acc.size(); ++i) {
          assert(acc[i] >= std::numeric_limits<std::int32_t>::min() &&
                 acc[i] <= std::numeric_limits<std::int32_t>::max());
          const std::int64_t v = round_div(acc[i], scheme.k2);
          if (v > 32767 || v < -32768) ++n;
          dst[i] = saturate_int16(v);
        }
        clipped[oc] = n;
      });
  if (saturated) {
    for (std::size_t n : clipped) *saturated += n;
  }
  return out;
}

ActivationLut::ActivationLut(std::vector<std::int16_t> table) : table_(std::move(table)) {
  if (table_.size() != 65536) throw std::invalid_argument("activation table needs 65536 entries");
}

namespace {

template <typename Fn>
ActivationLut tabulate(Fn fn, const QuantScheme& scheme) {
  std::vector<std::int16_t> table(65536);
  const long double k1 = scheme.k1;
  for (std::int32_t v = -32768; v <= 32767; ++v) {
    const long double y = std::round(k1 * fn(static_cast<long double>(v) / k1));
    table[static_cast<std::size_t>(v + 32768)] =
        saturate_int16(static_cast<std::int64_t>(std::max<long double>(
            std::min<long double>(y, 40000.0L), -40000.0L)));
  }
  return ActivationLut(std::move(table));
}

}  // namespace

ActivationLut build_sigmoid_lut(const QuantScheme& scheme) {
  return tabulate([](long double x) { return 1.0L / (1.0L + std::exp(-x)); }, scheme);
}

ActivationLut build_softplus_lut(const QuantScheme& scheme) {
  return tabulate([](long double x) { return x > 40.0L ? x : std::log1p(std::exp(x)); }, scheme);
}

QTensor qwsilu(const QTensor& input, std::int32_t alpha, const ActivationLut& sigmoid_lut,
               const QuantScheme& scheme) {
  QTensor out(input.shape());
  for (std::size_t i = 0; i < input.size(); ++i) {
    const std::int32_t x = input[i];
    const std::int16_t t = saturate_int16(static_cast<std::int64_t>(alpha) * x);
    out[i] = saturate_int16(round_div(static_cast<std::int64_t>(x) * sigmoid_lut(t), scheme.k1));
  }
  return out;
}

QTensor qlookup(const QTensor& input, const ActivationLut& lut) {
  QTensor out(input.shape());
  for (std::size_t i = 0; i < input.size(); ++i) out[i] = lut(input[i]);
  return out;
}

std::vector<std::int16_t> quantize_scale(std::span<const float> scale, const QuantScheme& scheme) {
  std::vector<std::int16_t> out;
  out.reserve(scale.size());
  for (float s : scale) out.push_back(quantize_with(s, scheme.k2, nullptr));
  return out;
}

QTensor qchannel_scale(const QTensor& input, std::span<const std::int16_t> scale,
                       const QuantScheme& scheme) {
  if (scale.size() != static_cast<std::size_t>(input.channels())) {
    throw std::invalid_argument("qchannel_scale: " + std::to_string(scale.size()) +
                                " scales for " + to_string(input.shape()));
  }
  QTensor out(input.shape());
  for (int c = 0; c < input.channels(); ++c) {
    auto src = input.channel(c);
    auto dst = out.channel(c);
    const std::int64_t s = scale[c];
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = saturate_int16(round_div(src[i] * s, scheme.k2));
  }
  return out;
}

QTensor qadd(const QTensor& a, const QTensor& b) {
  require_same(a, b, "qadd");
  QTensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i)
    out[i] = saturate_int16(static_cast<std::int64_t>(a[i]) + b[i]);
  return out;
}

QTensor qmultiply(const QTensor& a, const QTensor& b, const QuantScheme& scheme) {
  require_same(a, b, "qmultiply");
  QTensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i)
    out[i] = saturate_int16(round_div(static_cast<std::int64_t>(a[i]) * b[i], scheme.k1));
  return out;
}

}  // namespace nvc
