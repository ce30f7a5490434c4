#pragma once

// 16-bit integerization of the codec network.
//
// Features are stored as v_i = round(K1 * v_f) and conv weights/biases as
// round(K2 * w_f). A conv then evaluates
//
//   y_i = clip((conv(x_i, w_i) + b_i * K1) / K2, -32768, 32767)
//
// with 32-bit accumulation. Every rounding is round-half-away-from-zero and
// every division by K2 or K1 is a rounded division, which makes the int16 path
// bit-exact across runs, thread counts and platforms.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "nvc/tensor.hpp"

namespace nvc {

struct QuantScheme {
  std::int32_t k1 = 512;   // feature scale: 1.0 -> 512
  std::int32_t k2 = 8192;  // weight scale

  double quantum() const { return 1.0 / k1; }
  double min_value() const { return -32768.0 / k1; }
  double max_value() const { return 32767.0 / k1; }
};

inline constexpr QuantScheme kDefaultScheme{};

std::int16_t saturate_int16(std::int64_t v);

// num / den rounded half away from zero; den must be positive.
std::int64_t round_div(std::int64_t num, std::int64_t den);

std::int16_t quantize_value(double v, const QuantScheme& scheme = kDefaultScheme);
double dequantize_value(std::int16_t v, const QuantScheme& scheme = kDefaultScheme);

QTensor quantize_tensor(const RealTensor& t, const QuantScheme& scheme = kDefaultScheme);
RealTensor dequantize_tensor(const QTensor& t, const QuantScheme& scheme = kDefaultScheme);

struct QuantizedLayer {
  ConvSpec spec;
  std::vector<std::int16_t> weights;
  std::vector<std::int16_t> bias;
  double max_weight_error = 0.0;   // max |w_i / K2 - w_f| over weights and biases
  std::size_t saturated = 0;       // parameters clipped to the int16 range
};

QuantizedLayer quantize_layer(std::span<const float> weights, std::span<const float> bias,
                              const ConvSpec& spec, const QuantScheme& scheme = kDefaultScheme);

// Integer convolution. If `saturated` is given, the number of outputs clipped to
// the int16 range is added to it.
QTensor qconv(const QTensor& input, const QuantizedLayer& layer,
              const QuantScheme& scheme = kDefaultScheme, std::size_t* saturated = nullptr);

// 65536-entry table indexed by an int16 feature value.
class ActivationLut {
 public:
  std::int16_t operator()(std::int16_t v) const { return table_[static_cast<std::uint16_t>(v) ^ 0x8000u]; }
  std::int16_t at(std::int32_t v) const { return table_[static_cast<std::size_t>(v + 32768)]; }
  std::span<const std::int16_t> entries() const { return table_; }

  // `table` holds the outputs for inputs -32768..32767 in order.
  explicit ActivationLut(std::vector<std::int16_t> table);

 private:
  std::vector<std::int16_t> table_;
};

// table[v] = round(K1 * sigmoid(v / K1)).
ActivationLut build_sigmoid_lut(const QuantScheme& scheme = kDefaultScheme);
// table[v] = round(K1 * softplus(v / K1)), saturated.
ActivationLut build_softplus_lut(const QuantScheme& scheme = kDefaultScheme);

// out = round(x * lut[clip(alpha * x)] / K1)
QTensor qwsilu(const QTensor& input, std::int32_t alpha, const ActivationLut& sigmoid_lut,
               const QuantScheme& scheme = kDefaultScheme);
QTensor qlookup(const QTensor& input, const ActivationLut& lut);

// Scale vectors are stored with K2 and applied like a 1x1 depth-wise qconv
// without bias: out = clip(round(x * s_i / K2)).
std::vector<std::int16_t> quantize_scale(std::span<const float> scale,
                                         const QuantScheme& scheme = kDefaultScheme);
QTensor qchannel_scale(const QTensor& input, std::span<const std::int16_t> scale,
                       const QuantScheme& scheme = kDefaultScheme);

QTensor qadd(const QTensor& a, const QTensor& b);
// out = clip(round(a * b / K1))
QTensor qmultiply(const QTensor& a, const QTensor& b, const QuantScheme& scheme = kDefaultScheme);

}  // namespace nvc
