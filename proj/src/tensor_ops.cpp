#include "nvc/tensor_ops.hpp"

#include <algorithm>
#include <cmath>

#include "conv_kernel.hpp"

namespace nvc {

namespace {

void require_same(const RealTensor& a, const RealTensor& b, const char* op) {
  if (!(a.shape() == b.shape())) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + to_string(a.shape()) +
                                " vs " + to_string(b.shape()));
  }
}

}  // namespace

RealTensor conv2d(const RealTensor& input, std::span<const float> weights,
                  std::span<const float> bias, const ConvSpec& spec) {
  const Shape out_shape = spec.output_shape(input.shape());
  if (weights.size() != spec.weight_count()) {
    throw std::invalid_argument("conv2d: expected " + std::to_string(spec.weight_count()) +
                                " weights, got " + std::to_string(weights.size()));
  }
  if (!bias.empty() && bias.size() != static_cast<std::size_t>(spec.out_channels)) {
    throw std::invalid_argument("conv2d: bias length does not match out_channels");
  }
  RealTensor out(out_shape);
  detail::conv_accumulate<float>(
      input, weights, spec, out_shape,
      [&](int oc) { return bias.empty() ? 0.0f : bias[oc]; },
      [&](int oc, std::span<const float> acc) {
        std::copy(acc.begin(), acc.end(), out.channel(oc).begin());
      });
  return out;
}

RealTensor wsilu(const RealTensor& input, float alpha) {
  RealTensor out(input.shape());
  auto src = input.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const float x = src[i];
    dst[i] = x / (1.0f + std::exp(-alpha * x));
  }
  return out;
}

RealTensor softplus(const RealTensor& input) {
  RealTensor out(input.shape());
  auto src = input.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const float x = src[i];
    dst[i] = x > 20.0f ? x : std::log1p(std::exp(x));
  }
  return out;
}

RealTensor channel_scale(const RealTensor& input, std::span<const float> scale) {
  if (scale.size() != static_cast<std::size_t>(input.channels())) {
    throw std::invalid_argument("channel_scale: " + std::to_string(scale.size()) +
                                " scales for " + to_string(input.shape()));
  }
  RealTensor out(input.shape());
  for (int c = 0; c < input.channels(); ++c) {
    auto src = input.channel(c);
    auto dst = out.channel(c);
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] * scale[c];
  }
  return out;
}

RealTensor add(const RealTensor& a, const RealTensor& b) {
  require_same(a, b, "add");
  RealTensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

RealTensor multiply(const RealTensor& a, const RealTensor& b) {
  require_same(a, b, "multiply");
  RealTensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

}  // namespace nvc
