#pragma once

// Dense kernels used by the codec network. Layout ops are templated over the
// scalar type and work identically for real and int16 tensors; arithmetic ops
// here are the real-valued reference path (int16 counterparts live in quant.hpp).

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>

#include "nvc/tensor.hpp"

namespace nvc {

// Cross-correlation with zero padding. `weights` is laid out as
// (out_channels, in_channels / groups, kernel_h, kernel_w).
RealTensor conv2d(const RealTensor& input, std::span<const float> weights,
                  std::span<const float> bias, const ConvSpec& spec);

// x * sigmoid(alpha * x), elementwise.
RealTensor wsilu(const RealTensor& input, float alpha = 4.0f);
RealTensor softplus(const RealTensor& input);

RealTensor channel_scale(const RealTensor& input, std::span<const float> scale);
RealTensor add(const RealTensor& a, const RealTensor& b);
RealTensor multiply(const RealTensor& a, const RealTensor& b);

template <typename T>
Tensor<T> space_to_depth(const Tensor<T>& input, int r) {
  const Shape& s = input.shape();
  if (r < 1) throw std::invalid_argument("space_to_depth: factor must be positive");
  if (s.height % r != 0 || s.width % r != 0) {
    throw std::invalid_argument("space_to_depth: " + to_string(s) + " not divisible by " +
                                std::to_string(r));
  }
  Tensor<T> out(Shape{s.channels * r * r, s.height / r, s.width / r});
  for (int c = 0; c < s.channels; ++c) {
    for (int h = 0; h < s.height; ++h) {
      for (int w = 0; w < s.width; ++w) {
        const int sub = (h % r) * r + (w % r);
        out.at(c * r * r + sub, h / r, w / r) = input.at(c, h, w);
      }
    }
  }
  return out;
}

template <typename T>
Tensor<T> depth_to_space(const Tensor<T>& input, int r) {
  const Shape& s = input.shape();
  if (r < 1) throw std::invalid_argument("depth_to_space: factor must be positive");
  if (s.channels % (r * r) != 0) {
    throw std::invalid_argument("depth_to_space: channels of " + to_string(s) +
                                " not divisible by " + std::to_string(r * r));
  }
  const int out_c = s.channels / (r * r);
  Tensor<T> out(Shape{out_c, s.height * r, s.width * r});
  for (int c = 0; c < out_c; ++c) {
    for (int h = 0; h < s.height * r; ++h) {
      for (int w = 0; w < s.width * r; ++w) {
        const int sub = (h % r) * r + (w % r);
        out.at(c, h, w) = input.at(c * r * r + sub, h / r, w / r);
      }
    }
  }
  return out;
}

template <typename T>
std::pair<Tensor<T>, Tensor<T>> chunk2(const Tensor<T>& input) {
  const Shape& s = input.shape();
  if (s.channels % 2 != 0) {
    throw std::invalid_argument("chunk2: odd channel count in " + to_string(s));
  }
  const Shape half{s.channels / 2, s.height, s.width};
  const auto mid = input.values().begin() + static_cast<std::ptrdiff_t>(half.size());
  return {Tensor<T>(half, std::vector<T>(input.values().begin(), mid)),
          Tensor<T>(half, std::vector<T>(mid, input.values().end()))};
}

template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b) {
  if (!a.shape().same_spatial(b.shape())) {
    throw std::invalid_argument("concat_channels: spatial mismatch " + to_string(a.shape()) +
                                " vs " + to_string(b.shape()));
  }
  std::vector<T> data;
  data.reserve(a.size() + b.size());
  data.insert(data.end(), a.values().begin(), a.values().end());
  data.insert(data.end(), b.values().begin(), b.values().end());
  return Tensor<T>(Shape{a.channels() + b.channels(), a.height(), a.width()}, std::move(data));
}

// Top-left crop.
template <typename T>
Tensor<T> crop(const Tensor<T>& input, int height, int width) {
  const Shape& s = input.shape();
  if (height > s.height || width > s.width || height < 0 || width < 0) {
    throw std::invalid_argument("crop: " + std::to_string(height) + "x" + std::to_string(width) +
                                " exceeds " + to_string(s));
  }
  Tensor<T> out(Shape{s.channels, height, width});
  for (int c = 0; c < s.channels; ++c)
    for (int h = 0; h < height; ++h)
      for (int w = 0; w < width; ++w) out.at(c, h, w) = input.at(c, h, w);
  return out;
}

}  // namespace nvc
