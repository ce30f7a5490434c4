#include "nvc/tensor.hpp"

namespace nvc {

std::string to_string(const Shape& s) {
  return std::to_string(s.channels) + "x" + std::to_string(s.height) + "x" +
         std::to_string(s.width);
}

void ConvSpec::validate() const {
  if (in_channels <= 0 || out_channels <= 0 || kernel_h <= 0 || kernel_w <= 0 || stride <= 0 ||
      padding < 0 || groups <= 0) {
    throw std::invalid_argument("conv spec has non-positive dimension");
  }
  if (in_channels % groups != 0 || out_channels % groups != 0) {
    throw std::invalid_argument("conv spec channels not divisible by groups");
  }
}

Shape ConvSpec::output_shape(const Shape& input) const {
  validate();
  if (input.channels != in_channels) {
    throw std::invalid_argument("conv expects " + std::to_string(in_channels) +
                                " input channels, got " + to_string(input));
  }
  const int oh = (input.height + 2 * padding - kernel_h) / stride + 1;
  const int ow = (input.width + 2 * padding - kernel_w) / stride + 1;
  if (input.height + 2 * padding < kernel_h || input.width + 2 * padding < kernel_w || oh <= 0 ||
      ow <= 0) {
    throw std::invalid_argument("conv output would be empty for input " + to_string(input));
  }
  return Shape{out_channels, oh, ow};
}

ConvSpec pointwise(int in_channels, int out_channels) {
  return ConvSpec{in_channels, out_channels, 1, 1, 1, 0, 1};
}

ConvSpec depthwise(int channels, int kernel, int stride) {
  return ConvSpec{channels, channels, kernel, kernel, stride, kernel / 2, channels};
}

ConvSpec dense(int in_channels, int out_channels, int kernel, int stride) {
  return ConvSpec{in_channels, out_channels, kernel, kernel, stride, kernel / 2, 1};
}

}  // namespace nvc
