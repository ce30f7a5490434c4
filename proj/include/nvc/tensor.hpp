#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nvc {

// (channels, height, width); data is always row-major (c, h, w).
struct Shape {
  int channels = 0;
  int height = 0;
  int width = 0;

  std::size_t plane() const { return static_cast<std::size_t>(height) * width; }
  std::size_t size() const { return static_cast<std::size_t>(channels) * plane(); }
  bool same_spatial(const Shape& o) const { return height == o.height && width == o.width; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(const Shape& s);

template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(Shape shape) : shape_(shape), data_(check(shape), T{}) {}
  Tensor(Shape shape, std::vector<T> data) : shape_(shape), data_(std::move(data)) {
    if (data_.size() != check(shape)) {
      throw std::invalid_argument("tensor data length " + std::to_string(data_.size()) +
                                  " does not match shape " + to_string(shape));
    }
  }

  const Shape& shape() const { return shape_; }
  int channels() const { return shape_.channels; }
  int height() const { return shape_.height; }
  int width() const { return shape_.width; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<const T> data() const { return data_; }
  std::span<T> data() { return data_; }
  const std::vector<T>& values() const { return data_; }

  std::span<const T> channel(int c) const { return {data_.data() + c * shape_.plane(), shape_.plane()}; }
  std::span<T> channel(int c) { return {data_.data() + c * shape_.plane(), shape_.plane()}; }

  T& at(int c, int h, int w) { return data_[index(c, h, w)]; }
  const T& at(int c, int h, int w) const { return data_[index(c, h, w)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  static std::size_t check(const Shape& s) {
    if (s.channels < 0 || s.height < 0 || s.width < 0) {
      throw std::invalid_argument("negative tensor dimension in " + to_string(s));
    }
    return s.size();
  }
  std::size_t index(int c, int h, int w) const {
    return (static_cast<std::size_t>(c) * shape_.height + h) * shape_.width + w;
  }

  Shape shape_;
  std::vector<T> data_;
};

using RealTensor = Tensor<float>;
using QTensor = Tensor<std::int16_t>;

struct ConvSpec {
  int in_channels = 0;
  int out_channels = 0;
  int kernel_h = 1;
  int kernel_w = 1;
  int stride = 1;
  int padding = 0;
  int groups = 1;

  int in_per_group() const { return in_channels / groups; }
  int out_per_group() const { return out_channels / groups; }
  std::size_t weight_count() const {
    return static_cast<std::size_t>(out_channels) * in_per_group() * kernel_h * kernel_w;
  }
  // Throws std::invalid_argument for an inconsistent spec or a non-positive output size.
  Shape output_shape(const Shape& input) const;
  void validate() const;

  friend bool operator==(const ConvSpec&, const ConvSpec&) = default;
};

ConvSpec pointwise(int in_channels, int out_channels);
ConvSpec depthwise(int channels, int kernel, int stride = 1);
ConvSpec dense(int in_channels, int out_channels, int kernel, int stride = 1);

}  // namespace nvc
