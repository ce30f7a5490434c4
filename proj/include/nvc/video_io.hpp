#pragma once

// Raw 8-bit planar video (YUV 4:2:0 or RGB), edge padding, PSNR, and the
// conversion between pixel frames and network tensors.

#include <array>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "nvc/model.hpp"
#include "nvc/tensor.hpp"

namespace nvc {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Frame {
  Colorspace colorspace = Colorspace::yuv420;
  int width = 0;
  int height = 0;
  std::array<std::vector<std::uint8_t>, 3> planes;

  static Frame blank(Colorspace cs, int width, int height, std::uint8_t value = 0);

  int plane_width(int p) const;
  int plane_height(int p) const;
  std::size_t byte_size() const;

  friend bool operator==(const Frame&, const Frame&) = default;
};

// Throws std::invalid_argument on bad dimensions (odd sizes for 4:2:0) and
// IoError when the file size does not equal frame_count whole frames.
std::vector<Frame> load_video(const std::filesystem::path& path, Colorspace cs, int width,
                              int height, int frame_count);
void save_video(const std::filesystem::path& path, const std::vector<Frame>& frames);
std::vector<Frame> load_yuv420(const std::filesystem::path& path, int width, int height,
                               int frame_count);
void save_yuv420(const std::filesystem::path& path, const std::vector<Frame>& frames);

std::vector<std::uint8_t> pack_frames(const std::vector<Frame>& frames);
std::vector<Frame> unpack_frames(std::span<const std::uint8_t> bytes, Colorspace cs, int width,
                                 int height, int frame_count);

// Replicate-edge padding to the next multiple (luma dimensions).
Frame pad_to_multiple(const Frame& frame, int multiple);
Frame crop(const Frame& frame, int width, int height);

struct PsnrReport {
  std::array<double, 3> plane_db{};  // +inf when the planes are identical
  std::array<double, 3> plane_mse{};
};

// Sequence-level MSE per plane over all frames.
PsnrReport psnr(const std::vector<Frame>& a, const std::vector<Frame>& b);
PsnrReport psnr(const Frame& a, const Frame& b);

// Deterministic test content from mt19937_64(seed). `walk`: frame 0 is uniform
// noise and every later pixel moves by -4..4 from the previous frame; `iid`:
// every frame is fresh uniform noise.
enum class NoiseKind { walk, iid };
std::vector<Frame> seeded_noise_video(Colorspace cs, int width, int height, int frame_count,
                                      std::uint64_t seed, NoiseKind kind = NoiseKind::walk);

// Pixel frame <-> network input. Pixels map to [0, 1]; YUV 4:2:0 packs the four
// luma phases with U and V into a half-resolution 6-channel tensor.
template <typename T>
Tensor<T> frame_to_tensor(const Frame& frame, const QuantScheme& scheme = kDefaultScheme);
template <typename T>
Frame tensor_to_frame(const Tensor<T>& t, Colorspace cs, const QuantScheme& scheme = kDefaultScheme);

}  // namespace nvc
