#include "nvc/video_io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <type_traits>

#include "nvc/bytes.hpp"
#include "nvc/tensor_ops.hpp"

namespace nvc {

namespace {

void check_dims(Colorspace cs, int width, int height) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("frame dimensions must be positive, got " + std::to_string(width) +
                                "x" + std::to_string(height));
  }
  if (cs == Colorspace::yuv420 && (width % 2 != 0 || height % 2 != 0)) {
    throw std::invalid_argument("4:2:0 video needs even dimensions, got " + std::to_string(width) +
                                "x" + std::to_string(height));
  }
}

}  // namespace

Frame Frame::blank(Colorspace cs, int width, int height, std::uint8_t value) {
  check_dims(cs, width, height);
  Frame f;
  f.colorspace = cs;
  f.width = width;
  f.height = height;
  for (int p = 0; p < 3; ++p) {
    f.planes[static_cast<std::size_t>(p)].assign(
        static_cast<std::size_t>(f.plane_width(p)) * f.plane_height(p), value);
  }
  return f;
}

int Frame::plane_width(int p) const {
  return (p > 0 && colorspace == Colorspace::yuv420) ? width / 2 : width;
}

int Frame::plane_height(int p) const {
  return (p > 0 && colorspace == Colorspace::yuv420) ? height / 2 : height;
}

std::size_t Frame::byte_size() const {
  std::size_t n = 0;
  for (int p = 0; p < 3; ++p) n += static_cast<std::size_t>(plane_width(p)) * plane_height(p);
  return n;
}

std::vector<std::uint8_t> pack_frames(const std::vector<Frame>& frames) {
  std::vector<std::uint8_t> out;
  for (const Frame& f : frames) {
    for (const auto& p : f.planes) out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

std::vector<Frame> unpack_frames(std::span<const std::uint8_t> bytes, Colorspace cs, int width,
                                 int height, int frame_count) {
  if (frame_count < 0) throw std::invalid_argument("frame count must be non-negative");
  const Frame proto = Frame::blank(cs, width, height);
  const std::size_t per_frame = proto.byte_size();
  if (bytes.size() != per_frame * static_cast<std::size_t>(frame_count)) {
    throw IoError("raw video holds " + std::to_string(bytes.size()) + " bytes, expected " +
                  std::to_string(frame_count) + " frames of " + std::to_string(per_frame) +
                  " bytes");
  }
  std::vector<Frame> frames(static_cast<std::size_t>(frame_count), proto);
  std::size_t at = 0;
  for (Frame& f : frames) {
    for (auto& p : f.planes) {
      std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(at), p.size(), p.begin());
      at += p.size();
    }
  }
  return frames;
}

std::vector<Frame> load_video(const std::filesystem::path& path, Colorspace cs, int width,
                              int height, int frame_count) {
  check_dims(cs, width, height);
  std::vector<std::uint8_t> bytes;
  try {
    bytes = read_file(path);
  } catch (const std::exception& e) {
    throw IoError(e.what());
  }
  return unpack_frames(bytes, cs, width, height, frame_count);
}

void save_video(const std::filesystem::path& path, const std::vector<Frame>& frames) {
  try {
    write_file(path, pack_frames(frames));
  } catch (const std::exception& e) {
    throw IoError(e.what());
  }
}

std::vector<Frame> load_yuv420(const std::filesystem::path& path, int width, int height,
                               int frame_count) {
  return load_video(path, Colorspace::yuv420, width, height, frame_count);
}

void save_yuv420(const std::filesystem::path& path, const std::vector<Frame>& frames) {
  for (const Frame& f : frames) {
    if (f.colorspace != Colorspace::yuv420) throw std::invalid_argument("save_yuv420: RGB frame");
  }
  save_video(path, frames);
}

Frame pad_to_multiple(const Frame& frame, int multiple) {
  if (multiple < 1) throw std::invalid_argument("pad multiple must be positive");
  const int w = (frame.width + multiple - 1) / multiple * multiple;
  const int h = (frame.height + multiple - 1) / multiple * multiple;
  if (w == frame.width && h == frame.height) return frame;
  Frame out = Frame::blank(frame.colorspace, w, h);
  for (int p = 0; p < 3; ++p) {
    const auto& src = frame.planes[static_cast<std::size_t>(p)];
    auto& dst = out.planes[static_cast<std::size_t>(p)];
    const int sw = frame.plane_width(p), sh = frame.plane_height(p);
    const int dw = out.plane_width(p), dh = out.plane_height(p);
    for (int y = 0; y < dh; ++y) {
      const int sy = std::min(y, sh - 1);
      for (int x = 0; x < dw; ++x) {
        dst[static_cast<std::size_t>(y) * dw + x] = src[static_cast<std::size_t>(sy) * sw + std::min(x, sw - 1)];
      }
    }
  }
  return out;
}

Frame crop(const Frame& frame, int width, int height) {
  if (width > frame.width || height > frame.height) {
    throw std::invalid_argument("crop target " + std::to_string(width) + "x" + std::to_string(height) +
                                " exceeds frame " + std::to_string(frame.width) + "x" +
                                std::to_string(frame.height));
  }
  Frame out = Frame::blank(frame.colorspace, width, height);
  for (int p = 0; p < 3; ++p) {
    const auto& src = frame.planes[static_cast<std::size_t>(p)];
    auto& dst = out.planes[static_cast<std::size_t>(p)];
    const int sw = frame.plane_width(p);
    const int dw = out.plane_width(p), dh = out.plane_height(p);
    for (int y = 0; y < dh; ++y) {
      std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(y) * sw, dw,
                  dst.begin() + static_cast<std::ptrdiff_t>(y) * dw);
    }
  }
  return out;
}

PsnrReport psnr(const std::vector<Frame>& a, const std::vector<Frame>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("psnr: frame counts differ");
  std::array<double, 3> sse{};
  std::array<double, 3> count{};
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].colorspace != b[i].colorspace || a[i].width != b[i].width || a[i].height != b[i].height) {
      throw std::invalid_argument("psnr: frame " + std::to_string(i) + " dimensions differ");
    }
    for (std::size_t p = 0; p < 3; ++p) {
      const auto& x = a[i].planes[p];
      const auto& y = b[i].planes[p];
      for (std::size_t k = 0; k < x.size(); ++k) {
        const double d = static_cast<double>(x[k]) - y[k];
        sse[p] += d * d;
      }
      count[p] += static_cast<double>(x.size());
    }
  }
  PsnrReport r;
  for (std::size_t p = 0; p < 3; ++p) {
    r.plane_mse[p] = count[p] > 0 ? sse[p] / count[p] : 0.0;
    r.plane_db[p] = r.plane_mse[p] == 0.0 ? std::numeric_limits<double>::infinity()
                                          : 10.0 * std::log10(255.0 * 255.0 / r.plane_mse[p]);
  }
  return r;
}

PsnrReport psnr(const Frame& a, const Frame& b) { return psnr(std::vector<Frame>{a}, std::vector<Frame>{b}); }

std::vector<Frame> seeded_noise_video(Colorspace cs, int width, int height, int frame_count,
                                      std::uint64_t seed, NoiseKind kind) {
  check_dims(cs, width, height);
  if (frame_count < 0) throw std::invalid_argument("frame count must be non-negative");
  std::mt19937_64 rng(seed);
  std::vector<Frame> frames;
  frames.reserve(static_cast<std::size_t>(frame_count));
  for (int t = 0; t < frame_count; ++t) {
    if (t == 0 || kind == NoiseKind::iid) {
      Frame f = Frame::blank(cs, width, height);
      for (auto& p : f.planes)
        for (auto& v : p) v = static_cast<std::uint8_t>(rng() % 256);
      frames.push_back(std::move(f));
    } else {
      Frame f = frames.back();
      for (auto& p : f.planes)
        for (auto& v : p) v = static_cast<std::uint8_t>(std::clamp<int>(v + static_cast<int>(rng() % 9) - 4, 0, 255));
      frames.push_back(std::move(f));
    }
  }
  return frames;
}

template <typename T>
Tensor<T> frame_to_tensor(const Frame& frame, const QuantScheme& scheme) {
  const auto to_value = [&](std::uint8_t p) -> T {
    if constexpr (std::is_same_v<T, float>) {
      return static_cast<float>(p) / 255.0f;
    } else {
      return saturate_int16(round_div(static_cast<std::int64_t>(p) * scheme.k1, 255));
    }
  };
  const auto plane = [&](int p) {
    Tensor<T> t(Shape{1, frame.plane_height(p), frame.plane_width(p)});
    const auto& src = frame.planes[static_cast<std::size_t>(p)];
    auto dst = t.data();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = to_value(src[i]);
    return t;
  };
  if (frame.colorspace == Colorspace::rgb) {
    return concat_channels(concat_channels(plane(0), plane(1)), plane(2));
  }
  return concat_channels(concat_channels(space_to_depth(plane(0), 2), plane(1)), plane(2));
}

template <typename T>
Frame tensor_to_frame(const Tensor<T>& t, Colorspace cs, const QuantScheme& scheme) {
  const auto to_pixel = [&](T v) -> std::uint8_t {
    if constexpr (std::is_same_v<T, float>) {
      const double p = std::round(static_cast<double>(v) * 255.0);
      return static_cast<std::uint8_t>(std::clamp(std::isnan(p) ? 0.0 : p, 0.0, 255.0));
    } else {
      return static_cast<std::uint8_t>(std::clamp<std::int64_t>(round_div(static_cast<std::int64_t>(v) * 255, scheme.k1), 0, 255));
    }
  };
  const int expected = cs == Colorspace::rgb ? 3 : 6;
  if (t.channels() != expected) {
    throw std::invalid_argument("tensor_to_frame: expected " + std::to_string(expected) +
                                " channels, got " + to_string(t.shape()));
  }
  const int scale = cs == Colorspace::rgb ? 1 : 2;
  Frame f = Frame::blank(cs, t.width() * scale, t.height() * scale);
  const auto fill = [&](int p, const Tensor<T>& src) {
    auto& dst = f.planes[static_cast<std::size_t>(p)];
    const auto s = src.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = to_pixel(s[i]);
  };
  const auto take = [&](int first, int count) {
    Tensor<T> out(Shape{count, t.height(), t.width()});
    const auto s = t.data().subspan(static_cast<std::size_t>(first) * t.shape().plane(), out.size());
    std::copy(s.begin(), s.end(), out.data().begin());
    return out;
  };
  if (cs == Colorspace::rgb) {
    for (int p = 0; p < 3; ++p) fill(p, take(p, 1));
  } else {
    fill(0, depth_to_space(take(0, 4), 2));
    fill(1, take(4, 1));
    fill(2, take(5, 1));
  }
  return f;
}

template RealTensor frame_to_tensor<float>(const Frame&, const QuantScheme&);
template QTensor frame_to_tensor<std::int16_t>(const Frame&, const QuantScheme&);
template Frame tensor_to_frame<float>(const RealTensor&, Colorspace, const QuantScheme&);
template Frame tensor_to_frame<std::int16_t>(const QTensor&, Colorspace, const QuantScheme&);

}  // namespace nvc
