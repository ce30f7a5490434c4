#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "nvc/video_io.hpp"
#include "test_support.hpp"

namespace nvc {
namespace {

std::vector<Frame> ramp_video(int w, int h, int count) {
  std::vector<Frame> frames;
  for (int t = 0; t < count; ++t) {
    Frame f = Frame::blank(Colorspace::yuv420, w, h);
    for (int p = 0; p < 3; ++p) {
      auto& plane = f.planes[static_cast<std::size_t>(p)];
      for (std::size_t i = 0; i < plane.size(); ++i) plane[i] = static_cast<std::uint8_t>((i * (p + 1) + 7 * t) % 256);
    }
    frames.push_back(f);
  }
  return frames;
}

TEST(VideoIo, YuvFileRoundTrip) {
  test::TempDir dir("yuv");
  const auto frames = ramp_video(16, 16, 2);
  save_yuv420(dir / "a.yuv", frames);
  EXPECT_EQ(std::filesystem::file_size(dir / "a.yuv"), 2u * (256 + 64 + 64));
  EXPECT_EQ(load_yuv420(dir / "a.yuv", 16, 16, 2), frames);
  EXPECT_THROW(load_yuv420(dir / "a.yuv", 16, 16, 3), IoError);
  EXPECT_THROW(load_yuv420(dir / "missing.yuv", 16, 16, 1), IoError);
}

TEST(VideoIo, OddDimensionsRejectedFor420) {
  EXPECT_THROW(Frame::blank(Colorspace::yuv420, 15, 16), std::invalid_argument);
  EXPECT_THROW(unpack_frames(std::vector<std::uint8_t>(1000), Colorspace::yuv420, 16, 9, 1), std::invalid_argument);
  EXPECT_NO_THROW(Frame::blank(Colorspace::rgb, 15, 9));
}

TEST(VideoIo, RgbPlanarRoundTrip) {
  test::TempDir dir("rgb");
  const auto frames = seeded_noise_video(Colorspace::rgb, 10, 6, 3, 5);
  save_video(dir / "a.rgb", frames);
  EXPECT_EQ(std::filesystem::file_size(dir / "a.rgb"), 3u * 3 * 60);
  EXPECT_EQ(load_video(dir / "a.rgb", Colorspace::rgb, 10, 6, 3), frames);
}

TEST(Padding, NoOpWhenAligned) {
  const Frame f = Frame::blank(Colorspace::yuv420, 1920, 1080, 9);
  const Frame p = pad_to_multiple(f, 8);
  EXPECT_EQ(p, f);
}

TEST(Padding, ReplicatesEdgesAndCropInverts) {
  const Frame f = seeded_noise_video(Colorspace::rgb, 17, 9, 1, 3)[0];
  const Frame p = pad_to_multiple(f, 16);
  ASSERT_EQ(p.width, 32);
  ASSERT_EQ(p.height, 16);
  for (int c = 0; c < 3; ++c) {
    const auto& src = f.planes[static_cast<std::size_t>(c)];
    const auto& dst = p.planes[static_cast<std::size_t>(c)];
    for (int y = 0; y < 16; ++y) {
      for (int x = 0; x < 32; ++x) {
        const int sx = std::min(x, 16), sy = std::min(y, 8);
        ASSERT_EQ(dst[static_cast<std::size_t>(y * 32 + x)], src[static_cast<std::size_t>(sy * 17 + sx)]);
      }
    }
  }
  EXPECT_EQ(crop(p, 17, 9), f);
  const Frame yuv = seeded_noise_video(Colorspace::yuv420, 18, 10, 1, 4)[0];
  EXPECT_EQ(crop(pad_to_multiple(yuv, 16), 18, 10), yuv);
}

TEST(Psnr, IdenticalIsInfinite) {
  const auto v = ramp_video(16, 16, 2);
  const PsnrReport r = psnr(v, v);
  for (double db : r.plane_db) EXPECT_TRUE(std::isinf(db) && db > 0);
}

TEST(Psnr, FullScaleErrorIsZeroDb) {
  const Frame a = Frame::blank(Colorspace::yuv420, 8, 8, 0);
  const Frame b = Frame::blank(Colorspace::yuv420, 8, 8, 255);
  for (double db : psnr(a, b).plane_db) EXPECT_NEAR(db, 0.0, 1e-12);
}

TEST(Psnr, HandComputedCheckerboard) {
  Frame a = Frame::blank(Colorspace::yuv420, 4, 4, 0);
  const Frame b = Frame::blank(Colorspace::yuv420, 4, 4, 0);
  for (std::size_t i = 0; i < 16; ++i) a.planes[0][i] = ((i / 4 + i % 4) % 2) ? 10 : 0;
  const PsnrReport r = psnr(a, b);
  EXPECT_DOUBLE_EQ(r.plane_mse[0], 50.0);
  EXPECT_NEAR(r.plane_db[0], 10.0 * std::log10(255.0 * 255.0 / 50.0), 1e-12);
  EXPECT_TRUE(std::isinf(r.plane_db[1]));
}

TEST(Psnr, MismatchedInputsRejected) {
  EXPECT_THROW(psnr(ramp_video(16, 16, 2), ramp_video(16, 16, 1)), std::invalid_argument);
  EXPECT_THROW(psnr(Frame::blank(Colorspace::yuv420, 8, 8), Frame::blank(Colorspace::yuv420, 8, 10)),
               std::invalid_argument);
}

TEST(SeededNoise, DeterministicWalk) {
  const auto a = seeded_noise_video(Colorspace::yuv420, 16, 16, 4, 9);
  EXPECT_EQ(a, seeded_noise_video(Colorspace::yuv420, 16, 16, 4, 9));
  EXPECT_NE(a, seeded_noise_video(Colorspace::yuv420, 16, 16, 4, 10));
  for (std::size_t t = 1; t < a.size(); ++t) {
    for (std::size_t p = 0; p < 3; ++p) {
      for (std::size_t i = 0; i < a[t].planes[p].size(); ++i) {
        ASSERT_LE(std::abs(int(a[t].planes[p][i]) - int(a[t - 1].planes[p][i])), 4);
      }
    }
  }
}

TEST(TensorPacking, YuvPhasesAndRoundTrip) {
  Frame f = Frame::blank(Colorspace::yuv420, 4, 2);
  for (std::size_t i = 0; i < 8; ++i) f.planes[0][i] = static_cast<std::uint8_t>(10 * i);
  f.planes[1] = {100, 200};
  f.planes[2] = {50, 25};
  const RealTensor t = frame_to_tensor<float>(f);
  ASSERT_EQ(t.shape(), (Shape{6, 1, 2}));
  // Phase (0,0) of the first 2x2 block is Y(0,0); phase (1,1) is Y(1,1).
  EXPECT_FLOAT_EQ(t.at(0, 0, 0), 0.0f);
  EXPECT_FLOAT_EQ(t.at(3, 0, 0), 50.0f / 255.0f);
  EXPECT_FLOAT_EQ(t.at(4, 0, 1), 200.0f / 255.0f);
  EXPECT_EQ(tensor_to_frame(t, Colorspace::yuv420), f);
  EXPECT_EQ(tensor_to_frame(frame_to_tensor<std::int16_t>(f), Colorspace::yuv420), f);
  const Frame rgb = seeded_noise_video(Colorspace::rgb, 6, 4, 1, 1)[0];
  EXPECT_EQ(tensor_to_frame(frame_to_tensor<float>(rgb), Colorspace::rgb), rgb);
}

TEST(TensorPacking, GradientSurvivesPixelConversion) {
  Frame f = Frame::blank(Colorspace::yuv420, 16, 16);
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) f.planes[0][static_cast<std::size_t>(y * 16 + x)] = static_cast<std::uint8_t>(16 * x);
  }
  const Frame back = tensor_to_frame(frame_to_tensor<std::int16_t>(f), Colorspace::yuv420);
  EXPECT_EQ(back.planes[0], f.planes[0]);
}

}  // namespace
}  // namespace nvc
