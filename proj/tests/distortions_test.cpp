#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "hv3d/aggregate.hpp"
#include "hv3d/distortions.hpp"
#include "test_support.hpp"

namespace hv3d {
namespace {

StereoFrame constant_frame(int w, int h, std::uint8_t y, std::uint8_t c = 128) {
  Frame f(w, h, y, c);
  return {f, f, DepthFrame{VideoPlane(w, h, 90)}};
}

double sample_variance(const VideoPlane& p) {
  double m = 0;
  for (auto s : p.samples()) m += s;
  m /= static_cast<double>(p.size());
  double ss = 0;
  for (auto s : p.samples()) ss += (s - m) * (s - m);
  return ss / static_cast<double>(p.size() - 1);
}

TEST(GaussianNoise, VarianceMatchesSpecifiedLevel) {
  auto f = constant_frame(256, 256, 128);
  auto n = add_gaussian_noise(f, 0.01, 42, 0);
  const double want = 0.01 * 255 * 255;
  for (const VideoPlane* p : {&n.left.y, &n.right.y})
    EXPECT_NEAR(sample_variance(*p), want, 0.05 * want);
  EXPECT_NEAR(sample_variance(n.left.u), want, 0.05 * want);
  EXPECT_NE(n.left.y, n.right.y);
  EXPECT_EQ(n.depth.d, f.depth.d);
}

TEST(GaussianNoise, DeterministicPerSeedAndFrame) {
  auto f = constant_frame(64, 64, 100);
  EXPECT_EQ(add_gaussian_noise(f, 0.01, 7, 3).left.y, add_gaussian_noise(f, 0.01, 7, 3).left.y);
  EXPECT_NE(add_gaussian_noise(f, 0.01, 7, 3).left.y, add_gaussian_noise(f, 0.01, 8, 3).left.y);
  EXPECT_NE(add_gaussian_noise(f, 0.01, 7, 3).left.y, add_gaussian_noise(f, 0.01, 7, 4).left.y);
  EXPECT_EQ(frame_seed(7, 3), frame_seed(7, 3));
  EXPECT_NE(frame_seed(7, 3), frame_seed(3, 7));
}

TEST(GaussianNoise, LumaOnlyLeavesChroma) {
  auto f = constant_frame(64, 64, 100, 120);
  auto n = add_gaussian_noise(f, 0.02, 1, 0, true);
  EXPECT_EQ(n.left.u, f.left.u);
  EXPECT_EQ(n.right.v, f.right.v);
  EXPECT_NE(n.left.y, f.left.y);
}

TEST(GaussianNoise, SaturatesAtRangeLimits) {
  auto n = add_gaussian_noise(constant_frame(64, 64, 250), 0.05, 2, 0);
  int at_max = 0;
  for (auto s : n.left.y.samples()) at_max += s == 255;
  EXPECT_GT(at_max, 0);
}

TEST(GaussianBlur, TapsAndKernel) {
  for (int size : {2, 3, 4, 7}) {
    for (double sigma : {0.5, 1.0, 4.0}) {
      auto t = blur_taps(size, sigma);
      EXPECT_NEAR(std::accumulate(t.begin(), t.end(), 0.0), 1.0, 1e-12);
      auto k = blur_kernel(size, sigma);
      double s = 0;
      for (double v : k.samples()) s += v;
      EXPECT_NEAR(s, 1.0, 1e-12);
    }
  }
  auto t = blur_taps(4, 4.0);
  EXPECT_NEAR(t[0], t[2] * std::exp(-4.0 / 32) / 1.0, 1e-15);
  EXPECT_NEAR(t[1], t[3], 1e-15);
  EXPECT_THROW(blur_taps(1, 1.0), ConfigError);
  EXPECT_THROW(blur_taps(4, 0.0), ConfigError);
}

TEST(GaussianBlur, ImpulseResponseIsKernel) {
  for (int size : {3, 4}) {
    RealPlane in(21, 21, 0.0);
    in(10, 10) = 1.0;
    auto taps = blur_taps(size, 1.5);
    auto out = convolve_separable(in, taps);
    auto k = blur_kernel(size, 1.5);
    const int c = size / 2;
    double total = 0;
    for (double v : out.samples()) total += v;
    EXPECT_NEAR(total, 1.0, 1e-12);
    for (int j = 0; j < size; ++j)
      for (int i = 0; i < size; ++i) EXPECT_NEAR(out(10 - c + i, 10 - c + j), k(i, j), 1e-15);
  }
}

TEST(GaussianBlur, PreservesConstantPlanes) {
  auto f = constant_frame(48, 32, 77, 140);
  auto b = gaussian_blur(f, 4, 4.0);
  EXPECT_EQ(b.left.y, f.left.y);
  EXPECT_EQ(b.right.u, f.right.u);
}

TEST(MeanShift, AddsToLumaWithSaturation) {
  auto f = constant_frame(16, 16, 100, 130);
  auto s = mean_shift(f, 20);
  for (auto v : s.left.y.samples()) EXPECT_EQ(v, 120);
  EXPECT_EQ(s.left.u, f.left.u);
  EXPECT_EQ(mean_shift(constant_frame(16, 16, 250), 20).right.y, VideoPlane(16, 16, 255));
  EXPECT_EQ(mean_shift(constant_frame(16, 16, 10), -20).right.y, VideoPlane(16, 16, 0));
  EXPECT_EQ(mean_shift(f, 0).left.y, f.left.y);
  EXPECT_THROW(mean_shift(f, 300), ConfigError);
}

TEST(ApplyDistortion, DepthUntouchedAndThreadInvariant) {
  auto seq = testing::make_stereo_sequence(64, 48, 6, 3, testing::DepthKind::layered);
  for (const char* text : {"noise:0.01:5", "blur:4:4", "shift:20"}) {
    auto spec = parse_distortion_spec(text);
    auto one = apply_distortion(seq, spec, 1);
    auto many = apply_distortion(seq, spec, 4);
    ASSERT_EQ(one.frame_count(), 6);
    for (int i = 0; i < 6; ++i) {
      EXPECT_EQ(one.left[i].y, many.left[i].y);
      EXPECT_EQ(one.right[i].v, many.right[i].v);
      EXPECT_EQ(one.depth[i].d, seq.depth[i].d);
    }
  }
}

TEST(ApplyDistortion, NoiseLadderLowersScore) {
  auto seq = testing::make_stereo_sequence(64, 64, 2, 4);
  auto cfg = MetricConfig::sd();
  double prev = hv3d_sequence(SequenceCursor(seq), SequenceCursor(seq), {}, cfg).pooled;
  for (double var : {0.001, 0.005, 0.01, 0.02}) {
    auto d = add_gaussian_noise(seq, var, 11);
    double s = hv3d_sequence(SequenceCursor(seq), SequenceCursor(d), {}, cfg).pooled;
    EXPECT_LT(s, prev) << var;
    prev = s;
  }
}

TEST(ApplyDistortion, EachGeneratorLowersScore) {
  auto seq = testing::make_stereo_sequence(64, 64, 2, 5);
  auto cfg = MetricConfig::sd();
  double ident = hv3d_sequence(SequenceCursor(seq), SequenceCursor(seq), {}, cfg).pooled;
  for (auto d : {add_gaussian_noise(seq, 0.01, 1), gaussian_blur(seq, 4, 4.0), mean_shift(seq, 20)})
    EXPECT_LT(hv3d_sequence(SequenceCursor(seq), SequenceCursor(d), {}, cfg).pooled, ident);
}

TEST(DistortionSpec, ParsesAndNames) {
  auto n = parse_distortion_spec("noise:0.01", 9);
  EXPECT_EQ(n.kind, DistortionKind::gaussian_noise);
  EXPECT_EQ(n.id, "noise_0.01");
  EXPECT_EQ(n.seed, 9u);
  EXPECT_EQ(parse_distortion_spec("noise:0.01:18446744073709551615").seed,
            18446744073709551615ull);
  auto b = parse_distortion_spec("blur:4:4");
  EXPECT_EQ(b.id, "blur_4_4");
  EXPECT_EQ(b.params, (std::vector<double>{4, 4}));
  EXPECT_EQ(parse_distortion_spec("shift:20").id, "shift_20");
  auto e = parse_distortion_spec("external:jpeg_q10:cod/{label}_{view}.yuv");
  EXPECT_EQ(e.kind, DistortionKind::external);
  EXPECT_EQ(e.pattern, "cod/{label}_{view}.yuv");
  EXPECT_THROW(distort_frame(constant_frame(16, 16, 1), e, 0), ConfigError);
}

TEST(DistortionSpec, RejectsMalformedText) {
  for (const char* bad : {"wobble:3", "noise:abc:1", "noise:0.01", "noise:-1:2", "noise:0.1:-4",
                          "blur:4", "blur:1:2", "blur:4:0", "blur:3.5:1", "shift", "shift:400",
                          "external:x", "noise:0.1:1:2"})
    EXPECT_THROW(parse_distortion_spec(bad), ConfigError) << bad;
}

}  // namespace
}  // namespace hv3d
