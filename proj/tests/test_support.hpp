#pragma once

// Synthetic content and scratch-directory helpers shared by the test suites.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "hv3d/hv3d.hpp"

namespace hv3d::testing {

// ramp: sawtooth of period 16 along x, so every fovea window whose width is a
// multiple of 16 holds the same sample multiset and hence the same variance.
enum class DepthKind { ramp, flat, layered };

// Band-limited texture: a few oriented sinusoids plus mild white noise,
// centred on mid-grey and kept well inside [0, 255].
inline VideoPlane make_texture(int w, int h, std::uint32_t seed, double amplitude = 60) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> phase(0, 6.283185307179586);
  std::uniform_real_distribution<double> freq(0.03, 0.45);
  std::normal_distribution<double> noise(0, 6);
  struct Wave { double fx, fy, ph, amp; };
  Wave waves[5];
  for (int i = 0; i < 5; ++i)
    waves[i] = {freq(rng), freq(rng) * (i % 2 ? 1 : -1), phase(rng), amplitude / (i + 1)};
  VideoPlane p(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double v = 128;
      for (const auto& wv : waves) v += wv.amp * std::sin(wv.fx * x + wv.fy * y + wv.ph) / 2;
      v += noise(rng);
      p(x, y) = saturate_u8(v);
    }
  return p;
}

inline VideoPlane random_plane(int w, int h, std::uint32_t seed, int lo = 0, int hi = 255) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> d(lo, hi);
  VideoPlane p(w, h);
  for (auto& s : p.samples()) s = static_cast<std::uint8_t>(d(rng));
  return p;
}

inline DepthFrame make_depth(int w, int h, DepthKind kind) {
  DepthFrame d{VideoPlane(w, h)};
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      switch (kind) {
        case DepthKind::ramp:
          d.d(x, y) = static_cast<std::uint8_t>(20 + 12 * (x % 16));
          break;
        case DepthKind::flat:
          d.d(x, y) = 128;
          break;
        case DepthKind::layered: {
          bool fg = x > w / 4 && x < 3 * w / 4 && y > h / 4 && y < 3 * h / 4;
          d.d(x, y) = static_cast<std::uint8_t>(fg ? 200 : 60 + y / 4);
          break;
        }
      }
    }
  return d;
}

// Stereo sequence cut from one wide scene: the left view sees the scene
// `disparity` pixels further right than the right view; the scene pans by
// one pixel per frame.
inline StereoSequence make_stereo_sequence(int w, int h, int frames, std::uint32_t seed,
                                           DepthKind depth = DepthKind::ramp,
                                           int disparity = 4) {
  const int pad = disparity + frames + 2;
  VideoPlane luma = make_texture(w + pad, h, seed);
  VideoPlane cu = make_texture(w / 2 + pad, h / 2, seed + 101, 30);
  VideoPlane cv = make_texture(w / 2 + pad, h / 2, seed + 202, 30);
  StereoSequence s;
  s.label = "synthetic" + std::to_string(seed);
  s.fps = 30;
  for (int t = 0; t < frames; ++t) {
    Frame l(w, h), r(w, h);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        l.y(x, y) = luma(x + t + disparity, y);
        r.y(x, y) = luma(x + t, y);
      }
    for (int y = 0; y < h / 2; ++y)
      for (int x = 0; x < w / 2; ++x) {
        l.u(x, y) = cu(x + t + disparity / 2, y);
        r.u(x, y) = cu(x + t, y);
        l.v(x, y) = cv(x + t + disparity / 2, y);
        r.v(x, y) = cv(x + t, y);
      }
    s.left.push_back(std::move(l));
    s.right.push_back(std::move(r));
    s.depth.push_back(make_depth(w, h, depth));
  }
  return s;
}

// Fresh, empty scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("hv3d_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

// Writes a resident sequence as three raw files and returns a manifest entry.
inline ManifestEntry write_sequence_files(const StereoSequence& s,
                                          const std::filesystem::path& dir,
                                          const std::string& label) {
  ManifestEntry e;
  e.label = label;
  e.left_path = dir / (label + "_left.yuv");
  e.right_path = dir / (label + "_right.yuv");
  e.depth_path = dir / (label + "_depth.yuv");
  e.width = s.width();
  e.height = s.height();
  e.fps = s.fps;
  e.frame_count = s.frame_count();
  write_yuv420_sequence(e.left_path, s.left);
  write_yuv420_sequence(e.right_path, s.right);
  write_depth_sequence(e.depth_path, s.depth);
  return e;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace hv3d::testing
