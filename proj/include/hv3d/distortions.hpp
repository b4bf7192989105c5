#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hv3d/error.hpp"
#include "hv3d/fileio.hpp"
#include "hv3d/parallel.hpp"
#include "hv3d/plane.hpp"
#include "hv3d/video_io.hpp"

namespace hv3d {

enum class DistortionKind { gaussian_noise, gaussian_blur, mean_shift, external };

// One entry of a distortion corpus.
//   gaussian_noise: params = {variance on the [0,1] scale}, seed required
//   gaussian_blur:  params = {kernel_size, sigma}
//   mean_shift:     params = {delta}
//   external:       pre-distorted files; `pattern` names them
struct DistortionSpec {
  DistortionKind kind = DistortionKind::gaussian_noise;
  std::vector<double> params;
  std::optional<std::uint64_t> seed;
  bool luma_only = false;  // noise only
  std::string id;          // distortion identifier in manifests and MOS tables
  // External kind: path template with {label} and {view} (left/right/depth)
  // placeholders, relative to the input manifest's directory.
  std::string pattern;

  void validate() const {
    auto need = [&](std::size_t n, const char* what) {
      if (params.size() != n)
        throw ConfigError(std::string(what) + " expects " + std::to_string(n) +
                          " parameter(s)");
    };
    switch (kind) {
      case DistortionKind::gaussian_noise:
        need(1, "gaussian_noise");
        if (!(params[0] > 0)) throw ConfigError("noise variance must be positive");
        if (!seed) throw ConfigError("gaussian_noise requires a seed");
        break;
      case DistortionKind::gaussian_blur:
        need(2, "gaussian_blur");
        if (params[0] < 2 || params[0] != std::floor(params[0]))
          throw ConfigError("blur kernel size must be an integer >= 2");
        if (!(params[1] > 0)) throw ConfigError("blur sigma must be positive");
        break;
      case DistortionKind::mean_shift:
        need(1, "mean_shift");
        if (!(std::abs(params[0]) < 255))
          throw ConfigError("mean shift magnitude must be below 255");
        break;
      case DistortionKind::external:
        if (pattern.empty()) throw ConfigError("external distortion needs a path pattern");
        break;
    }
    if (id.empty()) throw ConfigError("distortion spec has no identifier");
  }
};

inline std::string kind_name(DistortionKind k) {
  switch (k) {
    case DistortionKind::gaussian_noise: return "gaussian_noise";
    case DistortionKind::gaussian_blur: return "gaussian_blur";
    case DistortionKind::mean_shift: return "mean_shift";
    case DistortionKind::external: return "external";
  }
  return "?";
}

// Text form used on the command line:
//   noise:VARIANCE[:SEED]    blur:SIZE:SIGMA    shift:DELTA
//   external:ID:PATTERN
// Kind names may also be spelled out (gaussian_noise, gaussian_blur,
// mean_shift). Each spec gets a default id such as "noise_0.01".
inline DistortionSpec parse_distortion_spec(const std::string& text,
                                            std::optional<std::uint64_t> default_seed = {}) {
  auto parts = split(text, ':');
  const std::string& kind = parts[0];
  DistortionSpec s;
  auto num = [&](std::size_t i) {
    try {
      return parse_real(parts.at(i), "distortion '" + text + "'");
    } catch (const std::out_of_range&) {
      throw ConfigError("distortion '" + text + "' is missing parameters");
    } catch (const IngestError& e) {
      throw ConfigError(e.what());
    }
  };
  if (kind == "noise" || kind == "gaussian_noise") {
    s.kind = DistortionKind::gaussian_noise;
    s.params = {num(1)};
    if (parts.size() > 3) throw ConfigError("too many fields in '" + text + "'");
    s.seed = default_seed;
    if (parts.size() == 3) {
      const std::string_view f = trim(parts[2]);
      std::uint64_t v = 0;
      auto [end, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (f.empty() || ec != std::errc{} || end != f.data() + f.size())
        throw ConfigError("noise seed in '" + text + "' must be an unsigned 64-bit integer");
      s.seed = v;
    }
    s.id = "noise_" + parts[1];
  } else if (kind == "blur" || kind == "gaussian_blur") {
    s.kind = DistortionKind::gaussian_blur;
    s.params = {num(1), num(2)};
    if (parts.size() != 3) throw ConfigError("blur takes SIZE:SIGMA in '" + text + "'");
    s.id = "blur_" + parts[1] + "_" + parts[2];
  } else if (kind == "shift" || kind == "mean_shift") {
    s.kind = DistortionKind::mean_shift;
    s.params = {num(1)};
    if (parts.size() != 2) throw ConfigError("shift takes DELTA in '" + text + "'");
    s.id = "shift_" + parts[1];
  } else if (kind == "external") {
    s.kind = DistortionKind::external;
    if (parts.size() != 3 || parts[1].empty())
      throw ConfigError("external takes ID:PATTERN in '" + text + "'");
    s.id = parts[1];
    s.pattern = parts[2];
  } else {
    throw ConfigError("unknown distortion kind '" + kind + "'");
  }
  s.validate();
  return s;
}

// ---------------------------------------------------------------------------
// Noise

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Standard normal deviates from mt19937_64 via Box-Muller; spelled out so the
// stream does not depend on the standard library's distribution code.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = ((engine_() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    double u2 = (engine_() >> 11) * 0x1.0p-53;        // [0, 1)
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0;
  bool has_spare_ = false;
};

inline void add_noise(VideoPlane& p, double sigma, NormalStream& rng) {
  for (auto& s : p.samples()) s = saturate_u8(s + sigma * rng.next());
}

}  // namespace detail

inline std::uint64_t frame_seed(std::uint64_t seed, std::uint64_t frame_index) {
  return detail::splitmix64(seed ^ detail::splitmix64(frame_index));
}

// Zero-mean white Gaussian noise with `variance` on the [0,1] intensity scale
// (sigma = 255 sqrt(variance) in sample units), added to both views and
// saturated to [0, 255]. The generator is reseeded per frame from
// (seed, frame_index), so output does not depend on processing order.
inline StereoFrame add_gaussian_noise(const StereoFrame& in, double variance,
                                      std::uint64_t seed, std::uint64_t frame_index,
                                      bool luma_only = false) {
  if (!(variance > 0)) throw ConfigError("noise variance must be positive");
  StereoFrame out = in;
  const double sigma = 255.0 * std::sqrt(variance);
  detail::NormalStream rng(frame_seed(seed, frame_index));
  for (Frame* f : {&out.left, &out.right}) {
    detail::add_noise(f->y, sigma, rng);
    if (!luma_only) {
      detail::add_noise(f->u, sigma, rng);
      detail::add_noise(f->v, sigma, rng);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Blur

// Normalized 1D Gaussian of `size` taps; tap i sits at offset i - size/2, so
// an even kernel has one more tap before its centre than after.
inline std::vector<double> blur_taps(int size, double sigma) {
  if (size < 2) throw ConfigError("blur kernel size must be at least 2");
  if (!(sigma > 0)) throw ConfigError("blur sigma must be positive");
  std::vector<double> t(size);
  double sum = 0;
  for (int i = 0; i < size; ++i) {
    double d = i - size / 2;
    t[i] = std::exp(-d * d / (2 * sigma * sigma));
    sum += t[i];
  }
  for (auto& x : t) x /= sum;
  return t;
}

// 2D kernel k(i, j) = t(i) t(j) as a plane (i horizontal, j vertical).
inline RealPlane blur_kernel(int size, double sigma) {
  auto t = blur_taps(size, sigma);
  RealPlane k(size, size);
  for (int j = 0; j < size; ++j)
    for (int i = 0; i < size; ++i) k(i, j) = t[i] * t[j];
  return k;
}

// Separable convolution with edge replication:
//   out(x, y) = sum_ij k(i, j) in(x - i + c, y - j + c),  c = size / 2
// so an impulse at p produces the kernel laid out from p - c.
inline RealPlane convolve_separable(const RealPlane& in, const std::vector<double>& taps) {
  const int n = static_cast<int>(taps.size()), c = n / 2;
  const int w = in.width(), h = in.height();
  RealPlane tmp(w, h), out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0;
      for (int i = 0; i < n; ++i) acc += taps[i] * in.clamped(x - i + c, y);
      tmp(x, y) = acc;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0;
      for (int j = 0; j < n; ++j) acc += taps[j] * tmp.clamped(x, y - j + c);
      out(x, y) = acc;
    }
  return out;
}

inline VideoPlane blur_plane(const VideoPlane& p, const std::vector<double>& taps) {
  return to_video_plane(convolve_separable(plane_cast<double>(p), taps));
}

inline StereoFrame gaussian_blur(const StereoFrame& in, int kernel_size, double sigma) {
  auto taps = blur_taps(kernel_size, sigma);
  StereoFrame out = in;
  for (Frame* f : {&out.left, &out.right}) {
    f->y = blur_plane(f->y, taps);
    f->u = blur_plane(f->u, taps);
    f->v = blur_plane(f->v, taps);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Mean shift

// Adds `delta` to the luma of both views with saturation; chroma untouched.
inline StereoFrame mean_shift(const StereoFrame& in, double delta) {
  if (!(std::abs(delta) < 255)) throw ConfigError("mean shift magnitude must be below 255");
  StereoFrame out = in;
  for (Frame* f : {&out.left, &out.right})
    for (auto& s : f->y.samples()) s = saturate_u8(s + delta);
  return out;
}

// ---------------------------------------------------------------------------

// Applies a synthesizable spec to one frame. Depth is never modified.
inline StereoFrame distort_frame(const StereoFrame& in, const DistortionSpec& spec,
                                 std::uint64_t frame_index) {
  switch (spec.kind) {
    case DistortionKind::gaussian_noise:
      return add_gaussian_noise(in, spec.params[0], *spec.seed, frame_index,
                                spec.luma_only);
    case DistortionKind::gaussian_blur:
      return gaussian_blur(in, static_cast<int>(spec.params[0]), spec.params[1]);
    case DistortionKind::mean_shift:
      return mean_shift(in, spec.params[0]);
    case DistortionKind::external:
      break;
  }
  throw ConfigError("external distortions are ingested from files, not synthesized");
}

// Frames are processed in parallel; each output slot depends only on its own
// frame and index, so any thread count gives identical output.
inline StereoSequence apply_distortion(const StereoSequence& in,
                                       const DistortionSpec& spec,
                                       unsigned threads = 1) {
  spec.validate();
  in.validate();
  StereoSequence out;
  out.fps = in.fps;
  out.label = in.label + "__" + spec.id;
  const auto n = static_cast<std::size_t>(in.frame_count());
  out.left.resize(n);
  out.right.resize(n);
  out.depth = in.depth;
  parallel_for(n, threads, [&](std::size_t i) {
    auto f = distort_frame(in.frame(static_cast<int>(i)), spec, i);
    out.left[i] = std::move(f.left);
    out.right[i] = std::move(f.right);
  });
  return out;
}

inline StereoSequence add_gaussian_noise(const StereoSequence& in, double variance,
                                         std::uint64_t seed, bool luma_only = false,
                                         unsigned threads = 1) {
  DistortionSpec s{DistortionKind::gaussian_noise, {variance}, seed, luma_only, "noise", {}};
  return apply_distortion(in, s, threads);
}

inline StereoSequence gaussian_blur(const StereoSequence& in, int kernel_size = 4,
                                    double sigma = 4.0, unsigned threads = 1) {
  DistortionSpec s{DistortionKind::gaussian_blur,
                   {static_cast<double>(kernel_size), sigma}, {}, false, "blur", {}};
  return apply_distortion(in, s, threads);
}

inline StereoSequence mean_shift(const StereoSequence& in, double delta = 20.0,
                                 unsigned threads = 1) {
  DistortionSpec s{DistortionKind::mean_shift, {delta}, {}, false, "shift", {}};
  return apply_distortion(in, s, threads);
}

}  // namespace hv3d
