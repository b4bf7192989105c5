#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "hv3d/error.hpp"
#include "hv3d/plane.hpp"

namespace hv3d {

// Normalized 1D Gaussian taps of odd length `size`, centre at size/2.
inline std::vector<double> gaussian_taps(int size, double sigma) {
  if (size < 1 || sigma <= 0) throw ConfigError("invalid Gaussian window");
  std::vector<double> taps(size);
  double sum = 0;
  int c = size / 2;
  for (int i = 0; i < size; ++i) {
    double d = i - c;
    taps[i] = std::exp(-d * d / (2 * sigma * sigma));
    sum += taps[i];
  }
  for (auto& t : taps) t /= sum;
  return taps;
}

namespace detail {

// Separable correlation with an odd symmetric kernel, output the same size as
// the input, borders replicated.
inline RealPlane blur_same(const RealPlane& in, const std::vector<double>& taps) {
  const int w = in.width(), h = in.height();
  const int r = static_cast<int>(taps.size()) / 2;
  RealPlane tmp(w, h), out(w, h);
  for (int y = 0; y < h; ++y) {
    auto src = in.row(y);
    auto dst = tmp.row(y);
    for (int x = 0; x < w; ++x) {
      double acc = 0;
      for (int k = -r; k <= r; ++k)
        acc += taps[k + r] * src[std::clamp(x + k, 0, w - 1)];
      dst[x] = acc;
    }
  }
  for (int y = 0; y < h; ++y) {
    auto dst = out.row(y);
    for (int x = 0; x < w; ++x) dst[x] = 0;
    for (int k = -r; k <= r; ++k) {
      auto src = tmp.row(std::clamp(y + k, 0, h - 1));
      double t = taps[k + r];
      for (int x = 0; x < w; ++x) dst[x] += t * src[x];
    }
  }
  return out;
}

// Separable correlation keeping only positions where the kernel fits fully.
inline RealPlane blur_valid(const RealPlane& in, const std::vector<double>& taps) {
  const int n = static_cast<int>(taps.size());
  const int w = in.width() - n + 1, h = in.height() - n + 1;
  RealPlane tmp(w, in.height()), out(w, h);
  for (int y = 0; y < in.height(); ++y) {
    auto src = in.row(y);
    auto dst = tmp.row(y);
    for (int x = 0; x < w; ++x) {
      double acc = 0;
      for (int k = 0; k < n; ++k) acc += taps[k] * src[x + k];
      dst[x] = acc;
    }
  }
  for (int y = 0; y < h; ++y) {
    auto dst = out.row(y);
    for (int x = 0; x < w; ++x) dst[x] = 0;
    for (int k = 0; k < n; ++k) {
      auto src = tmp.row(y + k);
      for (int x = 0; x < w; ++x) dst[x] += taps[k] * src[x];
    }
  }
  return out;
}

inline RealPlane product(const RealPlane& a, const RealPlane& b) {
  RealPlane out(a.width(), a.height());
  for (std::size_t i = 0; i < a.size(); ++i)
    out.data()[i] = a.data()[i] * b.data()[i];
  return out;
}

inline RealPlane decimate2(const RealPlane& in) {
  RealPlane out((in.width() + 1) / 2, (in.height() + 1) / 2);
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x) out(x, y) = in(2 * x, 2 * y);
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// VIF (pixel domain, multi-scale, scalar Gaussian scale mixture)

struct VifOptions {
  int max_scales = 4;
  int window = 11;
  double window_sigma = 1.5;
  // Variance of the additive visual-noise channel, 0-255 sample units.
  double noise_variance = 2.0;
  // A pyramid level is only evaluated when its smaller side has at least
  // this many samples.
  int min_scale_size = 4;
};

// Number of pyramid levels evaluated for a plane; always at least one.
inline int vif_scale_count(int width, int height, const VifOptions& opt = {}) {
  int d = std::min(width, height);
  int scales = 1;
  while (scales < opt.max_scales) {
    d = (d + 1) / 2;
    if (d < opt.min_scale_size) break;
    ++scales;
  }
  return scales;
}

struct VifTerms {
  double numerator = 0;
  double denominator = 0;
};

// Information terms of one pyramid level.
inline VifTerms vif_scale_terms(const RealPlane& ref, const RealPlane& dist,
                                const std::vector<double>& taps,
                                double noise_variance) {
  using detail::blur_same;
  using detail::product;
  constexpr double eps = 1e-10;
  RealPlane mu1 = blur_same(ref, taps);
  RealPlane mu2 = blur_same(dist, taps);
  RealPlane xx = blur_same(product(ref, ref), taps);
  RealPlane yy = blur_same(product(dist, dist), taps);
  RealPlane xy = blur_same(product(ref, dist), taps);

  VifTerms t;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    double m1 = mu1.data()[i], m2 = mu2.data()[i];
    double s1 = std::max(0.0, xx.data()[i] - m1 * m1);
    double s2 = std::max(0.0, yy.data()[i] - m2 * m2);
    double s12 = xy.data()[i] - m1 * m2;

    double g = s12 / (s1 + eps);
    double sv = s2 - g * s12;
    if (s1 < eps) {
      g = 0;
      sv = s2;
      s1 = 0;
    }
    if (s2 < eps) {
      g = 0;
      sv = 0;
    }
    if (g < 0) {
      sv = s2;
      g = 0;
    }
    sv = std::max(sv, eps);

    t.numerator += std::log10(1 + g * g * s1 / (sv + noise_variance));
    t.denominator += std::log10(1 + s1 / noise_variance);
  }
  return t;
}

// Visual information fidelity of `dist` relative to `ref`. 1 for identical
// planes, below 1 for information loss, above 1 for contrast enhancement.
// A reference with no variance anywhere carries no information; such a pair
// scores 1.
template <typename T>
double vif(const Plane<T>& ref, const Plane<T>& dist, const VifOptions& opt = {}) {
  require_same_shape(ref, dist, "vif");
  if (ref.empty()) throw ContractError("vif: empty plane");
  auto taps = gaussian_taps(opt.window, opt.window_sigma);
  RealPlane a = plane_cast<double>(ref);
  RealPlane b = plane_cast<double>(dist);
  const int scales = vif_scale_count(ref.width(), ref.height(), opt);

  double num = 0, den = 0;
  for (int s = 0; s < scales; ++s) {
    if (s > 0) {
      a = detail::decimate2(detail::blur_same(a, taps));
      b = detail::decimate2(detail::blur_same(b, taps));
    }
    auto t = vif_scale_terms(a, b, taps, opt.noise_variance);
    num += t.numerator;
    den += t.denominator;
  }
  if (den <= 1e-300) return 1.0;
  return num / den;
}

// ---------------------------------------------------------------------------
// SSIM

struct SsimOptions {
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 255.0;
  int window = 11;
  double window_sigma = 1.5;

  double c1() const { return (k1 * dynamic_range) * (k1 * dynamic_range); }
  double c2() const { return (k2 * dynamic_range) * (k2 * dynamic_range); }
};

inline double ssim_formula(double mu1, double mu2, double var1, double var2,
                           double cov, double c1, double c2) {
  return ((2 * mu1 * mu2 + c1) * (2 * cov + c2)) /
         ((mu1 * mu1 + mu2 * mu2 + c1) * (var1 + var2 + c2));
}

// Single-window SSIM: statistics taken once over all samples (population
// variance and covariance). Inputs are used as-is, without clipping.
template <typename T>
double ssim_block(const Plane<T>& ref, const Plane<T>& dist,
                  const SsimOptions& opt = {}) {
  require_same_shape(ref, dist, "ssim_block");
  if (ref.empty()) throw ContractError("ssim_block: empty block");
  const double n = static_cast<double>(ref.size());
  double m1 = 0, m2 = 0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    m1 += ref.data()[i];
    m2 += dist.data()[i];
  }
  m1 /= n;
  m2 /= n;
  double v1 = 0, v2 = 0, cv = 0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    double a = ref.data()[i] - m1, b = dist.data()[i] - m2;
    v1 += a * a;
    v2 += b * b;
    cv += a * b;
  }
  return ssim_formula(m1, m2, v1 / n, v2 / n, cv / n, opt.c1(), opt.c2());
}

// Mean SSIM over every position where the Gaussian window fits inside the
// plane. Planes smaller than the window fall back to one whole-plane window.
template <typename T>
double ssim_plane(const Plane<T>& ref, const Plane<T>& dist,
                  const SsimOptions& opt = {}) {
  require_same_shape(ref, dist, "ssim_plane");
  if (ref.empty()) throw ContractError("ssim_plane: empty plane");
  if (ref.width() < opt.window || ref.height() < opt.window)
    return ssim_block(ref, dist, opt);

  using detail::blur_valid;
  using detail::product;
  auto taps = gaussian_taps(opt.window, opt.window_sigma);
  RealPlane a = plane_cast<double>(ref);
  RealPlane b = plane_cast<double>(dist);
  RealPlane mu1 = blur_valid(a, taps);
  RealPlane mu2 = blur_valid(b, taps);
  RealPlane xx = blur_valid(product(a, a), taps);
  RealPlane yy = blur_valid(product(b, b), taps);
  RealPlane xy = blur_valid(product(a, b), taps);

  const double c1 = opt.c1(), c2 = opt.c2();
  double sum = 0;
  for (std::size_t i = 0; i < mu1.size(); ++i) {
    double m1 = mu1.data()[i], m2 = mu2.data()[i];
    sum += ssim_formula(m1, m2, xx.data()[i] - m1 * m1, yy.data()[i] - m2 * m2,
                        xy.data()[i] - m1 * m2, c1, c2);
  }
  return sum / static_cast<double>(mu1.size());
}

}  // namespace hv3d
