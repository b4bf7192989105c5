#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "hv3d/cyclopean.hpp"
#include "hv3d/error.hpp"
#include "hv3d/metrics2d.hpp"
#include "hv3d/plane.hpp"

namespace hv3d {

struct NormalizedDepth {
  RealPlane plane;        // samples in [0, 1]
  bool all_zero = false;  // frame maximum was 0; plane left at 0
};

// Divides every sample by the frame maximum.
inline NormalizedDepth normalize_depth(const DepthFrame& depth) {
  NormalizedDepth out{RealPlane(depth.width(), depth.height()), false};
  auto s = depth.d.samples();
  const auto peak = s.empty() ? 0 : *std::max_element(s.begin(), s.end());
  if (peak == 0) {
    out.all_zero = true;
    return out;
  }
  const double inv = 1.0 / peak;
  for (std::size_t i = 0; i < s.size(); ++i) out.plane.data()[i] = s[i] * inv;
  return out;
}

struct DepthVarianceField {
  std::vector<double> variances;  // one per grid block, grid order
  double max_variance = 0;
};

// Top-left corner of the fovea window centred on a grid block; windows that
// would cross the plane border slide inward so they stay full size.
inline PixelPoint fovea_origin(PixelPoint block, int block_size, int fovea,
                               int width, int height) {
  int x = block.x + block_size / 2 - fovea / 2;
  int y = block.y + block_size / 2 - fovea / 2;
  return {std::clamp(x, 0, width - fovea), std::clamp(y, 0, height - fovea)};
}

// Sample variance (divisor fovea^2 - 1) of the normalized depth over the
// fovea window surrounding each grid block.
inline DepthVarianceField local_depth_variance(const RealPlane& norm_depth,
                                               const BlockGrid& grid,
                                               int fovea = 64) {
  if (fovea < grid.block_size)
    throw ConfigError("fovea (" + std::to_string(fovea) +
                      ") must be at least the block size (" +
                      std::to_string(grid.block_size) + ")");
  const int w = norm_depth.width(), h = norm_depth.height();
  if (w < fovea || h < fovea)
    throw ConfigError("depth plane " + std::to_string(w) + "x" + std::to_string(h) +
                      " is smaller than the " + std::to_string(fovea) +
                      "x" + std::to_string(fovea) + " fovea window");

  // Extended-precision summed-area tables of x and x^2.
  const int sw = w + 1;
  std::vector<long double> s1(static_cast<std::size_t>(sw) * (h + 1), 0.0L);
  std::vector<long double> s2(s1.size(), 0.0L);
  auto at = [sw](int x, int y) { return static_cast<std::size_t>(y) * sw + x; };
  for (int y = 0; y < h; ++y) {
    long double r1 = 0, r2 = 0;
    for (int x = 0; x < w; ++x) {
      long double v = norm_depth(x, y);
      r1 += v;
      r2 += v * v;
      s1[at(x + 1, y + 1)] = s1[at(x + 1, y)] + r1;
      s2[at(x + 1, y + 1)] = s2[at(x + 1, y)] + r2;
    }
  }
  auto box = [&](const std::vector<long double>& s, PixelPoint o) {
    return s[at(o.x + fovea, o.y + fovea)] - s[at(o.x, o.y + fovea)] -
           s[at(o.x + fovea, o.y)] + s[at(o.x, o.y)];
  };

  const long double n = static_cast<long double>(fovea) * fovea;
  DepthVarianceField field;
  field.variances.reserve(grid.count());
  for (const auto& b : grid.origins) {
    auto o = fovea_origin(b, grid.block_size, fovea, w, h);
    long double sum = box(s1, o), sq = box(s2, o);
    double var = static_cast<double>((sq - sum * sum / n) / (n - 1));
    var = std::max(0.0, var);
    field.variances.push_back(var);
    field.max_variance = std::max(field.max_variance, var);
  }
  return field;
}

struct DepthOptions {
  int block_size = 16;
  int fovea = 64;
  double beta = 0.7;
  // Below this maximum block variance the scene counts as flat.
  double flat_threshold = 1e-12;
};

struct DepthResult {
  double q_d = 0;
  double variance_ratio = 0;  // mean(var_i) / max(var_i), 1 for flat scenes
  double depth_vif = 0;
  bool flat_scene = false;
  bool zero_depth = false;  // reference depth frame was all zero
};

// Variance-weighted depth term with a precomputed VIF(D, D'). The variance
// field is taken from the reference depth only.
inline DepthResult depth_quality(const DepthFrame& ref_depth, double depth_vif,
                                 const DepthOptions& opt = {}) {
  if (!(opt.beta > 0)) throw ConfigError("beta must be positive");
  if (opt.fovea < opt.block_size)
    throw ConfigError("fovea (" + std::to_string(opt.fovea) +
                      ") must be at least the block size (" +
                      std::to_string(opt.block_size) + ")");
  auto norm = normalize_depth(ref_depth);
  auto grid = make_block_grid(ref_depth.width(), ref_depth.height(), opt.block_size);
  if (grid.count() == 0)
    throw ContractError("depth_quality: plane holds no complete block");
  auto field = local_depth_variance(norm.plane, grid, opt.fovea);

  DepthResult r;
  r.depth_vif = depth_vif;
  r.zero_depth = norm.all_zero;
  if (field.max_variance < opt.flat_threshold) {
    r.flat_scene = true;
    r.variance_ratio = 1.0;
  } else {
    double sum = 0;
    for (double v : field.variances) sum += v;
    r.variance_ratio = sum / (static_cast<double>(field.variances.size()) *
                              field.max_variance);
  }
  r.q_d = std::pow(depth_vif, opt.beta) * r.variance_ratio;
  return r;
}

inline DepthResult depth_quality(const DepthFrame& ref_depth,
                                 const DepthFrame& dist_depth,
                                 const DepthOptions& opt = {}) {
  require_same_shape(ref_depth.d, dist_depth.d, "depth_quality");
  return depth_quality(ref_depth, vif(ref_depth.d, dist_depth.d), opt);
}

}  // namespace hv3d
