#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include "hv3d/dct.hpp"
#include "hv3d/error.hpp"
#include "hv3d/metrics2d.hpp"
#include "hv3d/parallel.hpp"
#include "hv3d/plane.hpp"

namespace hv3d {

// Annex K luminance quantization table, row = vertical frequency.
inline constexpr std::array<std::array<int, 8>, 8> kJpegLumaQuant = {{
    {16, 11, 10, 16, 24, 40, 51, 61},
    {12, 12, 14, 19, 26, 58, 60, 55},
    {14, 13, 16, 24, 40, 57, 69, 56},
    {14, 17, 22, 29, 51, 87, 80, 62},
    {18, 22, 37, 56, 68, 109, 103, 77},
    {24, 35, 55, 64, 81, 104, 113, 92},
    {49, 64, 78, 87, 103, 121, 120, 101},
    {72, 92, 95, 98, 112, 100, 103, 99},
}};

// ---------------------------------------------------------------------------
// Contrast sensitivity mask

struct CsfMask {
  int size = 0;
  RealPlane weights;  // weights(u, v): u horizontal, v vertical frequency
};

namespace detail {

inline double catmull_rom(double p0, double p1, double p2, double p3, double t) {
  double t2 = t * t, t3 = t2 * t;
  return p0 * (-0.5 * t3 + t2 - 0.5 * t) + p1 * (1.5 * t3 - 2.5 * t2 + 1.0) +
         p2 * (-1.5 * t3 + 2.0 * t2 + 0.5 * t) + p3 * (0.5 * t3 - 0.5 * t2);
}

// Separable Catmull-Rom upsampling by an integer factor. Output sample o maps
// to source coordinate o / factor, so every factor-th output reproduces a
// source sample exactly; the trailing samples extrapolate with edge clamping.
inline RealPlane upsample_bicubic(const RealPlane& in, int factor) {
  auto resample = [factor](std::span<const double> src, std::span<double> dst) {
    const int n = static_cast<int>(src.size());
    auto at = [&](int i) { return src[std::clamp(i, 0, n - 1)]; };
    for (std::size_t o = 0; o < dst.size(); ++o) {
      int i = static_cast<int>(o) / factor;
      double t = static_cast<double>(static_cast<int>(o) % factor) / factor;
      dst[o] = catmull_rom(at(i - 1), at(i), at(i + 1), at(i + 2), t);
    }
  };
  const int w = in.width() * factor, h = in.height() * factor;
  RealPlane wide(w, in.height());
  for (int y = 0; y < in.height(); ++y) resample(in.row(y), wide.row(y));
  RealPlane out(w, h);
  std::vector<double> col_in(in.height()), col_out(h);
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < in.height(); ++y) col_in[y] = wide(x, y);
    resample(col_in, col_out);
    for (int y = 0; y < h; ++y) out(x, y) = col_out[y];
  }
  return out;
}

}  // namespace detail

// Weights proportional to the reciprocal JPEG luminance quantizer, bicubically
// upsampled for 16x16 blocks, then scaled to an arithmetic mean of exactly 1.
inline CsfMask build_csf_mask(int block_size) {
  if (block_size != 8 && block_size != 16)
    throw ConfigError("CSF mask supports block sizes 8 and 16, got " +
                      std::to_string(block_size));
  RealPlane base(8, 8);
  for (int v = 0; v < 8; ++v)
    for (int u = 0; u < 8; ++u) base(u, v) = 1.0 / kJpegLumaQuant[v][u];
  RealPlane w = block_size == 8 ? base : detail::upsample_bicubic(base, 2);

  double sum = 0;
  for (double x : w.samples()) sum += x;
  const double scale = static_cast<double>(w.size()) / sum;
  for (double& x : w.samples()) x *= scale;
  return {block_size, std::move(w)};
}

// ---------------------------------------------------------------------------
// Block grid and matching

struct PixelPoint {
  int x = 0;
  int y = 0;
  friend bool operator==(const PixelPoint&, const PixelPoint&) = default;
};

// Complete blocks only; a partial strip at the right or bottom edge is left
// out of the grid.
struct BlockGrid {
  int block_size = 16;
  int cols = 0;
  int rows = 0;
  std::vector<PixelPoint> origins;

  std::size_t count() const { return origins.size(); }
};

inline BlockGrid make_block_grid(int width, int height, int block_size) {
  if (block_size < 1) throw ConfigError("block size must be positive");
  BlockGrid g;
  g.block_size = block_size;
  g.cols = width / block_size;
  g.rows = height / block_size;
  g.origins.reserve(static_cast<std::size_t>(g.cols) * g.rows);
  for (int r = 0; r < g.rows; ++r)
    for (int c = 0; c < g.cols; ++c)
      g.origins.push_back({c * block_size, r * block_size});
  return g;
}

enum class MatchCost { sad, ssd };

struct SearchWindow {
  int range_x = 64;
  int range_y = 4;
  MatchCost cost = MatchCost::sad;
};

// `displacement` maps the host block origin to the matched block origin in
// the other view. `sad` holds the matching cost (SSD when so configured).
struct BlockCorrespondence {
  PixelPoint left_origin;
  PixelPoint displacement;
  std::int64_t sad = 0;
};

namespace detail {

// Candidate displacements in tie-break priority order: smaller |dx|, then
// smaller |dy|, then raster order (dy, then dx).
inline std::vector<PixelPoint> search_order(int rx, int ry) {
  std::vector<PixelPoint> out;
  out.reserve(static_cast<std::size_t>(2 * rx + 1) * (2 * ry + 1));
  for (int ax = 0; ax <= rx; ++ax)
    for (int ay = 0; ay <= ry; ++ay)
      for (int dy : {-ay, ay}) {
        if (ay == 0 && dy != -ay) continue;
        for (int dx : {-ax, ax}) {
          if (ax == 0 && dx != -ax) continue;
          out.push_back({dx, dy});
        }
      }
  return out;
}

inline std::int64_t block_cost(const VideoPlane& a, PixelPoint pa,
                               const VideoPlane& b, PixelPoint pb, int size,
                               MatchCost cost, std::int64_t bound) {
  std::int64_t acc = 0;
  for (int y = 0; y < size; ++y) {
    const std::uint8_t* ra = a.row(pa.y + y).data() + pa.x;
    const std::uint8_t* rb = b.row(pb.y + y).data() + pb.x;
    for (int x = 0; x < size; ++x) {
      int d = static_cast<int>(ra[x]) - static_cast<int>(rb[x]);
      acc += cost == MatchCost::sad ? std::abs(d) : d * d;
    }
    if (acc >= bound) return acc;
  }
  return acc;
}

}  // namespace detail

// For every grid block of `host`, the in-plane displacement into `other` with
// the lowest matching cost inside the search window.
inline std::vector<BlockCorrespondence> match_blocks(const VideoPlane& host,
                                                     const VideoPlane& other,
                                                     const BlockGrid& grid,
                                                     const SearchWindow& search,
                                                     unsigned threads = 1) {
  require_same_shape(host, other, "match_blocks");
  if (search.range_x < 0 || search.range_y < 0)
    throw ConfigError("search ranges must be nonnegative");
  const int b = grid.block_size;
  const auto order = detail::search_order(search.range_x, search.range_y);
  std::vector<BlockCorrespondence> out(grid.count());

  parallel_for(grid.count(), threads, [&](std::size_t i) {
    const PixelPoint o = grid.origins[i];
    BlockCorrespondence best{o, {0, 0}, std::numeric_limits<std::int64_t>::max()};
    for (const PixelPoint d : order) {
      PixelPoint p{o.x + d.x, o.y + d.y};
      if (p.x < 0 || p.y < 0 || p.x + b > other.width() || p.y + b > other.height())
        continue;
      auto c = detail::block_cost(host, o, other, p, b, search.cost, best.sad);
      if (c < best.sad) {
        best.displacement = d;
        best.sad = c;
        if (c == 0) break;
      }
    }
    out[i] = best;
  });
  return out;
}

// ---------------------------------------------------------------------------
// 3D-DCT fusion

struct CyclopeanBlock {
  RealPlane coefficients;
};

// Orthonormal 3D-DCT of a two-block stack. Along the view axis the 2-point
// DCT gives low = (A + B) / sqrt(2) and high = (A - B) / sqrt(2), where A and
// B are the 2D-DCTs of the two blocks.
struct ViewStackDct {
  RealPlane low;
  RealPlane high;
};

inline ViewStackDct stack_dct_forward(const RealPlane& left_block,
                                      const RealPlane& right_block, const Dct2& dct) {
  require_same_shape(left_block, right_block, "3D-DCT");
  RealPlane a = dct.forward(left_block);
  RealPlane b = dct.forward(right_block);
  RealPlane high(a.width(), a.height());
  for (std::size_t i = 0; i < a.size(); ++i) {
    double p = a.data()[i], q = b.data()[i];
    a.data()[i] = (p + q) / std::numbers::sqrt2;
    high.data()[i] = (p - q) / std::numbers::sqrt2;
  }
  return {std::move(a), std::move(high)};
}

// Reconstructs both blocks; first = left, second = right.
inline std::pair<RealPlane, RealPlane> stack_dct_inverse(const ViewStackDct& c,
                                                         const Dct2& dct) {
  require_same_shape(c.low, c.high, "inverse 3D-DCT");
  RealPlane a(c.low.width(), c.low.height()), b(c.low.width(), c.low.height());
  for (std::size_t i = 0; i < a.size(); ++i) {
    double lo = c.low.data()[i], hi = c.high.data()[i];
    a.data()[i] = (lo + hi) / std::numbers::sqrt2;
    b.data()[i] = (lo - hi) / std::numbers::sqrt2;
  }
  return {dct.inverse(a), dct.inverse(b)};
}

// Low-frequency (view-axis DC) slice of the stack transform; the high slice
// is discarded.
inline CyclopeanBlock fuse_3d_dct(const RealPlane& left_block,
                                  const RealPlane& right_block,
                                  const Dct2& dct) {
  require_same_shape(left_block, right_block, "fuse_3d_dct");
  RealPlane a = dct.forward(left_block);
  RealPlane b = dct.forward(right_block);
  for (std::size_t i = 0; i < a.size(); ++i)
    a.data()[i] = (a.data()[i] + b.data()[i]) / std::numbers::sqrt2;
  return {std::move(a)};
}

inline CyclopeanBlock fuse_3d_dct(const RealPlane& left_block,
                                  const RealPlane& right_block) {
  return fuse_3d_dct(left_block, right_block, Dct2(left_block.width()));
}

// Elementwise weighting of the fused coefficients by the mask.
inline CyclopeanBlock apply_csf(const CyclopeanBlock& block, const CsfMask& mask) {
  require_same_shape(block.coefficients, mask.weights, "apply_csf");
  CyclopeanBlock out{RealPlane(mask.size, mask.size)};
  for (std::size_t i = 0; i < out.coefficients.size(); ++i)
    out.coefficients.data()[i] =
        mask.weights.data()[i] * block.coefficients.data()[i];
  return out;
}

// ---------------------------------------------------------------------------
// Cyclopean quality

inline RealPlane extract_block(const VideoPlane& p, PixelPoint origin, int size) {
  RealPlane out(size, size);
  for (int y = 0; y < size; ++y) {
    const std::uint8_t* src = p.row(origin.y + y).data() + origin.x;
    for (int x = 0; x < size; ++x) out(x, y) = src[x];
  }
  return out;
}

struct StereoLuma {
  const VideoPlane& left;
  const VideoPlane& right;
};

// Which view carries the block grid. `both` averages the two single-host
// results, which makes the score independent of view labelling.
enum class GridHost { left, right, both };

struct CyclopeanOptions {
  SearchWindow search;
  GridHost host = GridHost::both;
  double beta = 0.7;
  unsigned threads = 1;
};

struct CyclopeanResult {
  double q_rl = 0;       // depth_vif^beta * mean_ssim
  double mean_ssim = 0;  // mean block SSIM of the cyclopean models
  double depth_vif = 0;
  std::size_t blocks = 0;
};

namespace detail {

// Mean block SSIM with the grid on `host`; correspondences come from the
// reference pair and are reused unchanged on the distorted pair.
inline double cyclopean_mean_ssim(const VideoPlane& ref_host,
                                  const VideoPlane& ref_other,
                                  const VideoPlane& dist_host,
                                  const VideoPlane& dist_other,
                                  const CsfMask& mask, const BlockGrid& grid,
                                  const SearchWindow& search, unsigned threads) {
  const int b = grid.block_size;
  auto matches = match_blocks(ref_host, ref_other, grid, search, threads);
  const Dct2 dct(b);
  std::vector<double> scores(grid.count());
  parallel_for(grid.count(), threads, [&](std::size_t i) {
    const PixelPoint o = matches[i].left_origin;
    const PixelPoint m{o.x + matches[i].displacement.x,
                       o.y + matches[i].displacement.y};
    auto ref_model = apply_csf(
        fuse_3d_dct(extract_block(ref_host, o, b), extract_block(ref_other, m, b), dct),
        mask);
    auto dist_model = apply_csf(
        fuse_3d_dct(extract_block(dist_host, o, b), extract_block(dist_other, m, b), dct),
        mask);
    scores[i] = ssim_block(dct.inverse(ref_model.coefficients),
                           dct.inverse(dist_model.coefficients));
  });
  double sum = 0;
  for (double s : scores) sum += s;
  return sum / static_cast<double>(scores.size());
}

}  // namespace detail

// Cyclopean term with a precomputed depth fidelity VIF(D, D').
inline CyclopeanResult cyclopean_quality(StereoLuma ref, StereoLuma dist,
                                         double depth_vif, const CsfMask& mask,
                                         const CyclopeanOptions& opt = {}) {
  require_same_shape(ref.left, ref.right, "cyclopean_quality (reference pair)");
  require_same_shape(ref.left, dist.left, "cyclopean_quality (distorted left)");
  require_same_shape(ref.left, dist.right, "cyclopean_quality (distorted right)");
  if (!(opt.beta > 0)) throw ConfigError("beta must be positive");
  const BlockGrid grid = make_block_grid(ref.left.width(), ref.left.height(), mask.size);
  if (grid.count() == 0)
    throw ContractError("cyclopean_quality: plane holds no complete " +
                        std::to_string(mask.size) + "x" + std::to_string(mask.size) +
                        " block");

  double mean = 0;
  auto run = [&](const VideoPlane& rh, const VideoPlane& ro, const VideoPlane& dh,
                 const VideoPlane& dout) {
    return detail::cyclopean_mean_ssim(rh, ro, dh, dout, mask, grid, opt.search,
                                       opt.threads);
  };
  switch (opt.host) {
    case GridHost::left:
      mean = run(ref.left, ref.right, dist.left, dist.right);
      break;
    case GridHost::right:
      mean = run(ref.right, ref.left, dist.right, dist.left);
      break;
    case GridHost::both:
      mean = (run(ref.left, ref.right, dist.left, dist.right) +
              run(ref.right, ref.left, dist.right, dist.left)) /
             2;
      break;
  }
  CyclopeanResult r;
  r.mean_ssim = mean;
  r.depth_vif = depth_vif;
  r.blocks = grid.count();
  r.q_rl = std::pow(depth_vif, opt.beta) * mean;
  return r;
}

inline CyclopeanResult cyclopean_quality(StereoLuma ref, StereoLuma dist,
                                         const VideoPlane& ref_depth,
                                         const VideoPlane& dist_depth,
                                         const CsfMask& mask,
                                         const CyclopeanOptions& opt = {}) {
  require_same_shape(ref_depth, dist_depth, "cyclopean_quality (depth)");
  require_same_shape(ref_depth, ref.left, "cyclopean_quality (depth vs luma)");
  return cyclopean_quality(ref, dist, vif(ref_depth, dist_depth), mask, opt);
}

}  // namespace hv3d
