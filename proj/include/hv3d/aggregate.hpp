#pragma once

#include <array>
#include <cmath>
#include <concepts>
#include <optional>
#include <vector>

#include "hv3d/cyclopean.hpp"
#include "hv3d/depth.hpp"
#include "hv3d/error.hpp"
#include "hv3d/metrics2d.hpp"
#include "hv3d/parallel.hpp"
#include "hv3d/plane.hpp"

namespace hv3d {

// w1: luma VIF of each view, w2: cyclopean term, w3: depth term,
// w4: chroma VIF of each view.
struct Weights {
  double w1 = 0.14;
  double w2 = 0.1208;
  double w3 = 0.05;
  double w4 = 0.1353;

  static Weights zero() { return {0, 0, 0, 0}; }
  std::array<double, 4> as_array() const { return {w1, w2, w3, w4}; }
  static Weights from_array(const std::array<double, 4>& a) {
    return {a[0], a[1], a[2], a[3]};
  }
  bool finite() const {
    return std::isfinite(w1) && std::isfinite(w2) && std::isfinite(w3) &&
           std::isfinite(w4);
  }
  friend bool operator==(const Weights&, const Weights&) = default;
};

struct MetricConfig {
  int block_size = 16;
  int fovea = 64;
  double beta = 0.7;
  SearchWindow search;
  GridHost host = GridHost::both;
  unsigned threads = 1;
  VifOptions vif;

  void validate() const {
    if (block_size != 8 && block_size != 16)
      throw ConfigError("block size must be 8 or 16, got " + std::to_string(block_size));
    if (fovea < block_size)
      throw ConfigError("fovea must be at least the block size");
    if (!(beta > 0)) throw ConfigError("beta must be positive");
    if (search.range_x < 0 || search.range_y < 0)
      throw ConfigError("search ranges must be nonnegative");
  }

  // HD: 16x16 blocks with a 64x64 fovea. SD: 8x8 blocks; its 32x32 fovea is
  // an extrapolation, not a measured viewing geometry.
  static MetricConfig hd() { return {}; }
  static MetricConfig sd() {
    MetricConfig c;
    c.block_size = 8;
    c.fovea = 32;
    return c;
  }
};

struct ViewFidelity {
  double y = 0, u = 0, v = 0;
};

struct QualityBreakdown {
  double vif_y_left = 0, vif_u_left = 0, vif_v_left = 0;
  double vif_y_right = 0, vif_u_right = 0, vif_v_right = 0;
  double q_rl = 0;
  double q_d = 0;
  double hv3d = 0;

  ViewFidelity left() const { return {vif_y_left, vif_u_left, vif_v_left}; }
  ViewFidelity right() const { return {vif_y_right, vif_u_right, vif_v_right}; }
};

// w1 VIF(Y) + w4 VIF(U) + w4 VIF(V). This weighted sum is the per-view unit;
// w1 is not applied a second time on top of it.
inline double view_fidelity_sum(const ViewFidelity& f, const Weights& w) {
  return w.w1 * f.y + w.w4 * f.u + w.w4 * f.v;
}

inline ViewFidelity view_fidelity(const Frame& ref, const Frame& dist,
                                  const VifOptions& opt = {}) {
  require_same_shape(ref.y, dist.y, "view_term");
  return {vif(ref.y, dist.y, opt), vif(ref.u, dist.u, opt), vif(ref.v, dist.v, opt)};
}

inline double view_term(const Frame& ref, const Frame& dist, const Weights& w,
                        const VifOptions& opt = {}) {
  return view_fidelity_sum(view_fidelity(ref, dist, opt), w);
}

// Combines stored components; hv3d_frame uses this same routine, so a
// breakdown always reproduces its own score.
inline double combine(const QualityBreakdown& b, const Weights& w) {
  return view_fidelity_sum(b.right(), w) + view_fidelity_sum(b.left(), w) +
         w.w2 * b.q_rl + w.w3 * b.q_d;
}

inline void check_stereo_frame(const StereoFrame& f, const char* what) {
  require_same_shape(f.left.y, f.right.y, std::string(what) + " left/right views");
  require_same_shape(f.left.y, f.depth.d, std::string(what) + " depth map");
}

// Scores one stereo frame against its reference. The evaluation context
// (mask) is built once per sequence by the caller.
inline QualityBreakdown hv3d_frame(const StereoFrame& ref, const StereoFrame& dist,
                                   const Weights& w, const MetricConfig& cfg,
                                   const CsfMask& mask) {
  check_stereo_frame(ref, "reference");
  check_stereo_frame(dist, "distorted");
  require_same_shape(ref.left.y, dist.left.y, "hv3d_frame reference vs distorted");

  // Seven independent VIF evaluations, each into its own slot.
  std::array<double, 7> v{};
  parallel_for(v.size(), cfg.threads, [&](std::size_t i) {
    switch (i) {
      case 0: v[i] = vif(ref.left.y, dist.left.y, cfg.vif); break;
      case 1: v[i] = vif(ref.left.u, dist.left.u, cfg.vif); break;
      case 2: v[i] = vif(ref.left.v, dist.left.v, cfg.vif); break;
      case 3: v[i] = vif(ref.right.y, dist.right.y, cfg.vif); break;
      case 4: v[i] = vif(ref.right.u, dist.right.u, cfg.vif); break;
      case 5: v[i] = vif(ref.right.v, dist.right.v, cfg.vif); break;
      default: v[i] = vif(ref.depth.d, dist.depth.d, cfg.vif); break;
    }
  });
  const double depth_vif = v[6];

  CyclopeanOptions copt;
  copt.search = cfg.search;
  copt.host = cfg.host;
  copt.beta = cfg.beta;
  copt.threads = cfg.threads;
  auto cyc = cyclopean_quality({ref.left.y, ref.right.y}, {dist.left.y, dist.right.y},
                               depth_vif, mask, copt);

  DepthOptions dopt;
  dopt.block_size = cfg.block_size;
  dopt.fovea = cfg.fovea;
  dopt.beta = cfg.beta;
  auto dq = depth_quality(ref.depth, depth_vif, dopt);

  QualityBreakdown b;
  b.vif_y_left = v[0];
  b.vif_u_left = v[1];
  b.vif_v_left = v[2];
  b.vif_y_right = v[3];
  b.vif_u_right = v[4];
  b.vif_v_right = v[5];
  b.q_rl = cyc.q_rl;
  b.q_d = dq.q_d;
  b.hv3d = combine(b, w);
  return b;
}

inline QualityBreakdown hv3d_frame(const StereoFrame& ref, const StereoFrame& dist,
                                   const Weights& w = {}, const MetricConfig& cfg = {}) {
  cfg.validate();
  return hv3d_frame(ref, dist, w, cfg, build_csf_mask(cfg.block_size));
}

template <typename S>
concept StereoFrameSource = requires(S s) {
  { s.next() } -> std::same_as<std::optional<StereoFrame>>;
  { s.frame_count() } -> std::convertible_to<int>;
};

struct SequenceScore {
  std::vector<QualityBreakdown> frames;
  double pooled = 0;  // arithmetic mean of per-frame hv3d

  // Per-component means over frames; `hv3d` holds the pooled score.
  QualityBreakdown mean_components() const {
    QualityBreakdown m;
    for (const auto& f : frames) {
      m.vif_y_left += f.vif_y_left;
      m.vif_u_left += f.vif_u_left;
      m.vif_v_left += f.vif_v_left;
      m.vif_y_right += f.vif_y_right;
      m.vif_u_right += f.vif_u_right;
      m.vif_v_right += f.vif_v_right;
      m.q_rl += f.q_rl;
      m.q_d += f.q_d;
    }
    const double n = static_cast<double>(frames.size());
    for (double* p : {&m.vif_y_left, &m.vif_u_left, &m.vif_v_left, &m.vif_y_right,
                      &m.vif_u_right, &m.vif_v_right, &m.q_rl, &m.q_d})
      *p /= n;
    m.hv3d = pooled;
    return m;
  }
};

inline double pool_mean(const std::vector<QualityBreakdown>& frames) {
  double sum = 0;
  for (const auto& f : frames) sum += f.hv3d;
  return sum / static_cast<double>(frames.size());
}

// Streams both sources frame by frame; neither sequence is held in memory.
template <StereoFrameSource Ref, StereoFrameSource Dist>
SequenceScore hv3d_sequence(Ref&& ref, Dist&& dist, const Weights& w = {},
                            const MetricConfig& cfg = {}) {
  cfg.validate();
  if (ref.frame_count() != dist.frame_count())
    throw ContractError("frame count mismatch: reference has " +
                        std::to_string(ref.frame_count()) + ", distorted has " +
                        std::to_string(dist.frame_count()));
  const CsfMask mask = build_csf_mask(cfg.block_size);
  SequenceScore out;
  out.frames.reserve(ref.frame_count());
  for (;;) {
    auto r = ref.next();
    auto d = dist.next();
    if (!r || !d) {
      if (r || d) throw ContractError("sequences ended at different frames");
      break;
    }
    out.frames.push_back(hv3d_frame(*r, *d, w, cfg, mask));
  }
  if (out.frames.empty()) throw ContractError("hv3d_sequence: no frames");
  out.pooled = pool_mean(out.frames);
  return out;
}

}  // namespace hv3d
