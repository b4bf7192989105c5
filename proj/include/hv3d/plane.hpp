#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hv3d/error.hpp"

namespace hv3d {

// Row-major 2D sample grid. Plane<std::uint8_t> holds stored video/depth
// samples; Plane<double> is the working type for filtering and transforms.
template <typename T>
class Plane {
 public:
  using value_type = T;

  Plane() = default;
  Plane(int width, int height, T fill = T{})
      : width_(width), height_(height) {
    if (width < 0 || height < 0)
      throw ContractError("plane dimensions must be nonnegative");
    samples_.assign(static_cast<std::size_t>(width) * height, fill);
  }
  Plane(int width, int height, std::vector<T> samples)
      : width_(width), height_(height), samples_(std::move(samples)) {
    if (width < 0 || height < 0 ||
        samples_.size() != static_cast<std::size_t>(width) * height)
      throw ContractError("plane sample count does not match width x height");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }

  T& operator()(int x, int y) { return samples_[index(x, y)]; }
  const T& operator()(int x, int y) const { return samples_[index(x, y)]; }

  // Border-replicating access; coordinates outside the plane clamp to the
  // nearest edge sample.
  const T& clamped(int x, int y) const {
    return (*this)(std::clamp(x, 0, width_ - 1), std::clamp(y, 0, height_ - 1));
  }

  std::span<T> row(int y) {
    return {samples_.data() + static_cast<std::size_t>(y) * width_,
            static_cast<std::size_t>(width_)};
  }
  std::span<const T> row(int y) const {
    return {samples_.data() + static_cast<std::size_t>(y) * width_,
            static_cast<std::size_t>(width_)};
  }

  std::span<T> samples() { return samples_; }
  std::span<const T> samples() const { return samples_; }
  T* data() { return samples_.data(); }
  const T* data() const { return samples_.data(); }

  template <typename U>
  bool same_shape(const Plane<U>& other) const {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Plane& a, const Plane& b) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> samples_;
};

using VideoPlane = Plane<std::uint8_t>;
using RealPlane = Plane<double>;

template <typename To, typename From>
Plane<To> plane_cast(const Plane<From>& in) {
  Plane<To> out(in.width(), in.height());
  std::transform(in.samples().begin(), in.samples().end(),
                 out.samples().begin(),
                 [](From v) { return static_cast<To>(v); });
  return out;
}

// Rounds to nearest and saturates to [0, 255].
inline std::uint8_t saturate_u8(double v) {
  if (!(v > 0.0)) return 0;
  if (v >= 255.0) return 255;
  return static_cast<std::uint8_t>(std::lround(v));
}

inline VideoPlane to_video_plane(const RealPlane& in) {
  VideoPlane out(in.width(), in.height());
  std::transform(in.samples().begin(), in.samples().end(),
                 out.samples().begin(), saturate_u8);
  return out;
}

inline void require_same_shape(const auto& a, const auto& b,
                               const std::string& what) {
  if (a.width() != b.width() || a.height() != b.height())
    throw ContractError(what + ": dimension mismatch (" +
                        std::to_string(a.width()) + "x" +
                        std::to_string(a.height()) + " vs " +
                        std::to_string(b.width()) + "x" +
                        std::to_string(b.height()) + ")");
}

// 8-bit 4:2:0 frame.
struct Frame {
  VideoPlane y;
  VideoPlane u;
  VideoPlane v;

  Frame() = default;
  Frame(int width, int height, std::uint8_t luma = 0, std::uint8_t chroma = 128)
      : y(width, height, luma),
        u(width / 2, height / 2, chroma),
        v(width / 2, height / 2, chroma) {
    if (width % 2 != 0 || height % 2 != 0)
      throw ConfigError("4:2:0 frames need even dimensions, got " +
                        std::to_string(width) + "x" + std::to_string(height));
  }
  Frame(VideoPlane y_, VideoPlane u_, VideoPlane v_)
      : y(std::move(y_)), u(std::move(u_)), v(std::move(v_)) {
    if (u.width() != y.width() / 2 || u.height() != y.height() / 2 ||
        !u.same_shape(v))
      throw ContractError("chroma planes violate 4:2:0 subsampling");
  }

  int width() const { return y.width(); }
  int height() const { return y.height(); }

  friend bool operator==(const Frame&, const Frame&) = default;
};

struct DepthFrame {
  VideoPlane d;

  int width() const { return d.width(); }
  int height() const { return d.height(); }

  friend bool operator==(const DepthFrame&, const DepthFrame&) = default;
};

// One time instant of a stereo sequence.
struct StereoFrame {
  Frame left;
  Frame right;
  DepthFrame depth;
};

}  // namespace hv3d
