#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "hv3d/error.hpp"
#include "hv3d/plane.hpp"

namespace hv3d {

// Orthonormal type-II DCT of size n, applied separably to square blocks.
// basis(k, i) = a(k) cos(pi (2i + 1) k / 2n), a(0) = sqrt(1/n), else sqrt(2/n).
class Dct2 {
 public:
  explicit Dct2(int n) : n_(n), basis_(static_cast<std::size_t>(n) * n) {
    if (n < 1) throw ConfigError("DCT size must be positive");
    for (int k = 0; k < n; ++k) {
      double a = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
      for (int i = 0; i < n; ++i)
        basis_[k * n + i] =
            a * std::cos(std::numbers::pi * (2 * i + 1) * k / (2.0 * n));
    }
  }

  int size() const { return n_; }
  double basis(int k, int i) const { return basis_[k * n_ + i]; }

  // Y = C X C^T  (coefficient (u, v) lands at column u, row v)
  RealPlane forward(const RealPlane& block) const {
    check(block);
    return apply(block, false);
  }

  // X = C^T Y C
  RealPlane inverse(const RealPlane& coeffs) const {
    check(coeffs);
    return apply(coeffs, true);
  }

 private:
  void check(const RealPlane& b) const {
    if (b.width() != n_ || b.height() != n_)
      throw ContractError("DCT block is " + std::to_string(b.width()) + "x" +
                          std::to_string(b.height()) + ", expected " +
                          std::to_string(n_) + "x" + std::to_string(n_));
  }

  RealPlane apply(const RealPlane& in, bool transpose) const {
    auto m = [&](int k, int i) {
      return transpose ? basis_[i * n_ + k] : basis_[k * n_ + i];
    };
    RealPlane tmp(n_, n_), out(n_, n_);
    // rows: tmp(u, y) = sum_x m(u, x) in(x, y)
    for (int y = 0; y < n_; ++y)
      for (int u = 0; u < n_; ++u) {
        double acc = 0;
        for (int x = 0; x < n_; ++x) acc += m(u, x) * in(x, y);
        tmp(u, y) = acc;
      }
    // columns: out(u, v) = sum_y m(v, y) tmp(u, y)
    for (int v = 0; v < n_; ++v)
      for (int u = 0; u < n_; ++u) {
        double acc = 0;
        for (int y = 0; y < n_; ++y) acc += m(v, y) * tmp(u, y);
        out(u, v) = acc;
      }
    return out;
  }

  int n_;
  std::vector<double> basis_;
};

}  // namespace hv3d
