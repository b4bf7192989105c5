#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "hv3d/aggregate.hpp"
#include "hv3d/error.hpp"

namespace hv3d {

class CalibrationError : public ComputeError {
 public:
  using ComputeError::ComputeError;
};

class EvaluationError : public ComputeError {
 public:
  using ComputeError::ComputeError;
};

// ---------------------------------------------------------------------------
// Weight calibration

// Predictors against which the four weights are linear:
//   hv3d = w1 f1 + w2 f2 + w3 f3 + w4 f4.
struct FeatureRow {
  double f1 = 0;  // vif_y_left + vif_y_right
  double f2 = 0;  // q_rl
  double f3 = 0;  // q_d
  double f4 = 0;  // sum of the four chroma VIFs
  double target = 0;  // mos / 10

  std::array<double, 4> features() const { return {f1, f2, f3, f4}; }
  double predict(const Weights& w) const {
    return w.w1 * f1 + w.w2 * f2 + w.w3 * f3 + w.w4 * f4;
  }
};

inline FeatureRow make_feature_row(const QualityBreakdown& b, double mos) {
  return {b.vif_y_left + b.vif_y_right, b.q_rl, b.q_d,
          b.vif_u_left + b.vif_v_left + b.vif_u_right + b.vif_v_right, mos / 10.0};
}

struct CalibrationResult {
  Weights weights;
  std::vector<double> residuals;  // prediction - target, per row
  double rmse = 0;
  std::vector<std::string> warnings;
};

inline double sum_squared_residuals(const std::vector<FeatureRow>& rows,
                                    const Weights& w) {
  double s = 0;
  for (const auto& r : rows) {
    double e = r.predict(w) - r.target;
    s += e * e;
  }
  return s;
}

namespace detail {

inline const char* feature_name(int j) {
  static const char* names[] = {"f1 (luma VIF)", "f2 (cyclopean)", "f3 (depth)",
                                "f4 (chroma VIF)"};
  return names[j];
}

// In-place Cholesky of a symmetric 4x4 matrix. Returns the first column whose
// pivot falls below `tol` (relative to a unit diagonal), or -1.
inline int cholesky4(std::array<std::array<double, 4>, 4>& a, double tol) {
  for (int j = 0; j < 4; ++j) {
    double d = a[j][j];
    for (int k = 0; k < j; ++k) d -= a[j][k] * a[j][k];
    if (!(d > tol)) return j;
    a[j][j] = std::sqrt(d);
    for (int i = j + 1; i < 4; ++i) {
      double s = a[i][j];
      for (int k = 0; k < j; ++k) s -= a[i][k] * a[j][k];
      a[i][j] = s / a[j][j];
    }
  }
  return -1;
}

inline std::array<double, 4> cholesky4_solve(
    const std::array<std::array<double, 4>, 4>& l, std::array<double, 4> b) {
  for (int i = 0; i < 4; ++i) {
    for (int k = 0; k < i; ++k) b[i] -= l[i][k] * b[k];
    b[i] /= l[i][i];
  }
  for (int i = 3; i >= 0; --i) {
    for (int k = i + 1; k < 4; ++k) b[i] -= l[k][i] * b[k];
    b[i] /= l[i][i];
  }
  return b;
}

// Gaussian elimination with partial pivoting for small dense systems.
template <std::size_t N>
bool solve_dense(std::array<std::array<double, N>, N> a, std::array<double, N>& b) {
  for (std::size_t c = 0; c < N; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < N; ++r)
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    if (!(std::abs(a[p][c]) > 0)) return false;
    std::swap(a[p], a[c]);
    std::swap(b[p], b[c]);
    for (std::size_t r = c + 1; r < N; ++r) {
      double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < N; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  for (std::size_t i = N; i-- > 0;) {
    for (std::size_t k = i + 1; k < N; ++k) b[i] -= a[i][k] * b[k];
    b[i] /= a[i][i];
  }
  return true;
}

}  // namespace detail

// Unconstrained least squares for (w1, w2, w3, w4) through the normal
// equations, with column equilibration and one refinement step. Negative
// weights are reported as warnings, not prevented.
inline CalibrationResult fit_weights(const std::vector<FeatureRow>& rows,
                                     double rank_tolerance = 1e-10) {
  if (rows.size() < 4)
    throw CalibrationError("weight calibration needs at least 4 rows, got " +
                           std::to_string(rows.size()));
  for (const auto& r : rows)
    for (double f : r.features())
      if (!std::isfinite(f) || !std::isfinite(r.target))
        throw CalibrationError("non-finite feature or target in calibration rows");

  using Mat = std::array<std::array<double, 4>, 4>;
  Mat gram{};
  std::array<double, 4> rhs{};
  for (const auto& r : rows) {
    auto f = r.features();
    for (int i = 0; i < 4; ++i) {
      rhs[i] += f[i] * r.target;
      for (int j = 0; j < 4; ++j) gram[i][j] += f[i] * f[j];
    }
  }

  std::array<double, 4> scale{};
  for (int i = 0; i < 4; ++i) {
    if (!(gram[i][i] > 0))
      throw CalibrationError(std::string("column ") + detail::feature_name(i) +
                             " is identically zero");
    scale[i] = 1.0 / std::sqrt(gram[i][i]);
  }
  Mat scaled{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) scaled[i][j] = gram[i][j] * scale[i] * scale[j];

  Mat chol = scaled;
  if (int bad = detail::cholesky4(chol, rank_tolerance); bad >= 0) {
    // Regress the offending column on the earlier ones to name the set.
    std::string msg = std::string("feature matrix is rank deficient: column ") +
                      detail::feature_name(bad) + " is collinear with";
    std::vector<int> partners;
    if (bad > 0) {
      std::array<std::array<double, 4>, 4> sub{};
      std::array<double, 4> g{};
      for (int i = 0; i < 4; ++i) {
        sub[i][i] = 1;
        if (i < bad) {
          for (int j = 0; j < bad; ++j) sub[i][j] = scaled[i][j];
          g[i] = scaled[i][bad];
        }
      }
      if (detail::solve_dense(sub, g))
        for (int i = 0; i < bad; ++i)
          if (std::abs(g[i]) > 1e-8) partners.push_back(i);
    }
    if (partners.empty()) msg += " the preceding columns";
    for (std::size_t k = 0; k < partners.size(); ++k)
      msg += std::string(k ? ", " : " ") + detail::feature_name(partners[k]);
    throw CalibrationError(msg);
  }

  std::array<double, 4> b{};
  for (int i = 0; i < 4; ++i) b[i] = rhs[i] * scale[i];
  auto z = detail::cholesky4_solve(chol, b);
  // One step of iterative refinement on the scaled normal equations.
  std::array<double, 4> r{};
  for (int i = 0; i < 4; ++i) {
    long double acc = b[i];
    for (int j = 0; j < 4; ++j) acc -= static_cast<long double>(scaled[i][j]) * z[j];
    r[i] = static_cast<double>(acc);
  }
  auto dz = detail::cholesky4_solve(chol, r);
  std::array<double, 4> w{};
  for (int i = 0; i < 4; ++i) w[i] = (z[i] + dz[i]) * scale[i];

  CalibrationResult out;
  out.weights = Weights::from_array(w);
  double sse = 0;
  for (const auto& row : rows) {
    double e = row.predict(out.weights) - row.target;
    out.residuals.push_back(e);
    sse += e * e;
  }
  out.rmse = std::sqrt(sse / static_cast<double>(rows.size()));
  static const char* names[] = {"w1", "w2", "w3", "w4"};
  for (int i = 0; i < 4; ++i)
    if (w[i] < 0) out.warnings.push_back(std::string(names[i]) + " is negative");
  return out;
}

// ---------------------------------------------------------------------------
// Correlation

// Pearson correlation; NaN when either input has zero variance.
inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.empty())
    throw EvaluationError("pearson: inputs must be nonempty with equal length");
  const double n = static_cast<double>(x.size());
  double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double a = x[i] - mx, b = y[i] - my;
    sxy += a * b;
    sxx += a * a;
    syy += b * b;
  }
  if (sxx == 0 || syy == 0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

// 1-based ranks; tied values share the average of their positions.
inline std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size())
    throw EvaluationError("spearman: length mismatch (" + std::to_string(x.size()) +
                          " vs " + std::to_string(y.size()) + ")");
  if (x.size() < 3) throw EvaluationError("spearman: need at least 3 pairs");
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!std::isfinite(x[i]) || !std::isfinite(y[i]))
      throw EvaluationError("spearman: non-finite input");
  double r = pearson(average_ranks(x), average_ranks(y));
  if (std::isnan(r)) throw EvaluationError("spearman: constant input has no rank variance");
  return r;
}

// ---------------------------------------------------------------------------
// Logistic mapping

// m(s) = a + b / (1 + exp(-c (s - d)))
struct LogisticParams {
  double a = 0, b = 0, c = 1, d = 0;

  double operator()(double s) const { return a + b / (1.0 + std::exp(-c * (s - d))); }
  std::array<double, 4> as_array() const { return {a, b, c, d}; }
  static LogisticParams from_array(const std::array<double, 4>& p) {
    return {p[0], p[1], p[2], p[3]};
  }
};

struct LogisticFit {
  LogisticParams params;
  std::vector<double> fitted;
  double rmse = 0;
  double pearson_after = 0;  // NaN when the mapped scores are constant
  bool degenerate = false;   // |b| ~ 0: the curve is flat
  bool converged = true;
  int iterations = 0;
};

class ConvergenceError : public EvaluationError {
 public:
  ConvergenceError(const std::string& msg, LogisticParams best)
      : EvaluationError(msg), best_(best) {}
  const LogisticParams& best() const { return best_; }

 private:
  LogisticParams best_;
};

struct LogisticOptions {
  int max_iterations = 2000;
  double tolerance = 1e-14;
};

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

// Fit summary for a fixed parameter set.
inline LogisticFit evaluate_logistic(const LogisticParams& p, const std::vector<double>& scores,
                                     const std::vector<double>& mos, int iterations = 0) {
  LogisticFit fit;
  fit.params = p;
  fit.iterations = iterations;
  fit.fitted.reserve(scores.size());
  double sse = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    fit.fitted.push_back(p(scores[i]));
    sse += (fit.fitted[i] - mos[i]) * (fit.fitted[i] - mos[i]);
  }
  fit.rmse = std::sqrt(sse / static_cast<double>(scores.size()));
  auto [lo, hi] = std::minmax_element(mos.begin(), mos.end());
  fit.degenerate = std::abs(p.b) <= 1e-9 * std::max(1.0, std::abs(p.a)) || *hi == *lo;
  fit.pearson_after = pearson(fit.fitted, mos);
  return fit;
}

// Levenberg-Marquardt least squares from the fixed start
// a = min(mos), b = max(mos) - min(mos), c = 1, d = median(scores).
inline LogisticFit logistic_fit(const std::vector<double>& scores,
                                const std::vector<double>& mos,
                                const LogisticOptions& opt = {}) {
  if (scores.size() != mos.size())
    throw EvaluationError("logistic_fit: length mismatch");
  if (scores.size() < 5)
    throw EvaluationError("logistic_fit: need at least 5 points, got " +
                          std::to_string(scores.size()));
  const std::size_t n = scores.size();
  auto [lo, hi] = std::minmax_element(mos.begin(), mos.end());
  LogisticParams p{*lo, *hi - *lo, 1.0, median(scores)};

  auto sse_of = [&](const LogisticParams& q) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double e = q(scores[i]) - mos[i];
      s += e * e;
    }
    return s;
  };

  double sse = sse_of(p);
  double lambda = 1e-3;
  int it = 0;
  bool converged = sse == 0;
  for (; it < opt.max_iterations && !converged; ++it) {
    std::array<std::array<double, 4>, 4> jtj{};
    std::array<double, 4> jtr{};
    for (std::size_t i = 0; i < n; ++i) {
      double sg = 1.0 / (1.0 + std::exp(-p.c * (scores[i] - p.d)));
      double ds = p.b * sg * (1 - sg);
      std::array<double, 4> j = {1.0, sg, ds * (scores[i] - p.d), -ds * p.c};
      double r = mos[i] - p(scores[i]);
      for (int a = 0; a < 4; ++a) {
        jtr[a] += j[a] * r;
        for (int b = 0; b < 4; ++b) jtj[a][b] += j[a] * j[b];
      }
    }

    bool improved = false;
    while (!improved && lambda < 1e16) {
      auto m = jtj;
      for (int a = 0; a < 4; ++a) m[a][a] += lambda * (jtj[a][a] + 1e-12);
      auto step = jtr;
      if (detail::solve_dense(m, step)) {
        auto q = p.as_array();
        for (int a = 0; a < 4; ++a) q[a] += step[a];
        auto cand = LogisticParams::from_array(q);
        double cand_sse = sse_of(cand);
        if (std::isfinite(cand_sse) && cand_sse <= sse) {
          double gain = sse - cand_sse;
          double step_norm = 0, par_norm = 0;
          for (int a = 0; a < 4; ++a) {
            step_norm += step[a] * step[a];
            par_norm += q[a] * q[a];
          }
          p = cand;
          sse = cand_sse;
          lambda = std::max(lambda / 10, 1e-15);
          improved = true;
          if (gain <= opt.tolerance * (sse + opt.tolerance) ||
              step_norm <= 1e-28 * (par_norm + 1e-28))
            converged = true;
          break;
        }
      }
      lambda *= 10;
    }
    if (!improved) converged = true;  // no descent direction left: stationary
  }
  if (!converged)
    throw ConvergenceError("logistic_fit did not converge in " +
                               std::to_string(opt.max_iterations) + " iterations",
                           p);

  return evaluate_logistic(p, scores, mos, it);
}

}  // namespace hv3d
