#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "hv3d/evaluation.hpp"

namespace hv3d {
namespace {

const Weights kTable{0.14, 0.1208, 0.05, 0.1353};

std::vector<FeatureRow> synth_rows(int n, const Weights& w, std::uint32_t seed,
                                   double noise = 0) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.2, 1.0);
  std::normal_distribution<double> e(0, noise > 0 ? noise : 1);
  std::vector<FeatureRow> rows;
  for (int i = 0; i < n; ++i) {
    FeatureRow r{2 * u(rng), u(rng), u(rng), 4 * u(rng), 0};
    r.target = r.predict(w) + (noise > 0 ? e(rng) : 0);
    rows.push_back(r);
  }
  return rows;
}

TEST(FitWeights, RecoversExactWeights) {
  for (int n : {4, 8, 40}) {
    auto fit = fit_weights(synth_rows(n, kTable, n));
    EXPECT_NEAR(fit.weights.w1, kTable.w1, 1e-9);
    EXPECT_NEAR(fit.weights.w2, kTable.w2, 1e-9);
    EXPECT_NEAR(fit.weights.w3, kTable.w3, 1e-9);
    EXPECT_NEAR(fit.weights.w4, kTable.w4, 1e-9);
    EXPECT_LT(fit.rmse, 1e-10);
  }
}

TEST(FitWeights, WarnsOnNegativeWeights) {
  EXPECT_TRUE(fit_weights(synth_rows(8, kTable, 9)).warnings.empty());
  auto fit = fit_weights(synth_rows(8, Weights{0.2, -0.1, 0.05, 0.1}, 9));
  ASSERT_EQ(fit.warnings.size(), 1u);
  EXPECT_NE(fit.warnings[0].find("w2"), std::string::npos) << fit.warnings[0];
}

TEST(FitWeights, TooFewRows) {
  EXPECT_THROW(fit_weights(synth_rows(3, kTable, 1)), CalibrationError);
}

TEST(FitWeights, RankDeficiencyNamesColumns) {
  auto rows = synth_rows(10, kTable, 2);
  for (auto& r : rows) r.f3 = r.f2;
  try {
    fit_weights(rows);
    FAIL() << "expected CalibrationError";
  } catch (const CalibrationError& e) {
    std::string msg = e.what();
    EXPECT_NE(msg.find("rank deficient"), std::string::npos) << msg;
    EXPECT_NE(msg.find("f3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("f2"), std::string::npos) << msg;
  }
  auto zero = synth_rows(10, kTable, 3);
  for (auto& r : zero) r.f4 = 0;
  EXPECT_THROW(fit_weights(zero), CalibrationError);
}

TEST(FitWeights, MinimizesSquaredError) {
  auto rows = synth_rows(30, kTable, 4, 0.01);
  auto fit = fit_weights(rows);
  const double best = sum_squared_residuals(rows, fit.weights);
  std::mt19937 rng(5);
  std::normal_distribution<double> d(0, 1e-3);
  for (int k = 0; k < 1000; ++k) {
    Weights p{fit.weights.w1 + d(rng), fit.weights.w2 + d(rng), fit.weights.w3 + d(rng),
              fit.weights.w4 + d(rng)};
    EXPECT_GE(sum_squared_residuals(rows, p), best);
  }
}

TEST(FitWeights, RefittingPredictionsIsIdempotent) {
  auto rows = synth_rows(20, kTable, 6, 0.02);
  auto first = fit_weights(rows);
  for (auto& r : rows) r.target = r.predict(first.weights);
  auto second = fit_weights(rows);
  EXPECT_NEAR(second.weights.w1, first.weights.w1, 1e-9);
  EXPECT_NEAR(second.weights.w2, first.weights.w2, 1e-9);
  EXPECT_NEAR(second.weights.w3, first.weights.w3, 1e-9);
  EXPECT_NEAR(second.weights.w4, first.weights.w4, 1e-9);
}

TEST(FitWeights, ResidualsAreReported) {
  auto rows = synth_rows(12, kTable, 7, 0.05);
  auto fit = fit_weights(rows);
  ASSERT_EQ(fit.residuals.size(), rows.size());
  double sse = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_NEAR(fit.residuals[i], rows[i].predict(fit.weights) - rows[i].target, 1e-12);
    sse += fit.residuals[i] * fit.residuals[i];
  }
  EXPECT_NEAR(fit.rmse, std::sqrt(sse / rows.size()), 1e-12);
}

TEST(Spearman, HandComputedExamples) {
  EXPECT_DOUBLE_EQ(spearman({1, 2, 3, 4, 5}, {2, 1, 4, 3, 5}), 0.8);
  EXPECT_DOUBLE_EQ(spearman({1, 2, 3, 4, 5}, {10, 20, 30, 40, 50}), 1.0);
  EXPECT_DOUBLE_EQ(spearman({1, 2, 3, 4, 5}, {5, 4, 3, 2, 1}), -1.0);
}

TEST(Spearman, TiesUseAverageRanks) {
  auto r = average_ranks({3, 1, 3, 2});
  EXPECT_EQ(r, (std::vector<double>{3.5, 1, 3.5, 2}));
  EXPECT_NEAR(spearman({1, 2, 2, 3}, {1, 2, 3, 4}), pearson({1, 2.5, 2.5, 4}, {1, 2, 3, 4}),
              1e-15);
}

TEST(Spearman, InvariantUnderMonotoneTransforms) {
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(25), y(25);
    for (int i = 0; i < 25; ++i) {
      x[i] = u(rng);
      y[i] = x[i] + u(rng);
    }
    std::vector<double> ex, cy;
    for (double v : x) ex.push_back(std::exp(v));
    for (double v : y) cy.push_back(v * v * v);
    double base = spearman(x, y);
    EXPECT_NEAR(spearman(ex, y), base, 1e-12);
    EXPECT_NEAR(spearman(x, cy), base, 1e-12);
    EXPECT_NEAR(spearman(ex, cy), base, 1e-12);
  }
}

TEST(Spearman, RejectsBadInput) {
  EXPECT_THROW(spearman({1, 2}, {1, 2}), EvaluationError);
  EXPECT_THROW(spearman({1, 2, 3}, {1, 2}), EvaluationError);
  EXPECT_THROW(spearman({1, 1, 1}, {1, 2, 3}), EvaluationError);
  EXPECT_THROW(spearman({1, NAN, 3}, {1, 2, 3}), EvaluationError);
}

TEST(Pearson, ConstantInputIsNan) {
  EXPECT_TRUE(std::isnan(pearson({2, 2, 2}, {1, 2, 3})));
  EXPECT_NEAR(pearson({1, 2, 3}, {2, 4, 6}), 1.0, 1e-15);
}

TEST(LogisticFit, RecoversSyntheticParameters) {
  const LogisticParams truth{1.5, 7.0, 9.0, 0.55};
  std::vector<double> s, m;
  for (int i = 0; i < 30; ++i) {
    double x = 0.1 + 0.03 * i;
    s.push_back(x);
    m.push_back(truth(x));
  }
  auto fit = logistic_fit(s, m);
  EXPECT_NEAR(fit.params.a, truth.a, 1e-3);
  EXPECT_NEAR(fit.params.b, truth.b, 1e-3);
  EXPECT_NEAR(fit.params.c, truth.c, 1e-3);
  EXPECT_NEAR(fit.params.d, truth.d, 1e-3);
  EXPECT_LT(fit.rmse, 1e-6);
  EXPECT_NEAR(fit.pearson_after, 1.0, 1e-9);
  EXPECT_FALSE(fit.degenerate);
}

TEST(LogisticFit, ConstantMosIsFlaggedDegenerate) {
  auto fit = logistic_fit({0.1, 0.2, 0.3, 0.4, 0.5}, {6, 6, 6, 6, 6});
  EXPECT_TRUE(fit.degenerate);
  for (double v : fit.fitted) EXPECT_NEAR(v, 6.0, 1e-12);
  EXPECT_TRUE(std::isnan(fit.pearson_after));
}

TEST(LogisticFit, NeedsFivePoints) {
  EXPECT_THROW(logistic_fit({1, 2, 3, 4}, {1, 2, 3, 4}), EvaluationError);
  EXPECT_THROW(logistic_fit({1, 2, 3, 4, 5}, {1, 2, 3, 4}), EvaluationError);
}

TEST(LogisticFit, IterationCapRaisesWithBestParameters) {
  std::vector<double> s{0.1, 0.3, 0.35, 0.6, 0.8, 0.9}, m{2, 3.5, 3, 6, 8.5, 9};
  try {
    logistic_fit(s, m, {1, 1e-14});
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_TRUE(std::isfinite(e.best().a));
    EXPECT_TRUE(std::isfinite(e.best().d));
  }
}

}  // namespace
}  // namespace hv3d
