#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "ids/adaboost.hpp"
#include "ids/random.hpp"

using ids::ClassLabel;
using ids::Matrix;
using namespace ids::boost;

namespace {

constexpr auto A = ClassLabel::Normal;
constexpr auto B = ClassLabel::DoS;
constexpr auto C = ClassLabel::R2L;

std::vector<double> uniform(std::size_t n) { return std::vector<double>(n, 1.0 / static_cast<double>(n)); }

// Weighted error of the best stump found by trying every (feature, threshold,
// left label, right label) combination over observed midpoints.
double brute_force_error(const Matrix& x, const std::vector<ClassLabel>& y, const std::vector<double>& w) {
  double best = 1.0;
  for (std::size_t f = 0; f < x.cols(); ++f) {
    std::vector<double> values;
    for (std::size_t i = 0; i < x.rows(); ++i) values.push_back(x(i, f));
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    std::vector<double> thresholds = {values.back()};
    for (std::size_t k = 0; k + 1 < values.size(); ++k) thresholds.push_back((values[k] + values[k + 1]) / 2.0);
    for (double t : thresholds) {
      for (auto l : ids::kAllClasses) {
        for (auto r : ids::kAllClasses) {
          double e = 0.0;
          for (std::size_t i = 0; i < x.rows(); ++i) e += ((x(i, f) <= t ? l : r) != y[i]) * w[i];
          best = std::min(best, e);
        }
      }
    }
  }
  return best;
}

AdaboostModel voters(std::vector<std::pair<ClassLabel, double>> votes) {
  AdaboostModel m;
  for (auto [label, alpha] : votes) {
    m.stumps.push_back({0, 0.0, label, label});
    m.alphas.push_back(alpha);
  }
  return m;
}

}  // namespace

TEST(Stump, FourPointSeparable) {
  const Matrix x = Matrix::from_rows({{0}, {1}, {2}, {3}});
  const std::vector<ClassLabel> y = {A, A, B, B};
  auto [s, e] = train_stump(x, y, uniform(4));
  // Oracle: midpoints 0.5, 1.5, 2.5 give errors 1/4, 0, 1/4.
  EXPECT_DOUBLE_EQ(s.threshold, 1.5);
  EXPECT_EQ(e, 0.0);
  EXPECT_EQ(s.left_label, A);
  EXPECT_EQ(s.right_label, B);
}

TEST(Stump, SingleClassIsConstant) {
  const Matrix x = Matrix::from_rows({{0}, {1}, {2}});
  auto [s, e] = train_stump(x, std::vector<ClassLabel>{C, C, C}, uniform(3));
  EXPECT_EQ(e, 0.0);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(s.predict(x.row(i)), C);
}

TEST(Stump, HeavyWeightRowIsClassifiedCorrectly) {
  const Matrix x = Matrix::from_rows({{0}, {1}, {2}, {3}});
  const std::vector<ClassLabel> y = {A, B, A, B};
  for (std::size_t heavy = 0; heavy < 4; ++heavy) {
    std::vector<double> w(4, 0.01);
    w[heavy] = 0.97;
    auto [s, e] = train_stump(x, y, w);
    EXPECT_EQ(s.predict(x.row(heavy)), y[heavy]);
    EXPECT_LT(e, 0.97);
  }
}

TEST(Stump, EmptyInputIsAnError) {
  Matrix x(0, 1);
  EXPECT_THROW(train_stump(x, std::vector<ClassLabel>{}, std::vector<double>{}), ids::invalid_argument);
}

TEST(Stump, ExhaustiveSearchEquivalenceOnSixPoints) {
  const Matrix x = Matrix::from_rows({{0.1, 5}, {0.4, 3}, {0.2, 1}, {0.9, 4}, {0.7, 2}, {0.5, 0}});
  const std::vector<ClassLabel> y = {A, B, A, C, C, B};
  ids::Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> w(6);
    for (auto& v : w) v = 0.05 + rng.uniform();
    const double s = std::accumulate(w.begin(), w.end(), 0.0);
    for (auto& v : w) v /= s;
    auto [stump, e] = train_stump(x, y, w);
    double achieved = 0.0;
    for (std::size_t i = 0; i < 6; ++i) achieved += (stump.predict(x.row(i)) != y[i]) * w[i];
    EXPECT_NEAR(e, achieved, 1e-12);
    EXPECT_NEAR(e, brute_force_error(x, y, w), 1e-12) << trial;
  }
}

TEST(Stump, WeightsMustSumToOne) {
  const Matrix x = Matrix::from_rows({{0}, {1}});
  EXPECT_THROW(train_stump(x, std::vector<ClassLabel>{A, B}, std::vector<double>{0.5, 0.6}), ids::invalid_argument);
}

TEST(Alpha, Formula) {
  EXPECT_NEAR(alpha_for(0.25, 2), std::log(3.0), 1e-15);
  EXPECT_NEAR(alpha_for(0.25, 4), std::log(3.0) + std::log(3.0), 1e-15);
  EXPECT_NEAR(alpha_for(0.5, 2), 0.0, 1e-15);
  EXPECT_GT(alpha_for(0.1, 3), alpha_for(0.2, 3));
}

TEST(Adaboost, OneRoundIsTheBestStump) {
  const Matrix x = Matrix::from_rows({{0, 3}, {1, 2}, {2, 1}, {3, 0}, {4, 4}});
  const std::vector<ClassLabel> y = {A, A, B, B, A};
  auto m = train_adaboost(x, y, 1);
  ASSERT_EQ(m.stumps.size(), 1u);
  EXPECT_EQ(m.stumps[0], train_stump(x, y, uniform(5)).first);
}

TEST(Adaboost, ChanceLevelRoundAborts) {
  // Every stump has weighted error exactly 1/2 with two classes.
  const Matrix x = Matrix::from_rows({{0}, {0}});
  std::vector<RoundTrace> trace;
  auto m = train_adaboost(x, std::vector<ClassLabel>{A, B}, 5, &trace);
  EXPECT_TRUE(m.empty());
  ASSERT_EQ(trace.size(), 1u);
  EXPECT_DOUBLE_EQ(trace[0].error, 0.5);
  EXPECT_FALSE(trace[0].kept);
}

TEST(Adaboost, SeparableSixPointsReachZeroTrainingError) {
  const Matrix x = Matrix::from_rows({{0, 0}, {1, 2}, {2, 1}, {3, 5}, {4, 4}, {5, 3}});
  const std::vector<ClassLabel> y = {A, A, A, B, B, B};
  auto m = train_adaboost(x, y, 5);
  ASSERT_FALSE(m.empty());
  EXPECT_LE(m.stumps.size(), 5u);
  std::size_t errors = 0;
  for (std::size_t i = 0; i < 6; ++i) errors += m.predict(x.row(i)) != y[i];
  EXPECT_EQ(errors, 0u);
}

TEST(Adaboost, XorLikeDataNeedsSeveralRoundsAndStaysNormalized) {
  const Matrix x = Matrix::from_rows({{0, 0}, {0, 1}, {1, 0}, {1, 1}, {0.2, 0.1}, {0.9, 0.8}, {0.1, 0.9}, {0.8, 0.2}});
  const std::vector<ClassLabel> y = {A, B, B, A, A, A, B, B};
  std::vector<RoundTrace> trace;
  train_adaboost(x, y, 10, &trace);
  ASSERT_FALSE(trace.empty());
  for (const auto& r : trace) {
    EXPECT_NEAR(std::accumulate(r.weights.begin(), r.weights.end(), 0.0), 1.0, 1e-12);
    for (double w : r.weights) EXPECT_GT(w, 0.0);
  }
}

TEST(Adaboost, PerfectRoundUsesEpsilonAndStops) {
  const Matrix x = Matrix::from_rows({{0}, {1}, {2}, {3}});
  auto m = train_adaboost(x, std::vector<ClassLabel>{A, A, B, B}, 5);
  ASSERT_EQ(m.stumps.size(), 1u);
  EXPECT_DOUBLE_EQ(m.alphas[0], alpha_for(kPerfectRoundEpsilon, 2));
  EXPECT_TRUE(std::isfinite(m.alphas[0]));
}

TEST(Adaboost, BadRoundsIsAnError) {
  const Matrix x = Matrix::from_rows({{0}, {1}});
  EXPECT_THROW(train_adaboost(x, std::vector<ClassLabel>{A, B}, 0), ids::invalid_argument);
}

TEST(Predict, WeightedVote) {
  const std::vector<double> row = {0.0};
  EXPECT_EQ(voters({{B, 2.0}, {A, 0.5}, {A, 0.5}}).predict(row), B);
  EXPECT_EQ(voters({{C, 0.01}}).predict(row), C);
  EXPECT_EQ(voters({{B, 1.0}, {A, 1.0}, {B, 1.0}}).predict(row), B);
  EXPECT_EQ(voters({{B, 1.0}, {A, 1.0}}).predict(row), A);
  EXPECT_THROW(AdaboostModel{}.predict(row), ids::invalid_argument);
}

TEST(AdaboostText, RoundTrip) {
  const Matrix x = Matrix::from_rows({{0, 0}, {0, 1}, {1, 0}, {1, 1}, {0.2, 0.1}, {0.9, 0.8}, {0.1, 0.9}, {0.8, 0.2}});
  const std::vector<ClassLabel> y = {A, B, C, A, A, A, B, C};
  auto m = train_adaboost(x, y, 5);
  std::ostringstream os;
  write_model(os, m);
  std::istringstream is(os.str());
  auto back = read_model(is);
  EXPECT_EQ(back.stumps, m.stumps);
  EXPECT_EQ(back.alphas, m.alphas);
  EXPECT_EQ(back.classes, m.classes);
  EXPECT_EQ(back.rounds, m.rounds);
}
