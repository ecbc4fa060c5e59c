#include <gtest/gtest.h>

#include <sstream>

#include "ids/metrics.hpp"
#include "ids/random.hpp"

using ids::ClassLabel;
using namespace ids::metrics;

namespace {

constexpr auto N = ClassLabel::Normal;
constexpr auto P = ClassLabel::Probe;
constexpr auto D = ClassLabel::DoS;
constexpr auto U = ClassLabel::U2R;
constexpr auto R = ClassLabel::R2L;

std::vector<ClassLabel> repeat(ClassLabel c, std::size_t n) { return std::vector<ClassLabel>(n, c); }

std::vector<ClassLabel> concat(std::initializer_list<std::vector<ClassLabel>> parts) {
  std::vector<ClassLabel> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

}  // namespace

TEST(Prf, EightTwoTwo) {
  // Probe: TP = 8, FP = 2, FN = 2.
  const auto truth = concat({repeat(P, 8), repeat(N, 2), repeat(P, 2), repeat(N, 10)});
  const auto pred = concat({repeat(P, 8), repeat(P, 2), repeat(N, 2), repeat(N, 10)});
  const auto r = precision_recall_f(confusion(truth, pred), P);
  EXPECT_DOUBLE_EQ(r.precision, 0.8);
  EXPECT_DOUBLE_EQ(r.recall, 0.8);
  EXPECT_DOUBLE_EQ(r.fscore, 0.8);
}

TEST(Prf, ZeroDenominatorsGiveZero) {
  const auto cm = confusion(repeat(N, 5), repeat(N, 5));
  const auto r = precision_recall_f(cm, U);
  EXPECT_EQ(r.precision, 0.0);
  EXPECT_EQ(r.recall, 0.0);
  EXPECT_EQ(r.fscore, 0.0);
}

TEST(Prf, HarmonicMean) {
  // DoS: P = 1, R = 1/2, so F = 2/3.
  const auto cm = confusion(std::vector<ClassLabel>{D, D}, std::vector<ClassLabel>{D, N});
  const auto r = precision_recall_f(cm, D);
  EXPECT_DOUBLE_EQ(r.precision, 1.0);
  EXPECT_DOUBLE_EQ(r.recall, 0.5);
  EXPECT_NEAR(r.fscore, 2.0 / 3.0, 1e-15);
}

TEST(Accuracy, DiagonalIsPerfect) {
  const auto labels = std::vector<ClassLabel>{N, P, D, U, R, N, D};
  const auto cm = confusion(labels, labels);
  EXPECT_EQ(accuracy(cm), 1.0);
  EXPECT_EQ(false_positive_rate(cm), 0.0);
  EXPECT_EQ(cost(cm, CostMatrix::kdd99()), 0.0);
}

TEST(Fpr, OneInAHundred) {
  auto pred = repeat(N, 100);
  pred[17] = P;
  EXPECT_DOUBLE_EQ(false_positive_rate(confusion(repeat(N, 100), pred)), 0.01);
}

TEST(Fpr, AllPredictedDos) {
  const auto truth = concat({repeat(N, 50), repeat(D, 50)});
  const auto cm = confusion(truth, repeat(D, 100));
  EXPECT_DOUBLE_EQ(accuracy(cm), 0.5);
  EXPECT_DOUBLE_EQ(false_positive_rate(cm), 1.0);
}

TEST(Fpr, NoNormalRowsIsAnError) {
  EXPECT_THROW(false_positive_rate(confusion(repeat(D, 3), repeat(D, 3))), ids::invalid_argument);
}

TEST(Cost, SingleCells) {
  const auto c = CostMatrix::kdd99();
  EXPECT_EQ(cost(confusion(std::vector<ClassLabel>{R}, std::vector<ClassLabel>{N}), c), 4.0);
  // One correct Normal and one Probe predicted Normal: (0 + 1) / 2.
  EXPECT_EQ(cost(confusion(std::vector<ClassLabel>{N, P}, std::vector<ClassLabel>{N, N}), c), 0.5);
}

TEST(Cost, OneOfEveryOffDiagonalCell) {
  std::vector<ClassLabel> truth, pred;
  for (auto t : ids::kAllClasses) {
    for (auto p : ids::kAllClasses) {
      if (t == p) continue;
      truth.push_back(t);
      pred.push_back(p);
    }
  }
  const auto c = CostMatrix::kdd99();
  double oracle = 0.0;
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) oracle += i == j ? 0.0 : c.cost[i][j];
  }
  EXPECT_EQ(oracle, 40.0);
  EXPECT_DOUBLE_EQ(cost(confusion(truth, pred), c), oracle / 20.0);
}

TEST(Cost, MatchesPerSampleSumProperty) {
  ids::Rng rng(9);
  const auto c = CostMatrix::kdd99();
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.index(200);
    std::vector<ClassLabel> truth(n), pred(n);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      truth[i] = ids::kAllClasses[rng.index(5)];
      pred[i] = ids::kAllClasses[rng.index(5)];
      sum += c.cost[ids::index_of(truth[i])][ids::index_of(pred[i])];
    }
    const auto cm = confusion(truth, pred);
    EXPECT_EQ(cm.total(), n);
    EXPECT_NEAR(cost(cm, c), sum / static_cast<double>(n), 1e-12);
    const double acc = accuracy(cm);
    EXPECT_GE(acc, 0.0);
    EXPECT_LE(acc, 1.0);
  }
}

TEST(MacroReport, AveragesPresentClassesOnly) {
  // Normal P = 1, DoS P = 0.6; U2R, R2L and Probe absent.
  const auto truth = concat({repeat(N, 3), repeat(N, 2), repeat(D, 3)});
  const auto pred = concat({repeat(N, 3), repeat(D, 2), repeat(D, 3)});
  const auto r = macro_report(confusion(truth, pred), CostMatrix::kdd99());
  EXPECT_TRUE(r.present[0]);
  EXPECT_FALSE(r.present[1]);
  EXPECT_TRUE(r.present[2]);
  EXPECT_DOUBLE_EQ(r.average.precision, 0.8);
  EXPECT_DOUBLE_EQ(r.average.recall, (0.6 + 1.0) / 2.0);
  ASSERT_TRUE(r.fpr.has_value());
  EXPECT_DOUBLE_EQ(*r.fpr, 0.4);
}

TEST(MacroReport, NoNormalRowsLeavesFprUnset) {
  const auto r = macro_report(confusion(repeat(D, 4), repeat(D, 4)), CostMatrix::kdd99());
  EXPECT_FALSE(r.fpr.has_value());
  std::ostringstream os;
  write_report_csv(os, r);
  EXPECT_NE(os.str().find(",nan,"), std::string::npos);
}

TEST(Confusion, LengthMismatchAndEmptyAreErrors) {
  EXPECT_THROW(confusion(repeat(N, 2), repeat(N, 3)), ids::invalid_argument);
  EXPECT_THROW(confusion(std::vector<ClassLabel>{}, std::vector<ClassLabel>{}), ids::invalid_argument);
}

TEST(CostMatrixRead, ParsesAndValidates) {
  std::istringstream is("# custom\n0 1 1 1 1\n1,0,1,1,1\n1 1 0 1 1\n1 1 1 0 1\n1 1 1 1 0\n");
  const auto m = CostMatrix::read(is);
  EXPECT_EQ(m.cost[1][0], 1.0);
  EXPECT_EQ(m.cost[4][4], 0.0);
  std::istringstream short_rows("0 1 1 1 1\n");
  EXPECT_THROW(CostMatrix::read(short_rows), ids::schema_error);
  std::istringstream bad("0 1 x 1 1\n");
  EXPECT_THROW(CostMatrix::read(bad), ids::parse_error);
}

TEST(ConfusionCsv, Layout) {
  std::ostringstream os;
  write_confusion_csv(os, confusion(std::vector<ClassLabel>{N, R}, std::vector<ClassLabel>{N, N}));
  EXPECT_EQ(os.str(),
            "true\\predicted,Normal,Probe,DoS,U2R,R2L\n"
            "Normal,1,0,0,0,0\nProbe,0,0,0,0,0\nDoS,0,0,0,0,0\nU2R,0,0,0,0,0\nR2L,1,0,0,0,0\n");
}
