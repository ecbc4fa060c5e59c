#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "ids/random_forest.hpp"

using ids::ClassLabel;
using ids::Matrix;
using namespace ids::forest;

namespace {

constexpr auto A = ClassLabel::Normal;
constexpr auto B = ClassLabel::DoS;
constexpr auto C = ClassLabel::Probe;

std::vector<std::size_t> cc(std::initializer_list<std::size_t> v) { return v; }

// Direct Gini of a label list, for cross-checking the count-based version.
double gini_of(const std::vector<ClassLabel>& labels) {
  std::array<double, ids::kNumClasses> n{};
  for (auto l : labels) n[ids::index_of(l)] += 1.0;
  double s = 0.0;
  for (double c : n) s += (c / static_cast<double>(labels.size())) * (c / static_cast<double>(labels.size()));
  return 1.0 - s;
}

Tree leaf(ClassLabel label) {
  Tree t;
  TreeNode n;
  n.label = label;
  t.nodes.push_back(n);
  return t;
}

ForestModel forest_of(std::vector<Tree> trees, std::size_t width) {
  ForestModel m;
  m.trees = std::move(trees);
  m.M = width;
  m.m = 1;
  return m;
}

// Two Gaussian blobs in 2-D, labelled by blob.
std::pair<Matrix, std::vector<ClassLabel>> blobs(std::size_t per_class, std::uint64_t seed) {
  ids::Rng rng(seed);
  auto gauss = [&] {
    const double u1 = std::max(rng.uniform(), 1e-300), u2 = rng.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  };
  Matrix x(2 * per_class, 2);
  std::vector<ClassLabel> y;
  for (std::size_t i = 0; i < 2 * per_class; ++i) {
    const bool second = i >= per_class;
    x(i, 0) = (second ? 4.0 : 0.0) + gauss();
    x(i, 1) = (second ? 4.0 : 0.0) + gauss();
    y.push_back(second ? B : A);
  }
  return {std::move(x), std::move(y)};
}

}  // namespace

TEST(Gini, HandValues) {
  EXPECT_EQ(gini_impurity(cc({5, 0, 0, 0, 0})), 0.0);
  EXPECT_DOUBLE_EQ(gini_impurity(cc({3, 3, 0, 0, 0})), 0.5);
  EXPECT_DOUBLE_EQ(gini_impurity(cc({2, 1, 1, 0, 0})), 1.0 - (0.25 + 0.0625 + 0.0625));
  EXPECT_DOUBLE_EQ(gini_impurity(cc({2, 1, 1, 0, 0})), 0.625);
  EXPECT_THROW(gini_impurity(cc({0, 0, 0, 0, 0})), ids::invalid_argument);
}

TEST(Gini, BoundedBelowOneProperty) {
  ids::Rng rng(2);
  for (int i = 0; i < 200; ++i) {
    std::vector<std::size_t> c(ids::kNumClasses);
    for (auto& v : c) v = rng.index(20);
    if (std::all_of(c.begin(), c.end(), [](auto v) { return v == 0; })) c[0] = 1;
    const double g = gini_impurity(c);
    EXPECT_GE(g, 0.0);
    EXPECT_LT(g, 1.0);
  }
}

TEST(BestSplit, SeparableOneFeature) {
  const Matrix x = Matrix::from_rows({{0}, {1}, {10}});
  const std::vector<ClassLabel> y = {A, A, B};
  const std::vector<std::size_t> f = {0};
  auto s = best_split(x, y, f);
  ASSERT_TRUE(s);
  // Oracle: both candidate thresholds evaluated directly.
  const double parent = gini_of(y);
  const double gain_05 = parent - (1.0 / 3.0) * gini_of({A}) - (2.0 / 3.0) * gini_of({A, B});
  const double gain_55 = parent - (2.0 / 3.0) * gini_of({A, A}) - (1.0 / 3.0) * gini_of({B});
  ASSERT_GT(gain_55, gain_05);
  EXPECT_EQ(s->feature, 0u);
  EXPECT_DOUBLE_EQ(s->threshold, 5.5);
  EXPECT_NEAR(s->gain, gain_55, 1e-12);
  EXPECT_NEAR(s->gain, parent, 1e-12);
}

TEST(BestSplit, NoSplitOnIdenticalRowsOrLabels) {
  const std::vector<std::size_t> f = {0, 1};
  EXPECT_FALSE(best_split(Matrix::from_rows({{1, 2}, {1, 2}, {1, 2}}), std::vector<ClassLabel>{A, B, A}, f));
  EXPECT_FALSE(best_split(Matrix::from_rows({{1, 2}, {3, 4}, {5, 6}}), std::vector<ClassLabel>{C, C, C}, f));
}

TEST(BestSplit, TiesGoToLowerFeature) {
  const Matrix x = Matrix::from_rows({{0, 0}, {1, 1}});
  const std::vector<std::size_t> f = {1, 0};
  auto s = best_split(x, std::vector<ClassLabel>{A, B}, f);
  ASSERT_TRUE(s);
  EXPECT_EQ(s->feature, 0u);
}

TEST(BestSplit, MatchesBruteForceProperty) {
  ids::Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 4 + rng.index(12), d = 1 + rng.index(4);
    Matrix x(n, d);
    std::vector<ClassLabel> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) x(i, j) = static_cast<double>(rng.index(5));
      y[i] = ids::label_at(rng.index(3));
    }
    std::vector<std::size_t> f(d);
    std::iota(f.begin(), f.end(), std::size_t{0});
    double best = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      for (double t = 0.5; t < 4.0; t += 1.0) {
        std::vector<ClassLabel> l, r;
        for (std::size_t i = 0; i < n; ++i) (x(i, j) <= t ? l : r).push_back(y[i]);
        if (l.empty() || r.empty()) continue;
        const double child = (static_cast<double>(l.size()) * gini_of(l) + static_cast<double>(r.size()) * gini_of(r)) / static_cast<double>(n);
        best = std::max(best, gini_of(y) - child);
      }
    }
    auto s = best_split(x, y, f);
    if (best <= kMinGain) {
      EXPECT_FALSE(s);
    } else {
      ASSERT_TRUE(s);
      EXPECT_NEAR(s->gain, best, 1e-12);
    }
  }
}

TEST(Forest, SingleTreeIsDeterministic) {
  auto [x, y] = blobs(40, 1);
  ForestConfig c;
  c.num_trees = 1;
  c.seed = 42;
  auto a = train_forest(x, y, c);
  auto b = train_forest(x, y, c);
  EXPECT_EQ(a.trees, b.trees);
  EXPECT_EQ(a.oob, b.oob);
}

TEST(Forest, ThreadCountDoesNotChangeTheModel) {
  auto [x, y] = blobs(40, 2);
  ForestConfig c;
  c.num_trees = 8;
  c.seed = 3;
  auto a = train_forest(x, y, c);
  c.threads = 4;
  auto b = train_forest(x, y, c);
  EXPECT_EQ(a.trees, b.trees);
}

TEST(Forest, PureLabelsGiveSingleLeafTrees) {
  auto [x, y] = blobs(20, 3);
  std::fill(y.begin(), y.end(), C);
  ForestConfig c;
  c.num_trees = 5;
  auto m = train_forest(x, y, c);
  for (const auto& t : m.trees) {
    ASSERT_EQ(t.nodes.size(), 1u);
    EXPECT_EQ(t.nodes[0].label, C);
  }
}

TEST(Forest, ZeroTreesIsAnError) {
  auto [x, y] = blobs(5, 1);
  ForestConfig c;
  c.num_trees = 0;
  EXPECT_THROW(train_forest(x, y, c), ids::invalid_argument);
}

TEST(Forest, DefaultFeaturesPerSplit) {
  EXPECT_EQ(default_features_per_split(41), 6u);
  EXPECT_EQ(default_features_per_split(23), 4u);
  EXPECT_EQ(default_features_per_split(1), 1u);
}

TEST(Forest, OobFractionNearOneOverE) {
  Matrix x(100, 1);
  std::vector<ClassLabel> y(100, A);
  for (std::size_t i = 0; i < 100; ++i) x(i, 0) = static_cast<double>(i);
  ForestConfig c;
  c.num_trees = 200;
  c.seed = 9;
  auto m = train_forest(x, y, c);
  double sum = 0.0;
  for (const auto& o : m.oob) sum += static_cast<double>(o.size()) / 100.0;
  const double expected = std::pow(1.0 - 1.0 / 100.0, 100.0);  // 0.36603
  EXPECT_NEAR(sum / 200.0, expected, 0.03);
}

TEST(Forest, FatherNodeRuleStopsRepeatedFeature) {
  // One feature, three label bands: the second split would reuse the root feature.
  Matrix x = Matrix::from_rows({{0}, {1}, {2}, {3}, {4}, {5}});
  std::vector<ClassLabel> y = {A, A, B, B, C, C};
  ForestConfig c;
  c.num_trees = 20;
  auto m = train_forest(x, y, c);
  for (const auto& t : m.trees) EXPECT_LE(t.depth(), 1u);
}

TEST(Predict, SingleTreeAndMajorityVote) {
  EXPECT_EQ(forest_of({leaf(C)}, 2).predict(std::vector<double>{0, 0}), C);
  EXPECT_EQ(forest_of({leaf(B), leaf(B), leaf(A)}, 2).predict(std::vector<double>{0, 0}), B);
  EXPECT_EQ(forest_of({leaf(B), leaf(A)}, 2).predict(std::vector<double>{0, 0}), A);  // tie -> lower index
}

TEST(Predict, DimensionMismatchIsAnError) {
  EXPECT_THROW(forest_of({leaf(A)}, 3).predict(std::vector<double>{0, 0}), ids::invalid_argument);
}

TEST(Predict, HandTracedTree) {
  // x0 <= 2.5 ? (x1 <= 0.5 ? A : B) : C
  Tree t;
  t.nodes.resize(5);
  t.nodes[0].feature = 0;
  t.nodes[0].threshold = 2.5;
  t.nodes[0].left = 1;
  t.nodes[0].right = 4;
  t.nodes[1].feature = 1;
  t.nodes[1].threshold = 0.5;
  t.nodes[1].left = 2;
  t.nodes[1].right = 3;
  t.nodes[2].label = A;
  t.nodes[3].label = B;
  t.nodes[4].label = C;
  const auto m = forest_of({t}, 2);
  const std::vector<std::vector<double>> rows = {{0, 0}, {1, 1}, {2.5, 0.5}, {3, 0}, {9, 9}};
  const std::vector<ClassLabel> expect = {A, B, A, C, C};
  for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_EQ(m.predict(rows[i]), expect[i]) << i;
}

TEST(Predict, TreeOrderDoesNotMatterProperty) {
  auto [x, y] = blobs(30, 5);
  ForestConfig c;
  c.num_trees = 9;
  auto m = train_forest(x, y, c);
  auto r = m;
  std::reverse(r.trees.begin(), r.trees.end());
  for (std::size_t i = 0; i < x.rows(); ++i) EXPECT_EQ(m.predict(x.row(i)), r.predict(x.row(i)));
}

TEST(Oob, ConstantPredictorScoresMajorityFraction) {
  Matrix x(100, 2);  // all-zero features: no split is possible
  std::vector<ClassLabel> y(100, A);
  for (std::size_t i = 0; i < 30; ++i) y[i] = B;
  ForestConfig c;
  c.num_trees = 25;
  auto m = train_forest(x, y, c);
  for (const auto& t : m.trees) ASSERT_EQ(t.nodes.size(), 1u);
  bool all_majority = std::all_of(m.trees.begin(), m.trees.end(), [](const Tree& t) { return t.nodes[0].label == A; });
  ASSERT_TRUE(all_majority);
  EXPECT_DOUBLE_EQ(oob_accuracy(m, x, y), 0.7);
}

TEST(Oob, SeparableBlobsScoreHigh) {
  auto [x, y] = blobs(200, 6);
  ForestConfig c;
  c.num_trees = 50;
  auto m = train_forest(x, y, c);
  EXPECT_GT(oob_accuracy(m, x, y), 0.95);
}

TEST(Oob, RepeatedRowIsPerfect) {
  Matrix x(20, 3);
  std::vector<ClassLabel> y(20, C);
  ForestConfig c;
  c.num_trees = 10;
  EXPECT_EQ(oob_accuracy(train_forest(x, y, c), x, y), 1.0);
}

TEST(Oob, NoCoveredRowIsAnError) {
  auto m = forest_of({leaf(A)}, 1);
  m.oob = {{}};
  Matrix x(3, 1);
  EXPECT_THROW(oob_accuracy(m, x, std::vector<ClassLabel>{A, A, A}), ids::degenerate_data);
}

TEST(Importance, SignalBeatsNoiseAndConstant) {
  ids::Rng rng(77);
  const std::size_t n = 400;
  Matrix x(n, 3);
  std::vector<ClassLabel> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x(i, 0) = rng.uniform();  // noise
    x(i, 1) = rng.uniform();  // signal
    x(i, 2) = 1.0;            // constant
    y[i] = x(i, 1) < 0.5 ? A : B;
  }
  ForestConfig c;
  c.num_trees = 50;
  c.features_per_split = 2;
  c.seed = 4;
  auto m = train_forest(x, y, c);
  auto imp = permutation_importance(m, x, y, 12);
  ASSERT_EQ(imp.size(), 3u);
  EXPECT_LT(imp[0], 0.01);
  EXPECT_GT(imp[1], imp[0]);
  EXPECT_GT(imp[1], imp[2]);
  EXPECT_EQ(imp[2], 0.0);
  for (double v : imp) EXPECT_GE(v, 0.0);
  EXPECT_EQ(permutation_importance(m, x, y, 12, 1, 3), imp);
}

TEST(SelectFeatures, TopKAndTies) {
  EXPECT_EQ(select_features(std::vector<double>{0.3, 0.1, 0.2}, 2), (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(select_features(std::vector<double>{0.3, 0.1, 0.2}, 3), (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(select_features(std::vector<double>{0.2, 0.2, 0.1}, 1), (std::vector<std::size_t>{0}));
  EXPECT_THROW(select_features(std::vector<double>{0.2, 0.2}, 0), ids::invalid_argument);
  EXPECT_THROW(select_features(std::vector<double>{0.2, 0.2}, 3), ids::invalid_argument);
}

TEST(ForestText, RoundTrip) {
  auto [x, y] = blobs(30, 8);
  ForestConfig c;
  c.num_trees = 4;
  auto m = train_forest(x, y, c);
  m.importance = {0.25, 0.125};
  std::ostringstream os;
  write_forest(os, m);
  std::istringstream is(os.str());
  auto back = read_forest(is);
  EXPECT_EQ(back.trees, m.trees);
  EXPECT_EQ(back.importance, m.importance);
  EXPECT_EQ(back.M, m.M);
  EXPECT_EQ(back.m, m.m);
}
