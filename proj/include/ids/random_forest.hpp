#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ids/dataset.hpp"
#include "ids/error.hpp"
#include "ids/labels.hpp"
#include "ids/matrix.hpp"
#include "ids/parallel.hpp"
#include "ids/random.hpp"
#include "ids/text.hpp"

namespace ids::forest {

using ClassCounts = std::array<std::size_t, kNumClasses>;

inline double gini_impurity(std::span<const std::size_t> class_counts) {
  std::size_t total = 0;
  for (auto c : class_counts) total += c;
  if (total == 0) throw invalid_argument("gini impurity of an empty node");
  const auto n = static_cast<double>(total);
  double sum_sq = 0.0;
  for (auto c : class_counts) {
    const double p = static_cast<double>(c) / n;
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

// Lowest class index wins ties.
inline ClassLabel majority(const ClassCounts& counts) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < kNumClasses; ++c) {
    if (counts[c] > counts[best]) best = c;
  }
  return label_at(best);
}

struct Split {
  std::size_t feature = 0;
  double threshold = 0.0;
  double gain = 0.0;
};

// Gains at or below this are treated as "no improvement" (floating-point noise).
inline constexpr double kMinGain = 1e-12;

namespace detail {

struct Keyed {
  double value;
  ClassLabel label;
};

}  // namespace detail

// Exhaustive search over midpoints between consecutive distinct values of each
// candidate feature. Returns the split with the largest Gini decrease; equal
// gains go to the lower feature, then the lower threshold.
inline std::optional<Split> best_split(const Matrix& x, std::span<const ClassLabel> y, std::span<const std::size_t> rows,
                                       std::span<const std::size_t> candidate_features) {
  if (rows.size() < 2 || candidate_features.empty()) return std::nullopt;
  ClassCounts parent{};
  for (auto r : rows) ++parent[index_of(y[r])];
  const double parent_gini = gini_impurity(parent);
  if (parent_gini <= 0.0) return std::nullopt;

  std::vector<std::size_t> features(candidate_features.begin(), candidate_features.end());
  std::sort(features.begin(), features.end());
  const auto n = static_cast<double>(rows.size());
  std::optional<Split> best;
  std::vector<detail::Keyed> keyed(rows.size());
  for (std::size_t f : features) {
    for (std::size_t k = 0; k < rows.size(); ++k) keyed[k] = {x(rows[k], f), y[rows[k]]};
    std::sort(keyed.begin(), keyed.end(), [](const detail::Keyed& a, const detail::Keyed& b) { return a.value < b.value; });
    ClassCounts left{};
    for (std::size_t k = 0; k + 1 < keyed.size(); ++k) {
      ++left[index_of(keyed[k].label)];
      if (keyed[k].value == keyed[k + 1].value) continue;
      const std::size_t n_left = k + 1;
      const std::size_t n_right = keyed.size() - n_left;
      double left_sq = 0.0, right_sq = 0.0;
      for (std::size_t c = 0; c < kNumClasses; ++c) {
        const auto l = static_cast<double>(left[c]);
        const auto r = static_cast<double>(parent[c] - left[c]);
        left_sq += l * l;
        right_sq += r * r;
      }
      const auto nl = static_cast<double>(n_left);
      const auto nr = static_cast<double>(n_right);
      // weighted child impurity = (nl/n)(1 - Σl²/nl²) + (nr/n)(1 - Σr²/nr²)
      const double child = 1.0 - (left_sq / nl + right_sq / nr) / n;
      const double gain = parent_gini - child;
      if (gain > kMinGain && (!best || gain > best->gain)) {
        best = Split{f, keyed[k].value + (keyed[k + 1].value - keyed[k].value) / 2.0, gain};
      }
    }
  }
  return best;
}

inline std::optional<Split> best_split(const Matrix& x, std::span<const ClassLabel> y,
                                       std::span<const std::size_t> candidate_features) {
  std::vector<std::size_t> rows(x.rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return best_split(x, y, rows, candidate_features);
}

// Flat binary tree; node 0 is the root. Values <= threshold go left.
struct TreeNode {
  static constexpr std::uint32_t kNone = 0xFFFFFFFFu;

  std::uint32_t feature = kNone;  // kNone for leaves
  double threshold = 0.0;
  std::uint32_t left = kNone;
  std::uint32_t right = kNone;
  ClassLabel label = ClassLabel::Normal;
  ClassCounts class_counts{};

  bool is_leaf() const noexcept { return feature == kNone; }
  bool operator==(const TreeNode&) const = default;
};

class Tree {
 public:
  std::vector<TreeNode> nodes;

  ClassLabel predict(std::span<const double> row) const {
    std::uint32_t at = 0;
    while (!nodes[at].is_leaf()) at = row[nodes[at].feature] <= nodes[at].threshold ? nodes[at].left : nodes[at].right;
    return nodes[at].label;
  }

  bool uses_feature(std::size_t f) const {
    return std::any_of(nodes.begin(), nodes.end(), [f](const TreeNode& n) { return !n.is_leaf() && n.feature == f; });
  }

  std::size_t depth() const { return nodes.empty() ? 0 : depth_from(0); }

  bool operator==(const Tree&) const = default;

 private:
  std::size_t depth_from(std::uint32_t at) const {
    if (nodes[at].is_leaf()) return 0;
    return 1 + std::max(depth_from(nodes[at].left), depth_from(nodes[at].right));
  }
};

struct ForestConfig {
  std::size_t num_trees = 50;
  std::optional<std::size_t> features_per_split;  // m; defaults to floor(sqrt(M))
  std::size_t max_depth = 64;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

struct ForestModel {
  std::vector<Tree> trees;
  std::vector<std::vector<std::uint32_t>> oob;  // per tree: sorted rows absent from its bootstrap
  std::size_t m = 0;
  std::size_t M = 0;
  std::vector<double> importance;

  // Majority vote; ties go to the lower class index.
  ClassLabel predict(std::span<const double> row) const {
    if (row.size() != M) throw invalid_argument("row width " + std::to_string(row.size()) + " != forest width " + std::to_string(M));
    ClassCounts votes{};
    for (const auto& t : trees) ++votes[index_of(t.predict(row))];
    return majority(votes);
  }
};

namespace detail {

class TreeGrower {
 public:
  TreeGrower(const Matrix& x, std::span<const ClassLabel> y, std::size_t m, std::size_t max_depth, Rng& rng)
      : x_(x), y_(y), m_(m), max_depth_(max_depth), rng_(rng), features_(x.cols()) {
    std::iota(features_.begin(), features_.end(), std::size_t{0});
  }

  Tree grow(std::vector<std::size_t> rows) {
    Tree tree;
    grow_node(tree, rows, 0, TreeNode::kNone);
    return tree;
  }

 private:
  std::uint32_t grow_node(Tree& tree, std::span<std::size_t> rows, std::size_t depth, std::uint32_t parent_feature) {
    const auto id = static_cast<std::uint32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    ClassCounts counts{};
    for (auto r : rows) ++counts[index_of(y_[r])];
    tree.nodes[id].class_counts = counts;
    tree.nodes[id].label = majority(counts);

    const bool pure = std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }) <= 1;
    if (pure || depth >= max_depth_) return id;

    for (std::size_t k = 0; k < m_; ++k) std::swap(features_[k], features_[k + rng_.index(features_.size() - k)]);
    std::span<const std::size_t> candidates(features_.data(), m_);
    auto split = best_split(x_, y_, rows, candidates);
    // Growth stops when the chosen attribute repeats the parent's.
    if (!split || split->feature == parent_feature) return id;

    auto mid = std::stable_partition(rows.begin(), rows.end(),
                                     [&](std::size_t r) { return x_(r, split->feature) <= split->threshold; });
    const auto n_left = static_cast<std::size_t>(mid - rows.begin());
    const auto feature = static_cast<std::uint32_t>(split->feature);
    const std::uint32_t left = grow_node(tree, rows.first(n_left), depth + 1, feature);
    const std::uint32_t right = grow_node(tree, rows.subspan(n_left), depth + 1, feature);
    TreeNode& node = tree.nodes[id];
    node.feature = feature;
    node.threshold = split->threshold;
    node.left = left;
    node.right = right;
    return id;
  }

  const Matrix& x_;
  std::span<const ClassLabel> y_;
  std::size_t m_;
  std::size_t max_depth_;
  Rng& rng_;
  std::vector<std::size_t> features_;
};

}  // namespace detail

inline std::size_t default_features_per_split(std::size_t total) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(total)))));
}

// Bagged, unpruned trees; each tree uses its own seed derived from config.seed.
inline ForestModel train_forest(const Matrix& x, std::span<const ClassLabel> y, const ForestConfig& config) {
  if (config.num_trees < 1) throw invalid_argument("forest needs at least one tree");
  if (x.rows() < 2) throw invalid_argument("forest training needs at least two rows");
  if (y.size() != x.rows()) throw invalid_argument("label count differs from row count");
  ForestModel model;
  model.M = x.cols();
  model.m = config.features_per_split.value_or(default_features_per_split(model.M));
  if (model.m < 1 || model.m > model.M) throw invalid_argument("features per split must lie in [1, M]");
  model.trees.resize(config.num_trees);
  model.oob.resize(config.num_trees);
  const std::size_t n = x.rows();
  parallel_for(config.num_trees, config.threads, [&](std::size_t t) {
    Rng rng(derive_seed(config.seed, t));
    std::vector<std::size_t> sample(n);
    std::vector<bool> drawn(n, false);
    for (auto& s : sample) {
      s = rng.index(n);
      drawn[s] = true;
    }
    auto& oob = model.oob[t];
    for (std::size_t i = 0; i < n; ++i) {
      if (!drawn[i]) oob.push_back(static_cast<std::uint32_t>(i));
    }
    detail::TreeGrower grower(x, y, model.m, config.max_depth, rng);
    model.trees[t] = grower.grow(std::move(sample));
  });
  return model;
}

namespace detail {

// Accuracy of OOB majority votes given per-tree predictions aligned with model.oob.
inline double oob_vote_accuracy(const ForestModel& model, const std::vector<std::vector<ClassLabel>>& predictions,
                                std::span<const ClassLabel> y) {
  std::vector<ClassCounts> votes(y.size());
  std::vector<bool> covered(y.size(), false);
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    for (std::size_t k = 0; k < model.oob[t].size(); ++k) {
      const auto r = model.oob[t][k];
      ++votes[r][index_of(predictions[t][k])];
      covered[r] = true;
    }
  }
  std::size_t total = 0, correct = 0;
  for (std::size_t r = 0; r < y.size(); ++r) {
    if (!covered[r]) continue;
    ++total;
    correct += majority(votes[r]) == y[r];
  }
  if (total == 0) throw degenerate_data("no row is out-of-bag for any tree");
  return static_cast<double>(correct) / static_cast<double>(total);
}

inline std::vector<std::vector<ClassLabel>> oob_predictions(const ForestModel& model, const Matrix& x, std::size_t threads) {
  std::vector<std::vector<ClassLabel>> out(model.trees.size());
  parallel_for(model.trees.size(), threads, [&](std::size_t t) {
    out[t].reserve(model.oob[t].size());
    for (auto r : model.oob[t]) out[t].push_back(model.trees[t].predict(x.row(r)));
  });
  return out;
}

}  // namespace detail

// Each row is judged only by the trees that did not see it during training.
inline double oob_accuracy(const ForestModel& model, const Matrix& x, std::span<const ClassLabel> y, std::size_t threads = 1) {
  if (x.cols() != model.M) throw invalid_argument("data width does not match forest width");
  if (model.oob.size() != model.trees.size()) throw invalid_argument("forest has no out-of-bag masks");
  return detail::oob_vote_accuracy(model, detail::oob_predictions(model, x, threads), y);
}

// Drop in OOB accuracy after one seeded permutation of each column (averaged
// over `repeats` permutations), floored at 0.
inline std::vector<double> permutation_importance(const ForestModel& model, const Matrix& x, std::span<const ClassLabel> y,
                                                  std::uint64_t seed, std::size_t repeats = 1, std::size_t threads = 1) {
  if (repeats < 1) throw invalid_argument("importance needs at least one repeat");
  const auto base_predictions = detail::oob_predictions(model, x, threads);
  const double baseline = detail::oob_vote_accuracy(model, base_predictions, y);

  std::vector<bool> covered(x.rows(), false);
  for (const auto& oob : model.oob) {
    for (auto r : oob) covered[r] = true;
  }
  std::vector<std::size_t> covered_rows;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    if (covered[r]) covered_rows.push_back(r);
  }

  std::vector<double> scores(model.M, 0.0);
  parallel_for(model.M, threads, [&](std::size_t j) {
    double total_drop = 0.0;
    std::vector<double> permuted(x.rows(), 0.0);
    std::vector<double> buffer(model.M);
    for (std::size_t rep = 0; rep < repeats; ++rep) {
      Rng rng(derive_seed(seed, j * repeats + rep));
      std::vector<std::size_t> source = covered_rows;
      rng.shuffle(source);
      for (std::size_t k = 0; k < covered_rows.size(); ++k) permuted[covered_rows[k]] = x(source[k], j);
      auto predictions = base_predictions;
      for (std::size_t t = 0; t < model.trees.size(); ++t) {
        if (!model.trees[t].uses_feature(j)) continue;
        for (std::size_t k = 0; k < model.oob[t].size(); ++k) {
          const auto r = model.oob[t][k];
          auto row = x.row(r);
          std::copy(row.begin(), row.end(), buffer.begin());
          buffer[j] = permuted[r];
          predictions[t][k] = model.trees[t].predict(buffer);
        }
      }
      total_drop += baseline - detail::oob_vote_accuracy(model, predictions, y);
    }
    scores[j] = std::max(0.0, total_drop / static_cast<double>(repeats));
  });
  return scores;
}

// Indices of the k largest scores (ties to the lower index), ascending.
inline std::vector<std::size_t> select_features(std::span<const double> importance, std::size_t k) {
  if (k < 1 || k > importance.size()) throw invalid_argument("feature count k must lie in [1, M]");
  std::vector<std::size_t> order(importance.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return importance[a] > importance[b]; });
  order.resize(k);
  std::sort(order.begin(), order.end());
  return order;
}

// `feature_index,feature_name,score`, highest score first.
inline void write_importance_report(std::ostream& os, std::span<const double> importance, const FeatureSchema& schema) {
  std::vector<std::size_t> order(importance.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return importance[a] > importance[b]; });
  os << "feature_index,feature_name,score\n";
  for (auto j : order) os << j << ',' << (j < schema.size() ? schema[j].name : std::to_string(j)) << ',' << text::format_double(importance[j]) << '\n';
}

namespace detail {

inline void write_preorder(std::ostream& os, const Tree& tree, std::uint32_t at) {
  const TreeNode& n = tree.nodes[at];
  if (n.is_leaf()) {
    os << "leaf " << name_of(n.label);
    for (auto c : n.class_counts) os << ' ' << c;
    os << '\n';
    return;
  }
  os << "split " << n.feature << ' ' << text::format_double(n.threshold) << '\n';
  write_preorder(os, tree, n.left);
  write_preorder(os, tree, n.right);
}

inline std::uint32_t read_preorder(std::istream& is, Tree& tree, std::size_t width) {
  std::string kind;
  if (!(is >> kind)) throw schema_error("truncated tree");
  const auto id = static_cast<std::uint32_t>(tree.nodes.size());
  tree.nodes.emplace_back();
  if (kind == "leaf") {
    std::string label;
    is >> label;
    auto c = label_from_name(label);
    if (!c) throw schema_error("bad leaf label '" + label + "'");
    tree.nodes[id].label = *c;
    for (auto& v : tree.nodes[id].class_counts) is >> v;
    return id;
  }
  if (kind != "split") throw schema_error("bad tree node '" + kind + "'");
  std::uint32_t feature = 0;
  std::string threshold;
  is >> feature >> threshold;
  auto thr = text::parse_double(threshold);
  if (!thr || feature >= width) throw schema_error("bad split node");
  const std::uint32_t left = read_preorder(is, tree, width);
  const std::uint32_t right = read_preorder(is, tree, width);
  TreeNode& n = tree.nodes[id];
  n.feature = feature;
  n.threshold = *thr;
  n.left = left;
  n.right = right;
  ClassCounts counts{};
  for (std::size_t c = 0; c < kNumClasses; ++c) counts[c] = tree.nodes[left].class_counts[c] + tree.nodes[right].class_counts[c];
  n.class_counts = counts;
  n.label = majority(counts);
  return id;
}

}  // namespace detail

// Versioned preorder text; OOB masks are not persisted.
inline void write_forest(std::ostream& os, const ForestModel& model) {
  os << "forest 1\n";
  os << "trees " << model.trees.size() << " m " << model.m << " M " << model.M << '\n';
  os << "importance " << model.importance.size();
  for (double v : model.importance) os << ' ' << text::format_double(v);
  os << '\n';
  for (const auto& t : model.trees) {
    os << "tree " << t.nodes.size() << '\n';
    detail::write_preorder(os, t, 0);
  }
}

inline ForestModel read_forest(std::istream& is) {
  std::string tag, version;
  if (!(is >> tag >> version) || tag != "forest" || version != "1") throw schema_error("not a version 1 forest");
  ForestModel model;
  std::size_t count = 0, n_imp = 0;
  std::string k1, k2, k3, k4;
  if (!(is >> k1 >> count >> k2 >> model.m >> k3 >> model.M) || k1 != "trees" || k2 != "m" || k3 != "M")
    throw schema_error("bad forest header");
  if (!(is >> k4 >> n_imp) || k4 != "importance") throw schema_error("bad importance line");
  model.importance.resize(n_imp);
  for (auto& v : model.importance) {
    std::string s;
    is >> s;
    auto d = text::parse_double(s);
    if (!d) throw schema_error("bad importance value");
    v = *d;
  }
  model.trees.resize(count);
  for (auto& t : model.trees) {
    std::size_t nodes = 0;
    if (!(is >> tag >> nodes) || tag != "tree") throw schema_error("bad tree header");
    detail::read_preorder(is, t, model.M);
    if (t.nodes.size() != nodes) throw schema_error("tree node count mismatch");
  }
  return model;
}

}  // namespace ids::forest
