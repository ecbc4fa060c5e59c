#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ids/error.hpp"
#include "ids/labels.hpp"
#include "ids/matrix.hpp"
#include "ids/text.hpp"

namespace ids::boost {

// One-level decision stump; values <= threshold take left_label.
struct Stump {
  std::size_t feature = 0;
  double threshold = 0.0;
  ClassLabel left_label = ClassLabel::Normal;
  ClassLabel right_label = ClassLabel::Normal;

  ClassLabel predict(std::span<const double> row) const { return row[feature] <= threshold ? left_label : right_label; }

  bool operator==(const Stump&) const = default;
};

struct AdaboostModel {
  std::vector<Stump> stumps;
  std::vector<double> alphas;
  std::vector<ClassLabel> classes;  // labels seen in training, ascending
  std::size_t rounds = 5;           // NT

  bool empty() const noexcept { return stumps.empty(); }

  // Weighted vote; ties go to the lower class index.
  ClassLabel predict(std::span<const double> row) const {
    if (stumps.empty()) throw invalid_argument("adaboost model has no stumps");
    std::array<double, kNumClasses> score{};
    for (std::size_t t = 0; t < stumps.size(); ++t) {
      if (stumps[t].feature >= row.size()) throw invalid_argument("row is narrower than the stump features");
      score[index_of(stumps[t].predict(row))] += alphas[t];
    }
    std::size_t best = 0;
    for (std::size_t c = 1; c < kNumClasses; ++c) {
      if (score[c] > score[best]) best = c;
    }
    return label_at(best);
  }
};

namespace detail {

inline std::size_t argmax(const std::array<double, kNumClasses>& w) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < kNumClasses; ++c) {
    if (w[c] > w[best]) best = c;
  }
  return best;
}

inline double max_of(const std::array<double, kNumClasses>& w) { return w[argmax(w)]; }

}  // namespace detail

// Per-feature row orders, sorted by value. Rows are fixed across boosting
// rounds, so one sort serves every round.
class StumpSearch {
 public:
  StumpSearch(const Matrix& x, std::span<const ClassLabel> y) : x_(x), y_(y), order_(x.cols()) {
    if (x.rows() == 0) throw invalid_argument("stump training needs at least one row");
    if (y.size() != x.rows()) throw invalid_argument("label count differs from row count");
    for (std::size_t f = 0; f < x.cols(); ++f) {
      auto& o = order_[f];
      o.resize(x.rows());
      std::iota(o.begin(), o.end(), std::size_t{0});
      std::stable_sort(o.begin(), o.end(), [&](std::size_t a, std::size_t b) { return x(a, f) < x(b, f); });
    }
  }

  // Exhaustive search over every feature and midpoint threshold; each side
  // predicts its weight-majority label. Ties go to the lower feature, then
  // the lower threshold.
  std::pair<Stump, double> train(std::span<const double> weights) const {
    if (weights.size() != x_.rows()) throw invalid_argument("weight count differs from row count");
    double wsum = 0.0;
    std::array<double, kNumClasses> total{};
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (!(weights[i] >= 0.0)) throw invalid_argument("weights must be non-negative");
      wsum += weights[i];
      total[index_of(y_[i])] += weights[i];
    }
    if (std::abs(wsum - 1.0) > 1e-9) throw invalid_argument("weights must sum to 1");

    const ClassLabel overall = label_at(detail::argmax(total));
    Stump best{0, x_.cols() ? x_(order_[0].back(), 0) : 0.0, overall, overall};
    double best_e = wsum - detail::max_of(total);
    bool have_split = false;
    for (std::size_t f = 0; f < x_.cols(); ++f) {
      const auto& o = order_[f];
      std::array<double, kNumClasses> left{};
      double left_sum = 0.0;
      for (std::size_t k = 0; k + 1 < o.size(); ++k) {
        left[index_of(y_[o[k]])] += weights[o[k]];
        left_sum += weights[o[k]];
        const double v = x_(o[k], f), next = x_(o[k + 1], f);
        if (v == next) continue;
        std::array<double, kNumClasses> right;
        for (std::size_t c = 0; c < kNumClasses; ++c) right[c] = total[c] - left[c];
        const double e = (left_sum - detail::max_of(left)) + ((wsum - left_sum) - detail::max_of(right));
        if (!have_split || e < best_e) {
          best = Stump{f, v + (next - v) / 2.0, label_at(detail::argmax(left)), label_at(detail::argmax(right))};
          best_e = e;
          have_split = true;
        }
      }
    }
    return {best, std::max(0.0, best_e)};
  }

  const Matrix& rows() const noexcept { return x_; }
  std::span<const ClassLabel> labels() const noexcept { return y_; }

 private:
  const Matrix& x_;
  std::span<const ClassLabel> y_;
  std::vector<std::vector<std::size_t>> order_;
};

inline std::pair<Stump, double> train_stump(const Matrix& x, std::span<const ClassLabel> y, std::span<const double> weights) {
  return StumpSearch(x, y).train(weights);
}

// α for weighted error e among C classes: ln((1 - e) / e) + ln(C - 1).
inline double alpha_for(double e, std::size_t classes) {
  const auto c = static_cast<double>(std::max<std::size_t>(classes, 2));
  return std::log((1.0 - e) / e) + std::log(c - 1.0);
}

// Substitute error for a perfect round so α stays finite.
inline constexpr double kPerfectRoundEpsilon = 1e-10;

struct RoundTrace {
  std::vector<double> weights;  // distribution the stump was trained on
  Stump stump;
  double error = 0.0;
  double alpha = 0.0;
  bool kept = false;
};

// Multi-class boosting over stumps. Stops early when a round is no better than
// chance (e >= (C - 1) / C, stump dropped) or perfect (e = 0, α capped).
inline AdaboostModel train_adaboost(const Matrix& x, std::span<const ClassLabel> y, std::size_t rounds,
                                    std::vector<RoundTrace>* trace = nullptr) {
  if (rounds < 1) throw invalid_argument("NT must be at least 1");
  if (x.rows() < 2) throw invalid_argument("adaboost needs at least two rows");
  const StumpSearch search(x, y);
  AdaboostModel model;
  model.rounds = rounds;
  std::array<bool, kNumClasses> present{};
  for (auto c : y) present[index_of(c)] = true;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (present[c]) model.classes.push_back(label_at(c));
  }
  const std::size_t n_classes = std::max<std::size_t>(model.classes.size(), 2);
  const double chance = static_cast<double>(n_classes - 1) / static_cast<double>(n_classes);

  std::vector<double> w(x.rows(), 1.0 / static_cast<double>(x.rows()));
  for (std::size_t t = 0; t < rounds; ++t) {
    auto [stump, e] = search.train(w);
    RoundTrace record;
    if (trace) record = RoundTrace{w, stump, e, 0.0, false};
    if (e >= chance) {
      if (trace) trace->push_back(std::move(record));
      break;
    }
    const bool perfect = e <= 0.0;
    const double alpha = alpha_for(perfect ? kPerfectRoundEpsilon : e, n_classes);
    model.stumps.push_back(stump);
    model.alphas.push_back(alpha);
    if (trace) {
      record.alpha = alpha;
      record.kept = true;
      trace->push_back(std::move(record));
    }
    if (perfect) break;
    const double boost = std::exp(alpha);
    double sum = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (stump.predict(x.row(i)) != y[i]) w[i] *= boost;
      sum += w[i];
    }
    for (auto& v : w) v /= sum;
  }
  return model;
}

// `feature_index threshold left_label right_label alpha` per stump, after a
// two-line comment header.
inline void write_model(std::ostream& os, const AdaboostModel& model) {
  os << "# adaboost 1 rounds " << model.rounds << '\n';
  os << "# classes";
  for (auto c : model.classes) os << ' ' << name_of(c);
  os << '\n';
  for (std::size_t t = 0; t < model.stumps.size(); ++t) {
    const auto& s = model.stumps[t];
    os << s.feature << ' ' << text::format_double(s.threshold) << ' ' << name_of(s.left_label) << ' '
       << name_of(s.right_label) << ' ' << text::format_double(model.alphas[t]) << '\n';
  }
}

inline AdaboostModel read_model(std::istream& is) {
  AdaboostModel model;
  std::string line;
  if (!std::getline(is, line)) throw schema_error("empty adaboost model");
  {
    auto f = text::split(text::trim(line), ' ');
    if (f.size() != 5 || f[0] != "#" || f[1] != "adaboost" || f[2] != "1" || f[3] != "rounds")
      throw schema_error("not a version 1 adaboost model");
    auto r = text::parse_int<std::size_t>(f[4]);
    if (!r) throw schema_error("bad round count");
    model.rounds = *r;
  }
  if (!std::getline(is, line)) throw schema_error("missing class line");
  {
    auto f = text::split(text::trim(line), ' ');
    if (f.size() < 2 || f[0] != "#" || f[1] != "classes") throw schema_error("bad class line");
    for (std::size_t i = 2; i < f.size(); ++i) {
      auto c = label_from_name(f[i]);
      if (!c) throw schema_error("bad class name");
      model.classes.push_back(*c);
    }
  }
  std::size_t lineno = 2;
  while (std::getline(is, line)) {
    ++lineno;
    auto view = text::trim(line);
    if (view.empty()) continue;
    auto f = text::split(view, ' ');
    if (f.size() != 5) throw parse_error(lineno, "stump line needs 5 fields");
    auto feature = text::parse_int<std::size_t>(f[0]);
    auto threshold = text::parse_double(f[1]);
    auto left = label_from_name(f[2]);
    auto right = label_from_name(f[3]);
    auto alpha = text::parse_double(f[4]);
    if (!feature || !threshold || !left || !right || !alpha) throw parse_error(lineno, "bad stump line");
    model.stumps.push_back({*feature, *threshold, *left, *right});
    model.alphas.push_back(*alpha);
  }
  return model;
}

}  // namespace ids::boost
