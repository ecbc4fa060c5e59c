#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ids/error.hpp"
#include "ids/labels.hpp"
#include "ids/text.hpp"

namespace ids::metrics {

// counts[i][j]: rows of true class i predicted as class j.
struct ConfusionMatrix {
  std::array<std::array<std::uint64_t, kNumClasses>, kNumClasses> counts{};

  std::uint64_t total() const noexcept {
    std::uint64_t n = 0;
    for (const auto& r : counts) {
      for (auto v : r) n += v;
    }
    return n;
  }

  std::uint64_t trace() const noexcept {
    std::uint64_t t = 0;
    for (std::size_t i = 0; i < kNumClasses; ++i) t += counts[i][i];
    return t;
  }

  std::uint64_t row_total(ClassLabel c) const noexcept {
    std::uint64_t n = 0;
    for (auto v : counts[index_of(c)]) n += v;
    return n;
  }

  std::uint64_t col_total(ClassLabel c) const noexcept {
    std::uint64_t n = 0;
    for (const auto& r : counts) n += r[index_of(c)];
    return n;
  }

  ConfusionMatrix& operator+=(const ConfusionMatrix& o) {
    for (std::size_t i = 0; i < kNumClasses; ++i) {
      for (std::size_t j = 0; j < kNumClasses; ++j) counts[i][j] += o.counts[i][j];
    }
    return *this;
  }

  bool operator==(const ConfusionMatrix&) const = default;
};

struct CostMatrix {
  std::array<std::array<double, kNumClasses>, kNumClasses> cost{};

  // KDD99 penalty table (rows: true class, columns: predicted class).
  static CostMatrix kdd99() {
    return CostMatrix{{{
        {0, 1, 2, 2, 2},
        {1, 0, 2, 2, 2},
        {2, 1, 0, 2, 2},
        {3, 2, 2, 0, 2},
        {4, 2, 2, 2, 0},
    }}};
  }

  // Five rows of five numbers (comma or whitespace separated); '#' lines ignored.
  static CostMatrix read(std::istream& is) {
    CostMatrix m;
    std::string line;
    std::size_t row = 0, lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      auto view = text::trim(line);
      if (view.empty() || view.front() == '#') continue;
      std::string normalized(view);
      for (auto& ch : normalized) {
        if (ch == ',' || ch == '\t') ch = ' ';
      }
      std::vector<double> values;
      for (auto field : text::split(normalized, ' ')) {
        if (field.empty()) continue;
        auto v = text::parse_double(field);
        if (!v) throw parse_error(lineno, "non-numeric cost");
        values.push_back(*v);
      }
      if (values.size() != kNumClasses || row >= kNumClasses) throw schema_error("cost matrix must be 5x5");
      for (std::size_t j = 0; j < kNumClasses; ++j) m.cost[row][j] = values[j];
      ++row;
    }
    if (row != kNumClasses) throw schema_error("cost matrix must be 5x5");
    return m;
  }
};

inline ConfusionMatrix confusion(std::span<const ClassLabel> truth, std::span<const ClassLabel> predicted) {
  if (truth.size() != predicted.size()) throw invalid_argument("true and predicted label counts differ");
  if (truth.empty()) throw invalid_argument("confusion matrix needs at least one sample");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i) ++cm.counts[index_of(truth[i])][index_of(predicted[i])];
  return cm;
}

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double fscore = 0.0;
};

// One-vs-rest precision, recall and their harmonic mean. A zero denominator
// yields 0, and F is 0 whenever P + R is 0.
inline PRF precision_recall_f(const ConfusionMatrix& cm, ClassLabel c) {
  const std::size_t k = index_of(c);
  const auto tp = static_cast<double>(cm.counts[k][k]);
  const auto predicted = static_cast<double>(cm.col_total(c));
  const auto actual = static_cast<double>(cm.row_total(c));
  PRF out;
  out.precision = predicted > 0 ? tp / predicted : 0.0;
  out.recall = actual > 0 ? tp / actual : 0.0;
  out.fscore = (out.precision + out.recall) > 0 ? 2.0 / (1.0 / out.precision + 1.0 / out.recall) : 0.0;
  if (out.precision == 0.0 || out.recall == 0.0) out.fscore = 0.0;
  return out;
}

inline double accuracy(const ConfusionMatrix& cm) {
  const auto n = cm.total();
  if (n == 0) throw invalid_argument("accuracy of an empty confusion matrix");
  return static_cast<double>(cm.trace()) / static_cast<double>(n);
}

// Normal rows predicted as any attack, over all Normal rows.
inline double false_positive_rate(const ConfusionMatrix& cm) {
  const auto normal = cm.row_total(ClassLabel::Normal);
  if (normal == 0) throw invalid_argument("false positive rate needs Normal rows");
  const auto tn = cm.counts[0][0];
  return static_cast<double>(normal - tn) / static_cast<double>(normal);
}

// Mean per-sample penalty: (1/N) Σ counts[i][j] * C[i][j].
inline double cost(const ConfusionMatrix& cm, const CostMatrix& c) {
  const auto n = cm.total();
  if (n == 0) throw invalid_argument("cost of an empty confusion matrix");
  double sum = 0.0;
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    for (std::size_t j = 0; j < kNumClasses; ++j) sum += static_cast<double>(cm.counts[i][j]) * c.cost[i][j];
  }
  return sum / static_cast<double>(n);
}

enum class Averaging : unsigned char { macro, weighted };

struct MetricsReport {
  std::array<PRF, kNumClasses> per_class{};
  std::array<bool, kNumClasses> present{};  // class has true or predicted samples
  PRF average;
  double accuracy = 0.0;
  std::optional<double> fpr;  // undefined without Normal rows
  double cost = 0.0;
  double time_seconds = 0.0;
};

// Per-class P/R/F plus averages over the classes that occur (as truth or prediction).
inline MetricsReport macro_report(const ConfusionMatrix& cm, const CostMatrix& costs, double time_seconds = 0.0,
                                  Averaging mode = Averaging::macro) {
  MetricsReport r;
  double weight_sum = 0.0;
  for (ClassLabel c : kAllClasses) {
    const std::size_t k = index_of(c);
    r.per_class[k] = precision_recall_f(cm, c);
    r.present[k] = cm.row_total(c) > 0 || cm.col_total(c) > 0;
    if (!r.present[k]) continue;
    const double w = mode == Averaging::macro ? 1.0 : static_cast<double>(cm.row_total(c));
    r.average.precision += w * r.per_class[k].precision;
    r.average.recall += w * r.per_class[k].recall;
    r.average.fscore += w * r.per_class[k].fscore;
    weight_sum += w;
  }
  if (weight_sum > 0) {
    r.average.precision /= weight_sum;
    r.average.recall /= weight_sum;
    r.average.fscore /= weight_sum;
  }
  r.accuracy = accuracy(cm);
  if (cm.row_total(ClassLabel::Normal) > 0) r.fpr = false_positive_rate(cm);
  r.cost = cost(cm, costs);
  r.time_seconds = time_seconds;
  return r;
}

// Machine CSV: per-class block, then the summary block.
inline void write_report_csv(std::ostream& os, const MetricsReport& r) {
  os << "class,precision,recall,fscore\n";
  for (ClassLabel c : kAllClasses) {
    const auto& m = r.per_class[index_of(c)];
    os << name_of(c) << ',' << text::fixed(m.precision, 6) << ',' << text::fixed(m.recall, 6) << ','
       << text::fixed(m.fscore, 6) << '\n';
  }
  os << "macro," << text::fixed(r.average.precision, 6) << ',' << text::fixed(r.average.recall, 6) << ','
     << text::fixed(r.average.fscore, 6) << '\n';
  os << "accuracy,fpr,cost,time_seconds\n";
  os << text::fixed(r.accuracy, 6) << ',' << (r.fpr ? text::fixed(*r.fpr, 6) : std::string("nan")) << ','
     << text::fixed(r.cost, 6) << ',' << text::fixed(r.time_seconds, 3) << '\n';
}

// Human-readable table in the column order Precision, Recall, F_score, FPR, Cost, Time (percentages).
inline void write_report_table(std::ostream& os, const MetricsReport& r) {
  os << "class    precision  recall     fscore\n";
  for (ClassLabel c : kAllClasses) {
    const auto& m = r.per_class[index_of(c)];
    std::string name(name_of(c));
    name.resize(8, ' ');
    os << name << ' ' << text::fixed(100 * m.precision, 2) << "%    " << text::fixed(100 * m.recall, 2) << "%    "
       << text::fixed(100 * m.fscore, 2) << "%\n";
  }
  os << "Precision(%) Recall(%) F_score(%) FPR(%) Cost Time(s)\n";
  os << text::fixed(100 * r.average.precision, 2) << ' ' << text::fixed(100 * r.average.recall, 2) << ' '
     << text::fixed(100 * r.average.fscore, 2) << ' ' << (r.fpr ? text::fixed(100 * *r.fpr, 2) : std::string("n/a")) << ' '
     << text::fixed(r.cost, 4) << ' ' << text::fixed(r.time_seconds, 2) << '\n';
  os << "accuracy " << text::fixed(100 * r.accuracy, 2) << "%\n";
}

inline void write_confusion_csv(std::ostream& os, const ConfusionMatrix& cm) {
  os << "true\\predicted";
  for (ClassLabel c : kAllClasses) os << ',' << name_of(c);
  os << '\n';
  for (ClassLabel c : kAllClasses) {
    os << name_of(c);
    for (auto v : cm.counts[index_of(c)]) os << ',' << v;
    os << '\n';
  }
}

}  // namespace ids::metrics
