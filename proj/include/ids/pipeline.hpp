#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "ids/adaboost.hpp"
#include "ids/config.hpp"
#include "ids/dataset.hpp"
#include "ids/entropy.hpp"
#include "ids/error.hpp"
#include "ids/flow.hpp"
#include "ids/kmeans.hpp"
#include "ids/metrics.hpp"
#include "ids/parallel.hpp"
#include "ids/random_forest.hpp"

namespace ids::pipeline {

// Two-stage detector: k-means clusters route rows either straight to Normal
// (benign clusters) or to the Adaboost attack classifier.
struct HybridModel {
  FeatureSchema schema;
  EncodingState encoding;
  std::vector<std::size_t> selected_features;
  std::vector<double> importance;  // over all M features
  kmeans::KMeansModel kmeans;
  boost::AdaboostModel boost;
  Config config;

  // Selected features only, with categorical codes divided by the number of
  // known categories so every coordinate lies in [0, 1].
  std::vector<double> project(std::span<const double> row) const {
    std::vector<double> out(selected_features.size());
    for (std::size_t k = 0; k < selected_features.size(); ++k) out[k] = scaled(selected_features[k], row[selected_features[k]]);
    return out;
  }

  Matrix project(const Matrix& rows) const {
    Matrix out(rows.rows(), selected_features.size());
    for (std::size_t i = 0; i < rows.rows(); ++i) {
      for (std::size_t k = 0; k < selected_features.size(); ++k) out(i, k) = scaled(selected_features[k], rows(i, selected_features[k]));
    }
    return out;
  }

  double scaled(std::size_t column, double value) const {
    if (!schema.is_categorical(column)) return value;
    return value / static_cast<double>(std::max<std::size_t>(1, encoding.categories[column].size()));
  }
};

struct StageTimings {
  double importance_seconds = 0.0;
  double kmeans_seconds = 0.0;
  double boost_seconds = 0.0;

  double total() const noexcept { return importance_seconds + kmeans_seconds + boost_seconds; }
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace detail

// Forest importance -> top-k features -> optional rebalance -> k-means with
// cluster dispositions -> Adaboost on the rows of anomalous clusters.
inline HybridModel train(const Dataset& data, const Config& config, StageTimings* timings = nullptr) {
  config.validate();
  if (!data.encoded()) throw invalid_argument("training data must be encoded");
  if (!data.labeled()) throw invalid_argument("training data must be labeled");
  if (config.feature_count > data.width()) throw invalid_argument("feature count exceeds dataset width");
  HybridModel model;
  model.schema = data.schema();
  model.encoding = data.encoding();
  model.config = config;

  auto start = detail::Clock::now();
  forest::ForestConfig fc;
  fc.num_trees = config.forest_size;
  fc.max_depth = config.forest_max_depth;
  fc.seed = config.seed_for(Config::Stage::forest);
  fc.threads = config.threads;
  auto forest_model = forest::train_forest(data.values(), data.labels(), fc);
  model.importance = forest::permutation_importance(forest_model, data.values(), data.labels(),
                                                    config.seed_for(Config::Stage::importance),
                                                    config.importance_repeats, config.threads);
  model.selected_features = forest::select_features(model.importance, config.feature_count);
  if (timings) timings->importance_seconds = detail::seconds_since(start);

  start = detail::Clock::now();
  const Dataset balanced =
      config.rebalance ? rebalance(data, *config.rebalance, config.seed_for(Config::Stage::rebalance)) : data;
  const Matrix projected = model.project(balanced.values());
  if (projected.rows() < config.clusters) throw degenerate_data("fewer training rows than clusters");
  auto centroids = kmeans::init_centroids(projected, config.clusters, config.seed_for(Config::Stage::kmeans));
  model.kmeans = kmeans::lloyd(projected, std::move(centroids), {config.lloyd_max_iter, config.lloyd_tol});
  const auto assignment = kmeans::assign_all(model.kmeans, projected);
  model.kmeans.disposition = kmeans::label_clusters(model.kmeans, assignment, balanced.labels());
  if (timings) timings->kmeans_seconds = detail::seconds_since(start);

  start = detail::Clock::now();
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < projected.rows(); ++i) {
    if (model.kmeans.disposition[assignment[i]] != kmeans::Disposition::anomalous) continue;
    if (config.strict_attack_classes && balanced.label(i) == ClassLabel::Normal) continue;
    rows.push_back(i);
  }
  if (rows.size() < 2) throw degenerate_data("anomalous clusters hold fewer than two training rows");
  const Matrix boost_x = projected.select_rows(rows);
  std::vector<ClassLabel> boost_y(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) boost_y[k] = balanced.label(rows[k]);
  model.boost = boost::train_adaboost(boost_x, boost_y, config.boost_rounds);
  if (model.boost.empty()) throw degenerate_data("no boosting round beat chance on the anomalous rows");
  if (timings) timings->boost_seconds = detail::seconds_since(start);
  return model;
}

// Row in the full, encoded feature space.
inline ClassLabel classify(const HybridModel& model, std::span<const double> row) {
  if (row.size() != model.schema.size())
    throw invalid_argument("row width " + std::to_string(row.size()) + " != model width " + std::to_string(model.schema.size()));
  const auto projected = model.project(row);
  const std::size_t cluster = model.kmeans.assign(projected);
  if (model.kmeans.disposition[cluster] == kmeans::Disposition::benign) return ClassLabel::Normal;
  return model.boost.predict(projected);
}

inline std::vector<ClassLabel> classify_all(const HybridModel& model, const Matrix& rows, std::size_t threads = 1) {
  std::vector<ClassLabel> out(rows.rows());
  constexpr std::size_t kChunk = 4096;
  const std::size_t chunks = (rows.rows() + kChunk - 1) / kChunk;
  parallel_for(chunks, threads, [&](std::size_t c) {
    const std::size_t end = std::min(rows.rows(), (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) out[i] = classify(model, rows.row(i));
  });
  return out;
}

// Encodes `data` with the model's statistics (no-op when already encoded with them).
inline Dataset prepare(const HybridModel& model, const Dataset& data) {
  if (data.schema() != model.schema) throw schema_error("dataset schema does not match the model schema");
  return apply_encode(data, model.encoding);
}

struct Evaluation {
  metrics::ConfusionMatrix confusion;
  metrics::MetricsReport report;
  std::vector<ClassLabel> predictions;
  double seconds = 0.0;
};

inline Evaluation evaluate(const HybridModel& model, const Dataset& test, const metrics::CostMatrix& costs,
                           std::size_t threads = 1) {
  const Dataset encoded = prepare(model, test);
  Evaluation ev;
  auto start = detail::Clock::now();
  ev.predictions = classify_all(model, encoded.values(), threads);
  ev.seconds = detail::seconds_since(start);
  ev.confusion = metrics::confusion(encoded.labels(), ev.predictions);
  ev.report = metrics::macro_report(ev.confusion, costs, ev.seconds);
  return ev;
}

enum class Gate : unsigned char { off, on };

struct StreamResult {
  std::vector<ClassLabel> verdicts;  // aligned with the input flows
  std::vector<entropy::IntervalVerdict> intervals;
  std::size_t classified = 0;        // flows that reached the classifier
};

// Screens each interval; with the gate on only suspicious intervals reach the
// classifier and all other flows are Normal.
inline StreamResult detect_stream(const HybridModel& model, std::span<const flow::FlowRecord> flows, entropy::Screen& screen,
                                  Gate gate) {
  StreamResult out;
  out.verdicts.assign(flows.size(), ClassLabel::Normal);
  if (flows.empty()) return out;
  const Dataset encoded = apply_encode(flow::to_dataset(flows), model.encoding);
  for (auto [begin, end] : flow::interval_ranges(flows)) {
    auto verdict = entropy::screen_interval(flows.subspan(begin, end - begin), screen);
    out.intervals.push_back(verdict);
    if (gate == Gate::on && verdict.verdict == entropy::Verdict::normal) continue;
    for (std::size_t i = begin; i < end; ++i) {
      out.verdicts[i] = classify(model, encoded.row(i));
      ++out.classified;
    }
  }
  return out;
}

// Per-class recall on both splits, in the layout Normal, Probe, DoS, U2R, R2L.
struct CrossValidationReport {
  std::array<double, kNumClasses> train_accuracy{};
  std::array<double, kNumClasses> test_accuracy{};
  std::array<std::size_t, kNumClasses> train_counts{};
  std::array<std::size_t, kNumClasses> test_counts{};
  bool fallback_constant = false;  // no anomalous cluster could be trained
};

namespace detail {

inline std::array<double, kNumClasses> per_class_recall(std::span<const ClassLabel> truth, std::span<const ClassLabel> predicted) {
  std::array<double, kNumClasses> out{};
  if (truth.empty()) return out;
  const auto cm = metrics::confusion(truth, predicted);
  for (ClassLabel c : kAllClasses) out[index_of(c)] = metrics::precision_recall_f(cm, c).recall;
  return out;
}

inline std::pair<Dataset, Dataset> encode_pair(const Dataset& train, const Dataset& test) {
  if (train.encoded()) return {train, test};
  Dataset enc_train = fit_encode(train);
  Dataset enc_test = apply_encode(test, enc_train.encoding());
  return {std::move(enc_train), std::move(enc_test)};
}

// Predictions of `model`, or of the training majority class when the split
// cannot support an anomalous stage.
inline std::vector<ClassLabel> predict_or_majority(const std::optional<HybridModel>& model, ClassLabel fallback,
                                                   const Dataset& data, std::size_t threads) {
  if (model) return classify_all(*model, data.values(), threads);
  return std::vector<ClassLabel>(data.size(), fallback);
}

}  // namespace detail

// One seeded train/test split (train_fraction of the rows for training); the
// trained model is scored on both splits.
inline CrossValidationReport cross_validate(const Dataset& data, const Config& config, double train_fraction = 0.9) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw invalid_argument("train fraction must lie in (0, 1)");
  auto [raw_train, raw_test] = split(data, 1.0 - train_fraction, config.seed_for(Config::Stage::split));
  auto [train_set, test_set] = detail::encode_pair(raw_train, raw_test);
  CrossValidationReport report;
  std::optional<HybridModel> model;
  try {
    model = train(train_set, config);
  } catch (const degenerate_data&) {
    report.fallback_constant = true;
  }
  const auto counts = train_set.class_counts();
  const ClassLabel majority = forest::majority(counts);
  report.train_counts = counts;
  report.test_counts = test_set.class_counts();
  report.train_accuracy =
      detail::per_class_recall(train_set.labels(), detail::predict_or_majority(model, majority, train_set, config.threads));
  report.test_accuracy =
      detail::per_class_recall(test_set.labels(), detail::predict_or_majority(model, majority, test_set, config.threads));
  return report;
}

// k-fold variant: mean per-class recall over the folds (train and held-out).
inline CrossValidationReport cross_validate_kfold(const Dataset& data, const Config& config, std::size_t folds) {
  if (folds < 2 || folds > data.size()) throw invalid_argument("fold count must lie in [2, N]");
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(config.seed_for(Config::Stage::split));
  rng.shuffle(order);
  CrossValidationReport report;
  std::array<std::size_t, kNumClasses> train_seen{}, test_seen{};
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<std::size_t> tr, te;
    for (std::size_t k = 0; k < order.size(); ++k) (k % folds == f ? te : tr).push_back(order[k]);
    auto [train_set, test_set] = detail::encode_pair(data.select(tr), data.select(te));
    std::optional<HybridModel> model;
    try {
      model = train(train_set, config);
    } catch (const degenerate_data&) {
      report.fallback_constant = true;
    }
    const ClassLabel majority = forest::majority(train_set.class_counts());
    auto tr_acc = detail::per_class_recall(train_set.labels(), detail::predict_or_majority(model, majority, train_set, config.threads));
    auto te_acc = detail::per_class_recall(test_set.labels(), detail::predict_or_majority(model, majority, test_set, config.threads));
    auto tr_counts = train_set.class_counts();
    auto te_counts = test_set.class_counts();
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      report.train_counts[c] += tr_counts[c];
      report.test_counts[c] += te_counts[c];
      if (tr_counts[c]) {
        report.train_accuracy[c] += tr_acc[c];
        ++train_seen[c];
      }
      if (te_counts[c]) {
        report.test_accuracy[c] += te_acc[c];
        ++test_seen[c];
      }
    }
  }
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (train_seen[c]) report.train_accuracy[c] /= static_cast<double>(train_seen[c]);
    if (test_seen[c]) report.test_accuracy[c] /= static_cast<double>(test_seen[c]);
  }
  return report;
}

inline void write_cross_validation(std::ostream& os, const CrossValidationReport& r) {
  os << "split";
  for (ClassLabel c : kAllClasses) os << ',' << name_of(c);
  os << '\n';
  os << "train";
  for (double v : r.train_accuracy) os << ',' << text::fixed(100.0 * v, 2);
  os << '\n';
  os << "test";
  for (double v : r.test_accuracy) os << ',' << text::fixed(100.0 * v, 2);
  os << '\n';
}

// Per-class recall of an unbalanced and a rebalanced model trained on the same
// training split and scored on the same held-out split.
struct RebalanceComparison {
  std::array<double, kNumClasses> original_recall{};
  std::array<double, kNumClasses> balanced_recall{};
  std::array<std::size_t, kNumClasses> test_counts{};
};

inline RebalanceComparison rebalance_experiment(const Dataset& data, const Config& config, const ClassTargets& targets,
                                                double test_fraction = 0.4) {
  auto [raw_train, raw_test] = split(data, test_fraction, config.seed_for(Config::Stage::split));
  auto [train_set, test_set] = detail::encode_pair(raw_train, raw_test);
  Config original = config;
  original.rebalance.reset();
  Config balanced = config;
  balanced.rebalance = targets;
  // Targets name only classes present in the training split.
  for (auto it = balanced.rebalance->begin(); it != balanced.rebalance->end();) {
    if (train_set.class_counts()[index_of(it->first)] == 0) {
      it = balanced.rebalance->erase(it);
    } else {
      ++it;
    }
  }
  RebalanceComparison out;
  out.test_counts = test_set.class_counts();
  const auto a = train(train_set, original);
  const auto b = train(train_set, balanced);
  out.original_recall = detail::per_class_recall(test_set.labels(), classify_all(a, test_set.values(), config.threads));
  out.balanced_recall = detail::per_class_recall(test_set.labels(), classify_all(b, test_set.values(), config.threads));
  return out;
}

// Accuracy and wall time per NT value (boosting-round sweep).
struct RoundSweepPoint {
  std::size_t rounds = 0;
  double accuracy = 0.0;
  double seconds = 0.0;
};

inline std::vector<RoundSweepPoint> round_sweep(const Dataset& train_set, const Dataset& test_set, const Config& config,
                                                std::span<const std::size_t> rounds) {
  std::vector<RoundSweepPoint> out;
  for (auto nt : rounds) {
    Config c = config;
    c.boost_rounds = nt;
    auto start = detail::Clock::now();
    const auto model = train(train_set, c);
    const auto ev = evaluate(model, test_set, metrics::CostMatrix::kdd99(), config.threads);
    out.push_back({nt, ev.report.accuracy, detail::seconds_since(start)});
  }
  return out;
}

// ---- model bundle -------------------------------------------------------

inline constexpr std::string_view kBundleFormat = "ids-bundle 1";
inline constexpr std::array<std::string_view, 6> kBundleFiles = {"schema", "encoding", "features", "kmeans", "adaboost", "config"};

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw error("cannot write " + path.string());
  out << content;
  if (!out) throw error("failed writing " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

inline void save_bundle(const HybridModel& model, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  detail::write_file(dir / "schema", model.schema.header() + "\n");
  {
    std::ostringstream os;
    model.encoding.write(os, model.schema);
    detail::write_file(dir / "encoding", os.str());
  }
  {
    std::ostringstream os;
    os << "# selected " << model.selected_features.size() << " of " << model.schema.size() << '\n';
    for (auto j : model.selected_features) {
      os << j << ' ' << model.schema[j].name << ' '
         << text::format_double(j < model.importance.size() ? model.importance[j] : 0.0) << '\n';
    }
    detail::write_file(dir / "features", os.str());
  }
  {
    std::ostringstream os;
    kmeans::write_model(os, model.kmeans);
    detail::write_file(dir / "kmeans", os.str());
  }
  {
    std::ostringstream os;
    boost::write_model(os, model.boost);
    detail::write_file(dir / "adaboost", os.str());
  }
  // The config file opens with the format tag and derived stage seeds as comments.
  std::ostringstream os;
  os << "# " << kBundleFormat << '\n';
  for (auto [name, stage] : {std::pair{"forest_seed", Config::Stage::forest}, std::pair{"importance_seed", Config::Stage::importance},
                             std::pair{"rebalance_seed", Config::Stage::rebalance}, std::pair{"kmeans_seed", Config::Stage::kmeans},
                             std::pair{"split_seed", Config::Stage::split}}) {
    os << "# " << name << ' ' << model.config.seed_for(stage) << '\n';
  }
  write_config(os, model.config);
  detail::write_file(dir / "config", os.str());
}

inline HybridModel load_bundle(const std::filesystem::path& dir) {
  HybridModel model;
  {
    std::istringstream is(detail::read_file(dir / "config"));
    std::string line;
    std::getline(is, line);
    if (text::trim(line) != "# " + std::string(kBundleFormat)) throw schema_error("unsupported bundle format in " + dir.string());
  }
  {
    std::istringstream is(detail::read_file(dir / "schema"));
    std::string line;
    std::getline(is, line);
    model.schema = FeatureSchema::from_header(line);
  }
  {
    std::istringstream is(detail::read_file(dir / "encoding"));
    model.encoding = EncodingState::read(is, model.schema);
  }
  {
    std::istringstream is(detail::read_file(dir / "features"));
    std::string line;
    model.importance.assign(model.schema.size(), 0.0);
    while (std::getline(is, line)) {
      auto view = text::trim(line);
      if (view.empty() || view.front() == '#') continue;
      auto f = text::split(view, ' ');
      auto j = f.empty() ? std::nullopt : text::parse_int<std::size_t>(f[0]);
      if (!j || *j >= model.schema.size()) throw schema_error("bad feature index in bundle");
      model.selected_features.push_back(*j);
      if (f.size() >= 3) {
        if (auto s = text::parse_double(f[2])) model.importance[*j] = *s;
      }
    }
    if (model.selected_features.empty() || !std::is_sorted(model.selected_features.begin(), model.selected_features.end()))
      throw schema_error("bundle feature list must be non-empty and ascending");
  }
  {
    std::istringstream is(detail::read_file(dir / "kmeans"));
    model.kmeans = kmeans::read_model(is);
  }
  {
    std::istringstream is(detail::read_file(dir / "adaboost"));
    model.boost = boost::read_model(is);
  }
  {
    std::istringstream is(detail::read_file(dir / "config"));
    read_config(is, model.config);
  }
  if (model.kmeans.dim() != model.selected_features.size()) throw schema_error("k-means width differs from feature count");
  for (const auto& s : model.boost.stumps) {
    if (s.feature >= model.selected_features.size()) throw schema_error("stump feature outside the selected features");
  }
  return model;
}

}  // namespace ids::pipeline
