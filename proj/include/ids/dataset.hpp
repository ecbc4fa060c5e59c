#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ids/error.hpp"
#include "ids/labels.hpp"
#include "ids/matrix.hpp"
#include "ids/random.hpp"
#include "ids/text.hpp"

namespace ids {

enum class FeatureKind : unsigned char { categorical, continuous };

inline std::string_view kind_name(FeatureKind k) { return k == FeatureKind::categorical ? "categorical" : "continuous"; }

struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::continuous;
  std::size_t position = 0;

  bool operator==(const FeatureSpec&) const = default;
};

class FeatureSchema {
 public:
  FeatureSchema() = default;

  explicit FeatureSchema(std::vector<FeatureSpec> features) : features_(std::move(features)) {
    std::vector<bool> seen(features_.size(), false);
    for (const auto& f : features_) {
      if (f.position >= features_.size() || seen[f.position])
        throw schema_error("feature positions must be a permutation of 0..M-1");
      seen[f.position] = true;
    }
    std::sort(features_.begin(), features_.end(),
              [](const FeatureSpec& a, const FeatureSpec& b) { return a.position < b.position; });
    for (std::size_t i = 0; i < features_.size(); ++i) {
      for (std::size_t j = i + 1; j < features_.size(); ++j) {
        if (features_[i].name == features_[j].name) throw schema_error("duplicate feature name '" + features_[i].name + "'");
      }
    }
  }

  // The 41 KDD Cup 1999 connection features in file order.
  static const FeatureSchema& kdd99() {
    static const FeatureSchema schema = [] {
      constexpr std::array<std::string_view, 41> names = {
          "duration", "protocol_type", "service", "flag", "src_bytes", "dst_bytes", "land",
          "wrong_fragment", "urgent", "hot", "num_failed_logins", "logged_in", "num_compromised",
          "root_shell", "su_attempted", "num_root", "num_file_creations", "num_shells",
          "num_access_files", "num_outbound_cmds", "is_host_login", "is_guest_login", "count",
          "srv_count", "serror_rate", "srv_serror_rate", "rerror_rate", "srv_rerror_rate",
          "same_srv_rate", "diff_srv_rate", "srv_diff_host_rate", "dst_host_count",
          "dst_host_srv_count", "dst_host_same_srv_rate", "dst_host_diff_srv_rate",
          "dst_host_same_src_port_rate", "dst_host_srv_diff_host_rate", "dst_host_serror_rate",
          "dst_host_srv_serror_rate", "dst_host_rerror_rate", "dst_host_srv_rerror_rate"};
      std::vector<FeatureSpec> specs;
      for (std::size_t i = 0; i < names.size(); ++i) {
        bool cat = (i == 1 || i == 2 || i == 3);
        specs.push_back({std::string(names[i]), cat ? FeatureKind::categorical : FeatureKind::continuous, i});
      }
      return FeatureSchema(std::move(specs));
    }();
    return schema;
  }

  std::size_t size() const noexcept { return features_.size(); }
  const FeatureSpec& operator[](std::size_t i) const { return features_[i]; }
  const std::vector<FeatureSpec>& features() const noexcept { return features_; }

  bool is_categorical(std::size_t i) const { return features_[i].kind == FeatureKind::categorical; }

  std::optional<std::size_t> find(std::string_view name) const {
    for (const auto& f : features_) {
      if (f.name == name) return f.position;
    }
    return std::nullopt;
  }

  // `#schema duration:continuous,protocol_type:categorical,...`
  std::string header() const {
    std::string out = "#schema ";
    for (std::size_t i = 0; i < features_.size(); ++i) {
      if (i) out += ',';
      out += features_[i].name;
      out += ':';
      out += kind_name(features_[i].kind);
    }
    return out;
  }

  static FeatureSchema from_header(std::string_view line) {
    line = text::trim(line);
    constexpr std::string_view tag = "#schema ";
    if (line.substr(0, tag.size()) != tag) throw schema_error("missing '#schema' header");
    line.remove_prefix(tag.size());
    std::vector<FeatureSpec> specs;
    for (auto field : text::split(line, ',')) {
      auto colon = field.rfind(':');
      if (colon == std::string_view::npos) throw schema_error("schema entry without kind: " + std::string(field));
      auto kind = field.substr(colon + 1);
      FeatureKind k;
      if (kind == "categorical") {
        k = FeatureKind::categorical;
      } else if (kind == "continuous") {
        k = FeatureKind::continuous;
      } else {
        throw schema_error("unknown feature kind: " + std::string(kind));
      }
      specs.push_back({std::string(field.substr(0, colon)), k, specs.size()});
    }
    return FeatureSchema(std::move(specs));
  }

  bool operator==(const FeatureSchema&) const = default;

 private:
  std::vector<FeatureSpec> features_;
};

// Statistics frozen by fit_encode and reused for every later split.
struct EncodingState {
  // Per column: known categorical values in code order (empty for continuous columns).
  std::vector<std::vector<std::string>> categories;
  // Per column: fitting-split range (unused for categorical columns).
  std::vector<double> min;
  std::vector<double> max;

  std::size_t width() const noexcept { return categories.size(); }

  // Code reserved for values never seen during fitting.
  double reserved_code(std::size_t column) const { return static_cast<double>(categories[column].size()); }

  void write(std::ostream& os, const FeatureSchema& schema) const {
    os << "#encoding 1\n";
    for (std::size_t j = 0; j < width(); ++j) {
      os << j << ' ' << schema[j].name;
      if (schema.is_categorical(j)) {
        os << " categorical " << categories[j].size();
        for (const auto& v : categories[j]) os << ' ' << v;
      } else {
        os << " continuous " << text::format_double(min[j]) << ' ' << text::format_double(max[j]);
      }
      os << '\n';
    }
  }

  static EncodingState read(std::istream& is, const FeatureSchema& schema) {
    std::string line;
    if (!std::getline(is, line) || text::trim(line) != "#encoding 1") throw schema_error("missing '#encoding 1' header");
    EncodingState st;
    st.categories.resize(schema.size());
    st.min.assign(schema.size(), 0.0);
    st.max.assign(schema.size(), 0.0);
    std::vector<bool> seen(schema.size(), false);
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
      ++lineno;
      if (text::trim(line).empty()) continue;
      std::istringstream ls(line);
      std::size_t column = 0;
      std::string name, kind;
      if (!(ls >> column >> name >> kind) || column >= schema.size() || schema[column].name != name)
        throw parse_error(lineno, "bad encoding entry");
      if (kind == "categorical") {
        if (!schema.is_categorical(column)) throw parse_error(lineno, "kind does not match schema");
        std::size_t n = 0;
        ls >> n;
        st.categories[column].resize(n);
        for (auto& v : st.categories[column]) {
          if (!(ls >> v)) throw parse_error(lineno, "truncated category list");
        }
      } else if (kind == "continuous") {
        if (schema.is_categorical(column)) throw parse_error(lineno, "kind does not match schema");
        std::string lo, hi;
        ls >> lo >> hi;
        auto a = text::parse_double(lo);
        auto b = text::parse_double(hi);
        if (!a || !b) throw parse_error(lineno, "bad range");
        st.min[column] = *a;
        st.max[column] = *b;
      } else {
        throw parse_error(lineno, "unknown kind '" + kind + "'");
      }
      seen[column] = true;
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) throw schema_error("encoding does not cover every column");
    return st;
  }

  bool operator==(const EncodingState&) const = default;
};

// An immutable table of flow records. Raw datasets store categorical columns
// as indices into a per-column vocabulary; encoded datasets store ordinal
// codes and min-max scaled continuous values.
class Dataset {
 public:
  Dataset() = default;

  // Raw dataset. `vocab[j]` lists the text values of categorical column j.
  Dataset(FeatureSchema schema, Matrix values, std::vector<std::vector<std::string>> vocab,
          std::optional<std::vector<ClassLabel>> labels, std::vector<std::uint8_t> subtypes = {})
      : schema_(std::move(schema)),
        values_(std::move(values)),
        vocab_(std::move(vocab)),
        labels_(std::move(labels)),
        subtypes_(std::move(subtypes)) {
    validate();
    if (vocab_.size() != schema_.size()) throw schema_error("vocabulary must have one entry per column");
  }

  // Encoded dataset.
  Dataset(FeatureSchema schema, Matrix values, std::optional<std::vector<ClassLabel>> labels, EncodingState encoding)
      : schema_(std::move(schema)), values_(std::move(values)), labels_(std::move(labels)), encoding_(std::move(encoding)) {
    validate();
  }

  const FeatureSchema& schema() const noexcept { return schema_; }
  const Matrix& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.rows(); }
  std::size_t width() const noexcept { return schema_.size(); }
  std::span<const double> row(std::size_t i) const { return values_.row(i); }

  bool labeled() const noexcept { return labels_.has_value(); }
  const std::vector<ClassLabel>& labels() const {
    if (!labels_) throw invalid_argument("dataset is unlabeled");
    return *labels_;
  }
  ClassLabel label(std::size_t i) const { return labels()[i]; }

  bool encoded() const noexcept { return encoding_.has_value(); }
  const EncodingState& encoding() const {
    if (!encoding_) throw invalid_argument("dataset is not encoded");
    return *encoding_;
  }

  const std::vector<std::vector<std::string>>& vocabulary() const noexcept { return vocab_; }

  // Text value of a categorical cell of a raw dataset.
  const std::string& category(std::size_t row, std::size_t column) const {
    return vocab_[column][static_cast<std::size_t>(values_(row, column))];
  }

  // Index into the built-in attack table, when parsed from KDD text.
  const std::vector<std::uint8_t>& subtypes() const noexcept { return subtypes_; }

  Dataset select(std::span<const std::size_t> rows) const {
    Dataset out = *this;
    out.values_ = values_.select_rows(rows);
    if (labels_) {
      std::vector<ClassLabel> l(rows.size());
      for (std::size_t k = 0; k < rows.size(); ++k) l[k] = (*labels_)[rows[k]];
      out.labels_ = std::move(l);
    }
    if (!subtypes_.empty()) {
      std::vector<std::uint8_t> s(rows.size());
      for (std::size_t k = 0; k < rows.size(); ++k) s[k] = subtypes_[rows[k]];
      out.subtypes_ = std::move(s);
    }
    return out;
  }

  std::array<std::size_t, kNumClasses> class_counts() const {
    std::array<std::size_t, kNumClasses> counts{};
    for (ClassLabel c : labels()) ++counts[index_of(c)];
    return counts;
  }

 private:
  void validate() const {
    if (values_.rows() > 0 && values_.cols() != schema_.size()) throw schema_error("row width differs from schema width");
    if (labels_ && labels_->size() != values_.rows()) throw schema_error("label count differs from row count");
    if (!subtypes_.empty() && subtypes_.size() != values_.rows()) throw schema_error("subtype count differs from row count");
  }

  FeatureSchema schema_;
  Matrix values_;
  std::vector<std::vector<std::string>> vocab_;
  std::optional<std::vector<ClassLabel>> labels_;
  std::optional<EncodingState> encoding_;
  std::vector<std::uint8_t> subtypes_;
};

namespace detail {

inline std::uint8_t attack_index(std::string_view token) {
  if (!token.empty() && token.back() == '.') token.remove_suffix(1);
  for (std::size_t i = 0; i < kAttackTable.size(); ++i) {
    if (kAttackTable[i].name == token) return static_cast<std::uint8_t>(i);
  }
  return 0xFF;
}

}  // namespace detail

// Parses KDD99 connection records: 41 features plus a label token per line.
inline Dataset parse_kdd(std::istream& in) {
  const FeatureSchema& schema = FeatureSchema::kdd99();
  const std::size_t width = schema.size();
  std::vector<std::vector<std::string>> vocab(width);
  std::vector<std::unordered_map<std::string, double>> lookup(width);
  std::vector<double> values;
  std::vector<ClassLabel> labels;
  std::vector<std::uint8_t> subtypes;
  std::vector<std::string_view> fields;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = text::trim(line);
    if (view.empty()) continue;
    text::split(view, ',', fields);
    if (fields.size() != width + 1)
      throw parse_error(lineno, "expected " + std::to_string(width + 1) + " fields, got " + std::to_string(fields.size()));
    for (std::size_t j = 0; j < width; ++j) {
      if (schema.is_categorical(j)) {
        std::string key(text::trim(fields[j]));
        auto [it, inserted] = lookup[j].try_emplace(key, static_cast<double>(vocab[j].size()));
        if (inserted) vocab[j].push_back(key);
        values.push_back(it->second);
      } else {
        auto v = text::parse_double(fields[j]);
        if (!v || !std::isfinite(*v)) throw parse_error(lineno, "non-numeric value in column '" + schema[j].name + "'");
        values.push_back(*v);
      }
    }
    auto token = text::trim(fields[width]);
    auto idx = detail::attack_index(token);
    if (idx == 0xFF) throw parse_error(lineno, "unknown attack name '" + std::string(token) + "'");
    labels.push_back(detail::kAttackTable[idx].label);
    subtypes.push_back(idx);
  }
  if (labels.empty()) throw parse_error(lineno, "empty input");
  const std::size_t rows = labels.size();
  return Dataset(schema, Matrix(rows, width, std::move(values)), std::move(vocab), std::move(labels), std::move(subtypes));
}

inline Dataset parse_kdd(std::string_view text_input) {
  std::istringstream in{std::string(text_input)};
  return parse_kdd(in);
}

// Writes a raw KDD-parsed dataset back to KDD text.
inline void write_kdd(std::ostream& os, const Dataset& raw) {
  if (raw.encoded()) throw invalid_argument("write_kdd expects a raw dataset");
  for (std::size_t i = 0; i < raw.size(); ++i) {
    for (std::size_t j = 0; j < raw.width(); ++j) {
      if (raw.schema().is_categorical(j)) {
        os << raw.category(i, j);
      } else {
        os << text::format_double(raw.values()(i, j));
      }
      os << ',';
    }
    if (!raw.subtypes().empty()) {
      os << detail::kAttackTable[raw.subtypes()[i]].name << ".\n";
    } else {
      constexpr std::array<std::string_view, kNumClasses> representative = {"normal", "satan", "smurf", "rootkit",
                                                                            "guess_passwd"};
      os << representative[index_of(raw.label(i))] << ".\n";
    }
  }
}

namespace detail {

inline double scale(double v, double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  return std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
}

}  // namespace detail

// Fits ordinal codes (first-seen order) and min-max ranges on `raw` and encodes it.
inline Dataset fit_encode(const Dataset& raw) {
  if (raw.encoded()) throw invalid_argument("fit_encode expects a raw dataset");
  const auto& schema = raw.schema();
  const std::size_t width = schema.size();
  if (raw.vocabulary().size() != width) throw schema_error("vocabulary does not match schema");
  EncodingState st;
  st.categories.resize(width);
  st.min.assign(width, 0.0);
  st.max.assign(width, 0.0);
  Matrix out(raw.size(), width);
  for (std::size_t j = 0; j < width; ++j) {
    if (schema.is_categorical(j)) {
      std::vector<double> code(raw.vocabulary()[j].size(), -1.0);
      for (std::size_t i = 0; i < raw.size(); ++i) {
        auto v = static_cast<std::size_t>(raw.values()(i, j));
        if (code[v] < 0) {
          code[v] = static_cast<double>(st.categories[j].size());
          st.categories[j].push_back(raw.vocabulary()[j][v]);
        }
        out(i, j) = code[v];
      }
    } else {
      double lo = 0.0, hi = 0.0;
      if (raw.size() > 0) {
        lo = hi = raw.values()(0, j);
        for (std::size_t i = 1; i < raw.size(); ++i) {
          lo = std::min(lo, raw.values()(i, j));
          hi = std::max(hi, raw.values()(i, j));
        }
      }
      st.min[j] = lo;
      st.max[j] = hi;
      for (std::size_t i = 0; i < raw.size(); ++i) out(i, j) = detail::scale(raw.values()(i, j), lo, hi);
    }
  }
  std::optional<std::vector<ClassLabel>> labels;
  if (raw.labeled()) labels = raw.labels();
  return Dataset(schema, std::move(out), std::move(labels), std::move(st));
}

// Encodes `data` with statistics from a previous fit. Unseen categories map to
// the reserved code; continuous values are clamped into [0, 1]. A dataset
// already encoded with `state` is returned unchanged.
inline Dataset apply_encode(const Dataset& data, const EncodingState& state) {
  const auto& schema = data.schema();
  const std::size_t width = schema.size();
  if (state.width() != width) throw schema_error("encoding state width does not match dataset schema");
  if (data.encoded()) {
    if (data.encoding() == state) return data;
    throw schema_error("dataset is already encoded with a different state");
  }
  Matrix out(data.size(), width);
  for (std::size_t j = 0; j < width; ++j) {
    if (schema.is_categorical(j)) {
      const auto& vocab = data.vocabulary()[j];
      std::vector<double> code(vocab.size(), state.reserved_code(j));
      for (std::size_t v = 0; v < vocab.size(); ++v) {
        auto it = std::find(state.categories[j].begin(), state.categories[j].end(), vocab[v]);
        if (it != state.categories[j].end()) code[v] = static_cast<double>(it - state.categories[j].begin());
      }
      for (std::size_t i = 0; i < data.size(); ++i) out(i, j) = code[static_cast<std::size_t>(data.values()(i, j))];
    } else {
      for (std::size_t i = 0; i < data.size(); ++i) out(i, j) = detail::scale(data.values()(i, j), state.min[j], state.max[j]);
    }
  }
  std::optional<std::vector<ClassLabel>> labels;
  if (data.labeled()) labels = data.labels();
  return Dataset(schema, std::move(out), std::move(labels), state);
}

// Seeded uniform shuffle; the first (1 - test_fraction) share becomes the training split.
inline std::pair<Dataset, Dataset> split(const Dataset& data, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw invalid_argument("test fraction must lie in (0, 1)");
  if (data.size() < 2) throw invalid_argument("split needs at least two rows");
  const std::size_t n = data.size();
  auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  n_test = std::clamp<std::size_t>(n_test, 1, n - 1);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  std::span<const std::size_t> all(order);
  return {data.select(all.first(n - n_test)), data.select(all.subspan(n - n_test))};
}

using ClassTargets = std::map<ClassLabel, std::size_t>;

// Normal and DoS down to 20,000; U2R and R2L up to 4,000; Probe untouched.
inline ClassTargets default_rebalance_targets() {
  return {{ClassLabel::Normal, 20000}, {ClassLabel::DoS, 20000}, {ClassLabel::U2R, 4000}, {ClassLabel::R2L, 4000}};
}

// Down-samples (without replacement) or up-samples (with replacement) each
// targeted class to exactly its target count. Classes without a target are kept whole.
inline Dataset rebalance(const Dataset& data, const ClassTargets& targets, std::uint64_t seed) {
  std::array<std::vector<std::size_t>, kNumClasses> by_class;
  const auto& labels = data.labels();
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[index_of(labels[i])].push_back(i);
  Rng rng(seed);
  std::vector<std::size_t> chosen;
  for (ClassLabel c : kAllClasses) {
    auto& rows = by_class[index_of(c)];
    auto it = targets.find(c);
    if (it == targets.end()) {
      chosen.insert(chosen.end(), rows.begin(), rows.end());
      continue;
    }
    const std::size_t target = it->second;
    if (rows.empty()) throw invalid_argument("rebalance target names class " + std::string(name_of(c)) + " absent from data");
    if (target < 1) throw invalid_argument("rebalance targets must be at least 1");
    if (target <= rows.size()) {
      for (std::size_t k = 0; k < target; ++k) std::swap(rows[k], rows[k + rng.index(rows.size() - k)]);
      chosen.insert(chosen.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(target));
    } else {
      for (std::size_t k = 0; k < target; ++k) chosen.push_back(rows[rng.index(rows.size())]);
    }
  }
  rng.shuffle(chosen);
  return data.select(chosen);
}

// Per-class proportional sample without replacement (largest-remainder allocation).
inline Dataset stratified_sample(const Dataset& data, std::size_t n, std::uint64_t seed) {
  if (n == 0 || n > data.size()) throw invalid_argument("stratified sample size out of range");
  std::array<std::vector<std::size_t>, kNumClasses> by_class;
  const auto& labels = data.labels();
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[index_of(labels[i])].push_back(i);
  std::array<std::size_t, kNumClasses> quota{};
  std::array<double, kNumClasses> remainder{};
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    double exact = static_cast<double>(n) * static_cast<double>(by_class[c].size()) / static_cast<double>(data.size());
    quota[c] = static_cast<std::size_t>(std::floor(exact));
    remainder[c] = exact - static_cast<double>(quota[c]);
    assigned += quota[c];
  }
  while (assigned < n) {
    std::size_t best = kNumClasses;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      if (quota[c] < by_class[c].size() && (best == kNumClasses || remainder[c] > remainder[best])) best = c;
    }
    ++quota[best];
    remainder[best] = -1.0;
    ++assigned;
  }
  Rng rng(seed);
  std::vector<std::size_t> chosen;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    auto& rows = by_class[c];
    for (std::size_t k = 0; k < quota[c]; ++k) std::swap(rows[k], rows[k + rng.index(rows.size() - k)]);
    chosen.insert(chosen.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(quota[c]));
  }
  rng.shuffle(chosen);
  return data.select(chosen);
}

// Columnar text persistence of an encoded dataset: schema header, then one
// comma-separated row per record with the class name (or '?') last.
inline void write_encoded(std::ostream& os, const Dataset& data) {
  os << data.schema().header() << '\n';
  std::string line;
  for (std::size_t i = 0; i < data.size(); ++i) {
    line.clear();
    for (double v : data.row(i)) {
      line += text::format_double(v);
      line += ',';
    }
    line += data.labeled() ? name_of(data.label(i)) : "?";
    line += '\n';
    os << line;
  }
}

inline Dataset read_encoded(std::istream& is, EncodingState encoding) {
  std::string line;
  if (!std::getline(is, line)) throw parse_error(1, "empty input");
  FeatureSchema schema = FeatureSchema::from_header(line);
  if (encoding.width() != schema.size()) throw schema_error("encoding state width does not match dataset schema");
  std::vector<double> values;
  std::vector<ClassLabel> labels;
  bool any_unlabeled = false;
  std::vector<std::string_view> fields;
  std::size_t lineno = 1;
  std::size_t rows = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto view = text::trim(line);
    if (view.empty()) continue;
    text::split(view, ',', fields);
    if (fields.size() != schema.size() + 1) throw parse_error(lineno, "wrong field count");
    for (std::size_t j = 0; j < schema.size(); ++j) {
      auto v = text::parse_double(fields[j]);
      if (!v) throw parse_error(lineno, "non-numeric value");
      values.push_back(*v);
    }
    auto tag = text::trim(fields.back());
    if (tag == "?") {
      any_unlabeled = true;
    } else {
      auto c = label_from_name(tag);
      if (!c) throw parse_error(lineno, "unknown class '" + std::string(tag) + "'");
      labels.push_back(*c);
    }
    ++rows;
  }
  if (any_unlabeled && !labels.empty()) throw parse_error(lineno, "mix of labeled and unlabeled rows");
  std::optional<std::vector<ClassLabel>> maybe_labels;
  if (!any_unlabeled) maybe_labels = std::move(labels);
  Matrix matrix(rows, encoding.width(), std::move(values));
  return Dataset(std::move(schema), std::move(matrix), std::move(maybe_labels), std::move(encoding));
}

}  // namespace ids
