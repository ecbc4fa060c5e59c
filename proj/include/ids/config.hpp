#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

#include "ids/dataset.hpp"
#include "ids/error.hpp"
#include "ids/text.hpp"

namespace ids {

// Experiment parameters shared by training, screening and evaluation.
struct Config {
  std::uint64_t master_seed = 1;
  std::size_t feature_count = 23;   // k
  std::size_t clusters = 3;         // K
  std::size_t boost_rounds = 5;     // NT
  std::size_t forest_size = 50;
  std::size_t forest_max_depth = 64;
  std::size_t importance_repeats = 1;
  std::size_t lloyd_max_iter = 100;
  double lloyd_tol = 1e-4;
  std::optional<ClassTargets> rebalance;
  bool strict_attack_classes = false;
  std::size_t entropy_window = 20;  // W
  std::size_t entropy_warmup = 3;
  double interval_seconds = 5.0;
  std::size_t threads = 1;

  // Stage seeds are fixed offsets from the master seed.
  enum class Stage : std::uint64_t { forest = 1, importance = 2, rebalance = 3, kmeans = 4, split = 5 };
  std::uint64_t seed_for(Stage s) const noexcept { return derive_seed(master_seed, static_cast<std::uint64_t>(s)); }

  void validate() const {
    if (feature_count < 1 || feature_count > 41) throw invalid_argument("features must lie in [1, 41]");
    if (clusters < 1) throw invalid_argument("clusters must be positive");
    if (boost_rounds < 1) throw invalid_argument("trees (NT) must be positive");
    if (forest_size < 1) throw invalid_argument("forest_size must be positive");
    if (forest_max_depth < 1) throw invalid_argument("forest_max_depth must be positive");
    if (importance_repeats < 1) throw invalid_argument("importance_repeats must be positive");
    if (lloyd_max_iter < 1) throw invalid_argument("max_iter must be positive");
    if (!(lloyd_tol >= 0.0)) throw invalid_argument("tol must be non-negative");
    if (entropy_window < 1) throw invalid_argument("window must be positive");
    if (!(interval_seconds > 0.0)) throw invalid_argument("interval must be positive");
    if (threads < 1) throw invalid_argument("threads must be positive");
  }
};

inline std::string format_targets(const std::optional<ClassTargets>& targets) {
  if (!targets) return "off";
  std::string out;
  for (const auto& [label, count] : *targets) {
    if (!out.empty()) out += ',';
    out += name_of(label);
    out += ':';
    out += std::to_string(count);
  }
  return out;
}

// "off", "default", or "Normal:20000,DoS:20000,...".
inline std::optional<ClassTargets> parse_targets(std::string_view s) {
  s = text::trim(s);
  if (s == "off" || s == "none" || s.empty()) return std::nullopt;
  if (s == "default") return default_rebalance_targets();
  ClassTargets t;
  for (auto item : text::split(s, ',')) {
    auto colon = item.find(':');
    if (colon == std::string_view::npos) throw invalid_argument("rebalance entry must be Class:count");
    auto label = label_from_name(text::trim(item.substr(0, colon)));
    auto count = text::parse_int<std::size_t>(item.substr(colon + 1));
    if (!label || !count || *count < 1) throw invalid_argument("bad rebalance entry '" + std::string(item) + "'");
    t[*label] = *count;
  }
  return t;
}

// Applies one `key = value` setting.
inline void set_option(Config& c, std::string_view key, std::string_view value) {
  key = text::trim(key);
  value = text::trim(value);
  auto as_size = [&] {
    auto v = text::parse_int<std::size_t>(value);
    if (!v) throw invalid_argument("'" + std::string(key) + "' expects a non-negative integer");
    return *v;
  };
  auto as_double = [&] {
    auto v = text::parse_double(value);
    if (!v) throw invalid_argument("'" + std::string(key) + "' expects a number");
    return *v;
  };
  if (key == "seed") {
    auto v = text::parse_int<std::uint64_t>(value);
    if (!v) throw invalid_argument("'seed' expects a non-negative integer");
    c.master_seed = *v;
  } else if (key == "features") {
    c.feature_count = as_size();
  } else if (key == "clusters") {
    c.clusters = as_size();
  } else if (key == "trees") {
    c.boost_rounds = as_size();
  } else if (key == "forest_size") {
    c.forest_size = as_size();
  } else if (key == "forest_max_depth") {
    c.forest_max_depth = as_size();
  } else if (key == "importance_repeats") {
    c.importance_repeats = as_size();
  } else if (key == "max_iter") {
    c.lloyd_max_iter = as_size();
  } else if (key == "tol") {
    c.lloyd_tol = as_double();
  } else if (key == "rebalance") {
    c.rebalance = parse_targets(value);
  } else if (key == "strict_attack_classes") {
    if (value != "true" && value != "false") throw invalid_argument("'strict_attack_classes' expects true or false");
    c.strict_attack_classes = value == "true";
  } else if (key == "window") {
    c.entropy_window = as_size();
  } else if (key == "warmup") {
    c.entropy_warmup = as_size();
  } else if (key == "interval") {
    c.interval_seconds = as_double();
  } else if (key == "threads") {
    c.threads = as_size();
  } else {
    throw invalid_argument("unknown config key '" + std::string(key) + "'");
  }
}

// Line-oriented `key = value`; '#' starts a comment.
inline void read_config(std::istream& is, Config& c) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::string_view view = line;
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = text::trim(view);
    if (view.empty()) continue;
    auto eq = view.find('=');
    if (eq == std::string_view::npos) throw parse_error(lineno, "expected 'key = value'");
    try {
      set_option(c, view.substr(0, eq), view.substr(eq + 1));
    } catch (const invalid_argument& e) {
      throw parse_error(lineno, e.what());
    }
  }
}

// Settings that determine model content; `threads` is excluded because it
// never changes results.
inline void write_config(std::ostream& os, const Config& c, std::string_view prefix = "") {
  os << prefix << "seed = " << c.master_seed << '\n';
  os << prefix << "features = " << c.feature_count << '\n';
  os << prefix << "clusters = " << c.clusters << '\n';
  os << prefix << "trees = " << c.boost_rounds << '\n';
  os << prefix << "forest_size = " << c.forest_size << '\n';
  os << prefix << "forest_max_depth = " << c.forest_max_depth << '\n';
  os << prefix << "importance_repeats = " << c.importance_repeats << '\n';
  os << prefix << "max_iter = " << c.lloyd_max_iter << '\n';
  os << prefix << "tol = " << text::format_double(c.lloyd_tol) << '\n';
  os << prefix << "rebalance = " << format_targets(c.rebalance) << '\n';
  os << prefix << "strict_attack_classes = " << (c.strict_attack_classes ? "true" : "false") << '\n';
  os << prefix << "window = " << c.entropy_window << '\n';
  os << prefix << "warmup = " << c.entropy_warmup << '\n';
  os << prefix << "interval = " << text::format_double(c.interval_seconds) << '\n';
}

}  // namespace ids
