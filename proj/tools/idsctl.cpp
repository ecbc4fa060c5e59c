#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ids/ids.hpp"


namespace {

// Exit statuses besides 0.
constexpr int kExitFailure = 1;
constexpr int kExitBadInput = 2;
constexpr int kExitDegenerate = 3;

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> features, trees, clusters, threads;
};

struct InputError : ids::error {
  using ids::error::error;
};

std::string read_input(const std::string& path) {
  std::ostringstream ss;
  if (path == "-") {
    ss << std::cin.rdbuf();
  } else {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path);
    ss << in.rdbuf();
  }
  std::string text = ss.str();
  if (ids::text::trim(text).empty()) throw InputError("empty input");
  return text;
}

enum class Format { kdd, encoded, packets };

Format detect_format(std::string_view text) {
  auto first = text.substr(0, text.find('\n'));
  first = ids::text::trim(first);
  if (first.starts_with("#schema")) return Format::encoded;
  if (first.find("timestamp") != std::string_view::npos) return Format::packets;
  return Format::kdd;
}

std::string format_name(Format f) {
  switch (f) {
    case Format::kdd: return "kdd";
    case Format::encoded: return "encoded";
    case Format::packets: return "packets";
  }
  return "?";
}

ids::EncodingState read_encoding_file(const std::string& path) {
  std::istringstream is(read_input(path));
  return ids::EncodingState::read(is, ids::FeatureSchema::kdd99());
}

// KDD text or an encoded dataset; encoded input needs its encoding state.
ids::Dataset load_dataset(const std::string& path, const std::string& encoding_path) {
  const std::string text = read_input(path);
  switch (detect_format(text)) {
    case Format::kdd:
      return ids::parse_kdd(std::string_view(text));
    case Format::encoded: {
      const std::string state = encoding_path.empty() ? path + ".encoding" : encoding_path;
      std::istringstream is(text);
      return ids::read_encoded(is, read_encoding_file(state));
    }
    case Format::packets:
      throw InputError(path + " is a packet log; expected a labeled KDD or encoded dataset");
  }
  throw InputError("unrecognized input format");
}

std::vector<ids::flow::FlowRecord> load_flows(const std::string& path, double interval) {
  std::istringstream is(read_input(path));
  return ids::flow::partition(ids::flow::read_packet_log(is), interval);
}

ids::Config resolve_config(const CommonOptions& o) {
  ids::Config c;
  if (const char* env = std::getenv("IDS_SEED")) {
    auto v = ids::text::parse_int<std::uint64_t>(env);
    if (!v) throw ids::invalid_argument("IDS_SEED must be a non-negative integer");
    c.master_seed = *v;
  }
  if (!o.config_path.empty()) {
    std::istringstream is(read_input(o.config_path));
    ids::read_config(is, c);
  }
  if (o.seed) c.master_seed = *o.seed;
  if (o.features) c.feature_count = *o.features;
  if (o.trees) c.boost_rounds = *o.trees;
  if (o.clusters) c.clusters = *o.clusters;
  if (o.threads) c.threads = *o.threads;
  c.validate();
  return c;
}

// Writes to `path`, or to standard output when it is empty or "-".
template <typename Fn>
void emit(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ids::error("cannot write " + path);
  fn(out);
  if (!out) throw ids::error("failed writing " + path);
}

void print_histogram(std::ostream& os, const std::array<std::size_t, ids::kNumClasses>& counts) {
  os << "class,count\n";
  std::size_t total = 0;
  for (auto c : ids::kAllClasses) {
    os << ids::name_of(c) << ',' << counts[ids::index_of(c)] << '\n';
    total += counts[ids::index_of(c)];
  }
  os << "total," << total << '\n';
}

// ---- subcommands -----------------------------------------------------------

struct IngestOptions {
  std::string input, output, state_out, encoding;
};

int cmd_ingest(const IngestOptions& o, const ids::Config& config) {
  const std::string text = read_input(o.input);
  const Format format = detect_format(text);
  ids::Dataset raw;
  std::size_t intervals = 0;
  if (format == Format::packets) {
    std::istringstream is(text);
    auto flows = ids::flow::partition(ids::flow::read_packet_log(is), config.interval_seconds);
    intervals = ids::flow::interval_ranges(flows).size();
    raw = ids::flow::to_dataset(flows);
  } else if (format == Format::kdd) {
    raw = ids::parse_kdd(std::string_view(text));
  } else {
    throw InputError(o.input + " is already encoded");
  }

  ids::Dataset encoded = o.encoding.empty() ? ids::fit_encode(raw) : ids::apply_encode(raw, read_encoding_file(o.encoding));
  if (!o.output.empty()) {
    emit(o.output, [&](std::ostream& os) { ids::write_encoded(os, encoded); });
    const std::string state = o.state_out.empty() ? o.output + ".encoding" : o.state_out;
    emit(state, [&](std::ostream& os) { encoded.encoding().write(os, encoded.schema()); });
  }

  std::cout << "# format " << format_name(format) << '\n';
  if (format == Format::packets) {
    std::cout << "flows," << encoded.size() << '\n' << "intervals," << intervals << '\n';
  } else {
    print_histogram(std::cout, encoded.class_counts());
  }
  return 0;
}

struct TrainOptions {
  std::string input, encoding, model_dir;
};

int cmd_train(const TrainOptions& o, const ids::Config& config) {
  ids::Dataset data = load_dataset(o.input, o.encoding);
  if (!data.labeled()) throw InputError("training data must be labeled");
  if (!data.encoded()) data = ids::fit_encode(data);
  ids::pipeline::StageTimings timings;
  const auto model = ids::pipeline::train(data, config, &timings);
  ids::pipeline::save_bundle(model, o.model_dir);

  std::cout << "# top " << model.selected_features.size() << " features\n";
  std::cout << "index,name,importance\n";
  auto ranked = ids::forest::select_features(model.importance, model.importance.size());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [&](std::size_t a, std::size_t b) { return model.importance[a] > model.importance[b]; });
  ranked.resize(model.selected_features.size());
  for (auto j : ranked) {
    std::cout << j << ',' << model.schema[j].name << ',' << ids::text::fixed(model.importance[j], 6) << '\n';
  }
  std::cerr << "importance " << ids::text::fixed(timings.importance_seconds, 3) << "s, kmeans "
            << ids::text::fixed(timings.kmeans_seconds, 3) << "s, adaboost " << ids::text::fixed(timings.boost_seconds, 3)
            << "s\n";
  return 0;
}

struct EvaluateOptions {
  std::string model_dir, input, encoding, output, confusion, cost_matrix, train_input;
  std::string format = "csv";
  std::optional<double> cross_validate;
  std::optional<std::size_t> folds;
  std::vector<std::size_t> sweep;
};

int cmd_evaluate(const EvaluateOptions& o, const ids::Config& config) {
  ids::metrics::CostMatrix costs = ids::metrics::CostMatrix::kdd99();
  if (!o.cost_matrix.empty()) {
    std::istringstream is(read_input(o.cost_matrix));
    costs = ids::metrics::CostMatrix::read(is);
  }

  if (o.cross_validate || o.folds) {
    const ids::Dataset data = load_dataset(o.input, o.encoding);
    if (!data.labeled()) throw InputError("cross-validation needs labeled data");
    const auto report = o.folds ? ids::pipeline::cross_validate_kfold(data, config, *o.folds)
                                : ids::pipeline::cross_validate(data, config, *o.cross_validate);
    emit(o.output, [&](std::ostream& os) {
      ids::write_config(os, config, "# ");
      ids::pipeline::write_cross_validation(os, report);
    });
    return 0;
  }

  if (!o.sweep.empty()) {
    if (o.train_input.empty()) throw ids::invalid_argument("--sweep needs --train");
    ids::Dataset train_set = load_dataset(o.train_input, o.encoding);
    if (!train_set.encoded()) train_set = ids::fit_encode(train_set);
    const ids::Dataset test_set = ids::apply_encode(load_dataset(o.input, o.encoding), train_set.encoding());
    const auto points = ids::pipeline::round_sweep(train_set, test_set, config, o.sweep);
    emit(o.output, [&](std::ostream& os) {
      ids::write_config(os, config, "# ");
      os << "rounds,accuracy,time_seconds\n";
      for (const auto& p : points) os << p.rounds << ',' << ids::text::fixed(p.accuracy, 6) << ',' << ids::text::fixed(p.seconds, 3) << '\n';
    });
    return 0;
  }

  if (o.model_dir.empty()) throw ids::invalid_argument("--model is required");
  const auto model = ids::pipeline::load_bundle(o.model_dir);
  ids::Dataset test;
  {
    const std::string text = read_input(o.input);
    if (detect_format(text) == Format::encoded) {
      std::istringstream is(text);
      test = ids::read_encoded(is, model.encoding);
    } else {
      test = load_dataset(o.input, o.encoding);
    }
  }
  if (!test.labeled()) throw InputError("evaluation data must be labeled");
  const auto ev = ids::pipeline::evaluate(model, test, costs, config.threads);
  emit(o.output, [&](std::ostream& os) {
    ids::write_config(os, model.config, "# ");
    if (o.format == "table") {
      ids::metrics::write_report_table(os, ev.report);
    } else {
      ids::metrics::write_report_csv(os, ev.report);
    }
    if (o.confusion.empty()) {
      os << '\n';
      ids::metrics::write_confusion_csv(os, ev.confusion);
    }
  });
  if (!o.confusion.empty()) emit(o.confusion, [&](std::ostream& os) { ids::metrics::write_confusion_csv(os, ev.confusion); });
  return 0;
}

struct ScreenOptions {
  std::string input, output;
};

int cmd_screen(const ScreenOptions& o, const ids::Config& config) {
  const auto flows = load_flows(o.input, config.interval_seconds);
  ids::entropy::Screen screen({config.entropy_window, config.entropy_warmup});
  const auto verdicts = ids::entropy::screen_flows(flows, screen);
  emit(o.output, [&](std::ostream& os) {
    ids::write_config(os, config, "# ");
    os << ids::entropy::kReportHeader << '\n';
    for (const auto& v : verdicts) ids::entropy::write_report_line(os, v);
  });
  return 0;
}

struct DetectOptions {
  std::string model_dir, input, output;
  std::string gate = "on";
};

int cmd_detect(const DetectOptions& o, const ids::Config& config) {
  const auto model = ids::pipeline::load_bundle(o.model_dir);
  const auto flows = load_flows(o.input, config.interval_seconds);
  ids::entropy::Screen screen({config.entropy_window, config.entropy_warmup});
  const auto gate = o.gate == "off" ? ids::pipeline::Gate::off : ids::pipeline::Gate::on;
  const auto result = ids::pipeline::detect_stream(model, flows, screen, gate);
  emit(o.output, [&](std::ostream& os) {
    ids::write_config(os, model.config, "# ");
    os << "interval_index,src_ip,src_port,dst_ip,dst_port,protocol,label\n";
    for (std::size_t i = 0; i < flows.size(); ++i) {
      const auto& id = flows[i].id;
      os << flows[i].interval_index << ',' << id.src_ip << ',' << id.src_port << ',' << id.dst_ip << ',' << id.dst_port << ','
         << id.protocol << ',' << ids::name_of(result.verdicts[i]) << '\n';
    }
  });
  std::cerr << result.intervals.size() << " intervals, " << result.classified << " of " << flows.size()
            << " flows classified\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid network intrusion detection toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  CommonOptions common;
  app.add_option("--config", common.config_path, "key = value configuration file");
  app.add_option("--seed", common.seed, "master seed (falls back to IDS_SEED)");
  app.add_option("--features", common.features, "number of selected features k");
  app.add_option("--trees", common.trees, "boosting rounds NT");
  app.add_option("--clusters", common.clusters, "k-means cluster count K");
  app.add_option("--threads", common.threads, "worker thread cap");

  IngestOptions ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "parse and encode a KDD file or packet log");
  ingest_cmd->add_option("input", ingest.input, "KDD CSV or packet-log CSV ('-' for stdin)")->required();
  ingest_cmd->add_option("-o,--output", ingest.output, "encoded dataset path");
  ingest_cmd->add_option("--state", ingest.state_out, "encoding state path (default <output>.encoding)");
  ingest_cmd->add_option("--encoding", ingest.encoding, "apply an existing encoding state instead of fitting one");

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "train the hybrid detector and save a model bundle");
  train_cmd->add_option("input", train.input, "labeled training data")->required();
  train_cmd->add_option("-m,--model", train.model_dir, "bundle directory")->required();
  train_cmd->add_option("--encoding", train.encoding, "encoding state of an encoded input");

  EvaluateOptions evaluate;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "score a model bundle on labeled test data");
  evaluate_cmd->add_option("input", evaluate.input, "labeled test data")->required();
  evaluate_cmd->add_option("-m,--model", evaluate.model_dir, "bundle directory");
  evaluate_cmd->add_option("-o,--output", evaluate.output, "report path (default stdout)");
  evaluate_cmd->add_option("--confusion", evaluate.confusion, "separate confusion matrix path");
  evaluate_cmd->add_option("--cost-matrix", evaluate.cost_matrix, "5x5 cost matrix override");
  evaluate_cmd->add_option("--encoding", evaluate.encoding, "encoding state of an encoded input");
  evaluate_cmd->add_option("--format", evaluate.format, "csv or table")->check(CLI::IsMember({"csv", "table"}));
  evaluate_cmd->add_option("--cross-validate", evaluate.cross_validate, "train fraction of a single split, e.g. 0.9");
  evaluate_cmd->add_option("--folds", evaluate.folds, "k-fold cross-validation");
  evaluate_cmd->add_option("--sweep", evaluate.sweep, "boosting round counts to sweep")->delimiter(',');
  evaluate_cmd->add_option("--train", evaluate.train_input, "training data for --sweep");

  ScreenOptions screen;
  auto* screen_cmd = app.add_subcommand("screen", "per-interval entropy screening of a packet log");
  screen_cmd->add_option("input", screen.input, "packet-log CSV")->required();
  screen_cmd->add_option("-o,--output", screen.output, "report path (default stdout)");

  DetectOptions detect;
  auto* detect_cmd = app.add_subcommand("detect", "screen a packet log and classify suspicious intervals");
  detect_cmd->add_option("input", detect.input, "packet-log CSV")->required();
  detect_cmd->add_option("-m,--model", detect.model_dir, "bundle directory")->required();
  detect_cmd->add_option("-o,--output", detect.output, "per-flow labels path (default stdout)");
  detect_cmd->add_option("--gate", detect.gate, "on: classify suspicious intervals only")->check(CLI::IsMember({"on", "off"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const ids::Config config = resolve_config(common);
    if (*ingest_cmd) return cmd_ingest(ingest, config);
    if (*train_cmd) return cmd_train(train, config);
    if (*evaluate_cmd) return cmd_evaluate(evaluate, config);
    if (*screen_cmd) return cmd_screen(screen, config);
    if (*detect_cmd) return cmd_detect(detect, config);
  } catch (const InputError& e) {
    std::cerr << "idsctl: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const ids::degenerate_data& e) {
    std::cerr << "idsctl: " << e.what() << '\n';
    return kExitDegenerate;
  } catch (const ids::parse_error& e) {
    std::cerr << "idsctl: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const ids::schema_error& e) {
    std::cerr << "idsctl: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const ids::invalid_argument& e) {
    std::cerr << "idsctl: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const std::exception& e) {
    std::cerr << "idsctl: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}
