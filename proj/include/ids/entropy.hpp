#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <string_view>

#include "ids/error.hpp"
#include "ids/flow.hpp"
#include "ids/text.hpp"

namespace ids::entropy {

// Occurrence counts of the distinct values of one packet characteristic.
class Distribution {
 public:
  void add(const std::string& value, std::uint64_t count = 1) {
    if (count == 0) return;
    counts_[value] += count;
    total_ += count;
  }

  const std::map<std::string, std::uint64_t>& counts() const noexcept { return counts_; }
  std::uint64_t total() const noexcept { return total_; }
  std::size_t distinct() const noexcept { return counts_.size(); }
  bool empty() const noexcept { return total_ == 0; }

 private:
  std::map<std::string, std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

// Shannon entropy in bits of a count vector.
inline double entropy(std::span<const std::uint64_t> counts) {
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  if (total == 0) throw invalid_argument("entropy of an empty distribution");
  const auto n = static_cast<double>(total);
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h > 0.0 ? h : 0.0;
}

inline double entropy(const Distribution& dist) {
  std::vector<std::uint64_t> counts;
  counts.reserve(dist.distinct());
  for (const auto& [value, count] : dist.counts()) counts.push_back(count);
  return entropy(counts);
}

enum class Verdict : unsigned char { normal, suspicious };

inline std::string_view verdict_name(Verdict v) { return v == Verdict::normal ? "normal" : "suspicious"; }

enum class Characteristic : unsigned char { src_addr, src_port, dst_addr, dst_port };

inline constexpr std::array<Characteristic, 4> kCharacteristics = {Characteristic::src_addr, Characteristic::src_port,
                                                                    Characteristic::dst_addr, Characteristic::dst_port};

struct WindowConfig {
  std::size_t capacity = 20;  // W
  std::size_t warmup = 3;     // intervals that only feed history
};

// Sliding history of interval entropies for one characteristic, with the
// band [E - S, E + S] recomputed (population std) after every push.
class EntropyWindow {
 public:
  explicit EntropyWindow(Characteristic c = Characteristic::src_addr, WindowConfig config = {})
      : characteristic_(c), config_(config) {
    if (config_.capacity == 0) throw invalid_argument("entropy window capacity must be positive");
  }

  Characteristic characteristic() const noexcept { return characteristic_; }
  const std::deque<double>& history() const noexcept { return history_; }
  double mean() const noexcept { return mean_; }
  double stddev() const noexcept { return stddev_; }

  // Boundary values are normal; the decision uses the band before `h` is appended.
  Verdict push_and_flag(double h) {
    Verdict v = Verdict::normal;
    if (history_.size() >= config_.warmup && !history_.empty() && (h < mean_ - stddev_ || h > mean_ + stddev_)) {
      v = Verdict::suspicious;
    }
    history_.push_back(h);
    while (history_.size() > config_.capacity) history_.pop_front();
    recompute();
    return v;
  }

 private:
  void recompute() {
    const double first = history_.front();
    bool constant = true;
    double sum = 0.0;
    for (double x : history_) {
      sum += x;
      constant = constant && x == first;
    }
    if (constant) {
      mean_ = first;
      stddev_ = 0.0;
      return;
    }
    const auto n = static_cast<double>(history_.size());
    mean_ = sum / n;
    double ss = 0.0;
    for (double x : history_) ss += (x - mean_) * (x - mean_);
    stddev_ = std::sqrt(ss / n);
  }

  Characteristic characteristic_;
  WindowConfig config_;
  std::deque<double> history_;
  double mean_ = 0.0;
  double stddev_ = 0.0;
};

// One window per characteristic.
struct Screen {
  std::array<EntropyWindow, 4> windows;

  explicit Screen(WindowConfig config = {})
      : windows{EntropyWindow(Characteristic::src_addr, config), EntropyWindow(Characteristic::src_port, config),
                EntropyWindow(Characteristic::dst_addr, config), EntropyWindow(Characteristic::dst_port, config)} {}
};

struct IntervalVerdict {
  std::size_t interval_index = 0;
  std::array<double, 4> entropies{};
  std::array<Verdict, 4> flags{};
  Verdict verdict = Verdict::normal;
};

// Packet-weighted distributions of the four characteristics over one interval.
inline std::array<Distribution, 4> interval_distributions(std::span<const flow::FlowRecord> flows) {
  std::array<Distribution, 4> d;
  for (const auto& f : flows) {
    d[0].add(f.id.src_ip, f.packet_count);
    d[1].add(std::to_string(f.id.src_port), f.packet_count);
    d[2].add(f.id.dst_ip, f.packet_count);
    d[3].add(std::to_string(f.id.dst_port), f.packet_count);
  }
  return d;
}

// Flags the interval when any characteristic leaves its band. An empty
// interval is normal, reports zero entropies and leaves the history untouched.
inline IntervalVerdict screen_interval(std::span<const flow::FlowRecord> flows, Screen& screen) {
  IntervalVerdict out;
  out.flags.fill(Verdict::normal);
  if (flows.empty()) return out;
  out.interval_index = flows.front().interval_index;
  auto dists = interval_distributions(flows);
  for (std::size_t k = 0; k < 4; ++k) {
    out.entropies[k] = entropy(dists[k]);
    out.flags[k] = screen.windows[k].push_and_flag(out.entropies[k]);
    if (out.flags[k] == Verdict::suspicious) out.verdict = Verdict::suspicious;
  }
  return out;
}

inline constexpr std::string_view kReportHeader = "interval_index,h_srcaddr,h_srcport,h_dstaddr,h_dstport,verdict";

inline void write_report_line(std::ostream& os, const IntervalVerdict& v) {
  os << v.interval_index;
  for (double h : v.entropies) os << ',' << text::fixed(h, 6);
  os << ',' << verdict_name(v.verdict) << '\n';
}

// Screens every interval of an interval-ordered flow list.
inline std::vector<IntervalVerdict> screen_flows(std::span<const flow::FlowRecord> flows, Screen& screen) {
  std::vector<IntervalVerdict> out;
  for (auto [begin, end] : flow::interval_ranges(flows)) out.push_back(screen_interval(flows.subspan(begin, end - begin), screen));
  return out;
}

}  // namespace ids::entropy
