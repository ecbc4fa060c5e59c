#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "ids/dataset.hpp"
#include "ids/error.hpp"
#include "ids/text.hpp"

namespace ids::flow {

struct PacketRecord {
  double timestamp = 0.0;
  std::string src_ip;
  std::string dst_ip;
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  std::string protocol;
  std::uint64_t payload_bytes = 0;

  bool operator==(const PacketRecord&) const = default;
};

// Six-field flow identifier. The duration field is filled in after grouping,
// quantized to milliseconds; grouping itself uses the 5-tuple and interval.
struct FlowId {
  std::string src_ip;
  std::string dst_ip;
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  std::int64_t duration_ms = 0;
  std::string protocol;

  bool operator==(const FlowId&) const = default;
};

struct FlowRecord {
  FlowId id;
  std::size_t interval_index = 0;
  std::size_t packet_count = 0;
  std::uint64_t total_bytes = 0;
  double first_seen = 0.0;
  double last_seen = 0.0;

  double duration() const noexcept { return last_seen - first_seen; }

  bool operator==(const FlowRecord&) const = default;
};

inline std::size_t interval_of(double timestamp, double interval) {
  return static_cast<std::size_t>(std::floor(timestamp / interval));
}

// Groups packets into flows by (interval index, 5-tuple). Output is ordered by
// interval, then by first packet within the interval.
inline std::vector<FlowRecord> partition(std::vector<PacketRecord> packets, double interval) {
  if (!(interval > 0.0) || !std::isfinite(interval)) throw invalid_argument("collection interval must be positive");
  for (const auto& p : packets) {
    if (!std::isfinite(p.timestamp) || p.timestamp < 0.0) throw invalid_argument("packet timestamps must be finite and non-negative");
  }
  auto key = [](const PacketRecord& p) {
    return std::tie(p.timestamp, p.src_ip, p.dst_ip, p.src_port, p.dst_port, p.protocol, p.payload_bytes);
  };
  std::stable_sort(packets.begin(), packets.end(), [&](const PacketRecord& a, const PacketRecord& b) { return key(a) < key(b); });

  using TupleKey = std::tuple<std::string, std::string, std::uint16_t, std::uint16_t, std::string>;
  std::vector<FlowRecord> flows;
  std::map<TupleKey, std::size_t> open;
  std::size_t current = 0;
  bool started = false;
  for (const auto& p : packets) {
    const std::size_t idx = interval_of(p.timestamp, interval);
    if (!started || idx != current) {
      open.clear();
      current = idx;
      started = true;
    }
    TupleKey k{p.src_ip, p.dst_ip, p.src_port, p.dst_port, p.protocol};
    auto [it, inserted] = open.try_emplace(std::move(k), flows.size());
    if (inserted) {
      FlowRecord f;
      f.id = {p.src_ip, p.dst_ip, p.src_port, p.dst_port, 0, p.protocol};
      f.interval_index = idx;
      f.first_seen = p.timestamp;
      f.last_seen = p.timestamp;
      flows.push_back(std::move(f));
    }
    FlowRecord& f = flows[it->second];
    ++f.packet_count;
    f.total_bytes += p.payload_bytes;
    f.last_seen = p.timestamp;
  }
  for (auto& f : flows) f.id.duration_ms = std::llround(f.duration() * 1000.0);
  return flows;
}

inline std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

// KDD-style service name from destination port and protocol.
inline std::string service_of(const FlowId& id) {
  const std::string proto = lowercase(id.protocol);
  if (proto == "icmp") return "ecr_i";
  const bool udp = proto == "udp";
  switch (id.dst_port) {
    case 20: return "ftp_data";
    case 21: return "ftp";
    case 22: return "ssh";
    case 23: return "telnet";
    case 25: return "smtp";
    case 37: return "time";
    case 53: return udp ? "domain_u" : "domain";
    case 70: return "gopher";
    case 79: return "finger";
    case 80: return "http";
    case 110: return "pop_3";
    case 111: return "sunrpc";
    case 113: return "auth";
    case 119: return "nntp";
    case 123: return udp ? "ntp_u" : "other";
    case 143: return "imap4";
    case 194: return "IRC";
    case 443: return "http_443";
    case 513: return "login";
    case 514: return "shell";
    case 6000: return "X11";
    default: return id.dst_port >= 1024 ? "private" : "other";
  }
}

// A flow expressed in the KDD feature layout: numeric slots plus the three
// categorical tokens (protocol_type, service, flag).
struct FlowFeatures {
  std::vector<double> values;
  std::string protocol_type;
  std::string service;
  std::string flag;
};

namespace slot {
inline constexpr std::size_t duration = 0;
inline constexpr std::size_t src_bytes = 4;
inline constexpr std::size_t dst_bytes = 5;
inline constexpr std::size_t land = 6;
inline constexpr std::size_t content_first = 9;   // hot
inline constexpr std::size_t content_last = 21;   // is_guest_login
inline constexpr std::size_t count = 22;
inline constexpr std::size_t srv_count = 23;
inline constexpr std::size_t same_srv_rate = 28;
inline constexpr std::size_t diff_srv_rate = 29;
inline constexpr std::size_t srv_diff_host_rate = 30;
inline constexpr std::size_t dst_host_count = 31;
inline constexpr std::size_t dst_host_srv_count = 32;
inline constexpr std::size_t dst_host_same_srv_rate = 33;
inline constexpr std::size_t dst_host_diff_srv_rate = 34;
inline constexpr std::size_t dst_host_same_src_port_rate = 35;
inline constexpr std::size_t dst_host_srv_diff_host_rate = 36;
}  // namespace slot

// Header-derived basic features and interval traffic counts. Counts include
// the flow itself; content features are left at 0.
inline FlowFeatures derive_features(const FlowRecord& flow, std::span<const FlowRecord> interval_peers) {
  FlowFeatures out;
  out.values.assign(FeatureSchema::kdd99().size(), 0.0);
  out.protocol_type = lowercase(flow.id.protocol);
  out.service = service_of(flow.id);
  out.flag = "SF";

  out.values[slot::duration] = flow.duration();
  out.values[slot::src_bytes] = static_cast<double>(flow.total_bytes);
  out.values[slot::land] = (flow.id.src_ip == flow.id.dst_ip && flow.id.src_port == flow.id.dst_port) ? 1.0 : 0.0;

  std::size_t same_host = 0, same_srv = 0, same_host_srv = 0, same_host_src_port = 0, same_srv_diff_host = 0;
  std::uint64_t reverse_bytes = 0;
  bool self_seen = false;
  for (const auto& peer : interval_peers) {
    if (peer == flow) self_seen = true;
    const bool host = peer.id.dst_ip == flow.id.dst_ip;
    const bool srv = service_of(peer.id) == out.service && lowercase(peer.id.protocol) == out.protocol_type;
    same_host += host;
    same_srv += srv;
    same_host_srv += host && srv;
    same_host_src_port += host && peer.id.src_port == flow.id.src_port;
    same_srv_diff_host += srv && !host;
    if (peer.id.src_ip == flow.id.dst_ip && peer.id.dst_ip == flow.id.src_ip && peer.id.src_port == flow.id.dst_port &&
        peer.id.dst_port == flow.id.src_port && peer.id.protocol == flow.id.protocol)
      reverse_bytes += peer.total_bytes;
  }
  if (!self_seen) {
    ++same_host;
    ++same_srv;
    ++same_host_srv;
    ++same_host_src_port;
  }
  out.values[slot::dst_bytes] = static_cast<double>(reverse_bytes);
  const auto host_n = static_cast<double>(same_host);
  const auto srv_n = static_cast<double>(same_srv);
  out.values[slot::count] = host_n;
  out.values[slot::srv_count] = srv_n;
  out.values[slot::same_srv_rate] = static_cast<double>(same_host_srv) / host_n;
  out.values[slot::diff_srv_rate] = 1.0 - out.values[slot::same_srv_rate];
  out.values[slot::srv_diff_host_rate] = static_cast<double>(same_srv_diff_host) / srv_n;
  out.values[slot::dst_host_count] = host_n;
  out.values[slot::dst_host_srv_count] = static_cast<double>(same_host_srv);
  out.values[slot::dst_host_same_srv_rate] = out.values[slot::same_srv_rate];
  out.values[slot::dst_host_diff_srv_rate] = out.values[slot::diff_srv_rate];
  out.values[slot::dst_host_same_src_port_rate] = static_cast<double>(same_host_src_port) / host_n;
  out.values[slot::dst_host_srv_diff_host_rate] = out.values[slot::srv_diff_host_rate];
  return out;
}

// Contiguous runs of `flows` sharing an interval index, as [begin, end) pairs.
inline std::vector<std::pair<std::size_t, std::size_t>> interval_ranges(std::span<const FlowRecord> flows) {
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= flows.size(); ++i) {
    if (i == flows.size() || flows[i].interval_index != flows[begin].interval_index) {
      if (begin < i) ranges.emplace_back(begin, i);
      begin = i;
    }
  }
  return ranges;
}

// Raw, unlabeled KDD-layout dataset of interval-ordered flows.
inline Dataset to_dataset(std::span<const FlowRecord> flows) {
  const auto& schema = FeatureSchema::kdd99();
  std::vector<std::vector<std::string>> vocab(schema.size());
  Matrix values(flows.size(), schema.size());
  auto intern = [&vocab](std::size_t column, const std::string& token) {
    auto& v = vocab[column];
    auto it = std::find(v.begin(), v.end(), token);
    if (it != v.end()) return static_cast<double>(it - v.begin());
    v.push_back(token);
    return static_cast<double>(v.size() - 1);
  };
  for (auto [begin, end] : interval_ranges(flows)) {
    auto peers = flows.subspan(begin, end - begin);
    for (std::size_t i = begin; i < end; ++i) {
      FlowFeatures f = derive_features(flows[i], peers);
      auto row = values.row(i);
      std::copy(f.values.begin(), f.values.end(), row.begin());
      row[1] = intern(1, f.protocol_type);
      row[2] = intern(2, f.service);
      row[3] = intern(3, f.flag);
    }
  }
  return Dataset(schema, std::move(values), std::move(vocab), std::nullopt);
}

// Packet log CSV: header `timestamp,src_ip,dst_ip,src_port,dst_port,protocol,bytes`
// (columns located by name).
inline std::vector<PacketRecord> read_packet_log(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw parse_error(1, "empty input");
  auto header = text::split(text::trim(line), ',');
  auto column = [&](std::string_view name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (text::trim(header[i]) == name) return i;
    }
    throw parse_error(1, "missing column '" + std::string(name) + "'");
  };
  const std::size_t c_ts = column("timestamp"), c_src = column("src_ip"), c_dst = column("dst_ip"),
                    c_sport = column("src_port"), c_dport = column("dst_port"), c_proto = column("protocol"),
                    c_bytes = column("bytes");
  const std::size_t width = header.size();
  std::vector<PacketRecord> packets;
  std::vector<std::string_view> fields;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    auto view = text::trim(line);
    if (view.empty()) continue;
    text::split(view, ',', fields);
    if (fields.size() != width) throw parse_error(lineno, "wrong field count");
    PacketRecord p;
    auto ts = text::parse_double(fields[c_ts]);
    auto sport = text::parse_int<std::uint32_t>(fields[c_sport]);
    auto dport = text::parse_int<std::uint32_t>(fields[c_dport]);
    auto bytes = text::parse_int<std::uint64_t>(fields[c_bytes]);
    if (!ts || !std::isfinite(*ts) || *ts < 0.0) throw parse_error(lineno, "bad timestamp");
    if (!sport || !dport || *sport > 65535 || *dport > 65535) throw parse_error(lineno, "bad port");
    if (!bytes) throw parse_error(lineno, "bad byte count");
    p.timestamp = *ts;
    p.src_ip = std::string(text::trim(fields[c_src]));
    p.dst_ip = std::string(text::trim(fields[c_dst]));
    p.src_port = static_cast<std::uint16_t>(*sport);
    p.dst_port = static_cast<std::uint16_t>(*dport);
    p.protocol = std::string(text::trim(fields[c_proto]));
    p.payload_bytes = *bytes;
    packets.push_back(std::move(p));
  }
  return packets;
}

}  // namespace ids::flow
