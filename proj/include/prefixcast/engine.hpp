#pragma once

// Timing and metrics. The underlay is a star: each overlay hop costs one
// link delay, and a node emitting several copies of a packet serializes
// them with a fixed gap. Arrival of the i-th copy of a burst:
//   departure(sender) + i * per_send_gap + link_delay
// where a sender departs when it receives (the source at t = 0).

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "prefixcast/dissemination.hpp"
#include "prefixcast/error.hpp"
#include "prefixcast/keyspace.hpp"
#include "prefixcast/overlay.hpp"

namespace prefixcast {

enum class Scheme { flood, scribe };

inline std::string_view scheme_name(Scheme s) { return s == Scheme::flood ? "flood" : "scribe"; }

inline Scheme parse_scheme(std::string_view name) {
  if (name == "flood") return Scheme::flood;
  if (name == "scribe") return Scheme::scribe;
  throw ParameterError("unknown scheme: " + std::string(name));
}

struct TimingParams {
  double link_delay_ms = 1.0;
  double per_send_gap_ms = 0.1;

  void validate() const {
    if (!(link_delay_ms > 0.0)) throw ParameterError("link delay must be positive");
    if (!(per_send_gap_ms >= 0.0)) throw ParameterError("send gap must be non-negative");
  }
};

struct DeliveryRecord {
  NodeIndex receiver;
  int hops = 0;
  double arrival_ms = 0.0;
};

struct DeliveryLog {
  Scheme scheme = Scheme::flood;
  KeyspaceParams params;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  NodeIndex source{};
  TimingParams timing;
  std::vector<DeliveryRecord> records;  // ascending receiver index
  std::vector<std::size_t> replication;  // per node, zeros included
};

inline DeliveryLog timestamp(const OverlayNetwork& net, NodeIndex source, const std::vector<SendEvent>& events,
                             const TimingParams& timing, Scheme scheme = Scheme::flood) {
  timing.validate();
  DeliveryLog log{scheme, net.params(), net.seed(), net.size(), source, timing, {}, {}};
  std::vector<std::optional<DeliveryRecord>> by_node(net.size());
  detail::replay(net.size(), source, events, timing.link_delay_ms, timing.per_send_gap_ms,
                 [&](NodeIndex r, int hops, double t) {
                   if (r == source || by_node[to_size(r)])
                     throw ContractViolation("member delivered twice: " + to_string(net.key(r)));
                   by_node[to_size(r)] = DeliveryRecord{r, hops, t};
                 });
  log.records.reserve(net.size() > 0 ? net.size() - 1 : 0);
  for (std::size_t i = 0; i < by_node.size(); ++i) {
    if (by_node[i]) log.records.push_back(*by_node[i]);
    else if (node_index(i) != source)
      throw ContractViolation("member not reached: " + to_string(net.key(node_index(i))));
  }
  log.replication = replication_counts(net, events);
  return log;
}

// Population mean and standard deviation, accumulated with Welford updates
// so pooled runs can be merged.
class RunningMoments {
 public:
  static RunningMoments from_summary(double count, double mean, double stddev) {
    RunningMoments m;
    if (count > 0.0) {
      m.count_ = count;
      m.mean_ = mean;
      m.m2_ = stddev * stddev * count;
    }
    return m;
  }

  void add(double x, double weight = 1.0) {
    if (weight <= 0.0) return;
    count_ += weight;
    const double delta = x - mean_;
    mean_ += delta * weight / count_;
    m2_ += weight * delta * (x - mean_);
  }

  void merge(const RunningMoments& other) {
    if (other.count_ == 0.0) return;
    const double total = count_ + other.count_;
    const double delta = other.mean_ - mean_;
    mean_ += delta * other.count_ / total;
    m2_ += other.m2_ + delta * delta * count_ * other.count_ / total;
    count_ = total;
  }

  double count() const { return count_; }
  double mean() const { return count_ > 0.0 ? mean_ : 0.0; }
  double stddev() const { return count_ > 0.0 ? std::sqrt(std::max(0.0, m2_ / count_)) : 0.0; }

 private:
  double count_ = 0.0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

template <typename Value>
RunningMoments histogram_moments(const std::map<Value, std::size_t>& hist) {
  RunningMoments m;
  for (const auto& [value, count] : hist) m.add(static_cast<double>(value), static_cast<double>(count));
  return m;
}

struct MetricsReport {
  Scheme scheme = Scheme::flood;
  std::size_t n = 0;
  int k = 16;
  int key_bits = 128;
  std::uint64_t seed = 0;
  std::map<std::size_t, std::size_t> replication_histogram;  // over all N nodes
  std::map<int, std::size_t> hop_histogram;                  // over the N-1 receivers
  double travel_mean_ms = 0.0;
  double travel_std_ms = 0.0;
  double rep_mean = 0.0;
  double rep_std = 0.0;
  double hop_mean = 0.0;
  double hop_std = 0.0;
  TimingParams timing;
};

inline MetricsReport aggregate(const DeliveryLog& log) {
  MetricsReport r;
  r.scheme = log.scheme;
  r.n = log.n;
  r.k = log.params.alphabet_size();
  r.key_bits = log.params.key_bits;
  r.seed = log.seed;
  r.timing = log.timing;
  for (std::size_t c : log.replication) ++r.replication_histogram[c];
  RunningMoments travel;
  for (const auto& rec : log.records) {
    ++r.hop_histogram[rec.hops];
    travel.add(rec.arrival_ms);
  }
  const auto rep = histogram_moments(r.replication_histogram);
  const auto hop = histogram_moments(r.hop_histogram);
  r.rep_mean = rep.mean();
  r.rep_std = rep.stddev();
  r.hop_mean = hop.mean();
  r.hop_std = hop.stddev();
  r.travel_mean_ms = travel.mean();
  r.travel_std_ms = travel.stddev();
  return r;
}

struct DelayPenalty {
  double ratio = 1.0;  // mean scribe travel time / mean flood travel time
  std::vector<double> per_receiver;  // ascending receiver index
};

inline DelayPenalty relative_delay_penalty(const DeliveryLog& scribe, const DeliveryLog& flood) {
  if (scribe.records.size() != flood.records.size())
    throw ParameterError("delivery logs cover different receiver sets");
  DelayPenalty out;
  RunningMoments s, f;
  out.per_receiver.reserve(scribe.records.size());
  for (std::size_t i = 0; i < scribe.records.size(); ++i) {
    if (scribe.records[i].receiver != flood.records[i].receiver)
      throw ParameterError("delivery logs cover different receiver sets");
    s.add(scribe.records[i].arrival_ms);
    f.add(flood.records[i].arrival_ms);
    out.per_receiver.push_back(scribe.records[i].arrival_ms / flood.records[i].arrival_ms);
  }
  if (f.count() > 0.0) out.ratio = s.mean() / f.mean();
  return out;
}

inline constexpr std::string_view kDefaultGroupLabel = "broadcast-domain";

struct ExperimentConfig {
  std::size_t n = 100;
  KeyspaceParams params;
  std::uint64_t seed = 1;
  TimingParams timing;
  bool run_flood = true;
  bool run_scribe = true;
  std::string group_label{kDefaultGroupLabel};

  void validate() const {
    if (n < 1) throw ParameterError("n must be at least 1");
    params.validate();
    timing.validate();
    if (!run_flood && !run_scribe) throw ParameterError("no scheme selected");
  }
};

struct SchemeOutcome {
  DeliveryLog log;
  MetricsReport report;
};

struct ExperimentResult {
  NodeIndex source{};
  Key source_key;
  std::optional<SchemeOutcome> flood;
  std::optional<SchemeOutcome> scribe;
  std::optional<NodeIndex> rendezvous;
};

// Network keys and then the source are drawn from one generator seeded with
// config.seed.
inline ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  Rng rng(config.seed);
  const OverlayNetwork net = make_network(draw_unique_keys(rng, config.n, config.params), config.seed);
  const NodeIndex source = node_index(uniform_index(rng, config.n));
  ExperimentResult result{source, net.key(source), std::nullopt, std::nullopt, std::nullopt};
  if (config.run_flood) {
    auto log = timestamp(net, source, prefix_flood(net, source), config.timing, Scheme::flood);
    auto report = aggregate(log);
    result.flood = SchemeOutcome{std::move(log), std::move(report)};
  }
  if (config.run_scribe) {
    const ScribeTree tree = scribe_build_tree(net, key_from_label(config.group_label, config.params));
    auto log = timestamp(net, source, scribe_broadcast(net, tree, source), config.timing, Scheme::scribe);
    auto report = aggregate(log);
    result.scribe = SchemeOutcome{std::move(log), std::move(report)};
    result.rendezvous = tree.rp;
  }
  return result;
}

}  // namespace prefixcast
