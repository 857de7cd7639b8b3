#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "prefixcast/engine.hpp"

using namespace prefixcast;

namespace {

// Four single-digit keys with k = 4: the source reaches the other three
// directly in one burst.
OverlayNetwork star() {
  const KeyspaceParams p{2, 2};
  return make_network({Key(p, {0}), Key(p, {1}), Key(p, {2}), Key(p, {3})});
}

OverlayNetwork full_binary_tree() {
  const KeyspaceParams p{1, 2};
  return make_network({Key(p, {0, 0}), Key(p, {0, 1}), Key(p, {1, 0}), Key(p, {1, 1})});
}

}  // namespace

TEST(Timestamp, SingleEvent) {
  const auto net = build_network(2, KeyspaceParams{}, 1);
  const auto log = timestamp(net, node_index(0), prefix_flood(net, node_index(0)), TimingParams{});
  ASSERT_EQ(log.records.size(), 1u);
  EXPECT_DOUBLE_EQ(log.records[0].arrival_ms, 1.0);
  EXPECT_EQ(log.records[0].hops, 1);
}

TEST(Timestamp, BurstIsSerialized) {
  const auto net = star();
  const auto log = timestamp(net, node_index(0), prefix_flood(net, node_index(0)), TimingParams{});
  ASSERT_EQ(log.records.size(), 3u);
  EXPECT_DOUBLE_EQ(log.records[0].arrival_ms, 1.0);
  EXPECT_DOUBLE_EQ(log.records[1].arrival_ms, 1.1);
  EXPECT_DOUBLE_EQ(log.records[2].arrival_ms, 1.2);
}

TEST(Timestamp, ZeroGapGivesHopsTimesDelay) {
  Rng rng(4);
  const auto net = make_network(draw_unique_keys(rng, 300, KeyspaceParams{}), 4);
  const TimingParams timing{2.5, 0.0};
  const auto log = timestamp(net, node_index(7), prefix_flood(net, node_index(7)), timing);
  for (const auto& r : log.records) EXPECT_EQ(r.arrival_ms, r.hops * 2.5);
}

TEST(Timestamp, RejectsBadTiming) {
  EXPECT_THROW((TimingParams{0.0, 0.1}.validate()), ParameterError);
  EXPECT_THROW((TimingParams{1.0, -0.1}.validate()), ParameterError);
}

TEST(Aggregate, SingleNode) {
  const auto net = build_network(1, KeyspaceParams{}, 1);
  const auto r = aggregate(timestamp(net, node_index(0), {}, TimingParams{}));
  EXPECT_EQ(r.replication_histogram, (std::map<std::size_t, std::size_t>{{0, 1}}));
  EXPECT_TRUE(r.hop_histogram.empty());
}

TEST(Aggregate, FourNodeTrace) {
  const auto net = full_binary_tree();
  const auto src = *net.find(Key(net.params(), {0, 0}));
  const auto r = aggregate(timestamp(net, src, prefix_flood(net, src), TimingParams{}));
  EXPECT_EQ(r.replication_histogram, (std::map<std::size_t, std::size_t>{{0, 2}, {1, 1}, {2, 1}}));
  EXPECT_EQ(r.hop_histogram, (std::map<int, std::size_t>{{1, 2}, {2, 1}}));
  EXPECT_DOUBLE_EQ(r.rep_mean, 0.75);
  EXPECT_DOUBLE_EQ(r.hop_mean, 4.0 / 3.0);
  // Arrivals: 1.0 (10), 1.1 (01), 2.0 (11).
  EXPECT_NEAR(r.travel_mean_ms, 4.1 / 3.0, 1e-12);
}

TEST(RunningMoments, MatchesTwoPass) {
  Rng rng(1);
  std::uniform_real_distribution<double> u(-50.0, 200.0);
  std::vector<double> xs(1000);
  for (auto& x : xs) x = u(rng);
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / xs.size());

  RunningMoments all, left, right;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    all.add(xs[i]);
    (i < 300 ? left : right).add(xs[i]);
  }
  EXPECT_NEAR(all.mean(), mean, 1e-9);
  EXPECT_NEAR(all.stddev(), sd, 1e-9);
  left.merge(right);
  EXPECT_NEAR(left.mean(), mean, 1e-9);
  EXPECT_NEAR(left.stddev(), sd, 1e-9);
  const auto rebuilt = RunningMoments::from_summary(all.count(), all.mean(), all.stddev());
  EXPECT_NEAR(rebuilt.stddev(), sd, 1e-9);
}

TEST(RelativeDelayPenalty, IdenticalLogsGiveOne) {
  const auto net = build_network(50, KeyspaceParams{}, 3);
  const auto log = timestamp(net, node_index(2), prefix_flood(net, node_index(2)), TimingParams{});
  const auto rdp = relative_delay_penalty(log, log);
  EXPECT_DOUBLE_EQ(rdp.ratio, 1.0);
  for (double r : rdp.per_receiver) EXPECT_DOUBLE_EQ(r, 1.0);
}

TEST(RelativeDelayPenalty, MismatchedReceiversRejected) {
  const auto a = build_network(50, KeyspaceParams{}, 3);
  const auto b = build_network(51, KeyspaceParams{}, 3);
  const auto la = timestamp(a, node_index(0), prefix_flood(a, node_index(0)), TimingParams{});
  const auto lb = timestamp(b, node_index(0), prefix_flood(b, node_index(0)), TimingParams{});
  EXPECT_THROW(relative_delay_penalty(la, lb), ParameterError);
}

// Without serialization, travel time is hop count times link delay, so the
// penalty collapses to the ratio of mean hop counts.
TEST(RelativeDelayPenalty, ZeroGapIsHopRatio) {
  ExperimentConfig config;
  config.n = 1000;
  config.timing = TimingParams{1.0, 0.0};
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    config.seed = seed;
    const auto r = run_experiment(config);
    const double rdp = relative_delay_penalty(r.scribe->log, r.flood->log).ratio;
    EXPECT_NEAR(rdp, r.scribe->report.hop_mean / r.flood->report.hop_mean, 1e-12);
    EXPECT_GT(rdp, 1.0);
  }
}

TEST(RunExperiment, Deterministic) {
  ExperimentConfig config;
  config.n = 300;
  config.seed = 21;
  const auto a = run_experiment(config);
  const auto b = run_experiment(config);
  EXPECT_EQ(a.source, b.source);
  EXPECT_EQ(a.rendezvous, b.rendezvous);
  EXPECT_EQ(a.flood->report.hop_histogram, b.flood->report.hop_histogram);
  EXPECT_EQ(a.scribe->report.replication_histogram, b.scribe->report.replication_histogram);
  EXPECT_EQ(a.scribe->report.travel_mean_ms, b.scribe->report.travel_mean_ms);
}

TEST(RunExperiment, ReportCountsAreConsistent) {
  ExperimentConfig config;
  config.n = 200;
  const auto r = run_experiment(config);
  for (const auto* o : {&*r.flood, &*r.scribe}) {
    std::size_t nodes = 0, sends = 0, receivers = 0;
    for (auto [v, c] : o->report.replication_histogram) {
      nodes += c;
      sends += v * c;
    }
    for (auto [h, c] : o->report.hop_histogram) receivers += c;
    EXPECT_EQ(nodes, 200u);
    EXPECT_EQ(receivers, 199u);
    EXPECT_GE(sends, 199u);
  }
  std::size_t flood_sends = 0;
  for (auto [v, c] : r.flood->report.replication_histogram) flood_sends += v * c;
  EXPECT_EQ(flood_sends, 199u);
}

TEST(RunExperiment, RejectsBadConfig) {
  ExperimentConfig config;
  config.n = 0;
  EXPECT_THROW(run_experiment(config), ParameterError);
  config.n = 10;
  config.run_flood = config.run_scribe = false;
  EXPECT_THROW(run_experiment(config), ParameterError);
}

TEST(FloodHops, MeanNearLogBaseKOfN) {
  RunningMoments pooled;
  ExperimentConfig config;
  config.n = 100;
  config.run_scribe = false;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    config.seed = seed;
    pooled.merge(histogram_moments(run_experiment(config).flood->report.hop_histogram));
  }
  EXPECT_NEAR(pooled.mean(), std::log(100.0) / std::log(16.0), 0.5);
}
