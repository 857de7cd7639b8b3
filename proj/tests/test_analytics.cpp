#include <cmath>
#include <functional>
#include <map>

#include <gtest/gtest.h>

#include "prefixcast/analytics.hpp"
#include "prefixcast/dissemination.hpp"

using namespace prefixcast;
using namespace prefixcast::analytics;

namespace {

// Hop count of a leaf in the full tree flooded from leaf 0 is the number of
// its non-zero digits; count leaves by that.
std::map<int, std::size_t> hamming_oracle(int h, int k) {
  std::map<int, std::size_t> out;
  std::int64_t leaves = 1;
  for (int i = 0; i < h; ++i) leaves *= k;
  for (std::int64_t x = 0; x < leaves; ++x) {
    int nz = 0;
    for (std::int64_t y = x; y > 0; y /= k) nz += (y % k) != 0;
    ++out[nz];
  }
  return out;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST(ReplicationValue, Examples) {
  EXPECT_EQ(replication_value(128, 16, 0), 1920);
  EXPECT_EQ(replication_value(128, 16, 128), 0);
  EXPECT_EQ(replication_value(2, 2, 1), 1);
  EXPECT_THROW(replication_value(2, 2, 3), ParameterError);
  EXPECT_THROW(replication_value(0, 2, 0), ParameterError);
  EXPECT_THROW(replication_value(2, 1, 0), ParameterError);
}

TEST(ReplicationFrequency, Examples) {
  EXPECT_EQ(replication_frequency(128, 16, 0), 1);
  EXPECT_EQ(replication_frequency(2, 2, 1), 1);
  EXPECT_EQ(replication_frequency(2, 2, 2), 2);
  EXPECT_EQ(replication_frequency(3, 4, 3), 48);
  for (int h = 1; h <= 20; ++h) {
    BigInt total = 0;
    for (int j = 0; j <= h; ++j) total += replication_frequency(h, 16, j);
    EXPECT_EQ(total, (FullTreeModel{h, 16}.leaf_count()));
  }
}

TEST(ReplicationDistribution, SmallTrees) {
  const auto d = replication_distribution(3, 4);
  ASSERT_EQ(d.support, (std::vector<std::int64_t>{9, 6, 3, 0}));
  EXPECT_DOUBLE_EQ(d.probs[0], 1.0 / 64);
  EXPECT_DOUBLE_EQ(d.probs[1], 3.0 / 64);
  EXPECT_DOUBLE_EQ(d.probs[2], 12.0 / 64);
  EXPECT_DOUBLE_EQ(d.probs[3], 48.0 / 64);

  const auto two = replication_distribution(1, 2);
  EXPECT_EQ(two.support, (std::vector<std::int64_t>{1, 0}));
  EXPECT_EQ(two.probs, (std::vector<double>{0.5, 0.5}));
}

TEST(ReplicationMoments, ExactValues) {
  EXPECT_EQ(replication_mean_exact(3, 4), BigRational(63, 64));
  const auto m = replication_moments(32, 16);
  EXPECT_NEAR(m.mean, 1.0, 1e-12);
  EXPECT_NEAR(m.std, 4.0, 0.04);
  // Exact moments agree with summation over the distribution.
  for (auto [h, k] : {std::pair{3, 4}, {6, 2}, {20, 16}}) {
    const auto direct = replication_distribution(h, k).moments();
    const auto closed = replication_moments(h, k);
    EXPECT_NEAR(direct.mean, closed.mean, 1e-12);
    EXPECT_NEAR(direct.std, closed.std, 1e-9);
  }
}

TEST(ReplicationBound, Examples) {
  EXPECT_DOUBLE_EQ(replication_bound(2, 2), 1.0);
  EXPECT_NEAR(replication_bound(10000, 16), 199.3, 0.05);
  EXPECT_DOUBLE_EQ(replication_bound(1, 16), 0.0);
}

TEST(HopFrequencyFull, PascalRowAndHammingOracle) {
  EXPECT_EQ(hop_frequency_full(2, 2, 0), 1);
  EXPECT_EQ(hop_frequency_full(2, 2, 1), 2);
  EXPECT_EQ(hop_frequency_full(2, 2, 2), 1);
  for (auto [h, k] : {std::pair{5, 2}, {4, 3}, {4, 4}, {3, 5}, {2, 16}}) {
    const auto oracle = hamming_oracle(h, k);
    for (int j = 0; j <= h; ++j) EXPECT_EQ(hop_frequency_full(h, k, j), oracle.at(j)) << h << ' ' << k << ' ' << j;
  }
}

TEST(HopDistributionFull, Examples) {
  const auto d = hop_distribution_full(1, 2);
  EXPECT_EQ(d.probs, (std::vector<double>{0.5, 0.5}));
  const auto m = hop_moments_full(128, 16);
  EXPECT_DOUBLE_EQ(m.mean, 120.0);
  EXPECT_NEAR(m.std, std::sqrt(1920.0) / 16, 1e-12);
  EXPECT_NEAR(m.std, 2.7386, 1e-4);
  const auto one = hop_moments_full(1, 2);
  EXPECT_DOUBLE_EQ(one.mean, 0.5);
  EXPECT_DOUBLE_EQ(one.std, 0.5);
  const auto direct = hop_distribution_full(128, 16).moments();
  EXPECT_NEAR(direct.mean, 120.0, 1e-9);
  EXPECT_NEAR(direct.std, std::sqrt(1920.0) / 16, 1e-9);
}

TEST(HopDistributionFull, LogSpaceAgreesWithExact) {
  for (int h : {1, 7, 32, 64})
    for (int k : {2, 16}) {
      const auto exact = hop_distribution_full(h, k, Precision::exact);
      const auto logs = hop_distribution_full(h, k, Precision::log_space);
      for (std::size_t j = 0; j < exact.probs.size(); ++j)
        if (exact.probs[j] > 1e-280) {
          EXPECT_LT(rel(logs.probs[j], exact.probs[j]), 1e-10) << h << ' ' << k << ' ' << j;
        }
    }
}

TEST(Normalization, AllModelsAtDefaultSize) {
  EXPECT_NEAR(replication_distribution(128, 16).total(), 1.0, 1e-12);
  EXPECT_NEAR(hop_distribution_full(128, 16).total(), 1.0, 1e-12);
  EXPECT_NEAR(hop_distribution_full(200, 16).total(), 1.0, 1e-12);
  for (double p : {0.00122, 0.00244, 0.00370, 0.00497, 0.5})
    EXPECT_NEAR(hop_distribution_random(128, 16, p).total(), 1.0, 1e-12);
}

TEST(Recurrences, FullAndRandom) {
  auto f = [](int h, int k, int j) { return j > h ? BigInt(0) : hop_frequency_full(h, k, j); };
  for (int k : {2, 3, 16})
    for (int h = 2; h <= 40; ++h)
      for (int j = 1; j <= h; ++j) ASSERT_EQ(f(h, k, j), f(h - 1, k, j) + (k - 1) * f(h - 1, k, j - 1));
  for (double p : {0.001, 0.1, 1.0})
    for (int h = 2; h <= 64; ++h)
      for (int j = 1; j <= h; ++j) {
        const double lhs = hop_frequency_random(h, 16, p, j);
        const double rhs = hop_frequency_random(h - 1, 16, p, j) + p * 15 * hop_frequency_random(h - 1, 16, p, j - 1);
        ASSERT_LT(std::abs(lhs - rhs), 1e-12 * lhs) << h << ' ' << j << ' ' << p;
      }
}

TEST(EdgeProbability, Examples) {
  EXPECT_NEAR(edge_probability(100, 128, 16), 0.00244, 0.000005);
  EXPECT_DOUBLE_EQ(edge_probability(1, 128, 16), 0.0);
  EXPECT_NEAR(edge_probability(64, 3, 4), 1.0, 1e-12);
  EXPECT_THROW(edge_probability(0.5, 128, 16), ParameterError);
  EXPECT_THROW(edge_probability(65, 3, 4), ParameterError);
  // Inversion: the expected leaf count of the resulting tree is n.
  for (double n : {10.0, 1e4, 1e9})
    EXPECT_NEAR((RandomTreeModel{128, 16, edge_probability(n, 128, 16)}.expected_leaves()), n, n * 1e-10);
}

TEST(HopDistributionRandom, LimitCases) {
  const auto full = hop_distribution_full(128, 16);
  const auto limit = hop_distribution_random(128, 16, 1.0);
  EXPECT_EQ(full.probs, limit.probs);
  EXPECT_EQ(full.support, limit.support);
  const auto none = hop_distribution_random(128, 16, 0.0);
  EXPECT_EQ(none.probs[0], 1.0);
  EXPECT_EQ(none.total(), 1.0);
  const auto m = hop_moments_random(4, 2, 1.0);
  EXPECT_DOUBLE_EQ(m.mean, 2.0);
  EXPECT_DOUBLE_EQ(m.std, hop_moments_full(4, 2).std);
}

TEST(HopDistributionRandom, MomentsMatchSummation) {
  for (double p : {0.00122, 0.00497, 0.2}) {
    const auto direct = hop_distribution_random(128, 16, p).moments();
    const auto closed = hop_moments_random(128, 16, p);
    EXPECT_NEAR(direct.mean, closed.mean, 1e-10);
    EXPECT_NEAR(direct.std, closed.std, 1e-10);
  }
}

// Grows random recursive trees (the source-side branch is always present,
// each other branch with probability p) and counts leaves by hop distance.
TEST(HopDistributionRandom, MonteCarloAgreement) {
  constexpr int h = 4, k = 3, kTrials = 40'000;
  constexpr double p = 0.4;
  Rng rng(2024);
  std::bernoulli_distribution edge(p);
  std::vector<double> leaves_at(h + 1, 0.0);
  std::function<void(int, int)> grow = [&](int level, int hops) {
    if (level == h) {
      leaves_at[static_cast<std::size_t>(hops)] += 1.0;
      return;
    }
    grow(level + 1, hops);
    for (int c = 1; c < k; ++c)
      if (edge(rng)) grow(level + 1, hops + 1);
  };
  for (int t = 0; t < kTrials; ++t) grow(0, 0);
  for (int j = 0; j <= h; ++j) {
    const double expected = hop_frequency_random(h, k, p, j);
    EXPECT_NEAR(leaves_at[static_cast<std::size_t>(j)] / kTrials, expected, 0.03 * expected + 0.01) << j;
  }
}

TEST(LinkProbabilityTable, PublishedRows) {
  const auto rows = link_probability_table();
  ASSERT_EQ(rows.size(), 4u);
  const double published_p[] = {0.00122, 0.00244, 0.00370, 0.00497};
  const double published_mean[] = {2.30, 4.52, 6.73, 8.88};
  const double published_std[] = {1.50, 2.09, 2.53, 2.87};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(rows[i].p, published_p[i], 1e-5) << i;
    EXPECT_NEAR(rows[i].std, published_std[i], 0.01) << i;
    if (i > 0) {
      EXPECT_NEAR(rows[i].mean, published_mean[i], 0.01) << i;
    }
  }
  // The N = 10 mean evaluates to 2.282 at the exact edge probability; the
  // published 2.30 is what the formula gives at the rounded p.
  EXPECT_NEAR(rows[0].mean, 2.282, 0.001);
  EXPECT_NEAR(hop_moments_random(128, 16, 0.00122).mean, 2.30, 0.005);
}

TEST(HopBound, Examples) {
  const auto big = hop_bound(10000, 4);
  EXPECT_NEAR(big.max_hops, 13.29, 0.005);
  EXPECT_NEAR(big.average_hops, 3.32, 0.005);
  EXPECT_EQ(hop_bound(1, 4).max_hops, 0.0);
  EXPECT_EQ(hop_bound(1, 4).average_hops, 0.0);
  EXPECT_DOUBLE_EQ(hop_bound(16, 4).max_hops, 4.0);
  EXPECT_DOUBLE_EQ(hop_bound(16, 4).average_hops, 1.0);
}

TEST(Oracle, FourLeafTrace) {
  const auto o = full_tree_flood_oracle(2, 2);
  EXPECT_EQ(o.replication, (std::map<std::int64_t, std::size_t>{{0, 2}, {1, 1}, {2, 1}}));
  EXPECT_EQ(o.hops, (std::map<int, std::size_t>{{1, 2}, {2, 1}}));
  EXPECT_THROW(full_tree_flood_oracle(6, 16), ParameterError);
}

TEST(Oracle, MatchesClosedFormOnGrid) {
  for (auto [h, k] : {std::pair{1, 2}, {6, 2}, {3, 3}, {4, 3}, {3, 4}, {4, 4}, {2, 16}}) {
    const auto o = full_tree_flood_oracle(h, k);
    for (int j = 0; j <= h; ++j) {
      ASSERT_EQ(BigInt(o.replication.at(replication_value(h, k, j))), replication_frequency(h, k, j));
      if (j > 0) {
        ASSERT_EQ(BigInt(o.hops.at(j)), hop_frequency_full(h, k, j));
      }
    }
  }
}

// The overlay simulator, given every key of a small space, reproduces the
// closed-form histograms from any source.
TEST(Oracle, SimulatorOnFullPopulation) {
  for (auto [b, h] : {std::pair{1, 5}, {2, 3}, {2, 4}}) {
    const KeyspaceParams params{b, b * h};
    const int k = params.alphabet_size();
    std::vector<Key> keys;
    const auto total = static_cast<std::int64_t>(std::pow(k, h));
    for (std::int64_t x = 0; x < total; ++x) {
      std::vector<Digit> d(static_cast<std::size_t>(h));
      for (int pos = h - 1, y = static_cast<int>(x); pos >= 0; --pos, y /= k) d[static_cast<std::size_t>(pos)] = static_cast<Digit>(y % k);
      keys.emplace_back(params, d);
    }
    const auto net = make_network(keys);
    for (std::int64_t s : {std::int64_t{0}, total / 3, total - 1}) {
      const NodeIndex src = node_index(static_cast<std::size_t>(s));
      const auto events = prefix_flood(net, src);
      std::map<std::int64_t, std::size_t> rep;
      for (auto c : replication_counts(net, events)) ++rep[static_cast<std::int64_t>(c)];
      std::map<int, std::size_t> hops;
      for (int hc : hop_counts(net, events, src)) ++hops[hc];
      for (int j = 0; j <= h; ++j) {
        ASSERT_EQ(BigInt(rep.at(replication_value(h, k, j))), replication_frequency(h, k, j));
        ASSERT_EQ(BigInt(hops.at(j)), hop_frequency_full(h, k, j));
      }
    }
  }
}
