#pragma once

// Desk-scale invariant suite behind `prefixcast verify`: coverage,
// uniqueness and bounds of both schemes, routing-table completeness, LCP
// algebra, oracle equivalence and the analytic recurrences.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "prefixcast/analytics.hpp"
#include "prefixcast/dissemination.hpp"
#include "prefixcast/engine.hpp"
#include "prefixcast/overlay.hpp"

namespace prefixcast {

struct CheckResult {
  std::string module;
  std::string name;
  bool passed = true;
  std::string detail;
};

struct VerifyOptions {
  std::vector<std::size_t> sizes{10, 100, 1000};
  std::uint64_t seeds = 30;
  // Removes one of the source's routing entries in the first flood run.
  bool inject_fault = false;
};

namespace detail {

struct Network {
  OverlayNetwork net;
  NodeIndex source;
};

// Same draw order as run_experiment: keys, then the source.
inline Network seeded_network(std::size_t n, std::uint64_t seed, const KeyspaceParams& params = {}) {
  Rng rng(seed);
  auto net = make_network(draw_unique_keys(rng, n, params), seed);
  const auto source = node_index(uniform_index(rng, n));
  return {std::move(net), source};
}

inline CheckResult check_lcp_algebra() {
  CheckResult r{"keyspace", "lcp_exhaustive", true, ""};
  for (int b : {1, 2}) {
    const KeyspaceParams params{b, 4 * b};
    const int k = params.alphabet_size();
    std::vector<Prefix> all;
    std::vector<std::vector<Digit>> frontier{{}};
    for (int len = 0; len <= 4; ++len) {
      std::vector<std::vector<Digit>> next;
      for (auto& d : frontier) {
        all.emplace_back(params, d);
        for (int c = 0; c < k && len < 4; ++c) {
          auto e = d;
          e.push_back(static_cast<Digit>(c));
          next.push_back(std::move(e));
        }
      }
      frontier = std::move(next);
    }
    for (const auto& a : all) {
      for (const auto& x : all) {
        const Prefix l = lcp(a, x);
        const bool ok = l == lcp(x, a) && l.length() <= std::min(a.length(), x.length()) && is_prefix_of(l, a) &&
                        is_prefix_of(l, x) && ((is_prefix_of(a, x) && is_prefix_of(x, a)) == (a == x)) &&
                        ((is_prefix_of(l, a) && is_prefix_of(a, l)) == (l == a));
        if (!ok) {
          r.passed = false;
          r.detail = fmt::format("counterexample k={} a={} b={}", k, to_string(a), to_string(x));
          return r;
        }
      }
    }
    r.detail += fmt::format("k={}: {} prefix pairs; ", k, all.size() * all.size());
  }
  return r;
}

}  // namespace detail

inline std::vector<CheckResult> run_verification(const VerifyOptions& options = {}) {
  std::vector<CheckResult> results;
  results.push_back(detail::check_lcp_algebra());

  for (std::size_t n : options.sizes) {
    if (n > 1000) continue;
    CheckResult r{"overlay", fmt::format("completeness_n{}", n), true, ""};
    for (std::uint64_t seed = 1; seed <= 3 && r.passed; ++seed) {
      const auto net = detail::seeded_network(n, seed).net;
      if (auto v = find_table_violation(net)) {
        r.passed = false;
        r.detail = fmt::format("seed {}: {}", seed, *v);
      }
    }
    if (r.passed) r.detail = "seeds 1..3";
    results.push_back(std::move(r));
  }

  bool fault_pending = options.inject_fault;
  for (std::size_t n : options.sizes) {
    CheckResult flood{"dissemination", fmt::format("flood_coverage_uniqueness_n{}", n), true, ""};
    CheckResult scribe{"dissemination", fmt::format("scribe_coverage_uniqueness_n{}", n), true, ""};
    CheckResult bounds{"dissemination", fmt::format("flood_bounds_n{}", n), true, ""};
    const double rep_bound = analytics::replication_bound(static_cast<double>(n), 16);
    const double hop_bound = std::ceil(std::log2(static_cast<double>(n)));
    std::size_t worst_rep = 0;
    int worst_hop = 0;
    for (std::uint64_t seed = 1; seed <= options.seeds; ++seed) {
      auto [net, source] = detail::seeded_network(n, seed);
      if (fault_pending && n > 1) {
        for (int col = 0; col < net.params().alphabet_size(); ++col) {
          if (net.table(source).entry(1, col)) {
            net = net.with_entry_removed(source, 1, col);
            break;
          }
        }
        fault_pending = false;
      }
      const auto events = prefix_flood_unchecked(net, source);
      const auto missed = unreached_members(net, source, events);
      const auto dup = duplicate_deliveries(net, source, events);
      if (flood.passed && (!missed.empty() || !dup.empty())) {
        flood.passed = false;
        flood.detail = !missed.empty()
                           ? fmt::format("seed {}: unreached {} ({} missed)", seed, to_string(net.key(missed.front())),
                                         missed.size())
                           : fmt::format("seed {}: duplicate {}", seed, to_string(net.key(dup.front())));
      }
      if (missed.empty() && dup.empty()) {
        const auto reps = replication_counts(net, events);
        const auto hops = hop_counts(net, events, source);
        const auto max_rep = *std::max_element(reps.begin(), reps.end());
        const auto max_hop = *std::max_element(hops.begin(), hops.end());
        worst_rep = std::max(worst_rep, max_rep);
        worst_hop = std::max(worst_hop, max_hop);
        if (bounds.passed && (static_cast<double>(max_rep) > rep_bound + 1e-9 || max_hop > hop_bound ||
                              events.size() != n - 1)) {
          bounds.passed = false;
          bounds.detail = fmt::format("seed {}: max replication {} (bound {:.2f}), max hops {} (bound {}), sends {}",
                                      seed, max_rep, rep_bound, max_hop, hop_bound, events.size());
        }
      }

      const auto tree = scribe_build_tree(net, key_from_label(kDefaultGroupLabel, net.params()));
      const auto sevents = scribe_broadcast(net, tree, source);
      const auto smissed = unreached_members(net, source, sevents);
      const auto sdup = duplicate_deliveries(net, source, sevents);
      if (scribe.passed && (!smissed.empty() || !sdup.empty())) {
        scribe.passed = false;
        scribe.detail = !smissed.empty() ? fmt::format("seed {}: unreached {}", seed, to_string(net.key(smissed.front())))
                                         : fmt::format("seed {}: duplicate {}", seed, to_string(net.key(sdup.front())));
      }
    }
    if (flood.passed) flood.detail = fmt::format("{} seeds", options.seeds);
    if (scribe.passed) scribe.detail = fmt::format("{} seeds", options.seeds);
    if (bounds.passed)
      bounds.detail = fmt::format("max replication {} <= {:.2f}, max hops {} <= {}", worst_rep, rep_bound, worst_hop,
                                  hop_bound);
    results.push_back(std::move(flood));
    results.push_back(std::move(scribe));
    results.push_back(std::move(bounds));
  }

  const std::vector<std::pair<int, int>> grid = {{1, 2}, {2, 2}, {3, 2}, {4, 2}, {5, 2}, {6, 2}, {1, 3}, {2, 3},
                                                 {3, 3}, {4, 3}, {1, 4}, {2, 4}, {3, 4}, {4, 4}, {1, 16}, {2, 16}};
  for (auto [h, k] : grid) {
    CheckResult r{"analytics", fmt::format("oracle_h{}_k{}", h, k), true, ""};
    const auto oracle = analytics::full_tree_flood_oracle(h, k);
    for (int j = 0; j <= h; ++j) {
      const auto v = analytics::replication_value(h, k, j);
      const auto it = oracle.replication.find(v);
      const analytics::BigInt got = it == oracle.replication.end() ? 0 : it->second;
      const auto hit = oracle.hops.find(j);
      const analytics::BigInt got_hops = j == 0 ? 1 : (hit == oracle.hops.end() ? 0 : hit->second);
      if (got != analytics::replication_frequency(h, k, j) || got_hops != analytics::hop_frequency_full(h, k, j)) {
        r.passed = false;
        r.detail = fmt::format("mismatch at j={}", j);
        break;
      }
    }
    if (r.passed && oracle.replication.size() != static_cast<std::size_t>(h + 1)) {
      r.passed = false;
      r.detail = "oracle produced replication values outside the closed-form support";
    }
    if (r.passed) r.detail = "exact match";
    results.push_back(std::move(r));
  }

  {
    CheckResult r{"analytics", "hop_recurrence_full", true, "1 <= j <= h <= 64, k in {2,4,16}"};
    auto f = [](int h, int k, int j) -> analytics::BigInt {
      return j > h ? analytics::BigInt(0) : analytics::hop_frequency_full(h, k, j);
    };
    for (int k : {2, 4, 16}) {
      if (f(1, k, 0) != 1 || f(1, k, 1) != k - 1) {
        r.passed = false;
        r.detail = fmt::format("initial conditions fail for k={}", k);
      }
      for (int h = 2; h <= 64 && r.passed; ++h)
        for (int j = 1; j <= h; ++j)
          if (f(h, k, j) != f(h - 1, k, j) + (k - 1) * f(h - 1, k, j - 1)) {
            r.passed = false;
            r.detail = fmt::format("fails at h={} k={} j={}", h, k, j);
            break;
          }
    }
    results.push_back(std::move(r));
  }
  {
    CheckResult r{"analytics", "hop_recurrence_random", true, "1 <= j <= h <= 64, k in {2,4,16}, tabulated p"};
    for (int k : {2, 4, 16})
      for (double p : {0.00122, 0.00244, 0.00370, 0.00497, 0.3, 1.0})
        for (int h = 2; h <= 64 && r.passed; ++h)
          for (int j = 1; j <= h; ++j) {
            const double lhs = analytics::hop_frequency_random(h, k, p, j);
            const double rhs = analytics::hop_frequency_random(h - 1, k, p, j) +
                               p * (k - 1) * analytics::hop_frequency_random(h - 1, k, p, j - 1);
            if (std::abs(lhs - rhs) > 1e-12 * std::abs(lhs)) {
              r.passed = false;
              r.detail = fmt::format("fails at h={} k={} p={} j={}", h, k, p, j);
              break;
            }
          }
    results.push_back(std::move(r));
  }
  {
    CheckResult r{"analytics", "normalization", true, "(h,k)=(128,16), tabulated p"};
    auto check = [&](const analytics::DiscreteDistribution& d, const std::string& what) {
      if (r.passed && std::abs(d.total() - 1.0) > 1e-12) {
        r.passed = false;
        r.detail = fmt::format("{} sums to {:.17g}", what, d.total());
      }
    };
    check(analytics::replication_distribution(128, 16), "replication");
    check(analytics::hop_distribution_full(128, 16), "hop_full");
    for (const auto& row : analytics::link_probability_table()) check(analytics::hop_distribution_random(128, 16, row.p), "hop_random");
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace prefixcast
