#pragma once

// Closed-form replication and hop-count distributions for prefix flooding on
// k-ary prefix trees of height h, plus a brute-force flood of a literally
// full tree to validate them.
//
//   replication value      v(j)  = (h - j)(k - 1)
//   replication frequency  f(j)  = 1 (j = 0),  k^(j-1)(k - 1) (0 < j <= h)
//   replication law        P(j)  = f(j) / k^h
//   hop frequency          g(j)  = C(h, j)(k - 1)^j
//   hop law (full tree)    H(j)  = g(j) / k^h
//   hop law (random tree)  H(j)  = C(h, j) q^j / (1 + q)^h,  q = p(k - 1)
//
// The random recursive tree grows each of a vertex's k-1 branches
// independently with probability p, so N = (1 + q)^h leaves are expected.

#include <cmath>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "prefixcast/error.hpp"

namespace prefixcast::analytics {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

struct Moments {
  double mean = 0.0;
  double std = 0.0;
};

struct DiscreteDistribution {
  std::vector<std::int64_t> support;
  std::vector<double> probs;

  double total() const {
    double s = 0.0;
    for (double p : probs) s += p;
    return s;
  }

  // Moments by direct summation over the support.
  Moments moments() const {
    double mean = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) mean += probs[i] * static_cast<double>(support[i]);
    double var = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      const double d = static_cast<double>(support[i]) - mean;
      var += probs[i] * d * d;
    }
    return {mean, std::sqrt(var)};
  }
};

struct FullTreeModel {
  int h = 1;
  int k = 2;

  void validate() const {
    if (h < 1) throw ParameterError("tree height must be positive");
    if (k < 2) throw ParameterError("alphabet size must be at least 2");
  }
  BigInt leaf_count() const { return boost::multiprecision::pow(BigInt(k), static_cast<unsigned>(h)); }
};

struct RandomTreeModel {
  int h = 1;
  int k = 2;
  double p = 1.0;

  void validate() const {
    FullTreeModel{h, k}.validate();
    if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("edge probability must lie in [0, 1]");
  }
  double expected_leaves() const { return std::pow(1.0 + p * (k - 1), h); }
};

enum class Precision {
  automatic,  // exact big integers up to h = 64, log-space above
  exact,
  log_space,
};

inline constexpr int kExactHeightLimit = 64;

namespace detail {

inline void check_level(int h, int k, int j) {
  FullTreeModel{h, k}.validate();
  if (j < 0 || j > h) throw ParameterError("level j must lie in [0, h]");
}

inline BigInt power(int base, int exp) {
  return boost::multiprecision::pow(BigInt(base), static_cast<unsigned>(exp));
}

inline BigInt binomial(int n, int r) {
  BigInt c = 1;
  for (int i = 1; i <= r; ++i) c = c * (n - r + i) / i;
  return c;
}

inline double log_binomial(int n, int r) {
  return std::lgamma(n + 1.0) - std::lgamma(r + 1.0) - std::lgamma(n - r + 1.0);
}

inline double to_double(const BigRational& r) { return r.convert_to<double>(); }

}  // namespace detail

inline std::int64_t replication_value(int h, int k, int j) {
  detail::check_level(h, k, j);
  return static_cast<std::int64_t>(h - j) * (k - 1);
}

inline BigInt replication_frequency(int h, int k, int j) {
  detail::check_level(h, k, j);
  if (j == 0) return 1;
  return detail::power(k, j - 1) * (k - 1);
}

// Support ordered by j = 0..h, i.e. descending replication value.
inline DiscreteDistribution replication_distribution(int h, int k) {
  FullTreeModel{h, k}.validate();
  const BigInt leaves = detail::power(k, h);
  DiscreteDistribution d;
  for (int j = 0; j <= h; ++j) {
    d.support.push_back(replication_value(h, k, j));
    d.probs.push_back(detail::to_double(BigRational(replication_frequency(h, k, j), leaves)));
  }
  return d;
}

inline BigRational replication_mean_exact(int h, int k) {
  FullTreeModel{h, k}.validate();
  BigInt weighted = 0;
  for (int j = 0; j <= h; ++j) weighted += replication_frequency(h, k, j) * replication_value(h, k, j);
  return BigRational(weighted, detail::power(k, h));
}

inline BigRational replication_variance_exact(int h, int k) {
  FullTreeModel{h, k}.validate();
  BigInt second = 0;
  for (int j = 0; j <= h; ++j) {
    const BigInt v = replication_value(h, k, j);
    second += replication_frequency(h, k, j) * v * v;
  }
  const BigRational mean = replication_mean_exact(h, k);
  return BigRational(second, detail::power(k, h)) - mean * mean;
}

// Mean is exactly 1 - k^-h; the standard deviation tends to sqrt(k).
inline Moments replication_moments(int h, int k) {
  return {detail::to_double(replication_mean_exact(h, k)),
          std::sqrt(detail::to_double(replication_variance_exact(h, k)))};
}

// Upper bound on any node's replication load with n receivers.
inline double replication_bound(double n, int k) {
  if (n < 1.0) throw ParameterError("n must be at least 1");
  if (k < 2) throw ParameterError("alphabet size must be at least 2");
  return std::log2(n) * (k - 1);
}

inline BigInt hop_frequency_full(int h, int k, int j) {
  detail::check_level(h, k, j);
  return detail::binomial(h, j) * detail::power(k - 1, j);
}

inline DiscreteDistribution hop_distribution_full(int h, int k, Precision precision = Precision::automatic) {
  FullTreeModel{h, k}.validate();
  const bool exact = precision == Precision::exact ||
                     (precision == Precision::automatic && h <= kExactHeightLimit);
  DiscreteDistribution d;
  if (exact) {
    const BigInt leaves = detail::power(k, h);
    for (int j = 0; j <= h; ++j) {
      d.support.push_back(j);
      d.probs.push_back(detail::to_double(BigRational(hop_frequency_full(h, k, j), leaves)));
    }
    return d;
  }
  const double log_km1 = std::log(k - 1.0);
  const double log_norm = h * std::log(static_cast<double>(k));
  for (int j = 0; j <= h; ++j) {
    d.support.push_back(j);
    d.probs.push_back(std::exp(detail::log_binomial(h, j) + j * log_km1 - log_norm));
  }
  return d;
}

inline Moments hop_moments_full(int h, int k) {
  FullTreeModel{h, k}.validate();
  return {(k - 1.0) / k * h, std::sqrt((k - 1.0) * h) / k};
}

// Edge probability that makes a random recursive tree of height h carry n
// leaves on average.
inline double edge_probability(double n, int h, int k) {
  FullTreeModel{h, k}.validate();
  const double log_max = h * std::log(static_cast<double>(k));
  if (!(n >= 1.0) || std::log(n) > log_max * (1.0 + 1e-15))
    throw ParameterError("leaf count must lie in [1, k^h]");
  return std::min(1.0, std::expm1(std::log(n) / h) / (k - 1));
}

// Unnormalized frequency C(h, j) q^j obeying
//   f_h(j) = f_{h-1}(j) + q f_{h-1}(j-1),  f_1(0) = 1, f_1(1) = q.
inline double hop_frequency_random(int h, int k, double p, int j) {
  RandomTreeModel{h, k, p}.validate();
  if (j < 0 || j > h) return 0.0;
  const double q = p * (k - 1);
  if (j == 0) return 1.0;
  if (q == 0.0) return 0.0;
  return std::exp(detail::log_binomial(h, j) + j * std::log(q));
}

inline DiscreteDistribution hop_distribution_random(int h, int k, double p,
                                                    Precision precision = Precision::automatic) {
  RandomTreeModel{h, k, p}.validate();
  if (p == 1.0) return hop_distribution_full(h, k, precision);
  DiscreteDistribution d;
  const double q = p * (k - 1);
  const double log_norm = h * std::log1p(q);
  for (int j = 0; j <= h; ++j) {
    d.support.push_back(j);
    if (q == 0.0) d.probs.push_back(j == 0 ? 1.0 : 0.0);
    else d.probs.push_back(std::exp(detail::log_binomial(h, j) + j * std::log(q) - log_norm));
  }
  return d;
}

inline Moments hop_moments_random(int h, int k, double p) {
  RandomTreeModel{h, k, p}.validate();
  const double q = p * (k - 1);
  return {q * h / (1.0 + q), std::sqrt(q * h) / (1.0 + q)};
}

struct LinkProbabilityRow {
  double n = 0.0;
  double p = 0.0;
  double mean = 0.0;
  double std = 0.0;
};

inline std::vector<LinkProbabilityRow> link_probability_table(int h = 128, int k = 16,
                                     const std::vector<double>& n_list = {10, 100, 1000, 10000}) {
  std::vector<LinkProbabilityRow> rows;
  for (double n : n_list) {
    const double p = edge_probability(n, h, k);
    const Moments m = hop_moments_random(h, k, p);
    rows.push_back({n, p, m.mean, m.std});
  }
  return rows;
}

struct HopBound {
  double max_hops = 0.0;     // log2(n)
  double average_hops = 0.0; // log_{2^b}(n)
};

inline HopBound hop_bound(double n, int b) {
  if (n < 1.0) throw ParameterError("n must be at least 1");
  if (b < 1) throw ParameterError("bits per digit must be positive");
  return {std::log2(n), std::log2(n) / b};
}

struct OracleHistograms {
  std::map<std::int64_t, std::size_t> replication;  // value -> node count, all k^h nodes
  std::map<int, std::size_t> hops;                  // hops -> receiver count, source excluded
};

inline constexpr std::int64_t kOracleLeafLimit = 1'000'000;

// Materializes every key of length h over k digits, gives each node a
// complete routing table and floods from key 0...0 breadth-first. Standalone
// integer arithmetic: shares no code with the overlay or flooding modules.
inline OracleHistograms full_tree_flood_oracle(int h, int k) {
  FullTreeModel{h, k}.validate();
  std::int64_t leaves = 1;
  for (int i = 0; i < h; ++i) {
    leaves *= k;
    if (leaves > kOracleLeafLimit) throw ParameterError("full tree exceeds oracle size limit");
  }
  std::vector<std::int64_t> weight(static_cast<std::size_t>(h));  // k^(h-1-pos)
  for (int pos = h - 1, w = 1; pos >= 0; --pos, w *= k) weight[static_cast<std::size_t>(pos)] = w;
  auto digit = [&](std::int64_t x, int pos) { return (x / weight[static_cast<std::size_t>(pos)]) % k; };

  // Slot (row, col) of node x: the smallest key sharing x's first row-1
  // digits and carrying col at position row-1.
  auto slot = [&](std::int64_t x, int row, int col) -> std::int64_t {
    const std::int64_t block = weight[static_cast<std::size_t>(row - 1)] * k;
    return (x / block) * block + col * weight[static_cast<std::size_t>(row - 1)];
  };

  std::vector<std::size_t> sent(static_cast<std::size_t>(leaves), 0);
  std::vector<int> hop(static_cast<std::size_t>(leaves), -1);
  std::vector<std::pair<std::int64_t, int>> queue{{0, 0}};  // (node, destination prefix length)
  hop[0] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const auto [x, depth] = queue[head];
    for (int row = depth + 1; row <= h; ++row) {
      for (int col = 0; col < k; ++col) {
        if (col == digit(x, row - 1)) continue;
        const std::int64_t y = slot(x, row, col);
        if (hop[static_cast<std::size_t>(y)] >= 0) throw ContractViolation("oracle reached a node twice");
        hop[static_cast<std::size_t>(y)] = hop[static_cast<std::size_t>(x)] + 1;
        ++sent[static_cast<std::size_t>(x)];
        queue.emplace_back(y, row);
      }
    }
  }
  OracleHistograms out;
  for (std::int64_t x = 0; x < leaves; ++x) {
    const auto i = static_cast<std::size_t>(x);
    if (hop[i] < 0) throw ContractViolation("oracle missed a node");
    ++out.replication[static_cast<std::int64_t>(sent[i])];
    if (x != 0) ++out.hops[hop[i]];
  }
  return out;
}

}  // namespace prefixcast::analytics
