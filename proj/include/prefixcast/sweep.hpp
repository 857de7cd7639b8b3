#pragma once

// Seeded experiment sweeps over network sizes, pooled statistics across
// seeds, and the report files written for each sweep.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <filesystem>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <fmt/format.h>

#include "prefixcast/analytics.hpp"
#include "prefixcast/engine.hpp"
#include "prefixcast/error.hpp"
#include "prefixcast/report.hpp"

namespace prefixcast {

enum class OutputFormat { json, csv };

struct SweepConfig {
  std::vector<std::size_t> n_list{10, 100, 1000, 10000};
  KeyspaceParams params;
  std::vector<std::uint64_t> seeds;
  bool run_flood = true;
  bool run_scribe = true;
  TimingParams timing;
  std::filesystem::path out_dir = "out";
  OutputFormat format = OutputFormat::json;
  unsigned jobs = 1;

  void validate() const {
    if (n_list.empty()) throw ParameterError("no network sizes given");
    for (auto n : n_list)
      if (n < 1) throw ParameterError("network size must be at least 1");
    if (seeds.empty()) throw ParameterError("at least one seed required");
    if (!run_flood && !run_scribe) throw ParameterError("no scheme selected");
    params.validate();
    timing.validate();
  }
};

namespace detail {

inline std::uint64_t parse_u64(std::string_view s) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw ParameterError("not a non-negative integer: " + std::string(s));
  return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t next = s.find(sep, pos);
    parts.push_back(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return parts;
}

}  // namespace detail

// "1,2,7" or "1..30" or a mix such as "1..5,9".
inline std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
  std::vector<std::uint64_t> seeds;
  for (auto part : detail::split(text, ',')) {
    if (auto dots = part.find(".."); dots != std::string_view::npos) {
      const auto lo = detail::parse_u64(part.substr(0, dots));
      const auto hi = detail::parse_u64(part.substr(dots + 2));
      if (hi < lo) throw ParameterError("descending seed range");
      for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
    } else {
      seeds.push_back(detail::parse_u64(part));
    }
  }
  return seeds;
}

inline std::vector<std::size_t> parse_size_list(std::string_view text) {
  std::vector<std::size_t> out;
  for (auto part : detail::split(text, ',')) out.push_back(static_cast<std::size_t>(detail::parse_u64(part)));
  return out;
}

// Metrics pooled over the seeds of one (n, scheme) cell.
class PooledScheme {
 public:
  struct SeedSummary {
    std::uint64_t seed = 0;
    std::size_t rep_max = 0;
    double rep_mean = 0.0, rep_std = 0.0;
    double hop_mean = 0.0, hop_std = 0.0;
    int hop_max = 0;
    double travel_mean_ms = 0.0, travel_std_ms = 0.0;
  };

  void add(const MetricsReport& r) {
    for (const auto& [v, c] : r.replication_histogram) replication_[v] += c;
    for (const auto& [v, c] : r.hop_histogram) hops_[v] += c;
    const double receivers = static_cast<double>(r.n > 0 ? r.n - 1 : 0);
    travel_.merge(RunningMoments::from_summary(receivers, r.travel_mean_ms, r.travel_std_ms));
    per_seed_.push_back(SeedSummary{r.seed, r.replication_histogram.empty() ? 0 : r.replication_histogram.rbegin()->first,
                                    r.rep_mean, r.rep_std, r.hop_mean, r.hop_std,
                                    r.hop_histogram.empty() ? 0 : r.hop_histogram.rbegin()->first,
                                    r.travel_mean_ms, r.travel_std_ms});
  }

  const std::map<std::size_t, std::size_t>& replication_histogram() const { return replication_; }
  const std::map<int, std::size_t>& hop_histogram() const { return hops_; }
  const std::vector<SeedSummary>& per_seed() const { return per_seed_; }

  analytics::Moments replication() const {
    const auto m = histogram_moments(replication_);
    return {m.mean(), m.stddev()};
  }
  analytics::Moments hops() const {
    const auto m = histogram_moments(hops_);
    return {m.mean(), m.stddev()};
  }
  analytics::Moments travel() const { return {travel_.mean(), travel_.stddev()}; }

  Json to_json() const {
    Json j;
    j["replication_hist"] = histogram_json(replication_);
    j["hop_hist"] = histogram_json(hops_);
    j["rep_mean"] = replication().mean;
    j["rep_std"] = replication().std;
    j["hop_mean"] = hops().mean;
    j["hop_std"] = hops().std;
    j["travel_mean_ms"] = travel().mean;
    j["travel_std_ms"] = travel().std;
    Json seeds = Json::array();
    for (const auto& s : per_seed_)
      seeds.push_back(Json{{"seed", s.seed}, {"rep_max", s.rep_max}, {"rep_mean", s.rep_mean},
                           {"rep_std", s.rep_std}, {"hop_max", s.hop_max}, {"hop_mean", s.hop_mean},
                           {"hop_std", s.hop_std}, {"travel_mean_ms", s.travel_mean_ms},
                           {"travel_std_ms", s.travel_std_ms}});
    j["per_seed"] = std::move(seeds);
    return j;
  }

 private:
  std::map<std::size_t, std::size_t> replication_;
  std::map<int, std::size_t> hops_;
  RunningMoments travel_;
  std::vector<SeedSummary> per_seed_;
};

struct CellResult {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::optional<MetricsReport> flood;
  std::optional<MetricsReport> scribe;
  std::optional<double> rdp;
};

struct SizeSummary {
  std::size_t n = 0;
  std::optional<PooledScheme> flood;
  std::optional<PooledScheme> scribe;
  std::vector<double> rdp_per_seed;

  std::optional<double> pooled_rdp() const {
    if (!flood || !scribe || flood->travel().mean == 0.0) return std::nullopt;
    return scribe->travel().mean / flood->travel().mean;
  }
};

inline CellResult run_cell(const SweepConfig& config, std::size_t n, std::uint64_t seed) {
  ExperimentConfig e;
  e.n = n;
  e.params = config.params;
  e.seed = seed;
  e.timing = config.timing;
  e.run_flood = config.run_flood;
  e.run_scribe = config.run_scribe;
  auto result = run_experiment(e);
  CellResult cell{n, seed, std::nullopt, std::nullopt, std::nullopt};
  if (result.flood) cell.flood = result.flood->report;
  if (result.scribe) cell.scribe = result.scribe->report;
  if (result.flood && result.scribe && n > 1)
    cell.rdp = relative_delay_penalty(result.scribe->log, result.flood->log).ratio;
  return cell;
}

// Runs every (n, seed) cell, distributing cells over config.jobs threads.
// Results come back in (n, seed) order regardless of scheduling.
inline std::vector<SizeSummary> run_cells(const SweepConfig& config, std::vector<CellResult>* cells_out = nullptr) {
  config.validate();
  std::vector<std::pair<std::size_t, std::uint64_t>> work;
  for (auto n : config.n_list)
    for (auto s : config.seeds) work.emplace_back(n, s);
  std::vector<std::optional<CellResult>> cells(work.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < work.size();) {
      try {
        cells[i] = run_cell(config, work[i].first, work[i].second);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(config.jobs, static_cast<unsigned>(work.size())));
  {
    std::vector<std::jthread> threads;
    for (unsigned t = 1; t < jobs; ++t) threads.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<SizeSummary> sizes;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const CellResult& c = *cells[i];
    if (i % config.seeds.size() == 0) {
      sizes.push_back(SizeSummary{c.n, std::nullopt, std::nullopt, {}});
      if (config.run_flood) sizes.back().flood.emplace();
      if (config.run_scribe) sizes.back().scribe.emplace();
    }
    auto& s = sizes.back();
    if (c.flood) s.flood->add(*c.flood);
    if (c.scribe) s.scribe->add(*c.scribe);
    if (c.rdp) s.rdp_per_seed.push_back(*c.rdp);
  }
  if (cells_out) {
    cells_out->clear();
    for (auto& c : cells) cells_out->push_back(std::move(*c));
  }
  return sizes;
}

inline std::string cell_file_stem(std::size_t n, std::uint64_t seed, Scheme scheme) {
  return fmt::format("report_n{}_s{}_{}", n, seed, scheme_name(scheme));
}

struct SweepOutput {
  std::vector<SizeSummary> sizes;
  std::vector<std::filesystem::path> files;
};

namespace detail {

inline void write_pooled_hist_csv(const std::filesystem::path& path, const PooledScheme& pooled) {
  auto out = open_output(path);
  out << "metric,value,count,probability\n";
  auto emit = [&](std::string_view metric, const auto& hist) {
    std::size_t total = 0;
    for (const auto& [v, c] : hist) total += c;
    for (const auto& [v, c] : hist)
      out << fmt::format("{},{},{},{}\n", metric, v, c, static_cast<double>(c) / static_cast<double>(total));
  };
  emit("replication", pooled.replication_histogram());
  emit("hops", pooled.hop_histogram());
}

inline std::string plot_script(const SweepConfig& config) {
  std::ostringstream gp;
  gp << "# gnuplot script; run from this directory: gnuplot plots.gp\n"
     << "set datafile separator ','\nset terminal pngcairo size 900,600\n";
  for (Scheme scheme : {Scheme::flood, Scheme::scribe}) {
    if ((scheme == Scheme::flood && !config.run_flood) || (scheme == Scheme::scribe && !config.run_scribe)) continue;
    const auto name = scheme_name(scheme);
    for (std::string_view metric : {"replication", "hops"}) {
      gp << fmt::format("set output '{}_{}.png'\nset logscale y\nset xlabel '{}'\nset ylabel 'probability'\nplot ",
                        metric, name, metric);
      bool first = true;
      for (auto n : config.n_list) {
        if (!first) gp << ", \\\n     ";
        gp << fmt::format("'hist_n{}_{}.csv' using ($1 eq '{}' ? $2 : 1/0):4 with linespoints title 'N={}'", n,
                          name, metric, n);
        first = false;
      }
      gp << "\nunset logscale y\n";
    }
  }
  if (config.run_flood && config.run_scribe)
    gp << "set output 'rdp.png'\nset logscale x\nset xlabel 'N'\nset ylabel 'RDP'\n"
          "plot 'rdp.csv' using 1:2 skip 1 with linespoints title 'pooled RDP'\nunset logscale x\n";
  return gp.str();
}

}  // namespace detail

// Writes per-cell reports, pooled files per network size, the RDP series,
// the hop-model comparison and a plot script under config.out_dir.
inline SweepOutput run_sweep(const SweepConfig& config) {
  config.validate();
  std::vector<CellResult> cells;
  SweepOutput output;
  output.sizes = run_cells(config, &cells);
  const auto& dir = config.out_dir;
  const std::string ext = config.format == OutputFormat::json ? ".json" : ".csv";
  auto emit_file = [&](const std::filesystem::path& p, const std::string& text) {
    write_text_file(p, text);
    output.files.push_back(p);
  };
  auto render = [&](const MetricsReport& r) {
    if (config.format == OutputFormat::json) return to_json(r).dump(2) + "\n";
    std::ostringstream s;
    write_report_csv(r, s);
    return s.str();
  };

  for (const auto& c : cells) {
    if (c.flood) emit_file(dir / (cell_file_stem(c.n, c.seed, Scheme::flood) + ext), render(*c.flood));
    if (c.scribe) emit_file(dir / (cell_file_stem(c.n, c.seed, Scheme::scribe) + ext), render(*c.scribe));
  }

  const int k = config.params.alphabet_size();
  for (const auto& s : output.sizes) {
    Json pooled;
    pooled["n"] = s.n;
    pooled["k"] = k;
    pooled["key_bits"] = config.params.key_bits;
    pooled["seeds"] = config.seeds;
    pooled["timing"] = timing_json(config.timing);
    Json schemes = Json::object();
    if (s.flood) schemes["flood"] = s.flood->to_json();
    if (s.scribe) schemes["scribe"] = s.scribe->to_json();
    pooled["schemes"] = std::move(schemes);
    if (auto rdp = s.pooled_rdp()) pooled["rdp"] = *rdp;
    const auto stem = fmt::format("pooled_n{}", s.n);
    if (config.format == OutputFormat::json) {
      emit_file(dir / (stem + ".json"), pooled.dump(2) + "\n");
    } else {
      std::ostringstream csv;
      csv << "n,scheme,metric,value,count\n";
      auto rows = [&](std::string_view name, const PooledScheme& p) {
        csv << fmt::format("{},{},rep_mean,{},\n{},{},rep_std,{},\n", s.n, name, p.replication().mean, s.n, name,
                           p.replication().std);
        csv << fmt::format("{},{},hop_mean,{},\n{},{},hop_std,{},\n", s.n, name, p.hops().mean, s.n, name,
                           p.hops().std);
        csv << fmt::format("{},{},travel_mean_ms,{},\n{},{},travel_std_ms,{},\n", s.n, name, p.travel().mean, s.n,
                           name, p.travel().std);
        for (const auto& [v, c] : p.replication_histogram()) csv << fmt::format("{},{},replication_hist,{},{}\n", s.n, name, v, c);
        for (const auto& [v, c] : p.hop_histogram()) csv << fmt::format("{},{},hop_hist,{},{}\n", s.n, name, v, c);
      };
      if (s.flood) rows("flood", *s.flood);
      if (s.scribe) rows("scribe", *s.scribe);
      emit_file(dir / (stem + ".csv"), csv.str());
    }
    if (s.flood) {
      detail::write_pooled_hist_csv(dir / fmt::format("hist_n{}_flood.csv", s.n), *s.flood);
      output.files.push_back(dir / fmt::format("hist_n{}_flood.csv", s.n));
    }
    if (s.scribe) {
      detail::write_pooled_hist_csv(dir / fmt::format("hist_n{}_scribe.csv", s.n), *s.scribe);
      output.files.push_back(dir / fmt::format("hist_n{}_scribe.csv", s.n));
    }
  }

  if (config.run_flood && config.run_scribe) {
    std::ostringstream rdp;
    rdp << "n,rdp_pooled,rdp_seed_mean,rdp_seed_min,rdp_seed_max,seeds,link_delay_ms,per_send_gap_ms\n";
    for (const auto& s : output.sizes) {
      if (s.rdp_per_seed.empty()) continue;
      RunningMoments m;
      for (double r : s.rdp_per_seed) m.add(r);
      rdp << fmt::format("{},{},{},{},{},{},{},{}\n", s.n, *s.pooled_rdp(), m.mean(),
                         *std::min_element(s.rdp_per_seed.begin(), s.rdp_per_seed.end()),
                         *std::max_element(s.rdp_per_seed.begin(), s.rdp_per_seed.end()), s.rdp_per_seed.size(),
                         config.timing.link_delay_ms, config.timing.per_send_gap_ms);
    }
    emit_file(dir / "rdp.csv", rdp.str());
  }

  if (config.run_flood) {
    // Random recursive tree model with h equal to the key length in bits.
    const int h = config.params.key_bits;
    std::ostringstream cmp;
    cmp << "n,h,k,p,model_hop_mean,model_hop_std,sim_hop_mean,sim_hop_std,mean_difference\n";
    for (const auto& s : output.sizes) {
      const double p = analytics::edge_probability(static_cast<double>(s.n), h, k);
      const auto model = analytics::hop_moments_random(h, k, p);
      const auto sim = s.flood->hops();
      cmp << fmt::format("{},{},{},{},{},{},{},{},{}\n", s.n, h, k, p, model.mean, model.std, sim.mean, sim.std,
                         sim.mean - model.mean);
    }
    emit_file(dir / "hop_model.csv", cmp.str());
  }

  emit_file(dir / "plots.gp", detail::plot_script(config));
  return output;
}

}  // namespace prefixcast
