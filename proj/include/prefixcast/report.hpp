#pragma once

// Serialization of metrics reports and analytic distributions.

#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <string_view>

#include <fmt/format.h>
#include <json.hpp>

#include "prefixcast/analytics.hpp"
#include "prefixcast/engine.hpp"
#include "prefixcast/error.hpp"

namespace prefixcast {

using Json = nlohmann::ordered_json;

template <typename Map>
Json histogram_json(const Map& hist) {
  Json out = Json::array();
  for (const auto& [value, count] : hist) out.push_back(Json::array({value, count}));
  return out;
}

inline Json timing_json(const TimingParams& t) {
  return Json{{"link_delay_ms", t.link_delay_ms}, {"per_send_gap_ms", t.per_send_gap_ms}};
}

inline Json to_json(const MetricsReport& r) {
  Json j;
  j["scheme"] = scheme_name(r.scheme);
  j["n"] = r.n;
  j["k"] = r.k;
  j["key_bits"] = r.key_bits;
  j["seed"] = r.seed;
  j["replication_hist"] = histogram_json(r.replication_histogram);
  j["hop_hist"] = histogram_json(r.hop_histogram);
  j["travel_mean_ms"] = r.travel_mean_ms;
  j["travel_std_ms"] = r.travel_std_ms;
  j["rep_mean"] = r.rep_mean;
  j["rep_std"] = r.rep_std;
  j["hop_mean"] = r.hop_mean;
  j["hop_std"] = r.hop_std;
  j["timing"] = timing_json(r.timing);
  return j;
}

inline MetricsReport report_from_json(const Json& j) {
  MetricsReport r;
  r.scheme = parse_scheme(j.at("scheme").get<std::string>());
  r.n = j.at("n").get<std::size_t>();
  r.k = j.at("k").get<int>();
  r.key_bits = j.at("key_bits").get<int>();
  r.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& pair : j.at("replication_hist"))
    r.replication_histogram[pair.at(0).get<std::size_t>()] = pair.at(1).get<std::size_t>();
  for (const auto& pair : j.at("hop_hist")) r.hop_histogram[pair.at(0).get<int>()] = pair.at(1).get<std::size_t>();
  r.travel_mean_ms = j.at("travel_mean_ms").get<double>();
  r.travel_std_ms = j.at("travel_std_ms").get<double>();
  r.rep_mean = j.at("rep_mean").get<double>();
  r.rep_std = j.at("rep_std").get<double>();
  r.hop_mean = j.at("hop_mean").get<double>();
  r.hop_std = j.at("hop_std").get<double>();
  r.timing.link_delay_ms = j.at("timing").at("link_delay_ms").get<double>();
  r.timing.per_send_gap_ms = j.at("timing").at("per_send_gap_ms").get<double>();
  return r;
}

// Long-format CSV: one row per scalar and per histogram bin.
inline void write_report_csv(const MetricsReport& r, std::ostream& out) {
  const std::string prefix =
      fmt::format("{},{},{},{},{}", scheme_name(r.scheme), r.n, r.k, r.key_bits, r.seed);
  out << "scheme,n,k,key_bits,seed,metric,value,count\n";
  auto scalar = [&](std::string_view name, double v) { out << fmt::format("{},{},{},\n", prefix, name, v); };
  scalar("travel_mean_ms", r.travel_mean_ms);
  scalar("travel_std_ms", r.travel_std_ms);
  scalar("rep_mean", r.rep_mean);
  scalar("rep_std", r.rep_std);
  scalar("hop_mean", r.hop_mean);
  scalar("hop_std", r.hop_std);
  scalar("link_delay_ms", r.timing.link_delay_ms);
  scalar("per_send_gap_ms", r.timing.per_send_gap_ms);
  for (const auto& [v, c] : r.replication_histogram) out << fmt::format("{},replication_hist,{},{}\n", prefix, v, c);
  for (const auto& [v, c] : r.hop_histogram) out << fmt::format("{},hop_hist,{},{}\n", prefix, v, c);
}

inline std::string format_real(double v) { return fmt::format("{}", v); }

// CSV rows "model,h,k,p,j,value,probability"; support listed in the
// distribution's own order.
inline void write_distribution_csv(std::string_view model, int h, int k, double p,
                                   const analytics::DiscreteDistribution& d, std::ostream& out,
                                   bool header = true) {
  if (header) out << "model,h,k,p,j,value,probability\n";
  for (std::size_t i = 0; i < d.support.size(); ++i)
    out << fmt::format("{},{},{},{},{},{},{}\n", model, h, k, format_real(p), i, d.support[i], d.probs[i]);
}

inline void write_link_table_csv(const std::vector<analytics::LinkProbabilityRow>& rows, int h, int k, std::ostream& out) {
  out << "h,k,n,p,hop_mean,hop_std\n";
  for (const auto& r : rows) out << fmt::format("{},{},{},{:.5f},{:.2f},{:.2f}\n", h, k, r.n, r.p, r.mean, r.std);
}

inline void write_link_table_text(const std::vector<analytics::LinkProbabilityRow>& rows, int h, int k, std::ostream& out) {
  out << fmt::format("k = {}, h = {}\n", k, h);
  out << fmt::format("{:>10}", "N");
  for (const auto& r : rows) out << fmt::format(" {:>10}", r.n);
  out << '\n' << fmt::format("{:>10}", "p");
  for (const auto& r : rows) out << fmt::format(" {:>10.5f}", r.p);
  out << '\n' << fmt::format("{:>10}", "mean hops");
  for (const auto& r : rows) out << fmt::format(" {:>10.2f}", r.mean);
  out << '\n' << fmt::format("{:>10}", "std hops");
  for (const auto& r : rows) out << fmt::format(" {:>10.2f}", r.std);
  out << '\n';
}

// Opens a file for writing, creating parent directories.
inline std::ofstream open_output(const std::filesystem::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

inline void write_text_file(const std::filesystem::path& path, std::string_view text) {
  auto out = open_output(path);
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace prefixcast
