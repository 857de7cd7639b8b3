// prefixcast: experiment runner, analytic tables and invariant checks for
// prefix-flooding broadcast over a Pastry-style overlay.
//
// Exit codes: 0 success, 1 invariant failure, 2 usage error, 3 I/O error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "prefixcast/analytics.hpp"
#include "prefixcast/dissemination.hpp"
#include "prefixcast/report.hpp"
#include "prefixcast/sweep.hpp"
#include "prefixcast/verify.hpp"

namespace {

using namespace prefixcast;

constexpr int kExitInvariant = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

struct SweepArgs {
  std::string nodes = "10,100,1000,10000";
  int bits_per_digit = 4;
  int key_bits = 128;
  std::string seeds = "1..30";
  std::string schemes = "flood,scribe";
  double link_delay_ms = 1.0;
  double send_gap_ms = 0.1;
  std::string out = "out";
  std::string format = "json";
  unsigned jobs = 0;
};

SweepConfig to_config(const SweepArgs& a) {
  SweepConfig c;
  c.n_list = parse_size_list(a.nodes);
  c.params = KeyspaceParams{a.bits_per_digit, a.key_bits};
  c.seeds = parse_seed_list(a.seeds);
  c.run_flood = c.run_scribe = false;
  for (auto name : detail::split(a.schemes, ',')) {
    if (parse_scheme(name) == Scheme::flood) c.run_flood = true;
    else c.run_scribe = true;
  }
  c.timing = TimingParams{a.link_delay_ms, a.send_gap_ms};
  c.out_dir = a.out;
  c.format = a.format == "csv" ? OutputFormat::csv : OutputFormat::json;
  c.jobs = a.jobs > 0 ? a.jobs : std::max(1u, std::thread::hardware_concurrency());
  return c;
}

int cmd_sweep(const SweepArgs& args) {
  const SweepConfig config = to_config(args);
  const auto output = run_sweep(config);
  for (const auto& s : output.sizes) {
    std::cout << fmt::format("n={:<6}", s.n);
    if (s.flood)
      std::cout << fmt::format("  flood hops {:.3f}+-{:.3f} rep_std {:.3f}", s.flood->hops().mean, s.flood->hops().std,
                               s.flood->replication().std);
    if (s.scribe)
      std::cout << fmt::format("  scribe hops {:.3f}+-{:.3f} rep_std {:.3f}", s.scribe->hops().mean,
                               s.scribe->hops().std, s.scribe->replication().std);
    if (auto rdp = s.pooled_rdp()) std::cout << fmt::format("  rdp {:.3f}", *rdp);
    std::cout << '\n';
  }
  std::cout << fmt::format("{} files written to {}\n", output.files.size(), config.out_dir.string());
  return 0;
}

struct AnalyticsArgs {
  int h = 128;
  int k = 16;
  std::string nodes = "10,100,1000,10000";
  std::vector<double> p;
  std::string out = "analytics";
};

int cmd_analytics(const AnalyticsArgs& args) {
  std::vector<double> n_list;
  for (auto n : parse_size_list(args.nodes)) n_list.push_back(static_cast<double>(n));
  const auto rows = analytics::link_probability_table(args.h, args.k, n_list);
  write_link_table_text(rows, args.h, args.k, std::cout);

  const std::filesystem::path dir = args.out;
  {
    auto out = open_output(dir / "link_probabilities.csv");
    write_link_table_csv(rows, args.h, args.k, out);
  }
  {
    auto out = open_output(dir / fmt::format("replication_h{}_k{}.csv", args.h, args.k));
    write_distribution_csv("replication", args.h, args.k, 1.0, analytics::replication_distribution(args.h, args.k), out);
  }
  {
    auto out = open_output(dir / fmt::format("hop_full_h{}_k{}.csv", args.h, args.k));
    write_distribution_csv("hop", args.h, args.k, 1.0, analytics::hop_distribution_full(args.h, args.k), out);
  }
  std::vector<double> probabilities = args.p;
  if (probabilities.empty())
    for (const auto& r : rows) probabilities.push_back(r.p);
  for (double p : probabilities) {
    auto out = open_output(dir / fmt::format("hop_random_h{}_k{}_p{}.csv", args.h, args.k, fmt::format("{:.6g}", p)));
    write_distribution_csv("hop", args.h, args.k, p, analytics::hop_distribution_random(args.h, args.k, p), out);
  }
  return 0;
}

struct VerifyArgs {
  bool inject_fault = false;
  std::uint64_t seeds = 30;
};

int cmd_verify(const VerifyArgs& args) {
  VerifyOptions options;
  options.inject_fault = args.inject_fault;
  options.seeds = args.seeds;
  const auto results = run_verification(options);
  std::size_t failed = 0;
  for (const auto& r : results) {
    std::cout << fmt::format("{} {} {} {}\n", r.passed ? "PASS" : "FAIL", r.module, r.name, r.detail);
    if (!r.passed) ++failed;
  }
  Json summary{{"checks", results.size()}, {"failed", failed}};
  Json failures = Json::array();
  for (const auto& r : results)
    if (!r.passed) failures.push_back(Json{{"module", r.module}, {"check", r.name}, {"detail", r.detail}});
  summary["failures"] = std::move(failures);
  std::cout << summary.dump() << '\n';
  return failed == 0 ? 0 : kExitInvariant;
}

struct NetworkArgs {
  std::size_t nodes = 16;
  int bits_per_digit = 4;
  int key_bits = 128;
  std::uint64_t seed = 1;
  std::string trace;
};

int cmd_network(const NetworkArgs& args) {
  const KeyspaceParams params{args.bits_per_digit, args.key_bits};
  params.validate();
  Rng rng(args.seed);
  const auto net = make_network(draw_unique_keys(rng, args.nodes, params), args.seed);
  const auto source = node_index(uniform_index(rng, args.nodes));
  if (args.trace.empty()) {
    dump_network(net, std::cout);
    return 0;
  }
  const auto events = parse_scheme(args.trace) == Scheme::flood
                          ? prefix_flood(net, source)
                          : scribe_broadcast(net, scribe_build_tree(net, key_from_label(kDefaultGroupLabel, params)),
                                             source);
  write_trace_csv(net, events, 0, std::cout);
  return 0;
}

// Fills options not given on the command line from a flat `key = value`
// file. CLI11 only reads config files attached to the root app, so the
// subcommand's file is applied here.
void apply_config_file(CLI::App& cmd, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path);
  for (const auto& item : CLI::ConfigINI().from_config(in)) {
    if (item.name == "++" || item.name == "--") continue;
    if (!item.parents.empty() && item.parents.front() != cmd.get_name() && item.parents.front() != "default")
      throw CLI::ConversionError("section [" + item.parents.front() + "] does not belong to " + cmd.get_name());
    CLI::Option* opt = cmd.get_option_no_throw("--" + item.name);
    if (opt == nullptr || item.name == "config") throw CLI::ConversionError("unknown key '" + item.name + "'");
    if (opt->count() > 0) continue;
    opt->add_result(item.inputs);
    opt->run_callback();
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prefix-flooding broadcast simulator and analytics"};
  app.require_subcommand(1);

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep", "Run seeded flood/scribe experiments over network sizes");
  std::string sweep_config;
  sweep->add_option("--config", sweep_config, "Flat 'key = value' file mirroring the flags; flags override it");
  sweep->add_option("--nodes", sweep_args.nodes, "Comma-separated network sizes")->capture_default_str();
  sweep->add_option("--bits-per-digit", sweep_args.bits_per_digit, "Bits per key digit (k = 2^b)")
      ->check(CLI::Range(1, 8))
      ->capture_default_str();
  sweep->add_option("--key-bits", sweep_args.key_bits, "Key length in bits")->capture_default_str();
  sweep->add_option("--seeds", sweep_args.seeds, "Seed list or range, e.g. 1..30 or 1,4,9")->capture_default_str();
  sweep->add_option("--schemes", sweep_args.schemes, "Subset of flood,scribe")->capture_default_str();
  sweep->add_option("--link-delay-ms", sweep_args.link_delay_ms, "Delay per overlay hop")->capture_default_str();
  sweep->add_option("--send-gap-ms", sweep_args.send_gap_ms, "Serialization gap between copies")->capture_default_str();
  sweep->add_option("--out", sweep_args.out, "Output directory")->capture_default_str();
  sweep->add_option("--format", sweep_args.format, "Report format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  sweep->add_option("--jobs", sweep_args.jobs, "Worker threads (0 = hardware concurrency)");

  AnalyticsArgs analytics_args;
  auto* an = app.add_subcommand("analytics", "Print the link-probability table and write model distributions");
  an->set_help_flag("--help", "Print this help message and exit");
  an->add_option("--h", analytics_args.h, "Tree height")->capture_default_str();
  an->add_option("--k", analytics_args.k, "Alphabet size")->capture_default_str();
  an->add_option("--nodes", analytics_args.nodes, "Leaf counts for the table")->capture_default_str();
  an->add_option("--p", analytics_args.p, "Edge probabilities for random-tree hop distributions");
  an->add_option("--out", analytics_args.out, "Output directory")->capture_default_str();

  VerifyArgs verify_args;
  auto* verify = app.add_subcommand("verify", "Run the invariant suite");
  verify->add_flag("--inject-fault", verify_args.inject_fault, "Drop one routing entry to exercise failure reporting");
  verify->add_option("--seeds", verify_args.seeds, "Seeds per network size")->capture_default_str();

  NetworkArgs network_args;
  auto* network = app.add_subcommand("network", "Dump a seeded network's routing tables or a broadcast trace");
  network->add_option("--nodes", network_args.nodes, "Network size")->capture_default_str();
  network->add_option("--bits-per-digit", network_args.bits_per_digit)->capture_default_str();
  network->add_option("--key-bits", network_args.key_bits)->capture_default_str();
  network->add_option("--seed", network_args.seed)->capture_default_str();
  network->add_option("--trace", network_args.trace, "Emit the event trace of one broadcast instead")
      ->check(CLI::IsMember({"flood", "scribe"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*sweep && !sweep_config.empty()) apply_config_file(*sweep, sweep_config);
  } catch (const CLI::Error& e) {
    std::cerr << "error in " << sweep_config << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  }

  try {
    if (*sweep) return cmd_sweep(sweep_args);
    if (*an) return cmd_analytics(analytics_args);
    if (*verify) return cmd_verify(verify_args);
    if (*network) return cmd_network(network_args);
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IndexError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ContractViolation& e) {
    std::cerr << "invariant violated: " << e.what() << '\n';
    return kExitInvariant;
  }
  return 0;
}
