// Copyright (c) 2026 the dbftsim authors.
// Distributed under the MIT software license, see the accompanying
// file LICENSE.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "dbft/checker.hpp"
#include "dbft/explore.hpp"
#include "dbft/scenario.hpp"
#include "dbft/sim.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitFork = 2;
constexpr int kExitStuck = 3;

struct Overrides {
  std::optional<std::string> protocol;
  std::optional<uint64_t> seed;
  std::optional<uint64_t> t_star;
  std::optional<uint64_t> max_views;
  std::optional<uint64_t> max_ticks;
};

void add_overrides(CLI::App* cmd, Overrides& ov) {
  cmd->add_option("--protocol", ov.protocol,
                  "two-phase or three-phase (overrides the scenario)");
  cmd->add_option("--seed", ov.seed, "seed override");
  cmd->add_option("--t-star", ov.t_star, "base timeout unit override");
  cmd->add_option("--max-views", ov.max_views, "view budget override");
  cmd->add_option("--max-ticks", ov.max_ticks, "tick budget override");
}

bool apply_overrides(dbft::Scenario& sc, const Overrides& ov) {
  if (ov.protocol) {
    auto p = dbft::parse_protocol(*ov.protocol);
    if (!p) {
      std::cerr << "unknown protocol '" << *ov.protocol << "'\n";
      return false;
    }
    sc.config.protocol = *p;
  }
  if (ov.seed) sc.config.seed = *ov.seed;
  if (ov.t_star) sc.config.t_star = *ov.t_star;
  if (ov.max_views) sc.config.max_views = *ov.max_views;
  if (ov.max_ticks) sc.run.max_ticks = *ov.max_ticks;
  return true;
}

int run_scenario(const dbft::Scenario& sc, const std::string& trace_out,
                 bool print_trace) {
  dbft::Simulation sim(sc);
  sim.run();
  dbft::Verdict v = dbft::evaluate(sim);
  std::string verdict = dbft::render_verdict(v);
  if (!trace_out.empty()) {
    std::ofstream out(trace_out);
    if (!out) {
      std::cerr << "cannot write " << trace_out << "\n";
      return kExitUsage;
    }
    out << sim.trace().render() << verdict;
  }
  if (print_trace) std::cout << sim.trace().render();
  std::cout << verdict;
  if (v.forked) return kExitFork;
  if (v.liveness.kind != dbft::LivenessVerdict::Kind::Progressed) {
    return kExitStuck;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dbft consensus simulator"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string builtin_name;
  std::string trace_out;
  bool print_trace = false;
  bool list_builtins = false;
  Overrides ov;

  CLI::App* run = app.add_subcommand("run", "run a scenario file");
  run->add_option("scenario", scenario_path, "scenario file")->required();
  run->add_option("--trace-out", trace_out, "write trace + verdict to a file");
  run->add_flag("--print-trace", print_trace, "dump the trace to stdout");
  add_overrides(run, ov);

  CLI::App* builtin = app.add_subcommand("builtin", "run a built-in scenario");
  builtin->add_option("name", builtin_name, "honest | attack-f2 | attack-f1");
  builtin->add_flag("--list", list_builtins, "list built-in scenario names");
  builtin->add_option("--trace-out", trace_out, "write trace + verdict to a file");
  builtin->add_flag("--print-trace", print_trace, "dump the trace to stdout");
  add_overrides(builtin, ov);

  uint64_t runs = 1000;
  uint64_t explore_seed = 1;
  std::string counterexample_out = "counterexample.dbft";
  CLI::App* explore = app.add_subcommand("explore", "search random adversaries");
  explore->add_option("--runs", runs, "number of random scenarios");
  explore->add_option("--seed", explore_seed, "search seed");
  explore->add_option("--out", counterexample_out,
                      "file for the minimized counterexample");
  explore->add_option("--protocol", ov.protocol, "two-phase or three-phase");
  explore->add_option("--t-star", ov.t_star, "base timeout unit");
  explore->add_option("--max-views", ov.max_views, "view budget");
  explore->add_option("--max-ticks", ov.max_ticks, "tick budget per run");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (run->parsed()) {
    std::ifstream in(scenario_path);
    if (!in) {
      std::cerr << "cannot read " << scenario_path << "\n";
      return kExitUsage;
    }
    std::stringstream buf;
    buf << in.rdbuf();
    auto parsed = dbft::parse_scenario(buf.str());
    if (!parsed.ok()) {
      std::cerr << parsed.error->render(scenario_path) << "\n";
      return kExitUsage;
    }
    if (!apply_overrides(*parsed.scenario, ov)) return kExitUsage;
    return run_scenario(*parsed.scenario, trace_out, print_trace);
  }

  if (builtin->parsed()) {
    if (list_builtins) {
      for (const auto& name : dbft::builtin_names()) std::cout << name << "\n";
      return kExitOk;
    }
    if (builtin_name.empty()) {
      std::cerr << "builtin needs a name; try --list\n";
      return kExitUsage;
    }
    auto sc = dbft::builtin_scenario(builtin_name);
    if (!sc) {
      std::cerr << "unknown builtin '" << builtin_name << "'; try --list\n";
      return kExitUsage;
    }
    if (!apply_overrides(*sc, ov)) return kExitUsage;
    return run_scenario(*sc, trace_out, print_trace);
  }

  // explore
  dbft::Config base;
  if (ov.protocol) {
    auto p = dbft::parse_protocol(*ov.protocol);
    if (!p) {
      std::cerr << "unknown protocol '" << *ov.protocol << "'\n";
      return kExitUsage;
    }
    base.protocol = *p;
  }
  if (ov.t_star) base.t_star = *ov.t_star;
  if (ov.max_views) base.max_views = *ov.max_views;
  dbft::ExploreBudget budget;
  budget.runs = runs;
  if (ov.max_ticks) budget.max_ticks = *ov.max_ticks;
  auto res = dbft::explore(base, budget, explore_seed);
  std::cout << "explored = " << res.runs << "\n";
  std::cout << "forks = " << res.fork_runs.size() << "\n";
  if (!res.minimized) return kExitOk;
  std::cout << "first_fork_run = " << *res.first_fork << "\n";
  std::ofstream out(counterexample_out);
  if (out) {
    out << dbft::serialize_scenario(*res.minimized);
    std::cout << "counterexample = " << counterexample_out << "\n";
  }
  std::cout << dbft::render_verdict(*res.minimized_verdict);
  return kExitFork;
}
