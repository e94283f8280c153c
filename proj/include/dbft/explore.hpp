// Copyright (c) 2026 the dbftsim authors.
// Distributed under the MIT software license, see the accompanying
// file LICENSE.

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dbft/checker.hpp"
#include "dbft/scenario.hpp"

namespace dbft {

struct ExploreBudget {
  uint64_t runs = 1000;
  Tick max_ticks = 2000;
};

struct ExploreResult {
  uint64_t runs = 0;
  std::vector<uint64_t> fork_runs;       // run indices that forked
  std::optional<uint64_t> first_fork;    // first of those
  std::optional<Scenario> original;      // the scenario of the first fork
  std::optional<Scenario> minimized;     // greedily shrunk counterexample
  std::optional<Verdict> minimized_verdict;
};

// Draws a scenario from a few adversarial templates plus noise. Same
// (base, seed, run_index) always yields the same scenario.
Scenario random_scenario(const Config& base, uint64_t seed, uint64_t run_index,
                         Tick max_ticks);

// Runs the scenario to completion and evaluates it.
Verdict run_and_evaluate(const Scenario& sc);

// Drops directives, rules and idle controlled nodes while the fork persists.
Scenario minimize_counterexample(const Scenario& sc);

// Verdict equivalence for replays: same safety outcome, and for forks the
// same height, blocks and signer sets.
bool same_outcome(const Verdict& a, const Verdict& b);

ExploreResult explore(const Config& base, const ExploreBudget& budget,
                      uint64_t seed);

}  // namespace dbft
