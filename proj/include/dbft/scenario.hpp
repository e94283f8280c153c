// Copyright (c) 2026 the dbftsim authors.
// Distributed under the MIT software license, see the accompanying
// file LICENSE.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dbft/adversary.hpp"
#include "dbft/netsim.hpp"
#include "dbft/types.hpp"

namespace dbft {

// Scripted client activity: timed requests, plus failure-suspicion points
// after which a client retransmits until answered.
struct ClientScript {
  struct Request {
    uint32_t client = 0;
    Tick at = 0;
    std::string payload;
  };
  struct Fail {
    uint32_t client = 0;
    Tick at = 0;
  };
  uint32_t count = 0;
  std::vector<Request> requests;
  std::vector<Fail> fails;
};

struct RunSpec {
  uint64_t heights = 1;     // stop once every node published this many
  Tick max_ticks = 5000;    // hard wall-clock budget
};

// Everything one run needs: protocol parameters, the drive script, the
// adversary plan and the network fault rules.
struct Scenario {
  Config config;
  RunSpec run;
  ClientScript clients;
  AdversaryPlan plan;
  std::vector<FaultRule> rules;
};

struct ParseError {
  size_t line = 0;  // 1-based
  size_t col = 0;   // 1-based
  std::string message;
  std::string render(const std::string& file = "") const;
};

struct ParseResult {
  std::optional<Scenario> scenario;
  std::optional<ParseError> error;
  bool ok() const { return scenario.has_value(); }
};

// Line-oriented "section.key = value" format; '#' starts a comment.
ParseResult parse_scenario(std::string_view text);
std::string serialize_scenario(const Scenario& sc);

std::optional<Scenario> builtin_scenario(std::string_view name);
std::vector<std::string> builtin_names();

}  // namespace dbft
