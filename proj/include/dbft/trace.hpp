// Copyright (c) 2026 the dbftsim authors.
// Distributed under the MIT software license, see the accompanying
// file LICENSE.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dbft/types.hpp"

namespace dbft {

enum class TraceAction {
  Send,
  Deliver,
  Drop,
  Delay,
  Timer,
  StaleTimer,
  State,
  Publish,
  Fork,
  Adv,
};

std::string action_name(TraceAction a);

// One trace line. The rendered form is tab-separated:
//   time <TAB> seq <TAB> actor <TAB> action <TAB> detail
// Structured payloads ride along so the checker never has to parse text.
struct TraceEvent {
  Tick time = 0;
  uint64_t seq = 0;
  std::string actor;
  TraceAction action = TraceAction::State;
  std::string detail;
  std::optional<Msg> msg;           // Send / Deliver / Drop / Delay
  std::vector<ActorId> dests;       // Send
  std::optional<Certificate> cert;  // Publish
};

class Trace {
 public:
  uint64_t emit(Tick time, const std::string& actor, TraceAction action,
                const std::string& detail);
  uint64_t emit_msg(Tick time, const std::string& actor, TraceAction action,
                    const std::string& detail, const Msg& msg,
                    std::vector<ActorId> dests = {});
  uint64_t emit_publish(Tick time, const std::string& actor,
                        const std::string& detail, Certificate cert);

  const std::vector<TraceEvent>& events() const { return events_; }
  size_t size() const { return events_.size(); }

  static std::string render_line(const TraceEvent& ev);
  std::string render() const;

 private:
  TraceEvent& next(Tick time, const std::string& actor, TraceAction action,
                   const std::string& detail);
  std::vector<TraceEvent> events_;
};

}  // namespace dbft
