// Copyright (c) 2026 the dbftsim authors.
// Distributed under the MIT software license, see the accompanying
// file LICENSE.

#include "dbft/trace.hpp"

namespace dbft {

std::string action_name(TraceAction a) {
  switch (a) {
    case TraceAction::Send: return "SEND";
    case TraceAction::Deliver: return "DELIVER";
    case TraceAction::Drop: return "DROP";
    case TraceAction::Delay: return "DELAY";
    case TraceAction::Timer: return "TIMER";
    case TraceAction::StaleTimer: return "STALE-TIMER";
    case TraceAction::State: return "STATE";
    case TraceAction::Publish: return "PUBLISH";
    case TraceAction::Fork: return "FORK?";
    case TraceAction::Adv: return "ADV";
  }
  return "?";
}

TraceEvent& Trace::next(Tick time, const std::string& actor, TraceAction action,
                        const std::string& detail) {
  TraceEvent ev;
  ev.time = time;
  ev.seq = events_.size();
  ev.actor = actor;
  ev.action = action;
  ev.detail = detail;
  events_.push_back(std::move(ev));
  return events_.back();
}

uint64_t Trace::emit(Tick time, const std::string& actor, TraceAction action,
                     const std::string& detail) {
  return next(time, actor, action, detail).seq;
}

uint64_t Trace::emit_msg(Tick time, const std::string& actor, TraceAction action,
                         const std::string& detail, const Msg& msg,
                         std::vector<ActorId> dests) {
  TraceEvent& ev = next(time, actor, action, detail);
  ev.msg = msg;
  ev.dests = std::move(dests);
  return ev.seq;
}

uint64_t Trace::emit_publish(Tick time, const std::string& actor,
                             const std::string& detail, Certificate cert) {
  TraceEvent& ev = next(time, actor, TraceAction::Publish, detail);
  ev.cert = std::move(cert);
  return ev.seq;
}

std::string Trace::render_line(const TraceEvent& ev) {
  std::string out = std::to_string(ev.time);
  out.push_back('\t');
  out += std::to_string(ev.seq);
  out.push_back('\t');
  out += ev.actor;
  out.push_back('\t');
  out += action_name(ev.action);
  out.push_back('\t');
  out += ev.detail;
  return out;
}

std::string Trace::render() const {
  std::string out;
  for (const TraceEvent& ev : events_) {
    out += render_line(ev);
    out.push_back('\n');
  }
  return out;
}

}  // namespace dbft
