// Copyright (c) 2026 the dbftsim authors.
// Distributed under the MIT software license, see the accompanying
// file LICENSE.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "dbft/trace.hpp"
#include "dbft/types.hpp"

namespace dbft {

// Scripted fault applied at send time. An empty destination set matches any
// destination; unset fields match anything. The window bounds the send tick,
// inclusive on both ends. When several rules match one destination, the
// first installed wins.
struct FaultRule {
  enum class Action { Delay, Drop, Redirect };

  std::optional<MsgKind> kind;
  std::optional<ActorId> from;
  std::set<ActorId> to;
  std::optional<uint64_t> view;
  std::optional<std::string> block_tag;
  Tick window_from = 0;
  Tick window_to = ~Tick(0);

  Action action = Action::Delay;
  Tick delay = 1;                  // extra ticks on top of base latency
  std::set<ActorId> redirect_to;

  bool matches(const Msg& m, ActorId dest, Tick now) const;
  bool same_matcher(const FaultRule& o) const;
  std::string describe() const;
};

struct DeliverEv {
  Msg msg;
  ActorId to;
  uint64_t pending_id = 0;
};

struct TimerEv {
  uint32_t node = 0;
  uint64_t height = 0;
  uint64_t view = 0;   // view the timer guards
  Tick deadline = 0;   // armed duration, echoed into the trace
};

struct ClientEv {
  enum class Kind { Request, Fail, Retrans };
  uint32_t client = 0;
  Kind kind = Kind::Request;
  std::string payload;
};

struct Event {
  Tick time = 0;
  uint64_t seq = 0;
  std::variant<DeliverEv, TimerEv, ClientEv> body;
};

// Discrete-event network: a logical clock, an ordered event queue and the
// installed fault rules. Everything it does lands in the trace; identical
// inputs replay to identical queues.
class Network {
 public:
  Network(const Config& cfg, Trace& trace);

  // Installs a fault rule. Throws std::invalid_argument when the rule shares
  // a matcher with an installed rule but disagrees about dropping.
  void misbehave(const FaultRule& rule);

  // Validates, traces and routes a message. Malformed messages are rejected
  // with a visible trace line and never enter the queue. from_actor is the
  // emitting actor, which differs from m.sender for relayed messages.
  void send(const Msg& m, const std::set<ActorId>& dests,
            const std::string& from_actor);

  // One timer slot per node; arming replaces any armed timer.
  void set_timer(uint32_t node, uint64_t height, uint64_t view, Tick duration);
  void cancel_timer(uint32_t node);
  bool timer_armed(uint32_t node) const;

  void schedule_client(Tick at, const ClientEv& ev);

  // Pops the next event in (time, seq) order and advances the clock.
  std::optional<Event> pop();

  Tick now() const { return clock_; }
  bool net_faulty() const { return !rules_.empty(); }
  bool idle() const { return queue_.empty(); }
  size_t queued() const { return queue_.size(); }
  // Per-destination delivery obligations still in flight.
  size_t pending_messages() const;
  const std::vector<FaultRule>& rules() const { return rules_; }

 private:
  struct PendingEntry {
    Msg msg;
    std::multiset<ActorId> remaining;
  };

  uint64_t enqueue(Tick at, std::variant<DeliverEv, TimerEv, ClientEv> body);
  void queue_delivery(const Msg& m, ActorId dest, Tick at, uint64_t pending_id);
  // Redirected copies bypass rule matching so rewrites cannot loop.
  void send_plain(const Msg& m, const std::set<ActorId>& dests);

  const Config* cfg_;
  Trace* trace_;
  std::map<std::pair<Tick, uint64_t>, Event> queue_;
  std::map<uint64_t, PendingEntry> pending_;
  std::map<uint32_t, std::pair<Tick, uint64_t>> timer_keys_;
  std::vector<FaultRule> rules_;
  Tick clock_ = 0;
  uint64_t next_seq_ = 0;
  uint64_t next_pending_ = 0;
};

std::string render_dests(const std::set<ActorId>& dests);

}  // namespace dbft
