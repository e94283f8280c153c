// Copyright (c) 2026 the dbftsim authors.
// Distributed under the MIT software license, see the accompanying
// file LICENSE.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dbft/netsim.hpp"
#include "dbft/replica.hpp"
#include "dbft/trace.hpp"
#include "dbft/types.hpp"

namespace dbft {

// What a controlled node does instead of (or on top of) the honest protocol.
enum class AdvAction {
  ActHonest,    // follow the protocol, overriding later directives
  Silence,      // process normally but emit nothing
  Equivocate,   // as speaker, send different proposals to different partitions
  Harvest,      // archive signatures seen for a chosen block
  ForgeLate,    // sign + rebroadcast the archived block after the fact
  AdoptStale,   // answer a stale proposal as if it were current
};

// What event triggers the directive.
enum class AdvWhen { Always, OnPropose, OnDeliver, OnPublish, OnHarvest };

struct Directive {
  uint32_t node = 0;
  AdvAction action = AdvAction::ActHonest;
  AdvWhen when = AdvWhen::Always;
  std::optional<uint64_t> view;   // restrict to the node's current view
  std::optional<MsgKind> kind;    // restrict to a delivered message kind
  bool stale_only = false;        // only fire on stale (height, view) deliveries
  std::string block_a;            // block tag parameter (primary)
  std::string block_b;            // equivocation twin
  std::vector<uint32_t> part_a;   // partition receiving block_a
  std::vector<uint32_t> part_b;   // partition receiving block_b
  std::string describe() const;
};

std::string action_token(AdvAction a);
std::string when_token(AdvWhen w);
std::optional<AdvAction> parse_action(std::string_view s);
std::optional<AdvWhen> parse_when(std::string_view s);

struct AdversaryPlan {
  std::vector<uint32_t> controlled;
  std::vector<Directive> directives;
  bool controls(uint32_t node) const;
};

// Drives the controlled nodes. Each controlled replica still runs the honest
// state machine; the adversary intercepts its deliveries and hooks, mutes its
// sends where a directive says so, and injects crafted messages. Everything
// it does shows up in the trace as ADV lines plus the ordinary SEND lines of
// the crafted traffic.
class Adversary {
 public:
  Adversary(const AdversaryPlan& plan, const Config& cfg, Network& net,
            Trace& trace);

  void attach(const std::vector<Replica*>& replicas);
  bool controls(uint32_t node) const { return plan_.controls(node); }
  void on_deliver(uint32_t node, const Msg& m);
  void on_timer(uint32_t node, uint64_t h, uint64_t v, Tick deadline);
  const AdversaryPlan& plan() const { return plan_; }
  const std::map<std::pair<uint64_t, std::string>, std::map<ActorId, Msg>>&
  archive() const {
    return archive_;
  }

 private:
  bool handle_propose(uint32_t node, uint64_t h, uint64_t v, const BlockId& b);
  void handle_publish(uint32_t node, uint64_t h, const BlockId& b);
  void handle_view_entry(uint32_t node, uint64_t h, uint64_t v);
  void equivocate(uint32_t node, const Directive& d, uint64_t h, uint64_t v);
  void adopt(uint32_t node, const Msg& prepare);
  void forge(uint32_t node, const std::string& tag);
  bool archive_add(const Msg& m);
  void inject(uint32_t node, const Msg& m);
  bool match_deliver(const Directive& d, const Replica& r, const Msg& m) const;
  bool is_stale(const Replica& r, const Msg& m) const;
  std::set<ActorId> others(uint32_t node) const;
  void adv_note(uint32_t node, const std::string& detail);

  AdversaryPlan plan_;
  const Config* cfg_;
  Network* net_;
  Trace* trace_;
  std::vector<Replica*> reps_;
  std::map<std::pair<uint64_t, std::string>, std::map<ActorId, Msg>> archive_;
  std::set<Msg> broadcast_done_;  // archived messages already put on the wire
};

}  // namespace dbft
