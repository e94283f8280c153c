// Copyright (c) 2026 the dbftsim authors.
// Distributed under the MIT software license, see the accompanying
// file LICENSE.

#include "dbft/netsim.hpp"

#include <stdexcept>

namespace dbft {

bool FaultRule::matches(const Msg& m, ActorId dest, Tick now) const {
  if (now < window_from || now > window_to) return false;
  if (kind && m.kind != *kind) return false;
  if (from && m.sender != *from) return false;
  if (!to.empty() && !to.count(dest)) return false;
  if (view && m.view.v != *view) return false;
  if (block_tag && (!m.block || m.block->tag != *block_tag)) return false;
  return true;
}

bool FaultRule::same_matcher(const FaultRule& o) const {
  return kind == o.kind && from == o.from && to == o.to && view == o.view &&
         block_tag == o.block_tag && window_from == o.window_from &&
         window_to == o.window_to;
}

static std::string join_actor_set(const std::set<ActorId>& xs) {
  std::string out;
  for (ActorId d : xs) {
    if (!out.empty()) out.push_back(',');
    out += d.label();
  }
  return out;
}

// Emits the same key=value tokens the scenario parser reads back.
std::string FaultRule::describe() const {
  std::string out;
  switch (action) {
    case Action::Delay: out = "act=delay delta=" + std::to_string(delay); break;
    case Action::Drop: out = "act=drop"; break;
    case Action::Redirect:
      out = "act=redirect redirect=" + join_actor_set(redirect_to);
      break;
  }
  if (kind) out += " kind=" + kind_name(*kind);
  if (from) out += " from=" + from->label();
  if (!to.empty()) out += " to=" + join_actor_set(to);
  if (view) out += " view=" + std::to_string(*view);
  if (block_tag) out += " block=" + *block_tag;
  if (window_from != 0 || window_to != ~Tick(0)) {
    out += " window=" + std::to_string(window_from) + "..";
    if (window_to != ~Tick(0)) out += std::to_string(window_to);
  }
  return out;
}

std::string render_dests(const std::set<ActorId>& dests) {
  std::string out = "[";
  bool first = true;
  for (ActorId d : dests) {
    if (!first) out.push_back(',');
    out += d.label();
    first = false;
  }
  out += "]";
  return out;
}

Network::Network(const Config& cfg, Trace& trace) : cfg_(&cfg), trace_(&trace) {}

void Network::misbehave(const FaultRule& rule) {
  for (const FaultRule& r : rules_) {
    if (!r.same_matcher(rule)) continue;
    bool drops = rule.action == FaultRule::Action::Drop;
    bool dropped = r.action == FaultRule::Action::Drop;
    if (drops != dropped) {
      throw std::invalid_argument(
          "contradictory fault rules share a matcher: " + r.describe() +
          " vs " + rule.describe());
    }
  }
  rules_.push_back(rule);
}

uint64_t Network::enqueue(Tick at,
                          std::variant<DeliverEv, TimerEv, ClientEv> body) {
  Event ev;
  ev.time = at;
  ev.seq = next_seq_++;
  ev.body = std::move(body);
  queue_.emplace(std::make_pair(at, ev.seq), ev);
  return ev.seq;
}

void Network::queue_delivery(const Msg& m, ActorId dest, Tick at,
                             uint64_t pending_id) {
  pending_[pending_id].remaining.insert(dest);
  enqueue(at, DeliverEv{m, dest, pending_id});
}

void Network::send_plain(const Msg& m, const std::set<ActorId>& dests) {
  if (dests.empty()) return;
  uint64_t pid = next_pending_++;
  pending_[pid].msg = m;
  trace_->emit_msg(clock_, "net", TraceAction::Send,
                   describe(m) + " to=" + render_dests(dests) + " redirected",
                   m, {dests.begin(), dests.end()});
  for (ActorId d : dests) queue_delivery(m, d, clock_ + kBaseLatency, pid);
}

void Network::send(const Msg& m, const std::set<ActorId>& dests,
                   const std::string& from_actor) {
  if (!msg_verifies(m)) {
    trace_->emit_msg(clock_, "net", TraceAction::Drop,
                     "invalid-message " + describe(m) + " to=" + render_dests(dests),
                     m, {dests.begin(), dests.end()});
    return;
  }
  trace_->emit_msg(clock_, from_actor, TraceAction::Send,
                   describe(m) + " to=" + render_dests(dests), m,
                   {dests.begin(), dests.end()});
  uint64_t pid = next_pending_++;
  pending_[pid].msg = m;
  for (ActorId d : dests) {
    bool matched = false;
    // first installed rule that matches a destination decides its fate
    for (size_t i = 0; i < rules_.size() && !matched; ++i) {
      const FaultRule& r = rules_[i];
      if (!r.matches(m, d, clock_)) continue;
      matched = true;
      switch (r.action) {
        case FaultRule::Action::Drop:
          trace_->emit_msg(clock_, "net", TraceAction::Drop,
                           describe(m) + " to=" + d.label() + " rule=" +
                               std::to_string(i),
                           m, {d});
          break;
        case FaultRule::Action::Delay: {
          Tick at = clock_ + kBaseLatency + r.delay;
          trace_->emit_msg(clock_, "net", TraceAction::Delay,
                           describe(m) + " to=" + d.label() + " delta=" +
                               std::to_string(r.delay) + " deliver=" +
                               std::to_string(at),
                           m, {d});
          queue_delivery(m, d, at, pid);
          break;
        }
        case FaultRule::Action::Redirect:
          trace_->emit_msg(clock_, "net", TraceAction::Drop,
                           describe(m) + " to=" + d.label() + " rule=" +
                               std::to_string(i) + " redirected",
                           m, {d});
          send_plain(m, r.redirect_to);
          break;
      }
    }
    if (!matched) queue_delivery(m, d, clock_ + kBaseLatency, pid);
  }
  if (pending_[pid].remaining.empty()) pending_.erase(pid);
}

void Network::set_timer(uint32_t node, uint64_t height, uint64_t view,
                        Tick duration) {
  cancel_timer(node);
  Tick at = clock_ + duration;
  uint64_t seq = enqueue(at, TimerEv{node, height, view, duration});
  timer_keys_[node] = {at, seq};
}

void Network::cancel_timer(uint32_t node) {
  auto it = timer_keys_.find(node);
  if (it == timer_keys_.end()) return;
  queue_.erase(it->second);
  timer_keys_.erase(it);
}

bool Network::timer_armed(uint32_t node) const {
  return timer_keys_.count(node) != 0;
}

void Network::schedule_client(Tick at, const ClientEv& ev) {
  enqueue(at < clock_ ? clock_ : at, ev);
}

std::optional<Event> Network::pop() {
  if (queue_.empty()) return std::nullopt;
  auto it = queue_.begin();
  Event ev = it->second;
  queue_.erase(it);
  clock_ = ev.time;  // keys are ordered, so the clock never runs backwards
  if (const auto* del = std::get_if<DeliverEv>(&ev.body)) {
    auto p = pending_.find(del->pending_id);
    if (p != pending_.end()) {
      auto r = p->second.remaining.find(del->to);
      if (r != p->second.remaining.end()) p->second.remaining.erase(r);
      if (p->second.remaining.empty()) pending_.erase(p);
    }
  } else if (const auto* t = std::get_if<TimerEv>(&ev.body)) {
    auto k = timer_keys_.find(t->node);
    if (k != timer_keys_.end() && k->second == std::make_pair(ev.time, ev.seq)) {
      timer_keys_.erase(k);
    }
  }
  return ev;
}

size_t Network::pending_messages() const {
  size_t total = 0;
  for (const auto& [id, entry] : pending_) total += entry.remaining.size();
  return total;
}

}  // namespace dbft
