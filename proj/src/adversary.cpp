// Copyright (c) 2026 the dbftsim authors.
// Distributed under the MIT software license, see the accompanying
// file LICENSE.

#include "dbft/adversary.hpp"

#include <algorithm>

namespace dbft {

std::string action_token(AdvAction a) {
  switch (a) {
    case AdvAction::ActHonest: return "honest";
    case AdvAction::Silence: return "silence";
    case AdvAction::Equivocate: return "equivocate";
    case AdvAction::Harvest: return "harvest";
    case AdvAction::ForgeLate: return "forge";
    case AdvAction::AdoptStale: return "adopt";
  }
  return "?";
}

std::string when_token(AdvWhen w) {
  switch (w) {
    case AdvWhen::Always: return "always";
    case AdvWhen::OnPropose: return "propose";
    case AdvWhen::OnDeliver: return "deliver";
    case AdvWhen::OnPublish: return "publish";
    case AdvWhen::OnHarvest: return "harvest";
  }
  return "?";
}

std::optional<AdvAction> parse_action(std::string_view s) {
  if (s == "honest") return AdvAction::ActHonest;
  if (s == "silence") return AdvAction::Silence;
  if (s == "equivocate") return AdvAction::Equivocate;
  if (s == "harvest") return AdvAction::Harvest;
  if (s == "forge") return AdvAction::ForgeLate;
  if (s == "adopt") return AdvAction::AdoptStale;
  return std::nullopt;
}

std::optional<AdvWhen> parse_when(std::string_view s) {
  if (s == "always") return AdvWhen::Always;
  if (s == "propose") return AdvWhen::OnPropose;
  if (s == "deliver") return AdvWhen::OnDeliver;
  if (s == "publish") return AdvWhen::OnPublish;
  if (s == "harvest") return AdvWhen::OnHarvest;
  return std::nullopt;
}

static std::string join_u32(const std::vector<uint32_t>& xs) {
  std::string out;
  for (uint32_t x : xs) {
    if (!out.empty()) out += ',';
    out += std::to_string(x);
  }
  return out;
}

std::string Directive::describe() const {
  std::string out = "node=" + std::to_string(node) + " act=" + action_token(action) +
                    " when=" + when_token(when);
  if (view) out += " view=" + std::to_string(*view);
  if (kind) out += " kind=" + kind_name(*kind);
  if (stale_only) out += " stale=1";
  if (action == AdvAction::Equivocate) {
    out += " blockA=" + block_a + " partA=" + join_u32(part_a) +
           " blockB=" + block_b + " partB=" + join_u32(part_b);
  } else if (!block_a.empty()) {
    out += " block=" + block_a;
  }
  return out;
}

bool AdversaryPlan::controls(uint32_t node) const {
  return std::find(controlled.begin(), controlled.end(), node) != controlled.end();
}

Adversary::Adversary(const AdversaryPlan& plan, const Config& cfg, Network& net,
                     Trace& trace)
    : plan_(plan), cfg_(&cfg), net_(&net), trace_(&trace) {}

void Adversary::attach(const std::vector<Replica*>& replicas) {
  reps_ = replicas;
  for (uint32_t c : plan_.controlled) {
    if (c >= reps_.size()) continue;
    Replica* r = reps_[c];
    r->mark_faulty();
    r->propose_hook = [this, c](uint64_t h, uint64_t v, const BlockId& b) {
      return handle_propose(c, h, v, b);
    };
    r->publish_hook = [this, c](uint64_t h, const BlockId& b) {
      handle_publish(c, h, b);
    };
    r->view_entry_hook = [this, c](uint64_t h, uint64_t v) {
      handle_view_entry(c, h, v);
    };
  }
}

std::set<ActorId> Adversary::others(uint32_t node) const {
  std::set<ActorId> out;
  for (uint32_t i = 0; i < cfg_->n; ++i) {
    if (i != node) out.insert(ActorId::delegate(i));
  }
  return out;
}

void Adversary::adv_note(uint32_t node, const std::string& detail) {
  trace_->emit(net_->now(), ActorId::delegate(node).label(), TraceAction::Adv,
               detail);
}

bool Adversary::archive_add(const Msg& m) {
  if (!m.block) return false;
  auto& pool = archive_[{m.view.h, m.block->tag}];
  return pool.emplace(m.sig.signer, m).second;
}

void Adversary::inject(uint32_t node, const Msg& m) {
  Replica* r = reps_[node];
  r->set_muted(true);
  r->absorb(m);
  r->set_muted(false);
}

bool Adversary::is_stale(const Replica& r, const Msg& m) const {
  const ReplicaState& st = r.state();
  return m.view.h < st.height || (m.view.h == st.height && m.view.v < st.view);
}

bool Adversary::match_deliver(const Directive& d, const Replica& r,
                              const Msg& m) const {
  if (d.kind && m.kind != *d.kind) return false;
  if (d.view && r.state().view != *d.view) return false;
  if (d.stale_only && !is_stale(r, m)) return false;
  return true;
}

void Adversary::on_deliver(uint32_t node, const Msg& m) {
  Replica* r = reps_[node];
  bool mute = false;
  bool skip_honest = false;
  for (const Directive& d : plan_.directives) {
    if (d.node != node) continue;
    if (d.action == AdvAction::ActHonest &&
        (d.when == AdvWhen::Always ||
         (d.when == AdvWhen::OnDeliver && match_deliver(d, *r, m)))) {
      mute = false;
      skip_honest = false;
      break;
    }
    switch (d.action) {
      case AdvAction::Harvest: {
        if ((m.kind == MsgKind::Prepare || m.kind == MsgKind::Response) &&
            m.block && m.block->tag == d.block_a && archive_add(m)) {
          adv_note(node, "harvest " + describe(m));
          for (const Directive& d2 : plan_.directives) {
            if (d2.node == node && d2.action == AdvAction::ForgeLate &&
                d2.when == AdvWhen::OnHarvest && d2.block_a == d.block_a) {
              forge(node, d2.block_a);
            }
          }
        }
        break;
      }
      case AdvAction::Silence:
        if (d.when == AdvWhen::OnDeliver && match_deliver(d, *r, m)) mute = true;
        break;
      case AdvAction::AdoptStale:
        if (d.when == AdvWhen::OnDeliver && match_deliver(d, *r, m)) {
          adopt(node, m);
          skip_honest = true;
        }
        break;
      case AdvAction::ForgeLate:
        if (d.when == AdvWhen::OnDeliver && match_deliver(d, *r, m)) {
          forge(node, d.block_a);
        }
        break;
      default:
        break;
    }
  }
  if (skip_honest) return;
  if (mute) {
    r->set_muted(true);
    r->on_deliver(m);
    r->set_muted(false);
  } else {
    r->on_deliver(m);
  }
}

void Adversary::on_timer(uint32_t node, uint64_t h, uint64_t v, Tick deadline) {
  reps_[node]->on_timer(h, v, deadline);
}

bool Adversary::handle_propose(uint32_t node, uint64_t h, uint64_t v,
                               const BlockId& b) {
  (void)b;
  for (const Directive& d : plan_.directives) {
    if (d.node != node || d.when != AdvWhen::OnPropose) continue;
    if (d.view && *d.view != v) continue;
    if (d.action == AdvAction::Equivocate) {
      equivocate(node, d, h, v);
      return false;
    }
    if (d.action == AdvAction::Silence) {
      adv_note(node, "silence propose h=" + std::to_string(h) +
                         " v=" + std::to_string(v));
      return false;
    }
  }
  return true;
}

void Adversary::handle_publish(uint32_t node, uint64_t h, const BlockId& b) {
  (void)h;
  (void)b;
  for (const Directive& d : plan_.directives) {
    if (d.node != node || d.action != AdvAction::ForgeLate ||
        d.when != AdvWhen::OnPublish) {
      continue;
    }
    if (d.view && reps_[node]->state().view != *d.view) continue;
    forge(node, d.block_a);
  }
}

void Adversary::handle_view_entry(uint32_t node, uint64_t h, uint64_t v) {
  for (const Directive& d : plan_.directives) {
    if (d.node != node || d.action != AdvAction::Equivocate) continue;
    if (d.view && *d.view == v &&
        select_speaker(h, v, cfg_->n) != node) {
      adv_note(node, "skip equivocate v=" + std::to_string(v) +
                         " (not speaker)");
    }
  }
}

void Adversary::equivocate(uint32_t node, const Directive& d, uint64_t h,
                           uint64_t v) {
  ActorId me = ActorId::delegate(node);
  Msg prep_a = make_signed(MsgKind::Prepare, {v, h}, BlockId{h, d.block_a}, me,
                           net_->now());
  Msg prep_b = make_signed(MsgKind::Prepare, {v, h}, BlockId{h, d.block_b}, me,
                           net_->now());
  adv_note(node, "equivocate h=" + std::to_string(h) + " v=" + std::to_string(v) +
                     " blockA=" + d.block_a + " to=[" + join_u32(d.part_a) +
                     "] blockB=" + d.block_b + " to=[" + join_u32(d.part_b) + "]");
  std::set<ActorId> dests_a, dests_b;
  for (uint32_t i : d.part_a) dests_a.insert(ActorId::delegate(i));
  for (uint32_t i : d.part_b) dests_b.insert(ActorId::delegate(i));
  net_->send(prep_a, dests_a, me.label());
  net_->send(prep_b, dests_b, me.label());
  archive_add(prep_a);
  archive_add(prep_b);
  broadcast_done_.insert(prep_a);
  broadcast_done_.insert(prep_b);
  inject(node, prep_a);
}

void Adversary::adopt(uint32_t node, const Msg& prep) {
  if (prep.kind != MsgKind::Prepare || !prep.block) return;
  ActorId me = ActorId::delegate(node);
  adv_note(node, "adopt-stale " + describe(prep));
  archive_add(prep);
  auto& pool = archive_[{prep.view.h, prep.block->tag}];
  if (!pool.count(me)) {
    // Answer as if the proposal were current: the response keeps the
    // original height and view of the stale message.
    Msg own = make_signed(MsgKind::Response, prep.view, prep.block, me,
                          net_->now());
    net_->send(own, others(node), me.label());
    archive_add(own);
    broadcast_done_.insert(own);
    inject(node, own);
  }
  inject(node, prep);
}

void Adversary::forge(uint32_t node, const std::string& tag) {
  Replica* r = reps_[node];
  uint64_t h = r->state().height;
  for (const auto& [key, pool] : archive_) {
    if (key.second == tag) {
      h = key.first;
      break;
    }
  }
  auto& pool = archive_[{h, tag}];
  ActorId me = ActorId::delegate(node);
  if (!pool.count(me)) {
    // Sign the archived block now, bound to whatever view the node is in.
    uint64_t v = r->state().view;
    Msg own = make_signed(MsgKind::Response, {v, h}, BlockId{h, tag}, me,
                          net_->now());
    adv_note(node, "forge-response " + describe(own));
    net_->send(own, others(node), me.label());
    archive_add(own);
    broadcast_done_.insert(own);
    inject(node, own);
  }
  for (const auto& [signer, msg] : pool) {
    if (broadcast_done_.insert(msg).second) {
      adv_note(node, "rebroadcast " + describe(msg));
      net_->send(msg, others(node), me.label());
    }
    inject(node, msg);
  }
  adv_note(node, "archive block=" + tag + " h=" + std::to_string(h) +
                     " members=[" + join_labels([&] {
                       std::vector<ActorId> s;
                       for (const auto& [signer, msg] : pool) s.push_back(signer);
                       return s;
                     }()) + "]");
}

}  // namespace dbft
