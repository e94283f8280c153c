// Copyright (c) 2026 the dbftsim authors.
// Distributed under the MIT software license, see the accompanying
// file LICENSE.

#include "dbft/replica.hpp"

#include <algorithm>

namespace dbft {

std::string phase_name(Phase p) {
  switch (p) {
    case Phase::Idle: return "idle";
    case Phase::Prepared: return "prepared";
    case Phase::Responded: return "responded";
    case Phase::Committed: return "committed";
    case Phase::Published: return "published";
  }
  return "?";
}

Replica::Replica(uint32_t id, const Config& cfg, Network& net, Trace& trace,
                 uint64_t heights_target)
    : cfg_(&cfg), net_(&net), trace_(&trace), heights_target_(heights_target) {
  st_.id = id;
}

PoolKey Replica::response_key(uint64_t h, uint64_t v, const std::string& tag) const {
  // Two-phase counting ignores the view, so the key collapses it.
  return PoolKey{h, two_phase() ? 0 : v, tag};
}

void Replica::note_state() {
  trace_->emit(net_->now(), label(), TraceAction::State,
               "node=" + std::to_string(st_.id) + " h=" + std::to_string(st_.height) +
                   " v=" + std::to_string(st_.view) + " phase=" + phase_name(st_.phase) +
                   " lock=" + (st_.commit_lock ? st_.commit_lock->tag : std::string("-")));
}

void Replica::ignore(const Msg& m, const std::string& reason) {
  trace_->emit(net_->now(), label(), TraceAction::Drop,
               "ignored " + reason + " " + describe(m));
}

void Replica::send(const Msg& m, const std::set<ActorId>& dests) {
  if (muted_) {
    trace_->emit(net_->now(), label(), TraceAction::Adv,
                 "silence " + describe(m) + " to=" + render_dests(dests));
    return;
  }
  net_->send(m, dests, label());
}

void Replica::send_to_delegates(const Msg& m) {
  std::set<ActorId> dests;
  for (uint32_t i = 0; i < cfg_->n; ++i) {
    if (i != st_.id) dests.insert(ActorId::delegate(i));
  }
  send(m, dests);
}

void Replica::arm_timer() {
  net_->set_timer(st_.id, st_.height, st_.view, view_deadline(st_.view, cfg_->t_star));
}

void Replica::start(uint64_t height) {
  st_.height = height;
  st_.view = 0;
  vc_target_ = 0;
  timed_out_ = false;
  if (st_.ledger.size() >= heights_target_) {
    note_state();
    return;
  }
  st_.phase = Phase::Idle;
  note_state();
  if (is_speaker()) {
    propose();
  } else {
    arm_timer();
  }
}

void Replica::propose() {
  BlockId block{st_.height, st_.commit_lock ? st_.commit_lock->tag
                                            : honest_tag(st_.height, st_.view)};
  if (propose_hook && !propose_hook(st_.height, st_.view, block)) return;
  Msg prep = make_signed(MsgKind::Prepare, {st_.view, st_.height}, block, self(),
                         net_->now());
  st_.phase = Phase::Prepared;
  send_to_delegates(prep);
  note_state();
  pool_response(prep);  // the proposal doubles as the speaker's self-signature
}

void Replica::respond_to(const Msg& prep) {
  Msg resp = make_signed(MsgKind::Response, prep.view, prep.block, self(),
                         net_->now());
  st_.phase = Phase::Responded;
  send_to_delegates(resp);
  note_state();
  pool_response(prep);
  pool_response(resp);
}

void Replica::on_deliver(const Msg& m) {
  if (!msg_verifies(m)) {
    ignore(m, "bad-signature");
    return;
  }
  switch (m.kind) {
    case MsgKind::Request: on_request(m); break;
    case MsgKind::Reply: ignore(m, "reply-to-replica"); break;
    case MsgKind::Prepare: on_prepare(m); break;
    case MsgKind::Response: on_response(m); break;
    case MsgKind::Commit: on_commit(m); break;
    case MsgKind::ViewChange: on_viewchange(m); break;
  }
}

void Replica::on_request(const Msg& m) {
  if (!m.sender.is_client()) {
    ignore(m, "request-not-from-client");
    return;
  }
  uint32_t c = m.sender.index();
  auto seen = request_seen_.find(c);
  if (seen != request_seen_.end()) {
    if (m.timestamp < seen->second) {
      ignore(m, "stale-request");
      return;
    }
    if (m.timestamp == seen->second) {
      auto cached = reply_cache_.find(c);
      if (cached != reply_cache_.end()) {
        send(cached->second, {m.sender});  // replay the reply, no re-execution
      } else {
        ignore(m, "duplicate-request");
      }
      return;
    }
  }
  request_seen_[c] = m.timestamp;
  request_pending_[c] = m.timestamp;
}

void Replica::on_prepare(const Msg& m) {
  if (!m.block) { ignore(m, "missing-block"); return; }
  if (m.view.h > st_.height) { ignore(m, "future-height"); return; }
  if (m.view.h < st_.height) { ignore(m, "stale-height"); return; }
  if (timed_out_ && m.view.v == st_.view) { ignore(m, "view-abandoned"); return; }
  if (m.view.v < st_.view) { ignore(m, "stale-view"); return; }
  if (m.view.v > st_.view) { ignore(m, "future-view"); return; }
  if (m.sender != ActorId::delegate(speaker_at(m.view.v))) {
    ignore(m, "wrong-speaker");
    return;
  }
  if (m.block->height != m.view.h) { ignore(m, "malformed-block"); return; }
  auto acc = st_.accepted.find({m.view.h, m.view.v});
  if (acc != st_.accepted.end()) {
    ignore(m, acc->second == *m.block ? "duplicate-prepare" : "second-prepare");
    return;
  }
  if (!two_phase() && st_.commit_lock && conflicts(*st_.commit_lock, *m.block)) {
    ignore(m, "lock-refuse");
    return;
  }
  st_.accepted[{m.view.h, m.view.v}] = *m.block;
  respond_to(m);
}

void Replica::on_response(const Msg& m) {
  if (!m.block) { ignore(m, "missing-block"); return; }
  if (m.view.h > st_.height) { ignore(m, "future-height"); return; }
  if (two_phase()) {
    // Responses count across views and stay relevant after publication, so
    // anything at or below the current height is pooled.
    if (timed_out_ && m.view.h == st_.height && m.view.v == st_.view) {
      ignore(m, "view-abandoned");
      return;
    }
    pool_response(m);
    return;
  }
  if (m.view.h < st_.height) { ignore(m, "stale-height"); return; }
  if (timed_out_ && m.view.v == st_.view) { ignore(m, "view-abandoned"); return; }
  if (m.view.v < st_.view) { ignore(m, "stale-view"); return; }
  if (m.view.v > st_.view) { ignore(m, "future-view"); return; }
  pool_response(m);
}

void Replica::on_commit(const Msg& m) {
  if (two_phase()) { ignore(m, "commit-in-two-phase"); return; }
  if (!m.block) { ignore(m, "missing-block"); return; }
  if (m.view.h > st_.height) { ignore(m, "future-height"); return; }
  if (m.view.h < st_.height) { ignore(m, "stale-height"); return; }
  if (m.view.v < st_.view) { ignore(m, "stale-view"); return; }
  if (m.view.v > st_.view) { ignore(m, "future-view"); return; }
  pool_commit(m);
}

void Replica::on_viewchange(const Msg& m) {
  if (m.view.h != st_.height) {
    ignore(m, m.view.h > st_.height ? "future-height" : "stale-height");
    return;
  }
  uint64_t target = m.view.v;
  if (target <= st_.view) { ignore(m, "stale-view"); return; }
  auto& pool = st_.viewchanges[{m.view.h, target}];
  if (!pool.emplace(m.sig.signer, m).second) return;  // same signer counts once
  if (pool.size() >= cfg_->quorum()) enter_view(target);
}

void Replica::enter_view(uint64_t v) {
  st_.view = v;
  st_.phase = Phase::Idle;
  timed_out_ = false;
  if (!two_phase()) {
    // Response pools of abandoned views stop counting; commit pools survive.
    for (auto it = st_.responses.begin(); it != st_.responses.end();) {
      if (it->first.h == st_.height && it->first.v < v) {
        it = st_.responses.erase(it);
      } else {
        ++it;
      }
    }
  }
  note_state();
  if (view_entry_hook) view_entry_hook(st_.height, v);
  if (speaker_at(v) == st_.id) {
    propose();
  } else {
    arm_timer();
  }
}

void Replica::on_timer(uint64_t height, uint64_t guard_view, Tick deadline) {
  std::string detail = "node=" + std::to_string(st_.id) + " h=" +
                       std::to_string(height) + " v=" + std::to_string(guard_view) +
                       " deadline=" + std::to_string(deadline);
  bool live = height == st_.height && guard_view == st_.view &&
              st_.ledger.size() == height && st_.phase != Phase::Published;
  if (!live) {
    trace_->emit(net_->now(), label(), TraceAction::StaleTimer, detail);
    return;
  }
  trace_->emit(net_->now(), label(), TraceAction::Timer, detail);
  uint64_t target = std::max(st_.view + 1, vc_target_ + 1);
  vc_target_ = target;
  timed_out_ = true;
  Msg vc = make_signed(MsgKind::ViewChange, {target, st_.height}, std::nullopt,
                       self(), net_->now());
  send_to_delegates(vc);
  // the next deadline doubles for every unanswered escalation
  net_->set_timer(st_.id, st_.height, st_.view, view_deadline(target, cfg_->t_star));
  auto& pool = st_.viewchanges[{st_.height, target}];
  pool.emplace(self(), vc);
  if (pool.size() >= cfg_->quorum()) enter_view(target);
}

void Replica::absorb(const Msg& m) {
  if (!msg_verifies(m)) return;
  if ((m.kind == MsgKind::Prepare || m.kind == MsgKind::Response) && m.block) {
    pool_response(m);
  } else if (m.kind == MsgKind::Commit && m.block) {
    pool_commit(m);
  }
}

void Replica::pool_response(const Msg& m) {
  PoolKey key = response_key(m.view.h, m.view.v, m.block->tag);
  auto& pool = st_.responses[key];
  if (!pool.emplace(m.sig.signer, m).second) return;
  if (pool.size() < cfg_->quorum()) return;
  BlockId block{key.h, key.tag};
  if (two_phase()) {
    if (key.h == st_.height && !published(key.h)) {
      publish(block, MsgKind::Response, key);
    } else if (published(key.h) && st_.ledger[key.h].tag != key.tag) {
      note_fork(key.h, block, st_.ledger[key.h]);
    }
    return;
  }
  maybe_commit(key);
}

void Replica::maybe_commit(const PoolKey& key) {
  if (key.h != st_.height || published(key.h)) return;
  if (key.v != st_.view) return;
  if (committed_keys_.count(key)) return;
  if (st_.commit_lock && st_.commit_lock->tag != key.tag) {
    trace_->emit(net_->now(), label(), TraceAction::Drop,
                 "ignored response-quorum conflicts lock b=" + key.tag +
                     " lock=" + st_.commit_lock->tag);
    return;
  }
  committed_keys_.insert(key);
  st_.commit_lock = BlockId{key.h, key.tag};
  Msg c = make_signed(MsgKind::Commit, {key.v, key.h}, BlockId{key.h, key.tag},
                      self(), net_->now());
  st_.phase = Phase::Committed;
  send_to_delegates(c);
  note_state();
  pool_commit(c);
}

void Replica::pool_commit(const Msg& m) {
  PoolKey key{m.view.h, m.view.v, m.block->tag};
  auto& pool = st_.commits[key];
  if (!pool.emplace(m.sig.signer, m).second) return;
  if (pool.size() < cfg_->quorum()) return;
  BlockId block{key.h, key.tag};
  if (key.h == st_.height && !published(key.h)) {
    publish(block, MsgKind::Commit, key);
  } else if (published(key.h) && st_.ledger[key.h].tag != key.tag) {
    note_fork(key.h, block, st_.ledger[key.h]);
  }
}

Certificate Replica::cert_from(const PoolKey& key, MsgKind kind,
                               const std::map<ActorId, Msg>& pool) const {
  Certificate cert;
  cert.height = key.h;
  cert.block = BlockId{key.h, key.tag};
  cert.kind = kind;
  for (const auto& [signer, msg] : pool) cert.members.emplace_back(signer, msg.view.v);
  return cert;
}

void Replica::publish(const BlockId& block, MsgKind cert_kind, const PoolKey& key) {
  const auto& pool = cert_kind == MsgKind::Commit ? st_.commits[key]
                                                  : st_.responses[key];
  Certificate cert = cert_from(key, cert_kind, pool);
  uint64_t h = block.height;
  st_.ledger.push_back(block);
  trace_->emit_publish(net_->now(), label(),
                       "node=" + std::to_string(st_.id) + " h=" + std::to_string(h) +
                           " b=" + block.tag + " kind=" + kind_name(cert_kind) +
                           " signers=[" + join_labels(cert.signers()) + "]",
                       cert);
  const auto& pools = cert_kind == MsgKind::Commit ? st_.commits : st_.responses;
  for (const auto& [k2, p2] : pools) {
    if (k2.h == h && k2.tag != block.tag && p2.size() >= cfg_->quorum()) {
      note_fork(h, BlockId{h, k2.tag}, block);
    }
  }
  st_.phase = Phase::Published;
  note_state();
  st_.commit_lock.reset();
  net_->cancel_timer(st_.id);
  for (const auto& [c, t] : request_pending_) {
    Msg reply = make_signed(MsgKind::Reply, {st_.view, h}, block, self(), t);
    reply_cache_[c] = reply;
    send(reply, {ActorId::client(c)});
  }
  request_pending_.clear();
  if (publish_hook) publish_hook(h, block);
  start(h + 1);
}

void Replica::note_fork(uint64_t h, const BlockId& seen, const BlockId& held) {
  if (!fork_noted_.insert({h, seen.tag}).second) return;
  trace_->emit(net_->now(), label(), TraceAction::Fork,
               "node=" + std::to_string(st_.id) + " h=" + std::to_string(h) +
                   " a=" + held.tag + " b=" + seen.tag);
}

}  // namespace dbft
