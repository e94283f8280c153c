// Copyright (c) 2026 the dbftsim authors.
// Distributed under the MIT software license, see the accompanying
// file LICENSE.

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dbft/netsim.hpp"
#include "dbft/trace.hpp"
#include "dbft/types.hpp"

namespace dbft {

enum class Phase { Idle, Prepared, Responded, Committed, Published };

std::string phase_name(Phase p);

struct PoolKey {
  uint64_t h = 0;
  uint64_t v = 0;  // collapsed to 0 where counting ignores views
  std::string tag;
  auto operator<=>(const PoolKey&) const = default;
};

struct ReplicaState {
  uint32_t id = 0;
  uint64_t height = 0;
  uint64_t view = 0;
  Phase phase = Phase::Idle;
  bool node_faulty = false;
  std::vector<BlockId> ledger;
  std::optional<BlockId> commit_lock;

  // Distinct-signer pools. Response pools absorb a speaker's PREPARE as its
  // self-signature. In two-phase mode the key collapses the view, so stale
  // responses keep counting; in three-phase mode the key carries the view and
  // old views are pruned on entry to a new one. Commit pools survive view
  // changes either way.
  std::map<PoolKey, std::map<ActorId, Msg>> responses;
  std::map<PoolKey, std::map<ActorId, Msg>> commits;
  std::map<std::pair<uint64_t, uint64_t>, std::map<ActorId, Msg>> viewchanges;
  std::map<std::pair<uint64_t, uint64_t>, BlockId> accepted;  // (h, v) -> proposal
};

// One consensus delegate. All outbound traffic goes through the network; all
// state transitions land in the trace as STATE lines.
class Replica {
 public:
  Replica(uint32_t id, const Config& cfg, Network& net, Trace& trace,
          uint64_t heights_target);

  void start(uint64_t height);
  void on_deliver(const Msg& m);
  void on_timer(uint64_t height, uint64_t guard_view, Tick deadline);

  // Pools a verifying message without the honest-path gates (view, speaker,
  // lock). Quorum side effects still run. Used for self-injection by the
  // fault module and by tests.
  void absorb(const Msg& m);

  const ReplicaState& state() const { return st_; }
  const std::vector<BlockId>& ledger() const { return st_.ledger; }
  std::string label() const { return ActorId::delegate(st_.id).label(); }
  void mark_faulty() { st_.node_faulty = true; }

  // When set, a muted replica updates state but sends nothing.
  void set_muted(bool muted) { muted_ = muted; }

  // Interposition points. propose_hook returning false swallows the proposal.
  std::function<bool(uint64_t h, uint64_t v, const BlockId& block)> propose_hook;
  std::function<void(uint64_t h, const BlockId& block)> publish_hook;
  std::function<void(uint64_t h, uint64_t v)> view_entry_hook;

 private:
  void on_request(const Msg& m);
  void on_prepare(const Msg& m);
  void on_response(const Msg& m);
  void on_commit(const Msg& m);
  void on_viewchange(const Msg& m);

  void propose();
  void respond_to(const Msg& prepare);
  void enter_view(uint64_t v);
  void pool_response(const Msg& m);
  void pool_commit(const Msg& m);
  void maybe_commit(const PoolKey& key);
  void publish(const BlockId& block, MsgKind cert_kind, const PoolKey& key);
  void note_fork(uint64_t h, const BlockId& seen, const BlockId& held);
  Certificate cert_from(const PoolKey& key, MsgKind kind,
                        const std::map<ActorId, Msg>& pool) const;

  void send_to_delegates(const Msg& m);
  void send(const Msg& m, const std::set<ActorId>& dests);
  void ignore(const Msg& m, const std::string& reason);
  void note_state();
  void arm_timer();

  uint32_t speaker_at(uint64_t v) const {
    return select_speaker(st_.height, v, cfg_->n);
  }
  bool is_speaker() const { return speaker_at(st_.view) == st_.id; }
  PoolKey response_key(uint64_t h, uint64_t v, const std::string& tag) const;
  bool two_phase() const { return cfg_->protocol == Protocol::TwoPhase; }
  ActorId self() const { return ActorId::delegate(st_.id); }
  bool published(uint64_t h) const { return st_.ledger.size() > h; }

  const Config* cfg_;
  Network* net_;
  Trace* trace_;
  ReplicaState st_;
  uint64_t heights_target_;
  uint64_t vc_target_ = 0;  // highest view-change target broadcast at this height
  bool timed_out_ = false;  // gave up on the current view, awaiting the change
  bool muted_ = false;
  std::set<std::pair<uint64_t, std::string>> fork_noted_;
  std::set<PoolKey> committed_keys_;
  // Client bookkeeping: newest request timestamp, pending work, reply cache.
  std::map<uint32_t, Tick> request_seen_;
  std::map<uint32_t, Tick> request_pending_;
  std::map<uint32_t, Msg> reply_cache_;
};

}  // namespace dbft
