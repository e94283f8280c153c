// Copyright (c) 2026 the dbftsim authors.
// Distributed under the MIT software license, see the accompanying
// file LICENSE.

#include "dbft/client.hpp"

namespace dbft {

Client::Client(uint32_t id, const Config& cfg, Network& net, Trace& trace)
    : cfg_(&cfg), net_(&net), trace_(&trace) {
  st_.id = id;
}

std::set<ActorId> Client::delegates() const {
  std::set<ActorId> out;
  for (uint32_t i = 0; i < cfg_->n; ++i) out.insert(ActorId::delegate(i));
  return out;
}

void Client::note(const std::string& detail) {
  trace_->emit(net_->now(), label(), TraceAction::State, detail);
}

bool Client::request(const std::string& payload) {
  (void)payload;  // request content is outside the model
  if (st_.outstanding) {
    trace_->emit(net_->now(), label(), TraceAction::Drop,
                 "ignored request-while-outstanding");
    return false;
  }
  Msg req = make_signed(MsgKind::Request, {0, 0}, std::nullopt,
                        ActorId::client(st_.id), net_->now());
  st_.outstanding = req;
  st_.replies.clear();
  st_.accepted_view.reset();
  st_.accepted_result.reset();
  net_->send(req, delegates(), label());
  return true;
}

void Client::retransmit() {
  if (!st_.outstanding || !st_.retransmitting) return;
  net_->send(*st_.outstanding, delegates(), label());
}

void Client::fail() {
  st_.retransmitting = true;
  note("client=" + std::to_string(st_.id) + " suspects-failure");
}

void Client::on_reply(const Msg& m) {
  if (!msg_verifies(m) || m.kind != MsgKind::Reply || !m.block) {
    trace_->emit(net_->now(), label(), TraceAction::Drop,
                 "ignored malformed-reply " + describe(m));
    return;
  }
  if (!st_.outstanding) {
    trace_->emit(net_->now(), label(), TraceAction::Drop,
                 "ignored unsolicited " + describe(m));
    return;
  }
  if (m.timestamp != st_.outstanding->timestamp) {
    trace_->emit(net_->now(), label(), TraceAction::Drop,
                 "ignored wrong-request " + describe(m));
    return;
  }
  st_.replies[m.sender] = m;
  uint32_t agree = 0;
  for (const auto& [from, r] : st_.replies) {
    if (r.view.v == m.view.v && r.block == m.block) ++agree;
  }
  if (agree <= cfg_->max_faulty()) return;
  st_.accepted_view = m.view.v;
  st_.accepted_result = m.block;
  st_.outstanding.reset();
  st_.retransmitting = false;
  note("client=" + std::to_string(st_.id) + " accepted h=" +
       std::to_string(m.block->height) + " b=" + m.block->tag +
       " v=" + std::to_string(m.view.v) + " replies=" + std::to_string(agree));
}

}  // namespace dbft
