// Copyright (c) 2026 the dbftsim authors.
// Distributed under the MIT software license, see the accompanying
// file LICENSE.

#include "dbft/sim.hpp"

namespace dbft {

Simulation::Simulation(const Scenario& sc)
    : sc_(sc), net_(sc_.config, trace_) {
  for (const FaultRule& r : sc_.rules) net_.misbehave(r);
  for (uint32_t i = 0; i < sc_.config.n; ++i) {
    replicas_.push_back(std::make_unique<Replica>(i, sc_.config, net_, trace_,
                                                  sc_.run.heights));
  }
  if (!sc_.plan.controlled.empty()) {
    adversary_ = std::make_unique<Adversary>(sc_.plan, sc_.config, net_, trace_);
    std::vector<Replica*> raw;
    for (auto& r : replicas_) raw.push_back(r.get());
    adversary_->attach(raw);
    if (controlled_exceeds_f()) {
      trace_.emit(0, "adv", TraceAction::Adv,
                  "warning controlled=" +
                      std::to_string(sc_.plan.controlled.size()) +
                      " exceeds f=" + std::to_string(sc_.config.max_faulty()));
    }
  }
  for (uint32_t i = 0; i < sc_.clients.count; ++i) {
    clients_.push_back(std::make_unique<Client>(i, sc_.config, net_, trace_));
  }
  for (const auto& rq : sc_.clients.requests) {
    net_.schedule_client(rq.at, {rq.client, ClientEv::Kind::Request, rq.payload});
  }
  for (const auto& fl : sc_.clients.fails) {
    net_.schedule_client(fl.at, {fl.client, ClientEv::Kind::Fail, ""});
  }
  for (auto& r : replicas_) r->start(0);
}

bool Simulation::controlled_exceeds_f() const {
  return sc_.plan.controlled.size() > sc_.config.max_faulty();
}

std::set<uint32_t> Simulation::faulty_nodes() const {
  std::set<uint32_t> out;
  for (uint32_t c : sc_.plan.controlled) out.insert(c);
  return out;
}

std::vector<std::vector<BlockId>> Simulation::honest_ledgers() const {
  std::vector<std::vector<BlockId>> out;
  for (uint32_t i = 0; i < sc_.config.n; ++i) {
    if (!replicas_[i]->state().node_faulty) out.push_back(replicas_[i]->ledger());
  }
  return out;
}

void Simulation::dispatch(const Event& ev) {
  if (const auto* d = std::get_if<DeliverEv>(&ev.body)) {
    trace_.emit(ev.time, d->to.label(), TraceAction::Deliver, describe(d->msg));
    if (d->to.is_client()) {
      if (Client* c = client(d->to.index())) c->on_reply(d->msg);
      return;
    }
    uint32_t node = d->to.index();
    if (node >= replicas_.size()) return;
    if (adversary_ && adversary_->controls(node)) {
      adversary_->on_deliver(node, d->msg);
    } else {
      replicas_[node]->on_deliver(d->msg);
    }
    return;
  }
  if (const auto* t = std::get_if<TimerEv>(&ev.body)) {
    if (t->node >= replicas_.size()) return;
    if (adversary_ && adversary_->controls(t->node)) {
      adversary_->on_timer(t->node, t->height, t->view, t->deadline);
    } else {
      replicas_[t->node]->on_timer(t->height, t->view, t->deadline);
    }
    return;
  }
  if (const auto* c = std::get_if<ClientEv>(&ev.body)) {
    Client* cl = client(c->client);
    if (!cl) return;
    switch (c->kind) {
      case ClientEv::Kind::Request:
        cl->request(c->payload);
        break;
      case ClientEv::Kind::Fail:
        cl->fail();
        cl->retransmit();
        break;
      case ClientEv::Kind::Retrans:
        cl->retransmit();
        break;
    }
  }
}

bool Simulation::step() {
  if (stopped_) return false;
  auto ev = net_.pop();
  if (!ev || ev->time > sc_.run.max_ticks) {
    stopped_ = true;
    return false;
  }
  dispatch(*ev);
  return true;
}

void Simulation::run() {
  while (step()) {
  }
}

}  // namespace dbft
