// Copyright (c) 2026 the dbftsim authors.
// Distributed under the MIT software license, see the accompanying
// file LICENSE.

#pragma once

#include <memory>
#include <set>
#include <vector>

#include "dbft/adversary.hpp"
#include "dbft/client.hpp"
#include "dbft/netsim.hpp"
#include "dbft/replica.hpp"
#include "dbft/scenario.hpp"
#include "dbft/trace.hpp"

namespace dbft {

// Wires a scenario into replicas, clients, adversary and network, then runs
// the event loop to quiescence or the tick budget.
class Simulation {
 public:
  explicit Simulation(const Scenario& sc);

  bool step();  // dispatch one event; false once drained or out of budget
  void run();

  Trace& trace() { return trace_; }
  const Trace& trace() const { return trace_; }
  Network& net() { return net_; }
  const Scenario& scenario() const { return sc_; }
  const Config& config() const { return sc_.config; }
  Replica& replica(uint32_t i) { return *replicas_[i]; }
  const Replica& replica(uint32_t i) const { return *replicas_[i]; }
  Client* client(uint32_t i) {
    return i < clients_.size() ? clients_[i].get() : nullptr;
  }
  const Adversary* adversary() const { return adversary_.get(); }

  std::set<uint32_t> faulty_nodes() const;
  std::vector<std::vector<BlockId>> honest_ledgers() const;
  bool controlled_exceeds_f() const;

 private:
  void dispatch(const Event& ev);

  Scenario sc_;
  Trace trace_;
  Network net_;
  std::vector<std::unique_ptr<Replica>> replicas_;
  std::vector<std::unique_ptr<Client>> clients_;
  std::unique_ptr<Adversary> adversary_;
  bool stopped_ = false;
};

}  // namespace dbft
