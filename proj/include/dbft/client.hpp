// Copyright (c) 2026 the dbftsim authors.
// Distributed under the MIT software license, see the accompanying
// file LICENSE.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "dbft/netsim.hpp"
#include "dbft/trace.hpp"
#include "dbft/types.hpp"

namespace dbft {

struct ClientState {
  uint32_t id = 0;
  std::optional<Msg> outstanding;
  std::map<ActorId, Msg> replies;  // for the outstanding request, by replier
  bool retransmitting = false;
  std::optional<uint64_t> accepted_view;
  std::optional<BlockId> accepted_result;
};

// Issues one request at a time and accepts a result once more than f
// delegates reply with the same (view, block) pair.
class Client {
 public:
  Client(uint32_t id, const Config& cfg, Network& net, Trace& trace);

  bool request(const std::string& payload);
  void retransmit();
  void fail();  // switch to retransmit-until-answered mode
  void on_reply(const Msg& m);

  const ClientState& state() const { return st_; }
  std::string label() const { return ActorId::client(st_.id).label(); }

 private:
  std::set<ActorId> delegates() const;
  void note(const std::string& detail);

  const Config* cfg_;
  Network* net_;
  Trace* trace_;
  ClientState st_;
};

}  // namespace dbft
