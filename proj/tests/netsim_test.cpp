// Copyright (c) 2026 the dbftsim authors.
// Distributed under the MIT software license, see the accompanying
// file LICENSE.

#include <doctest.h>

#include <stdexcept>
#include <string>

#include "dbft/netsim.hpp"
#include "dbft/trace.hpp"
#include "dbft/types.hpp"

using namespace dbft;

namespace {

Msg prepare(uint32_t from, uint64_t h, uint64_t v, const std::string& tag,
            Tick ts = 0) {
  return make_signed(MsgKind::Prepare, {v, h}, BlockId{h, tag},
                     ActorId::delegate(from), ts);
}

size_t count_lines(const Trace& t, TraceAction action,
                   const std::string& needle) {
  size_t n = 0;
  for (const auto& ev : t.events()) {
    if (ev.action == action && ev.detail.find(needle) != std::string::npos) ++n;
  }
  return n;
}

// Drains delivery events, returning (time, dest) pairs in pop order.
std::vector<std::pair<Tick, ActorId>> drain(Network& net) {
  std::vector<std::pair<Tick, ActorId>> out;
  while (auto ev = net.pop()) {
    if (const auto* d = std::get_if<DeliverEv>(&ev->body)) {
      out.emplace_back(ev->time, d->to);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("messages arrive one tick after the send") {
  Config cfg;
  Trace trace;
  Network net(cfg, trace);
  net.send(prepare(0, 0, 0, "b0.0"), {ActorId::delegate(1), ActorId::delegate(2)},
           "n0");
  CHECK(net.pending_messages() == 2);
  auto got = drain(net);
  REQUIRE(got.size() == 2);
  CHECK(got[0] == std::make_pair(Tick(1), ActorId::delegate(1)));
  CHECK(got[1] == std::make_pair(Tick(1), ActorId::delegate(2)));
  CHECK(net.pending_messages() == 0);
  CHECK(net.idle());
  CHECK(count_lines(trace, TraceAction::Send, "to=[n1,n2]") == 1);
}

TEST_CASE("events pop in time then insertion order") {
  Config cfg;
  Trace trace;
  Network net(cfg, trace);
  net.schedule_client(5, ClientEv{0, ClientEv::Kind::Request, "tx"});
  net.send(prepare(0, 0, 0, "b0.0"), {ActorId::delegate(1)}, "n0");
  net.send(prepare(2, 0, 0, "b0.0"), {ActorId::delegate(1)}, "n2");
  auto first = net.pop();
  auto second = net.pop();
  auto third = net.pop();
  REQUIRE(first);
  REQUIRE(second);
  REQUIRE(third);
  CHECK(first->time == 1);
  CHECK(std::get<DeliverEv>(first->body).msg.sender == ActorId::delegate(0));
  CHECK(second->time == 1);
  CHECK(std::get<DeliverEv>(second->body).msg.sender == ActorId::delegate(2));
  CHECK(third->time == 5);
  CHECK(std::get<ClientEv>(third->body).payload == "tx");
  CHECK(net.now() == 5);
}

TEST_CASE("late client scheduling clamps to the current clock") {
  Config cfg;
  Trace trace;
  Network net(cfg, trace);
  net.schedule_client(5, ClientEv{0, ClientEv::Kind::Request, "a"});
  REQUIRE(net.pop());
  CHECK(net.now() == 5);
  net.schedule_client(2, ClientEv{0, ClientEv::Kind::Request, "b"});
  auto ev = net.pop();
  REQUIRE(ev);
  CHECK(ev->time == 5);
}

TEST_CASE("delay rule adds to the base latency") {
  Config cfg;
  Trace trace;
  Network net(cfg, trace);
  FaultRule r;
  r.kind = MsgKind::Prepare;
  r.action = FaultRule::Action::Delay;
  r.delay = 5;
  net.misbehave(r);
  net.send(prepare(0, 0, 0, "b0.0"), {ActorId::delegate(1)}, "n0");
  auto got = drain(net);
  REQUIRE(got.size() == 1);
  CHECK(got[0].first == 6);
  CHECK(count_lines(trace, TraceAction::Delay, "delta=5 deliver=6") == 1);
}

TEST_CASE("drop rule swallows only matched destinations") {
  Config cfg;
  Trace trace;
  Network net(cfg, trace);
  FaultRule r;
  r.to = {ActorId::delegate(1)};
  r.action = FaultRule::Action::Drop;
  net.misbehave(r);
  net.send(prepare(0, 0, 0, "b0.0"), {ActorId::delegate(1), ActorId::delegate(2)},
           "n0");
  CHECK(net.pending_messages() == 1);
  auto got = drain(net);
  REQUIRE(got.size() == 1);
  CHECK(got[0].second == ActorId::delegate(2));
  CHECK(count_lines(trace, TraceAction::Drop, "to=n1 rule=0") == 1);
}

TEST_CASE("redirect reroutes a matched destination") {
  Config cfg;
  Trace trace;
  Network net(cfg, trace);
  FaultRule r;
  r.to = {ActorId::delegate(1)};
  r.action = FaultRule::Action::Redirect;
  r.redirect_to = {ActorId::delegate(3)};
  net.misbehave(r);
  net.send(prepare(0, 0, 0, "b0.0"), {ActorId::delegate(1)}, "n0");
  auto got = drain(net);
  REQUIRE(got.size() == 1);
  CHECK(got[0].second == ActorId::delegate(3));
  CHECK(count_lines(trace, TraceAction::Drop, "redirected") == 1);
  CHECK(count_lines(trace, TraceAction::Send, "redirected") == 1);
  CHECK(net.pending_messages() == 0);
}

TEST_CASE("fault windows include both ends") {
  Config cfg;
  Trace trace;
  Network net(cfg, trace);
  FaultRule r;
  r.action = FaultRule::Action::Drop;
  r.window_from = 5;
  r.window_to = 10;
  net.misbehave(r);
  auto dropped_at = [&](Tick t) {
    net.schedule_client(t, ClientEv{0, ClientEv::Kind::Retrans, ""});
    while (auto ev = net.pop()) {
      if (std::holds_alternative<ClientEv>(ev->body)) break;
    }
    size_t before = count_lines(trace, TraceAction::Drop, "rule=0");
    net.send(prepare(0, 0, 0, "b0.0", t), {ActorId::delegate(1)}, "n0");
    return count_lines(trace, TraceAction::Drop, "rule=0") > before;
  };
  CHECK_FALSE(dropped_at(4));
  CHECK(dropped_at(5));
  CHECK(dropped_at(10));
  CHECK_FALSE(dropped_at(11));
  CHECK(count_lines(trace, TraceAction::Drop, "rule=0") == 2);
}

TEST_CASE("empty destination filter matches everyone") {
  Config cfg;
  Trace trace;
  Network net(cfg, trace);
  FaultRule r;
  r.action = FaultRule::Action::Drop;
  net.misbehave(r);
  net.send(prepare(0, 0, 0, "b0.0"),
           {ActorId::delegate(1), ActorId::delegate(2), ActorId::delegate(3)},
           "n0");
  CHECK(net.pending_messages() == 0);
  CHECK(count_lines(trace, TraceAction::Drop, "rule=0") == 3);
}

TEST_CASE("first installed matching rule wins") {
  Config cfg;
  Trace trace;
  Network net(cfg, trace);
  FaultRule a;
  a.kind = MsgKind::Prepare;
  a.action = FaultRule::Action::Delay;
  a.delay = 3;
  FaultRule b;
  b.from = ActorId::delegate(0);
  b.action = FaultRule::Action::Delay;
  b.delay = 9;
  net.misbehave(a);
  net.misbehave(b);
  net.send(prepare(0, 0, 0, "b0.0"), {ActorId::delegate(1)}, "n0");
  CHECK(net.queued() == 1);
  auto got = drain(net);
  REQUIRE(got.size() == 1);
  CHECK(got[0].first == 4);
}

TEST_CASE("rules that share a matcher must agree about dropping") {
  Config cfg;
  Trace trace;
  Network net(cfg, trace);
  FaultRule drop;
  drop.kind = MsgKind::Response;
  drop.action = FaultRule::Action::Drop;
  FaultRule delay = drop;
  delay.action = FaultRule::Action::Delay;
  delay.delay = 4;

  net.misbehave(drop);
  CHECK_THROWS_AS(net.misbehave(delay), std::invalid_argument);
  CHECK_NOTHROW(net.misbehave(drop));

  Network net2(cfg, trace);
  net2.misbehave(delay);
  CHECK_THROWS_AS(net2.misbehave(drop), std::invalid_argument);
  FaultRule redirect = drop;
  redirect.action = FaultRule::Action::Redirect;
  redirect.redirect_to = {ActorId::delegate(1)};
  CHECK_NOTHROW(net2.misbehave(redirect));
}

TEST_CASE("one timer slot per node") {
  Config cfg;
  Trace trace;
  Network net(cfg, trace);
  net.set_timer(0, 0, 0, 10);
  net.set_timer(0, 0, 1, 20);
  CHECK(net.timer_armed(0));
  CHECK(net.queued() == 1);
  auto ev = net.pop();
  REQUIRE(ev);
  CHECK(ev->time == 20);
  const auto& t = std::get<TimerEv>(ev->body);
  CHECK(t.node == 0);
  CHECK(t.view == 1);
  CHECK(t.deadline == 20);
  CHECK_FALSE(net.timer_armed(0));

  net.set_timer(2, 0, 0, 5);
  net.cancel_timer(2);
  CHECK_FALSE(net.timer_armed(2));
  CHECK(net.idle());
}

TEST_CASE("malformed messages never enter the queue") {
  Config cfg;
  Trace trace;
  Network net(cfg, trace);
  Msg m = prepare(0, 0, 0, "b0.0");
  m.block = BlockId{0, "tampered"};
  net.send(m, {ActorId::delegate(1)}, "n0");
  CHECK(net.idle());
  CHECK(net.pending_messages() == 0);
  CHECK(count_lines(trace, TraceAction::Drop, "invalid-message") == 1);
  CHECK(count_lines(trace, TraceAction::Send, "") == 0);
}

TEST_CASE("identical scripts render identical traces") {
  auto run = [] {
    Config cfg;
    Trace trace;
    Network net(cfg, trace);
    FaultRule r;
    r.to = {ActorId::delegate(2)};
    r.action = FaultRule::Action::Delay;
    r.delay = 7;
    net.misbehave(r);
    net.set_timer(1, 0, 0, 30);
    net.send(prepare(0, 0, 0, "b0.0"),
             {ActorId::delegate(1), ActorId::delegate(2)}, "n0");
    while (net.pop()) {
    }
    return trace.render();
  };
  CHECK(run() == run());
}

TEST_CASE("rule descriptions use parser tokens") {
  FaultRule r;
  r.action = FaultRule::Action::Delay;
  r.delay = 7;
  r.kind = MsgKind::Prepare;
  r.from = ActorId::delegate(0);
  r.to = {ActorId::delegate(1), ActorId::delegate(2)};
  r.view = 1;
  r.block_tag = "b0.0";
  r.window_from = 3;
  r.window_to = 9;
  CHECK(r.describe() ==
        "act=delay delta=7 kind=PREPARE from=n0 to=n1,n2 view=1 block=b0.0 "
        "window=3..9");

  FaultRule d;
  d.action = FaultRule::Action::Drop;
  CHECK(d.describe() == "act=drop");

  FaultRule red;
  red.action = FaultRule::Action::Redirect;
  red.redirect_to = {ActorId::delegate(4), ActorId::delegate(5)};
  red.window_from = 5;
  CHECK(red.describe() == "act=redirect redirect=n4,n5 window=5..");
}

TEST_CASE("matchers check view and block tag") {
  FaultRule r;
  r.view = 1;
  r.block_tag = "b0.1";
  Msg hit = make_signed(MsgKind::Response, {1, 0}, BlockId{0, "b0.1"},
                        ActorId::delegate(3), 2);
  Msg wrong_view = make_signed(MsgKind::Response, {0, 0}, BlockId{0, "b0.1"},
                               ActorId::delegate(3), 2);
  Msg no_block = make_signed(MsgKind::ViewChange, {1, 0}, std::nullopt,
                             ActorId::delegate(3), 2);
  CHECK(r.matches(hit, ActorId::delegate(0), 0));
  CHECK_FALSE(r.matches(wrong_view, ActorId::delegate(0), 0));
  CHECK_FALSE(r.matches(no_block, ActorId::delegate(0), 0));
}
