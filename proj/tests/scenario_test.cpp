// Copyright (c) 2026 the dbftsim authors.
// Distributed under the MIT software license, see the accompanying
// file LICENSE.

#include <doctest.h>

#include <string>

#include "dbft/scenario.hpp"

using namespace dbft;

namespace {

ParseError expect_error(const std::string& text) {
  ParseResult r = parse_scenario(text);
  REQUIRE_FALSE(r.ok());
  REQUIRE(r.error.has_value());
  return *r.error;
}

Scenario expect_ok(const std::string& text) {
  ParseResult r = parse_scenario(text);
  if (r.error) INFO(r.error->render());
  REQUIRE(r.ok());
  return *r.scenario;
}

}  // namespace

TEST_CASE("a minimal scenario takes all the defaults") {
  Scenario sc = expect_ok("config.n = 7");
  CHECK(sc.config.n == 7);
  CHECK(sc.config.protocol == Protocol::TwoPhase);
  CHECK(sc.config.t_star == 15);
  CHECK(sc.config.max_views == 8);
  CHECK(sc.config.t0 == 0);
  CHECK(sc.config.seed == 0);
  CHECK(sc.run.heights == 1);
  CHECK(sc.run.max_ticks == 5000);
  CHECK(sc.clients.count == 0);
  CHECK(sc.plan.controlled.empty());
  CHECK(sc.plan.directives.empty());
  CHECK(sc.rules.empty());
}

TEST_CASE("comments, blanks and spacing are tolerated") {
  Scenario sc = expect_ok(
      "# leading comment\n"
      "\n"
      "config.n = 4   # trailing comment\n"
      "config.protocol = three-phase\n"
      "   run.heights = 3\n"
      "config.seed=42\n");
  CHECK(sc.config.n == 4);
  CHECK(sc.config.protocol == Protocol::ThreePhase);
  CHECK(sc.run.heights == 3);
  CHECK(sc.config.seed == 42);
}

TEST_CASE("client scripts parse requests and failure points") {
  Scenario sc = expect_ok(
      "config.n = 4\n"
      "clients.count = 2\n"
      "client.request = 0@0 tx-zero\n"
      "client.request = 1@35\n"
      "client.fail = 1@80\n");
  CHECK(sc.clients.count == 2);
  REQUIRE(sc.clients.requests.size() == 2);
  CHECK(sc.clients.requests[0].client == 0);
  CHECK(sc.clients.requests[0].at == 0);
  CHECK(sc.clients.requests[0].payload == "tx-zero");
  CHECK(sc.clients.requests[1].client == 1);
  CHECK(sc.clients.requests[1].at == 35);
  CHECK(sc.clients.requests[1].payload.empty());
  REQUIRE(sc.clients.fails.size() == 1);
  CHECK(sc.clients.fails[0].client == 1);
  CHECK(sc.clients.fails[0].at == 80);
}

TEST_CASE("directives and rules parse their full grammar") {
  Scenario sc = expect_ok(
      "config.n = 7\n"
      "adversary.controlled = 0,1\n"
      "adversary.directive = node=0 act=equivocate when=propose view=0 "
      "blockA=block1 partA=1,2,3 blockB=block2 partB=4,5,6\n"
      "adversary.directive = node=1 act=adopt when=deliver kind=PREPARE "
      "stale=1\n"
      "adversary.directive = node=1 act=harvest block=block2\n"
      "network.rule = act=delay delta=100 kind=PREPARE from=n0 to=n1,n2,n3 "
      "window=0..20\n"
      "network.rule = act=redirect redirect=n4,n5 block=b0.0\n"
      "network.rule = act=drop window=5..\n");
  CHECK(sc.plan.controlled == std::vector<uint32_t>{0, 1});
  REQUIRE(sc.plan.directives.size() == 3);
  const Directive& eq = sc.plan.directives[0];
  CHECK(eq.action == AdvAction::Equivocate);
  CHECK(eq.when == AdvWhen::OnPropose);
  CHECK(eq.view == 0);
  CHECK(eq.block_a == "block1");
  CHECK(eq.part_a == std::vector<uint32_t>{1, 2, 3});
  CHECK(eq.block_b == "block2");
  CHECK(eq.part_b == std::vector<uint32_t>{4, 5, 6});
  const Directive& ad = sc.plan.directives[1];
  CHECK(ad.action == AdvAction::AdoptStale);
  CHECK(ad.kind == MsgKind::Prepare);
  CHECK(ad.stale_only);
  const Directive& hv = sc.plan.directives[2];
  CHECK(hv.action == AdvAction::Harvest);
  CHECK(hv.when == AdvWhen::Always);  // default for non-signing actions
  CHECK(hv.block_a == "block2");

  REQUIRE(sc.rules.size() == 3);
  CHECK(sc.rules[0].action == FaultRule::Action::Delay);
  CHECK(sc.rules[0].delay == 100);
  CHECK(sc.rules[0].kind == MsgKind::Prepare);
  CHECK(sc.rules[0].from == ActorId::delegate(0));
  CHECK(sc.rules[0].to == std::set<ActorId>{ActorId::delegate(1),
                                            ActorId::delegate(2),
                                            ActorId::delegate(3)});
  CHECK(sc.rules[0].window_from == 0);
  CHECK(sc.rules[0].window_to == 20);
  CHECK(sc.rules[1].action == FaultRule::Action::Redirect);
  CHECK(sc.rules[1].redirect_to ==
        std::set<ActorId>{ActorId::delegate(4), ActorId::delegate(5)});
  CHECK(sc.rules[1].block_tag == "b0.0");
  CHECK(sc.rules[2].window_from == 5);
  CHECK(sc.rules[2].window_to == ~Tick(0));
}

TEST_CASE("trigger defaults depend on the action") {
  Scenario sc = expect_ok(
      "config.n = 7\n"
      "adversary.controlled = 0,1\n"
      "adversary.directive = node=0 act=equivocate blockA=a partA=1 blockB=b "
      "partB=2\n"
      "adversary.directive = node=0 act=silence\n"
      "adversary.directive = node=1 act=forge block=a\n"
      "adversary.directive = node=1 act=adopt\n");
  CHECK(sc.plan.directives[0].when == AdvWhen::OnPropose);
  CHECK(sc.plan.directives[1].when == AdvWhen::OnDeliver);
  CHECK(sc.plan.directives[2].when == AdvWhen::OnPublish);
  CHECK(sc.plan.directives[3].when == AdvWhen::OnDeliver);
}

TEST_CASE("parse errors carry exact positions") {
  SUBCASE("value is not a number") {
    ParseError e = expect_error("config.n = x");
    CHECK(e.line == 1);
    CHECK(e.col == 12);
    CHECK(e.message == "expected a number, got 'x'");
    CHECK(e.render() == "scenario:1:12: expected a number, got 'x'");
    CHECK(e.render("foo.dbft") == "foo.dbft:1:12: expected a number, got 'x'");
  }
  SUBCASE("empty value") {
    ParseError e = expect_error("config.n =");
    CHECK(e.line == 1);
    CHECK(e.col == 11);
    CHECK(e.message == "expected a number, got ''");
  }
  SUBCASE("unknown key points at the key") {
    ParseError e = expect_error("config.n = 7\nconfig.bogus = 3");
    CHECK(e.line == 2);
    CHECK(e.col == 1);
    CHECK(e.message == "unknown key 'config.bogus'");
  }
  SUBCASE("missing equals sign") {
    ParseError e = expect_error("config.n = 7\n  junk line");
    CHECK(e.line == 2);
    CHECK(e.col == 3);
    CHECK(e.message == "expected 'section.key = value'");
  }
  SUBCASE("unknown protocol") {
    ParseError e = expect_error("config.protocol = pbft");
    CHECK(e.line == 1);
    CHECK(e.col == 19);
    CHECK(e.message == "unknown protocol 'pbft'");
  }
  SUBCASE("request without an at-sign") {
    ParseError e = expect_error("client.request = 0");
    CHECK(e.line == 1);
    CHECK(e.col == 18);
    CHECK(e.message == "expected <client>@<tick>");
  }
  SUBCASE("directive missing its action") {
    ParseError e = expect_error(
        "adversary.controlled = 0\nadversary.directive = node=0");
    CHECK(e.line == 2);
    CHECK(e.col == 23);
    CHECK(e.message == "directive needs node= and act=");
  }
  SUBCASE("equivocate missing its parameters") {
    ParseError e = expect_error(
        "adversary.controlled = 0\n"
        "adversary.directive = node=0 act=equivocate");
    CHECK(e.line == 2);
    CHECK(e.message == "equivocate needs blockA/blockB/partA/partB");
  }
  SUBCASE("harvest missing its block") {
    ParseError e = expect_error(
        "adversary.controlled = 1\n"
        "adversary.directive = node=1 act=harvest");
    CHECK(e.message == "harvest needs block=");
  }
  SUBCASE("stray directive token") {
    ParseError e = expect_error(
        "adversary.controlled = 0\n"
        "adversary.directive = node=0 act=silence bogus");
    CHECK(e.message == "directive token 'bogus' is not key=value");
  }
  SUBCASE("directive for a node outside the controlled set") {
    ParseError e = expect_error(
        "adversary.controlled = 0\n"
        "adversary.directive = node=1 act=silence");
    CHECK(e.line == 2);
    CHECK(e.col == 1);
    CHECK(e.message ==
          "directive for node 1 which is not in adversary.controlled");
  }
  SUBCASE("rule missing its action") {
    ParseError e = expect_error("network.rule = kind=PREPARE");
    CHECK(e.message == "rule needs act=");
  }
  SUBCASE("redirect missing its targets") {
    ParseError e = expect_error("network.rule = act=redirect");
    CHECK(e.message == "redirect needs redirect=");
  }
  SUBCASE("window missing the separator") {
    ParseError e = expect_error("network.rule = act=drop window=5");
    CHECK(e.message == "window must be from..to");
  }
  SUBCASE("n of zero is rejected") {
    ParseError e = expect_error("config.n = 0");
    CHECK(e.message == "config.n must be at least 1");
  }
}

TEST_CASE("builtin scenarios exist and nothing else does") {
  CHECK(builtin_names() ==
        std::vector<std::string>{"honest", "attack-f2", "attack-f1"});
  for (const std::string& name : builtin_names()) {
    CHECK(builtin_scenario(name).has_value());
  }
  CHECK_FALSE(builtin_scenario("no-such-thing").has_value());
}

TEST_CASE("builtin scenarios have the documented shape") {
  auto honest = builtin_scenario("honest");
  REQUIRE(honest);
  CHECK(honest->config.n == 7);
  CHECK(honest->run.heights == 5);
  CHECK(honest->clients.count == 1);
  REQUIRE(honest->clients.requests.size() == 1);
  CHECK(honest->clients.requests[0].payload == "tx0");
  CHECK(honest->plan.controlled.empty());

  auto f2 = builtin_scenario("attack-f2");
  REQUIRE(f2);
  CHECK(f2->config.n == 7);
  CHECK(f2->run.heights == 1);
  CHECK(f2->plan.controlled == std::vector<uint32_t>{0, 1});
  CHECK(f2->plan.directives.size() == 5);
  CHECK(f2->rules.empty());

  auto f1 = builtin_scenario("attack-f1");
  REQUIRE(f1);
  CHECK(f1->plan.controlled == std::vector<uint32_t>{1});
  CHECK(f1->plan.directives.size() == 3);
  REQUIRE(f1->rules.size() == 2);
  CHECK(f1->rules[0].delay == 100);
  CHECK(f1->rules[1].delay == 100);
  CHECK(f1->rules[0].window_to == 20);
  CHECK(f1->rules[1].block_tag == "b0.0");
}

TEST_CASE("serialization round-trips byte for byte") {
  for (const std::string& name : builtin_names()) {
    CAPTURE(name);
    auto sc = builtin_scenario(name);
    REQUIRE(sc);
    std::string once = serialize_scenario(*sc);
    ParseResult back = parse_scenario(once);
    if (back.error) INFO(back.error->render());
    REQUIRE(back.ok());
    CHECK(serialize_scenario(*back.scenario) == once);
  }
}

TEST_CASE("a scenario touching every field round-trips") {
  Scenario sc;
  sc.config.n = 10;
  sc.config.protocol = Protocol::ThreePhase;
  sc.config.t_star = 20;
  sc.config.max_views = 6;
  sc.config.t0 = 500;
  sc.config.seed = 99;
  sc.run.heights = 2;
  sc.run.max_ticks = 700;
  sc.clients.count = 2;
  sc.clients.requests.push_back({0, 0, "alpha beta"});
  sc.clients.requests.push_back({1, 9, ""});
  sc.clients.fails.push_back({0, 50});
  sc.plan.controlled = {3, 4};
  Directive d;
  d.node = 3;
  d.action = AdvAction::Silence;
  d.when = AdvWhen::OnDeliver;
  d.view = 2;
  d.kind = MsgKind::Response;
  sc.plan.directives.push_back(d);
  Directive f;
  f.node = 4;
  f.action = AdvAction::ForgeLate;
  f.when = AdvWhen::OnHarvest;
  f.block_a = "bX";
  sc.plan.directives.push_back(f);
  FaultRule r;
  r.action = FaultRule::Action::Redirect;
  r.redirect_to = {ActorId::delegate(9)};
  r.kind = MsgKind::Commit;
  r.view = 1;
  r.window_from = 10;
  sc.rules.push_back(r);

  std::string once = serialize_scenario(sc);
  ParseResult back = parse_scenario(once);
  if (back.error) INFO(back.error->render());
  REQUIRE(back.ok());
  CHECK(serialize_scenario(*back.scenario) == once);
  CHECK(back.scenario->config.t0 == 500);
  CHECK(back.scenario->clients.requests[0].payload == "alpha beta");
  REQUIRE(back.scenario->rules.size() == 1);
  CHECK(back.scenario->rules[0].view == 1);
}
