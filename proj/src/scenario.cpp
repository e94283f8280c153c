// Copyright (c) 2026 the dbftsim authors.
// Distributed under the MIT software license, see the accompanying
// file LICENSE.

#include "dbft/scenario.hpp"

#include <charconv>
#include <sstream>

namespace dbft {

std::string ParseError::render(const std::string& file) const {
  std::string where = file.empty() ? "scenario" : file;
  return where + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " +
         message;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::optional<uint64_t> to_u64(std::string_view s) {
  uint64_t out = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) return std::nullopt;
  return out;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (start <= s.size()) {
    size_t end = s.find(sep, start);
    if (end == std::string_view::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

std::vector<std::string_view> tokens(std::string_view s) {
  std::vector<std::string_view> out;
  size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

struct LineCtx {
  size_t line = 0;
  size_t col = 0;  // column of the value
  std::optional<ParseError> err;
  void fail(const std::string& msg) { err = ParseError{line, col, msg}; }
};

std::optional<std::vector<uint32_t>> parse_u32_list(std::string_view s) {
  std::vector<uint32_t> out;
  if (trim(s).empty()) return out;
  for (auto part : split(s, ',')) {
    auto v = to_u64(trim(part));
    if (!v || *v > 0xffffffffull) return std::nullopt;
    out.push_back(static_cast<uint32_t>(*v));
  }
  return out;
}

std::optional<std::set<ActorId>> parse_actor_set(std::string_view s) {
  std::set<ActorId> out;
  if (trim(s).empty()) return out;
  for (auto part : split(s, ',')) {
    auto a = parse_actor(trim(part));
    if (!a) return std::nullopt;
    out.insert(*a);
  }
  return out;
}

bool parse_directive(std::string_view value, Directive& d, LineCtx& ctx) {
  bool have_node = false, have_act = false, have_when = false;
  for (auto tok : tokens(value)) {
    size_t eq = tok.find('=');
    if (eq == std::string_view::npos) {
      ctx.fail("directive token '" + std::string(tok) + "' is not key=value");
      return false;
    }
    std::string_view key = tok.substr(0, eq);
    std::string_view val = tok.substr(eq + 1);
    if (key == "node") {
      auto v = to_u64(val);
      if (!v) { ctx.fail("bad node '" + std::string(val) + "'"); return false; }
      d.node = static_cast<uint32_t>(*v);
      have_node = true;
    } else if (key == "act") {
      auto a = parse_action(val);
      if (!a) { ctx.fail("unknown action '" + std::string(val) + "'"); return false; }
      d.action = *a;
      have_act = true;
    } else if (key == "when") {
      auto w = parse_when(val);
      if (!w) { ctx.fail("unknown trigger '" + std::string(val) + "'"); return false; }
      d.when = *w;
      have_when = true;
    } else if (key == "view") {
      auto v = to_u64(val);
      if (!v) { ctx.fail("bad view '" + std::string(val) + "'"); return false; }
      d.view = *v;
    } else if (key == "kind") {
      auto k = parse_kind(val);
      if (!k) { ctx.fail("unknown kind '" + std::string(val) + "'"); return false; }
      d.kind = *k;
    } else if (key == "stale") {
      d.stale_only = val == "1" || val == "true";
    } else if (key == "block" || key == "blockA") {
      d.block_a = std::string(val);
    } else if (key == "blockB") {
      d.block_b = std::string(val);
    } else if (key == "partA") {
      auto xs = parse_u32_list(val);
      if (!xs) { ctx.fail("bad node list '" + std::string(val) + "'"); return false; }
      d.part_a = *xs;
    } else if (key == "partB") {
      auto xs = parse_u32_list(val);
      if (!xs) { ctx.fail("bad node list '" + std::string(val) + "'"); return false; }
      d.part_b = *xs;
    } else {
      ctx.fail("unknown directive key '" + std::string(key) + "'");
      return false;
    }
  }
  if (!have_node || !have_act) {
    ctx.fail("directive needs node= and act=");
    return false;
  }
  if (!have_when) {
    switch (d.action) {
      case AdvAction::Equivocate: d.when = AdvWhen::OnPropose; break;
      case AdvAction::Silence: d.when = AdvWhen::OnDeliver; break;
      case AdvAction::ForgeLate: d.when = AdvWhen::OnPublish; break;
      case AdvAction::AdoptStale: d.when = AdvWhen::OnDeliver; break;
      default: d.when = AdvWhen::Always; break;
    }
  }
  if (d.action == AdvAction::Equivocate &&
      (d.block_a.empty() || d.block_b.empty() || d.part_a.empty() ||
       d.part_b.empty())) {
    ctx.fail("equivocate needs blockA/blockB/partA/partB");
    return false;
  }
  if ((d.action == AdvAction::Harvest || d.action == AdvAction::ForgeLate) &&
      d.block_a.empty()) {
    ctx.fail(std::string(action_token(d.action)) + " needs block=");
    return false;
  }
  return true;
}

bool parse_rule(std::string_view value, FaultRule& r, LineCtx& ctx) {
  bool have_act = false;
  for (auto tok : tokens(value)) {
    size_t eq = tok.find('=');
    if (eq == std::string_view::npos) {
      ctx.fail("rule token '" + std::string(tok) + "' is not key=value");
      return false;
    }
    std::string_view key = tok.substr(0, eq);
    std::string_view val = tok.substr(eq + 1);
    if (key == "act") {
      if (val == "delay") r.action = FaultRule::Action::Delay;
      else if (val == "drop") r.action = FaultRule::Action::Drop;
      else if (val == "redirect") r.action = FaultRule::Action::Redirect;
      else { ctx.fail("unknown rule action '" + std::string(val) + "'"); return false; }
      have_act = true;
    } else if (key == "kind") {
      auto k = parse_kind(val);
      if (!k) { ctx.fail("unknown kind '" + std::string(val) + "'"); return false; }
      r.kind = *k;
    } else if (key == "from") {
      auto a = parse_actor(val);
      if (!a) { ctx.fail("bad actor '" + std::string(val) + "'"); return false; }
      r.from = *a;
    } else if (key == "to") {
      auto s = parse_actor_set(val);
      if (!s) { ctx.fail("bad actor list '" + std::string(val) + "'"); return false; }
      r.to = *s;
    } else if (key == "view") {
      auto v = to_u64(val);
      if (!v) { ctx.fail("bad view '" + std::string(val) + "'"); return false; }
      r.view = *v;
    } else if (key == "block") {
      r.block_tag = std::string(val);
    } else if (key == "window") {
      size_t dots = val.find("..");
      if (dots == std::string_view::npos) {
        ctx.fail("window must be from..to");
        return false;
      }
      auto lo = to_u64(val.substr(0, dots));
      if (!lo) { ctx.fail("bad window start"); return false; }
      r.window_from = *lo;
      std::string_view hi = val.substr(dots + 2);
      if (!hi.empty()) {
        auto h = to_u64(hi);
        if (!h) { ctx.fail("bad window end"); return false; }
        r.window_to = *h;
      }
    } else if (key == "delta") {
      auto v = to_u64(val);
      if (!v) { ctx.fail("bad delta '" + std::string(val) + "'"); return false; }
      r.delay = *v;
    } else if (key == "redirect") {
      auto s = parse_actor_set(val);
      if (!s) { ctx.fail("bad actor list '" + std::string(val) + "'"); return false; }
      r.redirect_to = *s;
    } else {
      ctx.fail("unknown rule key '" + std::string(key) + "'");
      return false;
    }
  }
  if (!have_act) {
    ctx.fail("rule needs act=");
    return false;
  }
  if (r.action == FaultRule::Action::Redirect && r.redirect_to.empty()) {
    ctx.fail("redirect needs redirect=");
    return false;
  }
  return true;
}

// "<client>@<tick>" with an optional payload after whitespace.
bool parse_at(std::string_view value, uint32_t& client, Tick& at,
              std::string* payload, LineCtx& ctx) {
  std::string_view head = value;
  size_t ws = value.find_first_of(" \t");
  if (ws != std::string_view::npos) {
    head = value.substr(0, ws);
    if (payload) *payload = std::string(trim(value.substr(ws + 1)));
  }
  size_t atp = head.find('@');
  if (atp == std::string_view::npos) {
    ctx.fail("expected <client>@<tick>");
    return false;
  }
  auto c = to_u64(head.substr(0, atp));
  auto t = to_u64(head.substr(atp + 1));
  if (!c || !t) {
    ctx.fail("expected <client>@<tick>");
    return false;
  }
  client = static_cast<uint32_t>(*c);
  at = *t;
  return true;
}

}  // namespace

ParseResult parse_scenario(std::string_view text) {
  Scenario sc;
  ParseResult out;
  size_t lineno = 0;
  for (auto raw : split(text, '\n')) {
    ++lineno;
    std::string_view line = raw;
    size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    if (trim(line).empty()) continue;
    size_t eq = line.find('=');
    LineCtx ctx;
    ctx.line = lineno;
    if (eq == std::string_view::npos) {
      ctx.col = 1 + (trim(line).data() - raw.data());
      ctx.fail("expected 'section.key = value'");
      out.error = ctx.err;
      return out;
    }
    std::string_view key = trim(line.substr(0, eq));
    std::string_view value = trim(line.substr(eq + 1));
    ctx.col = value.empty() ? eq + 2 : 1 + (value.data() - raw.data());
    size_t keycol = 1 + (key.data() - raw.data());

    auto fail_key = [&](const std::string& msg) {
      out.error = ParseError{lineno, keycol, msg};
    };
    auto num = [&](uint64_t& slot) -> bool {
      auto v = to_u64(value);
      if (!v) {
        ctx.fail("expected a number, got '" + std::string(value) + "'");
        return false;
      }
      slot = *v;
      return true;
    };

    uint64_t tmp = 0;
    if (key == "config.n") {
      if (!num(tmp)) { out.error = ctx.err; return out; }
      sc.config.n = static_cast<uint32_t>(tmp);
    } else if (key == "config.protocol") {
      auto p = parse_protocol(value);
      if (!p) {
        ctx.fail("unknown protocol '" + std::string(value) + "'");
        out.error = ctx.err;
        return out;
      }
      sc.config.protocol = *p;
    } else if (key == "config.t_star") {
      if (!num(sc.config.t_star)) { out.error = ctx.err; return out; }
    } else if (key == "config.max_views") {
      if (!num(sc.config.max_views)) { out.error = ctx.err; return out; }
    } else if (key == "config.t0") {
      if (!num(sc.config.t0)) { out.error = ctx.err; return out; }
    } else if (key == "config.seed") {
      if (!num(sc.config.seed)) { out.error = ctx.err; return out; }
    } else if (key == "run.heights") {
      if (!num(sc.run.heights)) { out.error = ctx.err; return out; }
    } else if (key == "run.max_ticks") {
      if (!num(sc.run.max_ticks)) { out.error = ctx.err; return out; }
    } else if (key == "clients.count") {
      if (!num(tmp)) { out.error = ctx.err; return out; }
      sc.clients.count = static_cast<uint32_t>(tmp);
    } else if (key == "client.request") {
      ClientScript::Request rq;
      if (!parse_at(value, rq.client, rq.at, &rq.payload, ctx)) {
        out.error = ctx.err;
        return out;
      }
      sc.clients.requests.push_back(rq);
    } else if (key == "client.fail") {
      ClientScript::Fail fl;
      if (!parse_at(value, fl.client, fl.at, nullptr, ctx)) {
        out.error = ctx.err;
        return out;
      }
      sc.clients.fails.push_back(fl);
    } else if (key == "adversary.controlled") {
      auto xs = parse_u32_list(value);
      if (!xs) {
        ctx.fail("bad node list '" + std::string(value) + "'");
        out.error = ctx.err;
        return out;
      }
      sc.plan.controlled = *xs;
    } else if (key == "adversary.directive") {
      Directive d;
      if (!parse_directive(value, d, ctx)) {
        out.error = ctx.err;
        return out;
      }
      sc.plan.directives.push_back(d);
    } else if (key == "network.rule") {
      FaultRule r;
      if (!parse_rule(value, r, ctx)) {
        out.error = ctx.err;
        return out;
      }
      sc.rules.push_back(r);
    } else {
      fail_key("unknown key '" + std::string(key) + "'");
      return out;
    }
  }
  if (sc.config.n == 0) {
    out.error = ParseError{lineno, 1, "config.n must be at least 1"};
    return out;
  }
  for (const Directive& d : sc.plan.directives) {
    if (!sc.plan.controls(d.node)) {
      out.error = ParseError{lineno, 1,
                             "directive for node " + std::to_string(d.node) +
                                 " which is not in adversary.controlled"};
      return out;
    }
  }
  out.scenario = sc;
  return out;
}

std::string serialize_scenario(const Scenario& sc) {
  std::ostringstream os;
  os << "# dbftsim scenario\n";
  os << "config.n = " << sc.config.n << "\n";
  os << "config.protocol = " << protocol_name(sc.config.protocol) << "\n";
  os << "config.t_star = " << sc.config.t_star << "\n";
  os << "config.max_views = " << sc.config.max_views << "\n";
  if (sc.config.t0) os << "config.t0 = " << sc.config.t0 << "\n";
  os << "config.seed = " << sc.config.seed << "\n";
  os << "run.heights = " << sc.run.heights << "\n";
  os << "run.max_ticks = " << sc.run.max_ticks << "\n";
  os << "clients.count = " << sc.clients.count << "\n";
  for (const auto& rq : sc.clients.requests) {
    os << "client.request = " << rq.client << "@" << rq.at;
    if (!rq.payload.empty()) os << " " << rq.payload;
    os << "\n";
  }
  for (const auto& fl : sc.clients.fails) {
    os << "client.fail = " << fl.client << "@" << fl.at << "\n";
  }
  if (!sc.plan.controlled.empty()) {
    os << "adversary.controlled = ";
    for (size_t i = 0; i < sc.plan.controlled.size(); ++i) {
      if (i) os << ",";
      os << sc.plan.controlled[i];
    }
    os << "\n";
  }
  for (const Directive& d : sc.plan.directives) {
    os << "adversary.directive = " << d.describe() << "\n";
  }
  for (const FaultRule& r : sc.rules) {
    os << "network.rule = " << r.describe() << "\n";
  }
  return os.str();
}

std::vector<std::string> builtin_names() {
  return {"honest", "attack-f2", "attack-f1"};
}

std::optional<Scenario> builtin_scenario(std::string_view name) {
  Scenario sc;
  sc.config.n = 7;
  sc.config.t_star = 15;
  sc.config.protocol = Protocol::TwoPhase;
  sc.config.max_views = 8;
  sc.config.seed = 7;

  if (name == "honest") {
    // Seven honest delegates chain five blocks; one client drives height 0.
    sc.run.heights = 5;
    sc.run.max_ticks = 500;
    sc.clients.count = 1;
    sc.clients.requests.push_back({0, 0, "tx0"});
    return sc;
  }

  if (name == "attack-f2") {
    // Two controlled nodes. Node 0 is the height-0 speaker and proposes
    // block1 to nodes 1-3 but block2 to nodes 4-6. Node 1 archives every
    // signature on block2. The split view times out; the view-1 speaker
    // (node 6) proposes b0.1, which the honest majority publishes while the
    // controlled pair stays silent toward it. On seeing that publication,
    // node 1 signs block2 itself and replays the archive, completing a
    // second certificate for the same height.
    sc.run.heights = 1;
    sc.run.max_ticks = 600;
    sc.plan.controlled = {0, 1};
    Directive eq;
    eq.node = 0;
    eq.action = AdvAction::Equivocate;
    eq.when = AdvWhen::OnPropose;
    eq.view = 0;
    eq.block_a = "block1";
    eq.part_a = {1, 2, 3};
    eq.block_b = "block2";
    eq.part_b = {4, 5, 6};
    sc.plan.directives.push_back(eq);
    Directive hv;
    hv.node = 1;
    hv.action = AdvAction::Harvest;
    hv.when = AdvWhen::Always;
    hv.block_a = "block2";
    sc.plan.directives.push_back(hv);
    for (uint32_t nid : {0u, 1u}) {
      Directive sil;
      sil.node = nid;
      sil.action = AdvAction::Silence;
      sil.when = AdvWhen::OnDeliver;
      sil.kind = MsgKind::Prepare;
      sil.view = 1;
      sc.plan.directives.push_back(sil);
    }
    Directive fg;
    fg.node = 1;
    fg.action = AdvAction::ForgeLate;
    fg.when = AdvWhen::OnPublish;
    fg.block_a = "block2";
    sc.plan.directives.push_back(fg);
    return sc;
  }

  if (name == "attack-f1") {
    // One controlled node. The honest height-0 speaker proposes b0.0, but
    // the proposal and the responses to it reach nodes 1-3 a hundred ticks
    // late, so only nodes 4-6 answer in time: four signatures, one short of
    // quorum. The view times out and node 6 leads an honest round on b0.1.
    // The stragglers then arrive at controlled node 1, which answers the
    // stale proposal as if current and replays everything it archived,
    // completing the b0.0 certificate after b0.1 was published.
    sc.run.heights = 1;
    sc.run.max_ticks = 600;
    sc.plan.controlled = {1};
    Directive hv;
    hv.node = 1;
    hv.action = AdvAction::Harvest;
    hv.when = AdvWhen::Always;
    hv.block_a = "b0.0";
    sc.plan.directives.push_back(hv);
    Directive ad;
    ad.node = 1;
    ad.action = AdvAction::AdoptStale;
    ad.when = AdvWhen::OnDeliver;
    ad.kind = MsgKind::Prepare;
    ad.stale_only = true;
    sc.plan.directives.push_back(ad);
    Directive fg;
    fg.node = 1;
    fg.action = AdvAction::ForgeLate;
    fg.when = AdvWhen::OnHarvest;
    fg.block_a = "b0.0";
    sc.plan.directives.push_back(fg);
    FaultRule prep;
    prep.kind = MsgKind::Prepare;
    prep.from = ActorId::delegate(0);
    prep.to = {ActorId::delegate(1), ActorId::delegate(2), ActorId::delegate(3)};
    prep.window_from = 0;
    prep.window_to = 20;
    prep.action = FaultRule::Action::Delay;
    prep.delay = 100;
    sc.rules.push_back(prep);
    FaultRule resp;
    resp.kind = MsgKind::Response;
    resp.block_tag = "b0.0";
    resp.to = prep.to;
    resp.window_from = 0;
    resp.window_to = 20;
    resp.action = FaultRule::Action::Delay;
    resp.delay = 100;
    sc.rules.push_back(resp);
    return sc;
  }

  return std::nullopt;
}

}  // namespace dbft
