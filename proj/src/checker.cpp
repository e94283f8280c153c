// Copyright (c) 2026 the dbftsim authors.
// Distributed under the MIT software license, see the accompanying
// file LICENSE.

#include "dbft/checker.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <sstream>

namespace dbft {

namespace {

uint32_t quorum_for(uint32_t n) { return 2 * ((n - 1) / 3) + 1; }

bool is_cert_kind(MsgKind family, MsgKind k) {
  if (family == MsgKind::Commit) return k == MsgKind::Commit;
  return k == MsgKind::Prepare || k == MsgKind::Response;
}

// Pulls "key=<number>" out of a detail string; STATE and TIMER details are
// the only text the liveness checker needs to read back.
std::optional<uint64_t> detail_num(const std::string& detail,
                                   const std::string& key) {
  std::string needle = key + "=";
  size_t pos = 0;
  while (true) {
    pos = detail.find(needle, pos);
    if (pos == std::string::npos) return std::nullopt;
    if (pos == 0 || detail[pos - 1] == ' ') break;
    pos += needle.size();
  }
  size_t start = pos + needle.size();
  size_t end = start;
  while (end < detail.size() && detail[end] >= '0' && detail[end] <= '9') ++end;
  if (end == start) return std::nullopt;
  uint64_t out = 0;
  std::from_chars(detail.data() + start, detail.data() + end, out);
  return out;
}

std::optional<std::string> detail_str(const std::string& detail,
                                      const std::string& key) {
  std::string needle = key + "=";
  size_t pos = detail.find(needle);
  if (pos == std::string::npos) return std::nullopt;
  size_t start = pos + needle.size();
  size_t end = detail.find(' ', start);
  if (end == std::string::npos) end = detail.size();
  return detail.substr(start, end - start);
}

bool honest_node_actor(const std::string& actor,
                       const std::set<uint32_t>& faulty, uint32_t n,
                       uint32_t* out = nullptr) {
  auto id = parse_actor(actor);
  if (!id || !id->is_delegate() || id->index() >= n) return false;
  if (faulty.count(id->index())) return false;
  if (out) *out = id->index();
  return true;
}

}  // namespace

std::vector<Msg> sent_messages(const Trace& trace) {
  std::vector<Msg> out;
  std::set<Msg> seen;
  for (const TraceEvent& ev : trace.events()) {
    if (ev.action != TraceAction::Send || !ev.msg) continue;
    if (seen.insert(*ev.msg).second) out.push_back(*ev.msg);
  }
  return out;
}

std::vector<Certificate> collect_certificates(const std::vector<Msg>& msgs,
                                              CountingRule rule, MsgKind kind,
                                              uint32_t n) {
  uint32_t q = quorum_for(n);
  // (height, view-or-0, tag) -> signer -> view signed at
  std::map<std::tuple<uint64_t, uint64_t, std::string>,
           std::map<ActorId, uint64_t>>
      groups;
  for (const Msg& m : msgs) {
    if (!is_cert_kind(kind, m.kind) || !m.block) continue;
    if (!m.sig.signer.is_delegate() || m.sig.signer.index() >= n) continue;
    uint64_t vkey = rule == CountingRule::ViewBound ? m.view.v : 0;
    auto& pool = groups[{m.view.h, vkey, m.block->tag}];
    pool.emplace(m.sig.signer, m.view.v);  // first signature per signer counts
  }
  std::vector<Certificate> out;
  for (const auto& [key, pool] : groups) {
    if (pool.size() < q) continue;
    Certificate cert;
    cert.height = std::get<0>(key);
    cert.block = BlockId{std::get<0>(key), std::get<2>(key)};
    cert.kind = kind == MsgKind::Commit ? MsgKind::Commit : MsgKind::Response;
    for (const auto& [signer, v] : pool) cert.members.emplace_back(signer, v);
    out.push_back(cert);
  }
  return out;
}

std::optional<Certificate> validate_certificate(const std::vector<Msg>& pool,
                                                CountingRule rule, uint32_t n) {
  bool any_commit = std::any_of(pool.begin(), pool.end(), [](const Msg& m) {
    return m.kind == MsgKind::Commit;
  });
  auto certs = collect_certificates(
      pool, rule, any_commit ? MsgKind::Commit : MsgKind::Response, n);
  if (certs.empty()) return std::nullopt;
  return certs.front();
}

std::optional<ForkReport> detect_fork(
    const std::vector<std::vector<BlockId>>& honest_ledgers,
    const std::vector<Certificate>& certs) {
  // Certificate evidence: two quorums for different blocks at one height.
  std::map<uint64_t, std::vector<const Certificate*>> by_height;
  for (const Certificate& c : certs) by_height[c.height].push_back(&c);

  std::optional<ForkReport> best;
  for (const auto& [h, list] : by_height) {
    for (size_t i = 0; i < list.size() && !best; ++i) {
      for (size_t j = i + 1; j < list.size(); ++j) {
        if (list[i]->block.tag == list[j]->block.tag) continue;
        ForkReport r;
        r.height = h;
        const Certificate* a = list[i];
        const Certificate* b = list[j];
        if (b->block.tag < a->block.tag) std::swap(a, b);
        r.cert_a = *a;
        r.cert_b = *b;
        auto sa = a->signers();
        auto sb = b->signers();
        std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(),
                              std::back_inserter(r.overlap));
        best = r;
        break;
      }
    }
    if (best) break;
  }

  // Ledger evidence: honest nodes that disagree about a published height.
  for (size_t h = 0;; ++h) {
    if (best && best->height <= h) break;
    std::set<std::string> tags;
    bool any = false;
    for (const auto& led : honest_ledgers) {
      if (led.size() > h) {
        tags.insert(led[h].tag);
        any = true;
      }
    }
    if (!any) break;
    if (tags.size() < 2) continue;
    ForkReport r;
    r.height = h;
    auto it = tags.begin();
    std::string tag_a = *it++;
    std::string tag_b = *it;
    auto find_cert = [&](const std::string& tag) {
      for (const Certificate& c : certs) {
        if (c.height == h && c.block.tag == tag) return c;
      }
      Certificate c;
      c.height = h;
      c.block = BlockId{h, tag};
      return c;
    };
    r.cert_a = find_cert(tag_a);
    r.cert_b = find_cert(tag_b);
    auto sa = r.cert_a.signers();
    auto sb = r.cert_b.signers();
    std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(),
                          std::back_inserter(r.overlap));
    best = r;
    break;
  }
  return best;
}

LivenessVerdict check_liveness(const Trace& trace, const LivenessBounds& bounds,
                               uint32_t n, const std::set<uint32_t>& faulty) {
  // Per height: first honest sighting, first honest publication, highest view
  // an honest node entered, and when the view budget ran out.
  std::map<uint64_t, Tick> started_at;
  std::map<uint64_t, Tick> published_at;
  std::map<uint64_t, uint64_t> max_view;
  std::map<uint64_t, Tick> stalled_at;
  Tick last_time = 0;

  for (const TraceEvent& ev : trace.events()) {
    last_time = std::max(last_time, ev.time);
    if (!honest_node_actor(ev.actor, faulty, n)) continue;
    if (ev.action == TraceAction::Publish && ev.cert) {
      uint64_t h = ev.cert->height;
      if (!published_at.count(h)) published_at[h] = ev.time;
      continue;
    }
    if (ev.action != TraceAction::State) continue;
    auto h = detail_num(ev.detail, "h");
    auto v = detail_num(ev.detail, "v");
    auto phase = detail_str(ev.detail, "phase");
    if (!h || !v || !phase) continue;
    if (*phase == "published") continue;  // settling note, not a new round
    if (!started_at.count(*h)) started_at[*h] = ev.time;
    uint64_t& mv = max_view[*h];
    mv = std::max(mv, *v);
    if (*v >= bounds.max_views && !stalled_at.count(*h)) stalled_at[*h] = ev.time;
  }

  LivenessVerdict out;
  out.budget = bounds.t0;
  for (const auto& [h, t] : published_at) out.published_heights.push_back(h);

  for (const auto& [h, start] : started_at) {
    if (published_at.count(h)) continue;
    out.stuck_height = h;
    out.views_exhausted = max_view[h];
    out.elapsed = last_time > start ? last_time - start : 0;
    Tick stall_tick = stalled_at.count(h) ? stalled_at[h] : ~Tick(0);
    Tick crash_tick = out.elapsed > bounds.t0 ? start + bounds.t0 : ~Tick(0);
    if (stall_tick == ~Tick(0) && crash_tick == ~Tick(0)) {
      // Ran out of simulated time before either bound; closest call wins.
      out.kind = LivenessVerdict::Kind::Stalled;
    } else {
      out.kind = stall_tick <= crash_tick ? LivenessVerdict::Kind::Stalled
                                          : LivenessVerdict::Kind::Crashed;
    }
    return out;
  }
  out.kind = LivenessVerdict::Kind::Progressed;
  return out;
}

AccountingReport signature_accounting(
    const std::vector<Certificate>& certs, const std::set<uint32_t>& faulty,
    const std::vector<std::vector<BlockId>>& honest_ledgers) {
  AccountingReport out;
  for (const Certificate& c : certs) {
    CertStat st;
    st.cert = c;
    for (const auto& [signer, v] : c.members) {
      if (signer.is_delegate() && faulty.count(signer.index())) {
        ++st.faulty_members;
      } else {
        ++st.honest_members;
      }
    }
    out.certs.push_back(st);
  }

  auto ledger_tag = [&](uint64_t h) -> std::optional<std::string> {
    for (const auto& led : honest_ledgers) {
      if (led.size() > h) return led[h].tag;
    }
    return std::nullopt;
  };

  std::map<uint64_t, std::vector<const CertStat*>> by_height;
  for (const CertStat& st : out.certs) by_height[st.cert.height].push_back(&st);
  std::set<std::tuple<uint64_t, std::string, std::string>> seen;
  for (const auto& [h, list] : by_height) {
    auto honest = ledger_tag(h);
    for (size_t i = 0; i < list.size(); ++i) {
      for (size_t j = i + 1; j < list.size(); ++j) {
        const CertStat* a = list[i];
        const CertStat* b = list[j];
        if (a->cert.block.tag == b->cert.block.tag) continue;
        // The forged side is the one honest ledgers do not hold; without a
        // ledger to consult, the side carrying more faulty signers.
        const CertStat* forged;
        const CertStat* genuine;
        if (honest && a->cert.block.tag == *honest) {
          genuine = a;
          forged = b;
        } else if (honest && b->cert.block.tag == *honest) {
          genuine = b;
          forged = a;
        } else if (a->faulty_members != b->faulty_members) {
          forged = a->faulty_members > b->faulty_members ? a : b;
          genuine = forged == a ? b : a;
        } else {
          forged = a->cert.block.tag > b->cert.block.tag ? a : b;
          genuine = forged == a ? b : a;
        }
        uint32_t forged_total = static_cast<uint32_t>(forged->cert.members.size());
        uint32_t honest_total = static_cast<uint32_t>(genuine->cert.members.size());
        uint32_t bound = honest_total / 3;
        if (forged_total <= bound) continue;
        if (!seen.insert({h, forged->cert.block.tag, genuine->cert.block.tag})
                 .second) {
          continue;
        }
        CountingViolation viol;
        viol.height = h;
        viol.forged_tag = forged->cert.block.tag;
        viol.honest_tag = genuine->cert.block.tag;
        viol.forged_total = forged_total;
        viol.honest_total = honest_total;
        viol.bound = bound;
        out.violations.push_back(viol);
      }
    }
  }
  return out;
}

std::vector<std::string> audit_trace(const Trace& trace,
                                     const std::set<uint32_t>& controlled) {
  std::vector<std::string> out;
  Tick prev = 0;
  std::map<std::pair<Msg, ActorId>, long> obligations;
  std::set<Msg> sent_before;
  // (signer, h, v, kind) -> block tag, for honest one-signature-per-slot
  std::map<std::tuple<ActorId, uint64_t, uint64_t, MsgKind>, std::string> slots;

  for (const TraceEvent& ev : trace.events()) {
    if (ev.time < prev) {
      out.push_back("clock moved backwards at seq " + std::to_string(ev.seq));
    }
    prev = ev.time;

    if (ev.action == TraceAction::Send && ev.msg) {
      const Msg& m = *ev.msg;
      for (ActorId d : ev.dests) ++obligations[{m, d}];
      bool first = sent_before.insert(m).second;
      bool signer_honest = m.sig.signer.is_delegate()
                               ? !controlled.count(m.sig.signer.index())
                               : true;
      if (first && signer_honest && ev.actor != m.sig.signer.label()) {
        out.push_back("seq " + std::to_string(ev.seq) + ": " + ev.actor +
                      " originated a message signed by " +
                      m.sig.signer.label() + ": " + describe(m));
      }
      if (first && signer_honest && m.sig.signer.is_delegate() &&
          (m.kind == MsgKind::Prepare || m.kind == MsgKind::Response ||
           m.kind == MsgKind::Commit) &&
          m.block) {
        auto key = std::make_tuple(m.sig.signer, m.view.h, m.view.v, m.kind);
        auto [it, fresh] = slots.emplace(key, m.block->tag);
        if (!fresh && it->second != m.block->tag) {
          out.push_back("seq " + std::to_string(ev.seq) + ": " +
                        m.sig.signer.label() + " double-signed at h=" +
                        std::to_string(m.view.h) + " v=" +
                        std::to_string(m.view.v) + ": " + it->second + " vs " +
                        m.block->tag);
        }
      }
      continue;
    }

    if (ev.action == TraceAction::Deliver && ev.msg) {
      auto id = parse_actor(ev.actor);
      if (!id) continue;
      long& o = obligations[{*ev.msg, *id}];
      if (--o < 0) {
        out.push_back("seq " + std::to_string(ev.seq) +
                      ": delivery without a matching send to " + ev.actor +
                      ": " + describe(*ev.msg));
        o = 0;
      }
      continue;
    }

    if (ev.action == TraceAction::Drop && ev.actor == "net" && ev.msg &&
        ev.detail.rfind("invalid-message", 0) != 0) {
      for (ActorId d : ev.dests) {
        long& o = obligations[{*ev.msg, d}];
        if (--o < 0) {
          out.push_back("seq " + std::to_string(ev.seq) +
                        ": drop without a matching send to " + d.label() +
                        ": " + describe(*ev.msg));
          o = 0;
        }
      }
    }
  }
  return out;
}

Verdict evaluate(const Simulation& sim) {
  Verdict v;
  const Config& cfg = sim.config();
  v.protocol = cfg.protocol;
  v.trace_events = sim.trace().size();
  v.controlled_exceeds_f = sim.controlled_exceeds_f();

  auto msgs = sent_messages(sim.trace());
  CountingRule rule = cfg.protocol == Protocol::TwoPhase
                          ? CountingRule::ViewAgnostic
                          : CountingRule::ViewBound;
  MsgKind family = cfg.protocol == Protocol::TwoPhase ? MsgKind::Response
                                                      : MsgKind::Commit;
  auto certs = collect_certificates(msgs, rule, family, cfg.n);

  // Publication certificates observed in the trace join the pool; a node that
  // published from absorbed evidence may hold signatures never re-sent.
  std::set<std::pair<uint64_t, std::string>> have;
  for (const Certificate& c : certs) have.insert({c.height, c.block.tag});
  for (const TraceEvent& ev : sim.trace().events()) {
    if (ev.action != TraceAction::Publish || !ev.cert) continue;
    if (ev.cert->kind != (family == MsgKind::Commit ? MsgKind::Commit
                                                    : MsgKind::Response)) {
      continue;
    }
    if (have.insert({ev.cert->height, ev.cert->block.tag}).second) {
      certs.push_back(*ev.cert);
    }
  }
  std::sort(certs.begin(), certs.end(), [](const Certificate& a,
                                           const Certificate& b) {
    return std::tie(a.height, a.block.tag) < std::tie(b.height, b.block.tag);
  });

  auto ledgers = sim.honest_ledgers();
  v.fork = detect_fork(ledgers, certs);
  v.forked = v.fork.has_value();
  v.liveness = check_liveness(sim.trace(),
                              {cfg.max_views, cfg.tolerant_time()}, cfg.n,
                              sim.faulty_nodes());
  v.accounting = signature_accounting(certs, sim.faulty_nodes(), ledgers);
  return v;
}

static std::string cert_line(const Certificate& c) {
  std::string out = "h=" + std::to_string(c.height) + " b=" + c.block.tag +
                    " kind=" + kind_name(c.kind) + " signers=[" +
                    join_labels(c.signers()) + "]";
  return out;
}

std::string render_verdict(const Verdict& v) {
  std::ostringstream os;
  os << "=== VERDICT ===\n";
  os << "protocol = " << protocol_name(v.protocol) << "\n";
  os << "safety = " << (v.forked ? "forked" : "ok") << "\n";
  if (v.fork) {
    os << "fork.height = " << v.fork->height << "\n";
    os << "fork.cert_a = " << cert_line(v.fork->cert_a) << "\n";
    os << "fork.cert_b = " << cert_line(v.fork->cert_b) << "\n";
    os << "fork.overlap = [" << join_labels(v.fork->overlap) << "]\n";
  }
  switch (v.liveness.kind) {
    case LivenessVerdict::Kind::Progressed: {
      os << "liveness = progressed\n";
      os << "liveness.heights = [";
      for (size_t i = 0; i < v.liveness.published_heights.size(); ++i) {
        if (i) os << ",";
        os << v.liveness.published_heights[i];
      }
      os << "]\n";
      break;
    }
    case LivenessVerdict::Kind::Stalled:
      os << "liveness = stalled\n";
      os << "liveness.stuck_height = " << v.liveness.stuck_height << "\n";
      os << "liveness.views_exhausted = " << v.liveness.views_exhausted << "\n";
      break;
    case LivenessVerdict::Kind::Crashed:
      os << "liveness = crashed\n";
      os << "liveness.stuck_height = " << v.liveness.stuck_height << "\n";
      os << "liveness.elapsed = " << v.liveness.elapsed << "\n";
      os << "liveness.budget = " << v.liveness.budget << "\n";
      break;
  }
  os << "stats.certs = " << v.accounting.certs.size() << "\n";
  for (size_t i = 0; i < v.accounting.certs.size(); ++i) {
    const CertStat& st = v.accounting.certs[i];
    os << "stats.cert." << i << " = " << cert_line(st.cert)
       << " total=" << st.cert.members.size() << " faulty=" << st.faulty_members
       << " honest=" << st.honest_members << "\n";
  }
  os << "stats.violations = " << v.accounting.violations.size() << "\n";
  for (size_t i = 0; i < v.accounting.violations.size(); ++i) {
    const CountingViolation& viol = v.accounting.violations[i];
    os << "stats.violation." << i << " = h=" << viol.height << " forged="
       << viol.forged_tag << ":" << viol.forged_total << " honest="
       << viol.honest_tag << ":" << viol.honest_total << " bound=" << viol.bound
       << "\n";
  }
  if (v.controlled_exceeds_f) os << "warning.controlled_exceeds_f = 1\n";
  os << "events = " << v.trace_events << "\n";
  return os.str();
}

}  // namespace dbft
