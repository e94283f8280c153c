// Copyright (c) 2026 the dbftsim authors.
// Distributed under the MIT software license, see the accompanying
// file LICENSE.

#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dbft/sim.hpp"
#include "dbft/trace.hpp"
#include "dbft/types.hpp"

namespace dbft {

// How distinct signatures are counted toward a certificate: across all views
// of a height, or only within one view.
enum class CountingRule { ViewAgnostic, ViewBound };

struct ForkReport {
  uint64_t height = 0;
  Certificate cert_a;  // lexicographically smaller block tag
  Certificate cert_b;
  std::vector<ActorId> overlap;  // signers present in both certificates
};

struct LivenessVerdict {
  enum class Kind { Progressed, Stalled, Crashed };
  Kind kind = Kind::Progressed;
  std::vector<uint64_t> published_heights;
  uint64_t stuck_height = 0;
  uint64_t views_exhausted = 0;  // stalled: views burned at the stuck height
  Tick elapsed = 0;              // crashed: time spent at the stuck height
  Tick budget = 0;               // tolerant time that was exceeded
};

struct CertStat {
  Certificate cert;
  uint32_t faulty_members = 0;
  uint32_t honest_members = 0;
};

// A conflicting certificate whose total meets the quorum while containing
// more than honest_total/3 signatures, i.e. the counting identity a correct
// member set is supposed to make impossible.
struct CountingViolation {
  uint64_t height = 0;
  std::string forged_tag;
  std::string honest_tag;
  uint32_t forged_total = 0;
  uint32_t honest_total = 0;
  uint32_t bound = 0;  // honest_total / 3
};

struct AccountingReport {
  std::vector<CertStat> certs;
  std::vector<CountingViolation> violations;
};

struct Verdict {
  Protocol protocol = Protocol::TwoPhase;
  bool forked = false;
  std::optional<ForkReport> fork;
  LivenessVerdict liveness;
  AccountingReport accounting;
  uint64_t trace_events = 0;
  bool controlled_exceeds_f = false;
};

// All distinct messages that were put on the wire, in first-send order.
std::vector<Msg> sent_messages(const Trace& trace);

// Groups block-bearing signatures into certificates of distinct signers and
// returns every group that reaches the quorum for n. kind selects the family:
// Response certificates absorb the speaker's PREPARE as a self-signature,
// Commit certificates count COMMIT messages only.
std::vector<Certificate> collect_certificates(const std::vector<Msg>& msgs,
                                              CountingRule rule, MsgKind kind,
                                              uint32_t n);

// Checks one pool of messages for a single valid certificate.
std::optional<Certificate> validate_certificate(const std::vector<Msg>& pool,
                                                CountingRule rule, uint32_t n);

// Looks for two certificates for different blocks at one height, or honest
// ledgers that disagree. Reports the lowest affected height.
std::optional<ForkReport> detect_fork(
    const std::vector<std::vector<BlockId>>& honest_ledgers,
    const std::vector<Certificate>& certs);

struct LivenessBounds {
  uint64_t max_views = 8;
  Tick t0 = 960;
};

LivenessVerdict check_liveness(const Trace& trace, const LivenessBounds& bounds,
                               uint32_t n, const std::set<uint32_t>& faulty);

AccountingReport signature_accounting(
    const std::vector<Certificate>& certs, const std::set<uint32_t>& faulty,
    const std::vector<std::vector<BlockId>>& honest_ledgers);

// Structural audits over a finished trace: monotone clock, send/deliver
// conservation, no delivery without a send, no honest signature first put on
// the wire by someone else, and no honest double-signing. Returns one line
// per violation; empty means clean.
std::vector<std::string> audit_trace(const Trace& trace,
                                     const std::set<uint32_t>& controlled);

Verdict evaluate(const Simulation& sim);

// Renders "=== VERDICT ===" followed by key = value lines.
std::string render_verdict(const Verdict& v);

}  // namespace dbft
