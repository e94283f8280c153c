// Copyright (c) 2026 the dbftsim authors.
// Distributed under the MIT software license, see the accompanying
// file LICENSE.

#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dbft {

using Tick = uint64_t;

// Every message spends exactly one tick in flight unless a fault rule says
// otherwise.
inline constexpr Tick kBaseLatency = 1;

// Identity of a protocol actor. Consensus delegates and clients share one id
// space; the high bit marks clients. Delegates render as "n<i>", clients as
// "c<i>".
class ActorId {
 public:
  ActorId() = default;
  static ActorId delegate(uint32_t index) { return ActorId(index); }
  static ActorId client(uint32_t index) { return ActorId(index | kClientBit); }

  bool is_client() const { return (raw_ & kClientBit) != 0; }
  bool is_delegate() const { return !is_client(); }
  uint32_t index() const { return raw_ & ~kClientBit; }
  uint32_t raw() const { return raw_; }
  std::string label() const;

  auto operator<=>(const ActorId&) const = default;

 private:
  explicit ActorId(uint32_t raw) : raw_(raw) {}
  static constexpr uint32_t kClientBit = 0x80000000u;
  uint32_t raw_ = 0;
};

// Accepts "n3", "c0" or a bare delegate index.
std::optional<ActorId> parse_actor(std::string_view s);

enum class Protocol {
  TwoPhase,    // publish on a response quorum, counted across views
  ThreePhase,  // response quorum locks, publish on a commit quorum
};

std::string protocol_name(Protocol p);
std::optional<Protocol> parse_protocol(std::string_view s);

struct Config {
  uint32_t n = 7;
  Tick t_star = 15;  // base timeout unit
  Protocol protocol = Protocol::TwoPhase;
  uint64_t max_views = 8;  // view budget per height before a run counts as stalled
  Tick t0 = 0;             // tolerant time per height; 0 selects the 2^6 * t_star default
  uint64_t seed = 0;

  uint32_t max_faulty() const { return (n - 1) / 3; }
  uint32_t quorum() const { return 2 * max_faulty() + 1; }
  Tick tolerant_time() const { return t0 ? t0 : t_star << 6; }
};

// Rotating speaker for (height, view): (h - v) mod n, kept non-negative.
uint32_t select_speaker(uint64_t height, uint64_t view, uint32_t n);

// Timer budget granted to a view: 2^(view+1) * t_star. The shift saturates so
// absurd view numbers stay finite.
Tick view_deadline(uint64_t view, Tick t_star);

struct View {
  uint64_t v = 0;
  uint64_t h = 0;
  auto operator<=>(const View&) const = default;
};

struct BlockId {
  uint64_t height = 0;
  std::string tag;
  auto operator<=>(const BlockId&) const = default;
};

// Two proposals conflict when they claim the same height with different tags.
bool conflicts(const BlockId& a, const BlockId& b);

// Tag an honest speaker assigns to its proposal at (h, v).
std::string honest_tag(uint64_t height, uint64_t view);

enum class MsgKind { Request, Reply, Prepare, Response, Commit, ViewChange };

std::string kind_name(MsgKind k);
std::optional<MsgKind> parse_kind(std::string_view s);

struct Signature {
  ActorId signer;
  uint64_t digest = 0;
  auto operator<=>(const Signature&) const = default;
};

struct Msg {
  MsgKind kind = MsgKind::Request;
  View view;
  std::optional<BlockId> block;
  ActorId sender;
  Tick timestamp = 0;
  Signature sig;
  auto operator<=>(const Msg&) const = default;
};

// Canonical byte string a signature covers: each field is length-prefixed
// (u32 little endian) and concatenated in a fixed order. This is the only
// externally visible encoding; traces record the digests it produces.
std::string canonical_bytes(MsgKind kind, const View& view,
                            const std::optional<BlockId>& block, ActorId sender,
                            Tick timestamp);
std::string canonical_bytes(const Msg& m);

uint64_t fnv1a64(std::string_view bytes);

Signature sign(ActorId signer, std::string_view content);
bool verify(const Signature& sig, std::string_view content, ActorId claimed);

Msg make_signed(MsgKind kind, View view, std::optional<BlockId> block,
                ActorId sender, Tick timestamp);
bool msg_verifies(const Msg& m);

std::string hex16(uint64_t v);

// One-line message summary used verbatim in trace lines.
std::string describe(const Msg& m);

// A quorum of distinct signers backing one block at one height. kind records
// which message kind formed it (RESPONSE or COMMIT); a speaker's PREPARE
// counts as its response-equivalent signature on its own proposal.
struct Certificate {
  uint64_t height = 0;
  BlockId block;
  MsgKind kind = MsgKind::Response;
  std::vector<std::pair<ActorId, uint64_t>> members;  // (signer, view), sorted by signer

  std::vector<ActorId> signers() const;
  auto operator<=>(const Certificate&) const = default;
};

std::string join_labels(const std::vector<ActorId>& ids, char sep = ',');

}  // namespace dbft
