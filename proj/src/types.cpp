// Copyright (c) 2026 the dbftsim authors.
// Distributed under the MIT software license, see the accompanying
// file LICENSE.

#include "dbft/types.hpp"

#include <cstdio>
#include <cstdlib>

namespace dbft {

std::string ActorId::label() const {
  return (is_client() ? "c" : "n") + std::to_string(index());
}

std::optional<ActorId> parse_actor(std::string_view s) {
  if (s.empty()) return std::nullopt;
  bool client = false;
  if (s.front() == 'n' || s.front() == 'c') {
    client = s.front() == 'c';
    s.remove_prefix(1);
  }
  if (s.empty()) return std::nullopt;
  uint32_t idx = 0;
  for (char ch : s) {
    if (ch < '0' || ch > '9') return std::nullopt;
    idx = idx * 10 + static_cast<uint32_t>(ch - '0');
  }
  return client ? ActorId::client(idx) : ActorId::delegate(idx);
}

std::string protocol_name(Protocol p) {
  return p == Protocol::TwoPhase ? "two-phase" : "three-phase";
}

std::optional<Protocol> parse_protocol(std::string_view s) {
  if (s == "two-phase") return Protocol::TwoPhase;
  if (s == "three-phase") return Protocol::ThreePhase;
  return std::nullopt;
}

uint32_t select_speaker(uint64_t height, uint64_t view, uint32_t n) {
  int64_t r = static_cast<int64_t>(height % n) - static_cast<int64_t>(view % n);
  if (r < 0) r += n;
  return static_cast<uint32_t>(r);
}

Tick view_deadline(uint64_t view, Tick t_star) {
  uint64_t shift = view + 1;
  if (shift > 40) shift = 40;
  return t_star << shift;
}

bool conflicts(const BlockId& a, const BlockId& b) {
  return a.height == b.height && a.tag != b.tag;
}

std::string honest_tag(uint64_t height, uint64_t view) {
  return "b" + std::to_string(height) + "." + std::to_string(view);
}

std::string kind_name(MsgKind k) {
  switch (k) {
    case MsgKind::Request: return "REQUEST";
    case MsgKind::Reply: return "REPLY";
    case MsgKind::Prepare: return "PREPARE";
    case MsgKind::Response: return "RESPONSE";
    case MsgKind::Commit: return "COMMIT";
    case MsgKind::ViewChange: return "VIEWCHANGE";
  }
  return "?";
}

std::optional<MsgKind> parse_kind(std::string_view s) {
  if (s == "REQUEST") return MsgKind::Request;
  if (s == "REPLY") return MsgKind::Reply;
  if (s == "PREPARE") return MsgKind::Prepare;
  if (s == "RESPONSE") return MsgKind::Response;
  if (s == "COMMIT") return MsgKind::Commit;
  if (s == "VIEWCHANGE") return MsgKind::ViewChange;
  return std::nullopt;
}

namespace {

void append_field(std::string& out, std::string_view field) {
  uint32_t len = static_cast<uint32_t>(field.size());
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((len >> (8 * i)) & 0xff));
  out.append(field.data(), field.size());
}

}  // namespace

std::string canonical_bytes(MsgKind kind, const View& view,
                            const std::optional<BlockId>& block, ActorId sender,
                            Tick timestamp) {
  std::string out;
  append_field(out, kind_name(kind));
  append_field(out, std::to_string(view.h));
  append_field(out, std::to_string(view.v));
  append_field(out, block ? block->tag : std::string());
  append_field(out, sender.label());
  append_field(out, std::to_string(timestamp));
  return out;
}

std::string canonical_bytes(const Msg& m) {
  return canonical_bytes(m.kind, m.view, m.block, m.sender, m.timestamp);
}

uint64_t fnv1a64(std::string_view bytes) {
  uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

Signature sign(ActorId signer, std::string_view content) {
  return Signature{signer, fnv1a64(content)};
}

bool verify(const Signature& sig, std::string_view content, ActorId claimed) {
  return sig.signer == claimed && sig.digest == fnv1a64(content);
}

Msg make_signed(MsgKind kind, View view, std::optional<BlockId> block,
                ActorId sender, Tick timestamp) {
  Msg m{kind, view, std::move(block), sender, timestamp, {}};
  m.sig = sign(sender, canonical_bytes(m));
  return m;
}

bool msg_verifies(const Msg& m) {
  return verify(m.sig, canonical_bytes(m), m.sender);
}

std::string hex16(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string describe(const Msg& m) {
  std::string out = kind_name(m.kind);
  out += " h=" + std::to_string(m.view.h);
  out += " v=" + std::to_string(m.view.v);
  out += " b=" + (m.block ? m.block->tag : std::string("-"));
  out += " from=" + m.sender.label();
  out += " t=" + std::to_string(m.timestamp);
  out += " sig=" + m.sig.signer.label() + ":" + hex16(m.sig.digest);
  return out;
}

std::vector<ActorId> Certificate::signers() const {
  std::vector<ActorId> out;
  out.reserve(members.size());
  for (const auto& [id, view] : members) out.push_back(id);
  return out;
}

std::string join_labels(const std::vector<ActorId>& ids, char sep) {
  std::string out;
  for (size_t i = 0; i < ids.size(); ++i) {
    if (i) out.push_back(sep);
    out += ids[i].label();
  }
  return out;
}

}  // namespace dbft
