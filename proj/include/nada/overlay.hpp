// Copyright (c) 2026 The nadasim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NADA_OVERLAY_HPP
#define NADA_OVERLAY_HPP

#include <optional>
#include <string>

#include "nada/core_types.hpp"
#include "nada/crypto.hpp"
#include "nada/simnet.hpp"
#include "nada/trust_anchor.hpp"

namespace nada::overlay {

inline constexpr size_t kChunkSize = 1024;
inline constexpr uint64_t kDefaultTicketTtl = 1000;

// ISP-issued trusted ticket binding requester, target node, and overlay.
// The session key travels inside key_material, recoverable only by the
// target in its reference platform state; the requester's reference
// measurements ride along so the target can attest the requesting node.
struct Ticket {
  std::string issuer;  // node management id
  ResourceId requester;
  std::string target_node;
  ResourceId overlay;
  Bytes nonce;
  uint64_t issued_at = 0;
  uint64_t ttl = kDefaultTicketTtl;
  Bytes key_material;
  trust::PcrArray requester_ref_pcrs{};
  SignPub requester_att_pub{};
  Signature signature{};

  Bytes signing_bytes() const;
  Bytes encode() const;
  static Result<Ticket> decode(ByteView data);
  bool expired(uint64_t now) const { return now > issued_at + ttl; }
};

// Established symmetric channel between two entities on one overlay.
// Payloads are secretbox'd with a per-direction counter nonce; the header
// is bound in as associated data via the nonce context.
struct Session {
  std::string self;
  std::string peer;
  std::string overlay;  // ResourceId string, or "mgmt" for the management link
  SymKey key{};
  uint64_t established_at = 0;
  uint64_t send_ctr = 0;
  uint64_t recv_high = 0;
  std::string conf_mitigation = "M13";  // named when AEAD or freshness checks fire
};

sim::WireMessage session_wrap(Session& s, sim::MsgType type, ByteView plaintext);
Result<Bytes> session_open(Session& s, const sim::WireMessage& msg);

// Like session_open but also records delivery fate with the network.
Result<Bytes> session_open_marked(sim::Network& net, Session& s,
                                  const sim::WireMessage& msg, uint64_t delivery_id);

Result<void> verify_metadata(const MetaData& meta, const SignPub& isp_pub);

size_t chunk_count(size_t content_size);
Bytes chunk_of(ByteView content, size_t index);

// Handshake and data message bodies.

struct AuthChallengeBody {
  std::string initiator;
  Bytes nonce;
  Bytes encode() const;
  static Result<AuthChallengeBody> decode(ByteView data);
};

struct AuthOfferBody {
  std::string responder;
  Bytes initiator_nonce;
  Bytes responder_nonce;
  Signature isp_sig{};  // over ("auth-offer", initiator, both nonces, responder)
  Bytes encode() const;
  static Result<AuthOfferBody> decode(ByteView data);
  Bytes signing_bytes() const;
};

struct AuthQuoteBody {
  std::string node;
  SignPub attestation_pub{};
  Bytes quote;  // trust::Quote over sha256(initiator_nonce || responder_nonce)
  Bytes encode() const;
  static Result<AuthQuoteBody> decode(ByteView data);
};

struct AuthAcceptBody {
  Bytes key_blob;  // session key bound to the node's reference state
  Signature isp_sig{};  // over ("auth-accept", both nonces, key_blob)
  Bytes encode() const;
  static Result<AuthAcceptBody> decode(ByteView data);
  static Bytes signing_bytes(ByteView initiator_nonce, ByteView responder_nonce,
                             ByteView key_blob);
};

struct TicketRequestBody {
  ResourceId requester;
  std::string target_node;
  ResourceId overlay;
  Bytes encode() const;
  static Result<TicketRequestBody> decode(ByteView data);
};

struct TicketGrantBody {
  Bytes ticket;  // encoded Ticket
  Bytes requester_key_blob;  // session key bound to the requester's state
  trust::PcrArray target_ref_pcrs{};
  SignPub target_att_pub{};
  Bytes encode() const;
  static Result<TicketGrantBody> decode(ByteView data);
};

struct NodeAuthRequestBody {
  Bytes ticket;  // encoded Ticket
  Bytes quote;   // requesting node's quote over the ticket nonce
  Bytes encode() const;
  static Result<NodeAuthRequestBody> decode(ByteView data);
};

struct NodeAuthAcceptBody {
  Bytes quote;  // target node's quote over the ticket nonce
  Bytes encode() const;
  static Result<NodeAuthAcceptBody> decode(ByteView data);
};

struct ContentRequestBody {
  std::string content_id;
  uint64_t index = 0;
  Bytes encode() const;
  static Result<ContentRequestBody> decode(ByteView data);
};

struct ContentChunkBody {
  std::string content_id;
  uint64_t index = 0;
  uint64_t total = 0;
  Bytes data;
  Bytes encode() const;
  static Result<ContentChunkBody> decode(ByteView data);
};

}  // namespace nada::overlay

#endif  // NADA_OVERLAY_HPP
