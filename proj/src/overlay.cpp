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

#include "nada/overlay.hpp"

#include <cstring>

namespace nada::overlay {

namespace {

void put_sig(Encoder& e, const Signature& sig) {
  e.field(ByteView(sig.data(), sig.size()));
}

Result<Signature> get_sig(Decoder& d) {
  auto f = d.field();
  if (!f) return f.error();
  if (f.value().size() != kSigSize) {
    return make_error(Errc::IntegrityFailure, "signature width");
  }
  Signature s;
  std::memcpy(s.data(), f.value().data(), kSigSize);
  return s;
}

void put_pub(Encoder& e, const SignPub& p) { e.field(ByteView(p.data(), p.size())); }

Result<SignPub> get_pub(Decoder& d) {
  auto f = d.field();
  if (!f) return f.error();
  if (f.value().size() != 32) return make_error(Errc::IntegrityFailure, "pubkey width");
  SignPub p;
  std::memcpy(p.data(), f.value().data(), 32);
  return p;
}

void put_pcrs(Encoder& e, const trust::PcrArray& pcrs) {
  for (const auto& p : pcrs) e.field(digest_view(p));
}

Result<trust::PcrArray> get_pcrs(Decoder& d) {
  trust::PcrArray pcrs{};
  for (auto& p : pcrs) {
    auto f = d.field();
    if (!f) return f.error();
    if (f.value().size() != kDigestSize) {
      return make_error(Errc::IntegrityFailure, "pcr width");
    }
    std::memcpy(p.data(), f.value().data(), kDigestSize);
  }
  return pcrs;
}

// 15 bytes of channel context, one direction byte, 8 bytes of counter.
Nonce session_nonce(const Session& s, const std::string& sender, uint64_t counter) {
  const std::string& a = s.self < s.peer ? s.self : s.peer;
  const std::string& b = s.self < s.peer ? s.peer : s.self;
  Encoder e;
  e.str(a);
  e.str(b);
  e.str(s.overlay);
  Digest ctx = sha256(e.bytes());
  Nonce n{};
  std::memcpy(n.data(), ctx.data(), 15);
  n[15] = sender == a ? 0 : 1;
  for (int i = 0; i < 8; ++i) n[16 + i] = static_cast<uint8_t>(counter >> (8 * (7 - i)));
  return n;
}

}  // namespace

Bytes Ticket::signing_bytes() const {
  Encoder e;
  e.str(issuer);
  requester.encode(e);
  e.str(target_node);
  overlay.encode(e);
  e.field(nonce);
  e.u64(issued_at);
  e.u64(ttl);
  e.field(key_material);
  put_pcrs(e, requester_ref_pcrs);
  put_pub(e, requester_att_pub);
  return std::move(e).take();
}

Bytes Ticket::encode() const {
  Encoder e;
  e.field(signing_bytes());
  put_sig(e, signature);
  return std::move(e).take();
}

Result<Ticket> Ticket::decode(ByteView data) {
  Decoder outer(data);
  auto body = outer.field();
  if (!body) return body.error();
  auto sig = get_sig(outer);
  if (!sig) return sig.error();

  Decoder d(body.value());
  Ticket t;
  auto issuer = d.str();
  if (!issuer) return issuer.error();
  t.issuer = issuer.take();
  auto req = ResourceId::decode(d);
  if (!req) return req.error();
  t.requester = req.take();
  auto target = d.str();
  if (!target) return target.error();
  t.target_node = target.take();
  auto ov = ResourceId::decode(d);
  if (!ov) return ov.error();
  t.overlay = ov.take();
  auto nonce = d.field();
  if (!nonce) return nonce.error();
  t.nonce = nonce.take();
  auto at = d.u64();
  if (!at) return at.error();
  t.issued_at = at.value();
  auto ttl = d.u64();
  if (!ttl) return ttl.error();
  t.ttl = ttl.value();
  auto km = d.field();
  if (!km) return km.error();
  t.key_material = km.take();
  auto pcrs = get_pcrs(d);
  if (!pcrs) return pcrs.error();
  t.requester_ref_pcrs = pcrs.value();
  auto pub = get_pub(d);
  if (!pub) return pub.error();
  t.requester_att_pub = pub.value();
  t.signature = sig.take();
  return t;
}

sim::WireMessage session_wrap(Session& s, sim::MsgType type, ByteView plaintext) {
  sim::WireMessage msg;
  msg.type = type;
  msg.src = s.self;
  msg.dst = s.peer;
  msg.overlay = s.overlay == "mgmt" ? "" : s.overlay;
  msg.is_encrypted = true;
  msg.counter = ++s.send_ctr;
  // Header authenticated by folding it into the plaintext frame.
  Encoder frame;
  frame.tag(static_cast<uint8_t>(type));
  frame.str(s.self);
  frame.str(s.peer);
  frame.u64(msg.counter);
  frame.field(plaintext);
  msg.body = secretbox_encrypt(s.key, session_nonce(s, s.self, msg.counter),
                               frame.bytes());
  return msg;
}

Result<Bytes> session_open(Session& s, const sim::WireMessage& msg) {
  if (!msg.is_encrypted) {
    return make_error(Errc::IntegrityFailure, "expected encrypted payload",
                      s.conf_mitigation);
  }
  if (msg.counter <= s.recv_high) {
    return make_error(Errc::ReplayDetected,
                      "session counter " + std::to_string(msg.counter) + " not fresh",
                      s.conf_mitigation);
  }
  auto frame = secretbox_decrypt(s.key, session_nonce(s, msg.src, msg.counter), msg.body);
  if (!frame) {
    return make_error(Errc::IntegrityFailure, "session payload fails authentication",
                      s.conf_mitigation);
  }
  Decoder d(frame.value());
  auto type = d.tag();
  if (!type) return type.error();
  auto src = d.str();
  if (!src) return src.error();
  auto dst = d.str();
  if (!dst) return dst.error();
  auto ctr = d.u64();
  if (!ctr) return ctr.error();
  if (type.value() != static_cast<uint8_t>(msg.type) || src.value() != msg.src ||
      dst.value() != msg.dst || ctr.value() != msg.counter) {
    return make_error(Errc::IntegrityFailure, "session header mismatch",
                      s.conf_mitigation);
  }
  auto payload = d.field();
  if (!payload) return payload.error();
  s.recv_high = msg.counter;
  return payload.take();
}

Result<Bytes> session_open_marked(sim::Network& net, Session& s,
                                  const sim::WireMessage& msg, uint64_t delivery_id) {
  auto opened = session_open(s, msg);
  if (!opened) {
    net.mark_rejected(delivery_id, opened.error());
    return opened.error();
  }
  net.mark_accepted(delivery_id);
  return opened.take();
}

Result<void> verify_metadata(const MetaData& meta, const SignPub& isp_pub) {
  if (!verify(isp_pub, meta.signing_bytes(), meta.signature)) {
    return make_error(Errc::BadSignature, "metadata not signed by ISP", "M11");
  }
  if (meta.fingerprint.size() != kDigestSize * 2) {
    return make_error(Errc::BadSignature, "metadata fingerprint width", "M11");
  }
  return {};
}

size_t chunk_count(size_t content_size) {
  if (content_size == 0) return 1;
  return (content_size + kChunkSize - 1) / kChunkSize;
}

Bytes chunk_of(ByteView content, size_t index) {
  size_t begin = index * kChunkSize;
  if (begin >= content.size()) return {};
  size_t end = std::min(begin + kChunkSize, content.size());
  return Bytes(content.begin() + static_cast<long>(begin),
               content.begin() + static_cast<long>(end));
}

Bytes AuthChallengeBody::encode() const {
  Encoder e;
  e.str(initiator);
  e.field(nonce);
  return std::move(e).take();
}

Result<AuthChallengeBody> AuthChallengeBody::decode(ByteView data) {
  Decoder d(data);
  AuthChallengeBody b;
  auto i = d.str();
  if (!i) return i.error();
  b.initiator = i.take();
  auto n = d.field();
  if (!n) return n.error();
  b.nonce = n.take();
  return b;
}

Bytes AuthOfferBody::signing_bytes() const {
  Encoder e;
  e.str("auth-offer");
  e.str(responder);
  e.field(initiator_nonce);
  e.field(responder_nonce);
  return std::move(e).take();
}

Bytes AuthOfferBody::encode() const {
  Encoder e;
  e.str(responder);
  e.field(initiator_nonce);
  e.field(responder_nonce);
  put_sig(e, isp_sig);
  return std::move(e).take();
}

Result<AuthOfferBody> AuthOfferBody::decode(ByteView data) {
  Decoder d(data);
  AuthOfferBody b;
  auto r = d.str();
  if (!r) return r.error();
  b.responder = r.take();
  auto in = d.field();
  if (!in) return in.error();
  b.initiator_nonce = in.take();
  auto rn = d.field();
  if (!rn) return rn.error();
  b.responder_nonce = rn.take();
  auto sig = get_sig(d);
  if (!sig) return sig.error();
  b.isp_sig = sig.take();
  return b;
}

Bytes AuthQuoteBody::encode() const {
  Encoder e;
  e.str(node);
  put_pub(e, attestation_pub);
  e.field(quote);
  return std::move(e).take();
}

Result<AuthQuoteBody> AuthQuoteBody::decode(ByteView data) {
  Decoder d(data);
  AuthQuoteBody b;
  auto n = d.str();
  if (!n) return n.error();
  b.node = n.take();
  auto p = get_pub(d);
  if (!p) return p.error();
  b.attestation_pub = p.value();
  auto q = d.field();
  if (!q) return q.error();
  b.quote = q.take();
  return b;
}

Bytes AuthAcceptBody::signing_bytes(ByteView initiator_nonce, ByteView responder_nonce,
                                    ByteView key_blob) {
  Encoder e;
  e.str("auth-accept");
  e.field(initiator_nonce);
  e.field(responder_nonce);
  e.field(key_blob);
  return std::move(e).take();
}

Bytes AuthAcceptBody::encode() const {
  Encoder e;
  e.field(key_blob);
  put_sig(e, isp_sig);
  return std::move(e).take();
}

Result<AuthAcceptBody> AuthAcceptBody::decode(ByteView data) {
  Decoder d(data);
  AuthAcceptBody b;
  auto kb = d.field();
  if (!kb) return kb.error();
  b.key_blob = kb.take();
  auto sig = get_sig(d);
  if (!sig) return sig.error();
  b.isp_sig = sig.take();
  return b;
}

Bytes TicketRequestBody::encode() const {
  Encoder e;
  requester.encode(e);
  e.str(target_node);
  overlay.encode(e);
  return std::move(e).take();
}

Result<TicketRequestBody> TicketRequestBody::decode(ByteView data) {
  Decoder d(data);
  auto req = ResourceId::decode(d);
  if (!req) return req.error();
  auto target = d.str();
  if (!target) return target.error();
  auto ov = ResourceId::decode(d);
  if (!ov) return ov.error();
  return TicketRequestBody{req.take(), target.take(), ov.take()};
}

Bytes TicketGrantBody::encode() const {
  Encoder e;
  e.field(ticket);
  e.field(requester_key_blob);
  put_pcrs(e, target_ref_pcrs);
  put_pub(e, target_att_pub);
  return std::move(e).take();
}

Result<TicketGrantBody> TicketGrantBody::decode(ByteView data) {
  Decoder d(data);
  TicketGrantBody b;
  auto t = d.field();
  if (!t) return t.error();
  b.ticket = t.take();
  auto kb = d.field();
  if (!kb) return kb.error();
  b.requester_key_blob = kb.take();
  auto pcrs = get_pcrs(d);
  if (!pcrs) return pcrs.error();
  b.target_ref_pcrs = pcrs.value();
  auto pub = get_pub(d);
  if (!pub) return pub.error();
  b.target_att_pub = pub.value();
  return b;
}

Bytes NodeAuthRequestBody::encode() const {
  Encoder e;
  e.field(ticket);
  e.field(quote);
  return std::move(e).take();
}

Result<NodeAuthRequestBody> NodeAuthRequestBody::decode(ByteView data) {
  Decoder d(data);
  NodeAuthRequestBody b;
  auto t = d.field();
  if (!t) return t.error();
  b.ticket = t.take();
  auto q = d.field();
  if (!q) return q.error();
  b.quote = q.take();
  return b;
}

Bytes NodeAuthAcceptBody::encode() const {
  Encoder e;
  e.field(quote);
  return std::move(e).take();
}

Result<NodeAuthAcceptBody> NodeAuthAcceptBody::decode(ByteView data) {
  Decoder d(data);
  NodeAuthAcceptBody b;
  auto q = d.field();
  if (!q) return q.error();
  b.quote = q.take();
  return b;
}

Bytes ContentRequestBody::encode() const {
  Encoder e;
  e.str(content_id);
  e.u64(index);
  return std::move(e).take();
}

Result<ContentRequestBody> ContentRequestBody::decode(ByteView data) {
  Decoder d(data);
  ContentRequestBody b;
  auto c = d.str();
  if (!c) return c.error();
  b.content_id = c.take();
  auto i = d.u64();
  if (!i) return i.error();
  b.index = i.value();
  return b;
}

Bytes ContentChunkBody::encode() const {
  Encoder e;
  e.str(content_id);
  e.u64(index);
  e.u64(total);
  e.field(data);
  return std::move(e).take();
}

Result<ContentChunkBody> ContentChunkBody::decode(ByteView data_in) {
  Decoder d(data_in);
  ContentChunkBody b;
  auto c = d.str();
  if (!c) return c.error();
  b.content_id = c.take();
  auto i = d.u64();
  if (!i) return i.error();
  b.index = i.value();
  auto t = d.u64();
  if (!t) return t.error();
  b.total = t.value();
  auto data = d.field();
  if (!data) return data.error();
  b.data = data.take();
  return b;
}

}  // namespace nada::overlay
