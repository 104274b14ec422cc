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

#include "nada/node.hpp"

#include <algorithm>
#include <cstring>

#include "nada/management.hpp"

namespace nada::node {

using overlay::Session;
using sim::Delivery;
using sim::MsgType;
using sim::Network;
using sim::WireMessage;

namespace {

std::string overlay_key(const std::string& overlay_field) {
  return overlay_field.empty() ? "mgmt" : overlay_field;
}

std::string session_slot(const std::string& peer, const std::string& okey) {
  return peer + "|" + okey;
}

Result<SymKey> key_from_bytes(ByteView b) {
  if (b.size() != kSymKeySize) {
    return make_error(Errc::IntegrityFailure, "session key width");
  }
  SymKey k;
  std::memcpy(k.data(), b.data(), k.size());
  return k;
}

WireMessage ack_message() {
  WireMessage m;
  m.type = MsgType::Ack;
  return m;
}

}  // namespace

const char* node_phase_name(NodePhase p) {
  switch (p) {
    case NodePhase::PoweredOff: return "PoweredOff";
    case NodePhase::Booted: return "Booted";
    case NodePhase::Registered: return "Registered";
    case NodePhase::Operational: return "Operational";
  }
  return "?";
}

const char* slice_status_name(SliceStatus s) {
  switch (s) {
    case SliceStatus::Installed: return "Installed";
    case SliceStatus::Active: return "Active";
    case SliceStatus::Deactivated: return "Deactivated";
  }
  return "?";
}

Bytes SlicePackage::encode() const {
  Encoder e;
  e.field(image);
  e.field(policy.encode());
  e.count(static_cast<uint32_t>(catalog.size()));
  for (const auto& [id, meta] : catalog) {
    e.str(id);
    e.field(meta.encode());
  }
  e.str(provider);
  return std::move(e).take();
}

Result<SlicePackage> SlicePackage::decode(ByteView data) {
  Decoder d(data);
  SlicePackage p;
  auto img = d.field();
  if (!img) return img.error();
  p.image = img.take();
  auto pol_bytes = d.field();
  if (!pol_bytes) return pol_bytes.error();
  auto pol = AppSlicePolicy::decode(pol_bytes.value());
  if (!pol) return pol.error();
  p.policy = pol.take();
  auto n = d.count();
  if (!n) return n.error();
  for (uint32_t i = 0; i < n.value(); ++i) {
    auto id = d.str();
    if (!id) return id.error();
    auto mb = d.field();
    if (!mb) return mb.error();
    auto meta = MetaData::decode(mb.value());
    if (!meta) return meta.error();
    p.catalog.emplace(id.take(), meta.take());
  }
  auto prov = d.str();
  if (!prov) return prov.error();
  p.provider = prov.take();
  return p;
}

Bytes RegisterRequestBody::encode() const {
  Encoder e;
  e.str(node);
  return std::move(e).take();
}

Result<RegisterRequestBody> RegisterRequestBody::decode(ByteView data) {
  Decoder d(data);
  auto n = d.str();
  if (!n) return n.error();
  return RegisterRequestBody{n.take()};
}

Bytes RegisterAcceptBody::encode() const {
  Encoder e;
  e.u64(clock);
  e.count(static_cast<uint32_t>(configure_cmds.size()));
  for (const auto& c : configure_cmds) e.field(c);
  return std::move(e).take();
}

Result<RegisterAcceptBody> RegisterAcceptBody::decode(ByteView data) {
  Decoder d(data);
  RegisterAcceptBody b;
  auto c = d.u64();
  if (!c) return c.error();
  b.clock = c.value();
  auto n = d.count();
  if (!n) return n.error();
  for (uint32_t i = 0; i < n.value(); ++i) {
    auto f = d.field();
    if (!f) return f.error();
    b.configure_cmds.push_back(f.take());
  }
  return b;
}

Bytes InstallReportBody::encode() const {
  Encoder e;
  rid.encode(e);
  e.str(fingerprint);
  e.tag(ok ? 1 : 0);
  return std::move(e).take();
}

Result<InstallReportBody> InstallReportBody::decode(ByteView data) {
  Decoder d(data);
  auto r = ResourceId::decode(d);
  if (!r) return r.error();
  auto fp = d.str();
  if (!fp) return fp.error();
  auto ok = d.tag();
  if (!ok) return ok.error();
  return InstallReportBody{r.take(), fp.take(), ok.value() != 0};
}

Bytes StoreWriteBody::encode() const {
  Encoder e;
  owner.encode(e);
  e.str(name);
  e.field(payload);
  return std::move(e).take();
}

Result<StoreWriteBody> StoreWriteBody::decode(ByteView data) {
  Decoder d(data);
  auto o = ResourceId::decode(d);
  if (!o) return o.error();
  auto n = d.str();
  if (!n) return n.error();
  auto p = d.field();
  if (!p) return p.error();
  return StoreWriteBody{o.take(), n.take(), p.take()};
}

Bytes MibQueryBody::encode() const {
  Encoder e;
  requester.encode(e);
  e.str(subject);
  e.str(metric);
  return std::move(e).take();
}

Result<MibQueryBody> MibQueryBody::decode(ByteView data) {
  Decoder d(data);
  auto r = ResourceId::decode(d);
  if (!r) return r.error();
  auto s = d.str();
  if (!s) return s.error();
  auto m = d.str();
  if (!m) return m.error();
  return MibQueryBody{r.take(), s.take(), m.take()};
}

Bytes RowsBody::encode() const {
  Encoder e;
  e.count(static_cast<uint32_t>(rows.size()));
  for (const auto& r : rows) e.field(r.encode());
  return std::move(e).take();
}

Result<RowsBody> RowsBody::decode(ByteView data) {
  Decoder d(data);
  auto n = d.count();
  if (!n) return n.error();
  RowsBody b;
  for (uint32_t i = 0; i < n.value(); ++i) {
    auto f = d.field();
    if (!f) return f.error();
    auto m = Measurement::decode(f.value());
    if (!m) return m.error();
    b.rows.push_back(m.take());
  }
  return b;
}

Bytes MeasureReportBody::encode() const {
  Encoder e;
  e.str(reporter);
  e.count(static_cast<uint32_t>(entries.size()));
  for (const auto& le : entries) e.field(le.encode());
  return std::move(e).take();
}

Result<MeasureReportBody> MeasureReportBody::decode(ByteView data) {
  Decoder d(data);
  MeasureReportBody b;
  auto r = d.str();
  if (!r) return r.error();
  b.reporter = r.take();
  auto n = d.count();
  if (!n) return n.error();
  for (uint32_t i = 0; i < n.value(); ++i) {
    auto f = d.field();
    if (!f) return f.error();
    auto le = LogEntry::decode(f.value());
    if (!le) return le.error();
    b.entries.push_back(le.take());
  }
  return b;
}

Bytes UserForwardBody::encode() const {
  Encoder e;
  slice.encode(e);
  e.field(request.encode());
  return std::move(e).take();
}

Result<UserForwardBody> UserForwardBody::decode(ByteView data) {
  Decoder d(data);
  auto s = ResourceId::decode(d);
  if (!s) return s.error();
  auto rb = d.field();
  if (!rb) return rb.error();
  auto req = UserRequest::decode(rb.value());
  if (!req) return req.error();
  return UserForwardBody{s.take(), req.take()};
}

Bytes UserResponseBody::encode() const {
  Encoder e;
  slice.encode(e);
  e.str(claimed_provider);
  e.tag(ok ? 1 : 0);
  e.str(status);
  return std::move(e).take();
}

Result<UserResponseBody> UserResponseBody::decode(ByteView data) {
  Decoder d(data);
  UserResponseBody b;
  auto s = ResourceId::decode(d);
  if (!s) return s.error();
  b.slice = s.take();
  auto p = d.str();
  if (!p) return p.error();
  b.claimed_provider = p.take();
  auto ok = d.tag();
  if (!ok) return ok.error();
  b.ok = ok.value() != 0;
  auto st = d.str();
  if (!st) return st.error();
  b.status = st.take();
  return b;
}

Bytes PushContentBody::encode() const {
  Encoder e;
  e.field(dd);
  e.field(content);
  return std::move(e).take();
}

Result<PushContentBody> PushContentBody::decode(ByteView data) {
  Decoder d(data);
  PushContentBody b;
  auto dd = d.field();
  if (!dd) return dd.error();
  b.dd = dd.take();
  auto c = d.field();
  if (!c) return c.error();
  b.content = c.take();
  return b;
}

Bytes SignedTrackerRequest::signing_bytes() const {
  Encoder e;
  e.str("tracker-request");
  e.str(node);
  e.str(customer);
  e.str(content_id);
  e.field(nonce);
  return std::move(e).take();
}

Bytes SignedTrackerRequest::encode() const {
  Encoder e;
  e.str(node);
  e.str(customer);
  e.str(content_id);
  e.field(nonce);
  e.field(ByteView(comm_sig.data(), comm_sig.size()));
  return std::move(e).take();
}

Result<SignedTrackerRequest> SignedTrackerRequest::decode(ByteView data) {
  Decoder d(data);
  SignedTrackerRequest r;
  auto n = d.str();
  if (!n) return n.error();
  r.node = n.take();
  auto c = d.str();
  if (!c) return c.error();
  r.customer = c.take();
  auto ci = d.str();
  if (!ci) return ci.error();
  r.content_id = ci.take();
  auto nonce = d.field();
  if (!nonce) return nonce.error();
  r.nonce = nonce.take();
  auto sig = d.field();
  if (!sig) return sig.error();
  if (sig.value().size() != kSigSize) {
    return make_error(Errc::IntegrityFailure, "signature width");
  }
  std::memcpy(r.comm_sig.data(), sig.value().data(), kSigSize);
  return r;
}

NodeActor::NodeActor(std::string id, const Digest& seed, NodeParams params)
    : id_(std::move(id)),
      params_(std::move(params)),
      anchor_(id_, sha256(to_bytes(id_ + "-anchor"))),
      rng_(seed) {
  anchor_ = trust::TrustAnchor(id_, rng_.fork("anchor").digest());
  comm_key_ = SigningKey::from_seed(rng_.fork("comm").digest());
}

std::string NodeActor::slice_alias(const ResourceId& rid) const {
  return id_ + ":" + rid.to_string();
}

SliceRuntime* NodeActor::slice(const ResourceId& rid) {
  auto it = slices_.find(rid);
  return it == slices_.end() ? nullptr : &it->second;
}

Session* NodeActor::session_for(const std::string& peer, const std::string& okey) {
  auto it = sessions_.find(session_slot(peer, okey));
  return it == sessions_.end() ? nullptr : &it->second;
}

bool NodeActor::slice_trusted(const SliceRuntime& rt) const {
  if (!rt.image_loaded) return false;
  return fingerprint_of(rt.image) == rt.config.fingerprint;
}

// ---------------------------------------------------------------------------
// Lifecycle

Result<void> NodeActor::boot(Network& net) {
  anchor_.reset_platform();
  sessions_.clear();
  plays_.clear();
  for (auto& [rid, rt] : slices_) {
    rt.status = SliceStatus::Installed;
    rt.image_loaded = false;
    rt.image.clear();
  }
  auto fw = anchor_.measure_and_extend(trust::kPcrFirmware, "firmware", params_.firmware);
  if (!fw) return fw.error();
  auto img = anchor_.measure_and_extend(trust::kPcrImage, "node-management", params_.image);
  if (!img) return img.error();
  phase_ = NodePhase::Booted;
  net.state(id_, "phase", node_phase_name(phase_));
  return {};
}

Result<Session*> NodeActor::authenticate_management(Network& net) {
  Bytes nonce_n = rng_.bytes(16);
  pending_auth_nonce_ = nonce_n;

  overlay::AuthChallengeBody challenge{id_, nonce_n};
  WireMessage m;
  m.type = MsgType::AuthChallenge;
  m.body = challenge.encode();
  auto offer_reply = net.call(id_, params_.mgmt_id, m);
  if (!offer_reply) {
    pending_auth_nonce_.reset();
    if (offer_reply.error().code == Errc::Dropped) {
      return make_error(Errc::ManagementUnreachable, "no response to challenge");
    }
    return offer_reply.error();
  }
  auto offer_body = overlay::AuthOfferBody::decode(offer_reply.value().msg.body);
  if (!offer_body) {
    net.mark_rejected(offer_reply.value().reply_id,
                      make_error(Errc::IntegrityFailure, "offer undecodable", "M10"));
    pending_auth_nonce_.reset();
    return make_error(Errc::AttestationFailure, "offer undecodable", "M10");
  }
  const auto& offer = offer_body.value();
  if (offer.initiator_nonce != nonce_n) {
    Error e = make_error(Errc::Freshness, "offer answers a different challenge", "M10");
    net.mark_rejected(offer_reply.value().reply_id, e);
    pending_auth_nonce_.reset();
    return e;
  }
  if (!verify(params_.isp_pub, offer.signing_bytes(), offer.isp_sig)) {
    Error e = make_error(Errc::CertificateFailure,
                         "management offer not signed by ISP", "M8");
    net.mark_rejected(offer_reply.value().reply_id, e);
    pending_auth_nonce_.reset();
    return e;
  }
  net.mark_accepted(offer_reply.value().reply_id);

  Bytes quote_nonce_material = nonce_n;
  append(quote_nonce_material, offer.responder_nonce);
  Digest quote_nonce = sha256(quote_nonce_material);
  overlay::AuthQuoteBody qb;
  qb.node = id_;
  qb.attestation_pub = anchor_.attestation_pub();
  qb.quote = anchor_.make_quote(digest_view(quote_nonce)).encode();

  WireMessage qm;
  qm.type = MsgType::AuthQuote;
  qm.body = qb.encode();
  auto accept_reply = net.call(id_, params_.mgmt_id, qm);
  pending_auth_nonce_.reset();
  if (!accept_reply) {
    if (accept_reply.error().code == Errc::Dropped) {
      return make_error(Errc::ManagementUnreachable, "no response to quote");
    }
    return accept_reply.error();
  }
  auto accept_body = overlay::AuthAcceptBody::decode(accept_reply.value().msg.body);
  if (!accept_body) {
    Error e = make_error(Errc::IntegrityFailure, "accept undecodable", "M10");
    net.mark_rejected(accept_reply.value().reply_id, e);
    return e;
  }
  const auto& accept = accept_body.value();
  Bytes accept_signed = overlay::AuthAcceptBody::signing_bytes(
      nonce_n, offer.responder_nonce, accept.key_blob);
  if (!verify(params_.isp_pub, accept_signed, accept.isp_sig)) {
    Error e = make_error(Errc::CertificateFailure,
                         "session key transport not signed by ISP", "M8");
    net.mark_rejected(accept_reply.value().reply_id, e);
    return e;
  }
  auto key_bytes = anchor_.unbind(accept.key_blob);
  if (!key_bytes) {
    Error e = make_error(Errc::SealMismatch, "session key bound to other state", "M6.2");
    net.mark_rejected(accept_reply.value().reply_id, e);
    return e;
  }
  auto key = key_from_bytes(key_bytes.value());
  if (!key) return key.error();
  net.mark_accepted(accept_reply.value().reply_id);

  Session s;
  s.self = id_;
  s.peer = params_.mgmt_id;
  s.overlay = "mgmt";
  s.key = key.take();
  s.established_at = net.now();
  s.conf_mitigation = "M12";
  sessions_[session_slot(s.peer, "mgmt")] = s;
  net.session_established(id_, params_.mgmt_id, "mgmt");
  return &sessions_[session_slot(params_.mgmt_id, "mgmt")];
}

Result<void> NodeActor::register_with_management(Network& net, bool labelled) {
  Session* s = session_for(params_.mgmt_id, "mgmt");
  if (s == nullptr) {
    return make_error(Errc::ManagementUnreachable, "no management session");
  }
  RegisterRequestBody body{id_};
  WireMessage m = overlay::session_wrap(*s, MsgType::RegisterRequest, body.encode());
  auto reply = net.call(id_, params_.mgmt_id, m);
  if (!reply) {
    if (reply.error().code == Errc::Dropped) {
      return make_error(Errc::ManagementUnreachable, "registration timed out");
    }
    return reply.error();
  }
  auto plain = overlay::session_open_marked(net, *s, reply.value().msg,
                                            reply.value().reply_id);
  if (!plain) return plain.error();
  auto accept = RegisterAcceptBody::decode(plain.value());
  if (!accept) return accept.error();

  anchor_.synchronize_clock(accept.value().clock);
  phase_ = NodePhase::Registered;
  net.state(id_, "phase", node_phase_name(phase_));
  net.state(id_, "clock", std::to_string(accept.value().clock));
  chain_log(net, "registered", to_bytes(id_));

  if (labelled) net.step("bringup/4 periodic-measurement-log");
  reporter_armed_ = true;

  if (labelled) net.step("bringup/5 configure-slices");
  for (const auto& cmd_bytes : accept.value().configure_cmds) {
    auto cmd = ConfigureCommand::decode(cmd_bytes);
    if (!cmd) return cmd.error();
    auto applied = apply_configure(net, cmd.value(), labelled);
    if (!applied) return applied.error();
  }
  phase_ = NodePhase::Operational;
  net.state(id_, "phase", node_phase_name(phase_));
  return {};
}

Result<void> NodeActor::bringup(Network& net) {
  net.step("bringup/1 node-reboot");
  auto booted = boot(net);
  if (!booted) return booted.error();

  net.step("bringup/2 mutual-authentication");
  auto session = authenticate_management(net);
  if (!session) return session.error();

  net.step("bringup/3 register");
  return register_with_management(net);
}

// ---------------------------------------------------------------------------
// Overlay operations

Result<TicketPackage> NodeActor::request_ticket(Network& net, const ResourceId& requester,
                                                const std::string& target_node,
                                                const ResourceId& overlay_rid) {
  Session* s = session_for(params_.mgmt_id, "mgmt");
  if (s == nullptr) {
    return make_error(Errc::ManagementUnreachable, "no management session");
  }
  overlay::TicketRequestBody body{requester, target_node, overlay_rid};
  WireMessage m = overlay::session_wrap(*s, MsgType::TicketRequest, body.encode());
  auto reply = net.call(id_, params_.mgmt_id, m);
  if (!reply) return reply.error();
  auto plain = overlay::session_open_marked(net, *s, reply.value().msg,
                                            reply.value().reply_id);
  if (!plain) return plain.error();
  auto grant = overlay::TicketGrantBody::decode(plain.value());
  if (!grant) return grant.error();
  auto ticket = overlay::Ticket::decode(grant.value().ticket);
  if (!ticket) return ticket.error();
  return TicketPackage{ticket.take(), grant.value().requester_key_blob,
                       grant.value().target_ref_pcrs, grant.value().target_att_pub};
}

Result<Session*> NodeActor::connect_peer(Network& net, const TicketPackage& pkg) {
  overlay::NodeAuthRequestBody body;
  body.ticket = pkg.ticket.encode();
  body.quote = anchor_.make_quote(pkg.ticket.nonce).encode();

  WireMessage m;
  m.type = MsgType::NodeAuthRequest;
  m.overlay = pkg.ticket.overlay.to_string();
  m.body = body.encode();
  auto reply = net.call(id_, pkg.ticket.target_node, m);
  if (!reply) return reply.error();

  auto accept = overlay::NodeAuthAcceptBody::decode(reply.value().msg.body);
  if (!accept) {
    Error e = make_error(Errc::IntegrityFailure, "node auth accept undecodable", "M3");
    net.mark_rejected(reply.value().reply_id, e);
    return e;
  }
  auto target_quote = trust::Quote::decode(accept.value().quote);
  if (!target_quote) {
    Error e = make_error(Errc::IntegrityFailure, "target quote undecodable", "M3");
    net.mark_rejected(reply.value().reply_id, e);
    return e;
  }
  auto verdict = trust::verify_quote(target_quote.value(), pkg.ticket.nonce,
                                     pkg.target_ref_pcrs, pkg.target_att_pub);
  if (verdict != trust::QuoteVerdict::Accept) {
    Error e = make_error(Errc::AttestationFailure,
                         std::string("target attestation: ") +
                             trust::quote_verdict_name(verdict),
                         "M9");
    net.mark_rejected(reply.value().reply_id, e);
    return e;
  }
  auto key_bytes = anchor_.unbind(pkg.requester_key_blob);
  if (!key_bytes) {
    return make_error(Errc::SealMismatch, "ticket key bound to other state", "M6.2");
  }
  auto key = key_from_bytes(key_bytes.value());
  if (!key) return key.error();
  net.mark_accepted(reply.value().reply_id);

  Session s;
  s.self = id_;
  s.peer = pkg.ticket.target_node;
  s.overlay = pkg.ticket.overlay.to_string();
  s.key = key.take();
  s.established_at = net.now();
  s.conf_mitigation = "M13";
  const std::string slot = session_slot(s.peer, s.overlay);
  sessions_[slot] = s;
  net.session_established(pkg.ticket.requester.to_string(), pkg.ticket.target_node,
                          pkg.ticket.overlay.to_string());
  return &sessions_[slot];
}

Result<Session*> NodeActor::connect_entity(Network& net, const ResourceId& requester,
                                           const std::string& dest, Domain dest_domain,
                                           const ResourceId& overlay_rid) {
  if (!net.knows_entity(dest)) {
    return make_error(Errc::UnknownDomain, "no such entity: " + dest);
  }
  if (dest_domain == Domain::IspDomain) {
    Session* s = session_for(dest, "mgmt");
    if (s != nullptr) return s;
    if (dest == params_.mgmt_id) return authenticate_management(net);
    return make_error(Errc::UnknownDomain, "no direct path to " + dest);
  }
  const std::string okey = overlay_rid.to_string();
  Session* cached = session_for(dest, okey);
  if (cached != nullptr) return cached;
  auto pkg = request_ticket(net, requester, dest, overlay_rid);
  if (!pkg) return pkg.error();
  return connect_peer(net, pkg.value());
}

Result<Bytes> NodeActor::download_content(Network& net, const MetaData& meta,
                                          const ResourceId& overlay_rid,
                                          const ResourceId& requester) {
  auto meta_ok = overlay::verify_metadata(meta, params_.isp_pub);
  if (!meta_ok) return meta_ok.error();
  if (meta.locations.empty()) {
    return make_error(Errc::NoLocationReachable, "metadata lists no locations");
  }

  std::vector<const ContentLocation*> order;
  for (const auto& loc : meta.locations) order.push_back(&loc);

  std::vector<Bytes> chunks;
  std::vector<uint64_t> chunk_reply_ids;
  uint64_t total = 0;
  bool total_known = false;
  size_t fetched = 0;
  std::set<std::string> dead;

  while (!total_known || fetched < total) {
    uint64_t index = fetched;
    bool got = false;
    for (size_t attempt = 0; attempt < order.size(); ++attempt) {
      const ContentLocation& loc = *order[(index + attempt) % order.size()];
      if (dead.count(loc.node) != 0) continue;
      auto session = connect_entity(net, requester, loc.node, loc.domain, overlay_rid);
      if (!session) {
        dead.insert(loc.node);
        net.incident(id_, "location unreachable: " + loc.node + " (" +
                              session.error().to_string() + ")");
        continue;
      }
      overlay::ContentRequestBody req{meta.content_id, index};
      WireMessage m = overlay::session_wrap(*session.value(), MsgType::ContentRequest,
                                            req.encode());
      auto reply = net.call(id_, loc.node, m);
      if (!reply) {
        dead.insert(loc.node);
        net.incident(id_, "chunk fetch failed from " + loc.node);
        continue;
      }
      auto plain = overlay::session_open_marked(net, *session.value(), reply.value().msg,
                                                reply.value().reply_id);
      if (!plain) {
        dead.insert(loc.node);
        continue;
      }
      auto chunk = overlay::ContentChunkBody::decode(plain.value());
      if (!chunk) {
        dead.insert(loc.node);
        continue;
      }
      if (chunk.value().content_id != meta.content_id || chunk.value().index != index) {
        net.mark_rejected(reply.value().reply_id,
                          make_error(Errc::IntegrityFailure, "chunk mismatch", "M13"));
        dead.insert(loc.node);
        continue;
      }
      total = chunk.value().total;
      total_known = true;
      chunks.push_back(chunk.value().data);
      chunk_reply_ids.push_back(reply.value().reply_id);
      got = true;
      break;
    }
    if (!got) {
      net.incident(id_, "download failed: no location reachable for " + meta.content_id);
      return make_error(Errc::NoLocationReachable,
                        "all locations failed for " + meta.content_id);
    }
    ++fetched;
  }

  Bytes content;
  for (const auto& c : chunks) append(content, c);

  if (net.mitigation_enabled("M5")) {
    if (fingerprint_of(content) != meta.fingerprint) {
      Error e = make_error(Errc::FingerprintMismatch,
                           "content does not match signed fingerprint", "M5");
      for (uint64_t rid : chunk_reply_ids) net.mark_rejected(rid, e);
      net.incident(id_, "fingerprint mismatch for " + meta.content_id);
      return e;
    }
  }
  for (uint64_t rid : chunk_reply_ids) net.mark_accepted(rid);
  return content;
}

// ---------------------------------------------------------------------------
// Stores and MIB

Result<void> NodeActor::store_put(Network& net, const std::string& reader,
                                  const ResourceId& owner, const std::string& name,
                                  ByteView payload) {
  const bool allowed = reader == id_ || reader == owner.to_string();
  net.store_access(reader, owner.to_string(), "put:" + name, allowed);
  if (!allowed) {
    return make_error(Errc::NoGrant, "store access denied for " + reader, "M7.2");
  }
  auto key = anchor_.get_storage_key(owner);
  if (!key && key.error().code == Errc::NotFound) {
    key = anchor_.compute_storage_key(owner);
  }
  if (!key) return key.error();
  Nonce nonce;
  Bytes nb = rng_.bytes(kNonceSize);
  std::memcpy(nonce.data(), nb.data(), kNonceSize);
  stores_[owner.to_string()][name] = {nonce,
                                      secretbox_encrypt(key.value(), nonce, payload)};
  return {};
}

Result<Bytes> NodeActor::store_get(Network& net, const std::string& reader,
                                   const ResourceId& owner, const std::string& name) {
  const bool allowed = reader == id_ || reader == owner.to_string();
  net.store_access(reader, owner.to_string(), "get:" + name, allowed);
  if (!allowed) {
    return make_error(Errc::NoGrant, "store access denied for " + reader, "M7.2");
  }
  auto key = anchor_.get_storage_key(owner);
  if (!key) return key.error();
  auto store_it = stores_.find(owner.to_string());
  if (store_it == stores_.end() || store_it->second.count(name) == 0) {
    return make_error(Errc::NotFound, "no record " + name);
  }
  const auto& [nonce, cipher] = store_it->second.at(name);
  auto plain = secretbox_decrypt(key.value(), nonce, cipher);
  if (!plain) return make_error(Errc::IntegrityFailure, "store record corrupted", "M7.2");
  return plain.take();
}

void NodeActor::seed_held_content(Network& net, const std::string& content_id,
                                  ByteView bytes) {
  const std::string name = "content:" + content_id;
  (void)store_put(net, id_, params_.maintenance, name, bytes);
  held_content_[content_id] = name;
}

void NodeActor::seed_slice_content(Network& net, const ResourceId& rid,
                                   const std::string& content_id, ByteView bytes) {
  (void)store_put(net, id_, rid, "content:" + content_id, bytes);
}

std::vector<std::string> NodeActor::store_names(const ResourceId& owner) const {
  std::vector<std::string> out;
  auto it = stores_.find(owner.to_string());
  if (it == stores_.end()) return out;
  for (const auto& [name, rec] : it->second) out.push_back(name);
  return out;
}

Result<SymKey> NodeActor::mib_key(Network& net) {
  (void)net;
  auto key = anchor_.get_storage_key(params_.maintenance);
  if (!key && key.error().code == Errc::NotFound) {
    key = anchor_.compute_storage_key(params_.maintenance);
  }
  return key;
}

Result<void> NodeActor::mib_append(Network& net, const LogEntry& wrapped) {
  auto entries = mib_entries(net);
  if (!entries) {
    if (entries.error().code != Errc::NotFound) return entries.error();
    entries = std::vector<LogEntry>{};
  }
  auto rows = entries.take();
  rows.push_back(wrapped);

  Encoder e;
  e.count(static_cast<uint32_t>(rows.size()));
  for (const auto& le : rows) e.field(le.encode());

  auto key = mib_key(net);
  if (!key) return key.error();
  Nonce nonce;
  Bytes nb = rng_.bytes(kNonceSize);
  std::memcpy(nonce.data(), nb.data(), kNonceSize);
  mib_cipher_ = {nonce, secretbox_encrypt(key.value(), nonce, e.bytes())};
  mib_rows_ = rows.size();
  return {};
}

Result<std::vector<LogEntry>> NodeActor::mib_entries(Network& net) {
  if (!mib_cipher_.has_value()) {
    return make_error(Errc::NotFound, "local MIB empty");
  }
  auto key = mib_key(net);
  if (!key) return key.error();
  auto plain = secretbox_decrypt(key.value(), mib_cipher_->first, mib_cipher_->second);
  if (!plain) return make_error(Errc::IntegrityFailure, "local MIB corrupted", "M7.1");
  Decoder d(plain.value());
  auto n = d.count();
  if (!n) return n.error();
  std::vector<LogEntry> out;
  for (uint32_t i = 0; i < n.value(); ++i) {
    auto f = d.field();
    if (!f) return f.error();
    auto le = LogEntry::decode(f.value());
    if (!le) return le.error();
    out.push_back(le.take());
  }
  return out;
}

void NodeActor::record_measurement(Network& net, const Measurement& m) {
  auto entry = chain_log(net, "measurement", m.encode());
  if (!entry) return;
  (void)mib_append(net, entry.value());
}

Result<std::vector<Measurement>> NodeActor::read_local_mib(Network& net,
                                                           const std::string& reader,
                                                           const std::string& subject,
                                                           const std::string& metric) {
  auto entries = mib_entries(net);
  if (!entries) {
    if (entries.error().code == Errc::NotFound) return std::vector<Measurement>{};
    return entries.error();
  }
  std::vector<Measurement> out;
  for (const auto& le : entries.value()) {
    if (le.kind != "measurement") continue;
    auto m = Measurement::decode(le.payload);
    if (!m) continue;
    if (subject != "*" && m.value().subject != subject) continue;
    if (metric != "*" && m.value().metric != metric) continue;
    out.push_back(m.take());
  }
  (void)reader;
  return out;
}

// ---------------------------------------------------------------------------
// Logging

Result<LogEntry> NodeActor::chain_log(Network& net, const std::string& kind,
                                      ByteView payload) {
  anchor_.update_clock(net.now());
  auto entry = anchor_.sign_log(kind, payload);
  if (!entry) return entry.error();
  chain_.push_back(entry.value());
  net.chain_entry(id_, entry.value());
  if (params_.log_sink == "tds" || params_.log_sink == "both") {
    // Persist the chain tail into the sealed store.
    Encoder e;
    e.count(static_cast<uint32_t>(chain_.size()));
    for (const auto& le : chain_) e.field(le.encode());
    anchor_.tds().put("log:chain", anchor_.seal(e.bytes()));
  }
  if (params_.log_sink == "monitoring" || params_.log_sink == "both") {
    unshipped_log_.push_back(entry.value());
  }
  return entry.take();
}

Result<void> NodeActor::send_app_log(Network& net, const ResourceId& slice_rid,
                                     const LogEntry& entry) {
  WireMessage m;
  m.type = MsgType::AppLog;
  m.body = entry.encode();
  auto reply = net.call(id_, slice_alias(slice_rid), m);
  if (!reply) return reply.error();
  return {};
}

void NodeActor::on_send_failure(Network& net, const WireMessage& msg) {
  // Transport timeout: the detection-and-log path for availability attacks.
  (void)chain_log(net, "incident",
                  to_bytes(std::string("undelivered ") + sim::msg_type_name(msg.type)));
}

// ---------------------------------------------------------------------------
// Slice lifecycle

Result<void> NodeActor::install_package(Network& net, const SlicePackage& pkg,
                                        const std::string& fingerprint, bool labelled) {
  if (!verify(params_.isp_pub, pkg.policy.signing_bytes(), pkg.policy.certified_by_isp)) {
    return make_error(Errc::UncertifiedPolicy, "slice policy not certified by ISP", "M1");
  }
  const ResourceId rid = pkg.policy.owner;
  if (anchor_.tds().has(trust::TrustAnchor::store_key_slot(rid))) {
    return make_error(Errc::StoreKeyExists, "slice already installed: " + rid.to_string());
  }

  if (labelled) net.step("install/3a install-image");
  SliceRuntime rt;
  rt.config.resource_id = rid;
  rt.config.store_key_handle = rid;
  rt.config.policy = pkg.policy;
  rt.config.fingerprint = fingerprint;
  rt.catalog = pkg.catalog;
  rt.provider = pkg.provider;

  if (labelled) net.step("install/3b create-configuration");
  if (labelled) net.step("install/3c firewall-default-deny");
  if (labelled) net.step("install/3d configure-overlay");
  net.state(id_, "overlay", rid.to_string());

  if (labelled) net.step("install/3e create-store-key");
  auto key = anchor_.compute_storage_key(rid);
  if (!key) {
    if (key.error().code == Errc::DuplicateKey) {
      return make_error(Errc::StoreKeyExists, key.error().detail);
    }
    return key.error();
  }

  if (labelled) net.step("install/3f seal-configuration");
  anchor_.tds().put("config:" + rid.to_string(), anchor_.seal(rt.config.encode()));

  if (labelled) net.step("install/3g assign-node-store");
  slices_[rid] = std::move(rt);
  net.register_alias(slice_alias(rid), this);
  auto stored = store_put(net, id_, rid, "image", pkg.image);
  if (!stored) return stored.error();
  recompute_firewall(net);

  if (labelled) net.step("install/3h boot-slice");
  auto booted = boot_slice(net, slices_[rid]);
  if (!booted) return booted.error();
  return {};
}

Result<void> NodeActor::preinstall_slice(Network& net, const SlicePackage& pkg,
                                         const std::string& fingerprint) {
  auto installed = install_package(net, pkg, fingerprint, false);
  if (!installed) return installed.error();
  // Provisioning epoch ends with the slice at rest, not running.
  auto& rt = slices_[pkg.policy.owner];
  rt.status = SliceStatus::Installed;
  rt.image_loaded = false;
  rt.image.clear();
  return {};
}

Result<void> NodeActor::install_from_meta(Network& net, const MetaData& meta) {
  net.step("install/2 p2p-download");
  auto bytes = download_content(net, meta, params_.maintenance, params_.maintenance);
  if (!bytes) return bytes.error();

  net.step("install/3 install-slice");
  auto pkg = SlicePackage::decode(bytes.value());
  if (!pkg) return pkg.error();
  auto installed = install_package(net, pkg.value(), meta.fingerprint, true);
  if (!installed) return installed.error();
  const ResourceId rid = pkg.value().policy.owner;

  net.step("install/4 app-log");
  Encoder payload;
  payload.str(meta.fingerprint);
  payload.field(sha256(pkg.value().policy.encode()));
  auto entry = chain_log(net, "install", payload.bytes());
  if (entry) (void)send_app_log(net, rid, entry.value());

  net.step("install/5 report-to-management");
  Session* s = session_for(params_.mgmt_id, "mgmt");
  if (s != nullptr) {
    InstallReportBody report{rid, meta.fingerprint, true};
    WireMessage m = overlay::session_wrap(*s, MsgType::InstallReport, report.encode());
    (void)net.call(id_, params_.mgmt_id, m);
  }
  return {};
}

Result<void> NodeActor::boot_slice(Network& net, SliceRuntime& rt) {
  auto image = store_get(net, id_, rt.config.resource_id, "image");
  if (!image) return image.error();
  if (fingerprint_of(image.value()) != rt.config.fingerprint) {
    return make_error(Errc::FingerprintMismatch, "slice image fails fingerprint check",
                      "M5");
  }
  auto measured = anchor_.measure_and_extend(
      trust::kPcrSlices, "slice:" + rt.config.resource_id.to_string(), image.value());
  if (!measured) return measured.error();
  rt.image = image.take();
  rt.image_loaded = true;
  rt.status = SliceStatus::Active;
  net.state(id_, "slice:" + rt.config.resource_id.to_string(),
            slice_status_name(rt.status));
  return {};
}

Result<void> NodeActor::apply_configure(Network& net, const ConfigureCommand& cmd,
                                        bool labelled) {
  const ResourceId rid = cmd.policy.owner;
  auto it = slices_.find(rid);
  if (it == slices_.end()) {
    return make_error(Errc::UnknownSlice, "no slice " + rid.to_string());
  }
  if (!verify(params_.isp_pub, cmd.policy.signing_bytes(), cmd.policy.certified_by_isp)) {
    return make_error(Errc::UncertifiedPolicy, "policy not certified by ISP", "M1");
  }
  SliceRuntime& rt = it->second;

  if (labelled) net.step("bringup/5a read-policy");
  const trust::SealedBlob* blob = anchor_.tds().get("config:" + rid.to_string());
  if (blob == nullptr) {
    return make_error(Errc::UnknownSlice, "no sealed configuration for " + rid.to_string());
  }
  auto config_bytes = anchor_.unseal(*blob);
  if (!config_bytes) return config_bytes.error();
  auto stored = AppSliceConfiguration::decode(config_bytes.value());
  if (!stored) return stored.error();

  rt.config = stored.take();
  rt.config.policy = cmd.policy;
  if (!cmd.slice_fingerprint.empty()) rt.config.fingerprint = cmd.slice_fingerprint;
  anchor_.tds().put("config:" + rid.to_string(), anchor_.seal(rt.config.encode()));

  if (labelled) net.step("bringup/5b firewall-rules");
  recompute_firewall(net);

  if (labelled) net.step("bringup/5c configure-overlay");
  net.state(id_, "overlay", rid.to_string());

  if (labelled) net.step("bringup/5d assign-node-store");
  auto key = anchor_.get_storage_key(rid);
  if (!key) return key.error();

  if (labelled) net.step("bringup/5e boot-slice");
  switch (cmd.action) {
    case ConfigureAction::Activate:
      if (rt.status != SliceStatus::Active) {
        auto booted = boot_slice(net, rt);
        if (!booted) return booted.error();
      }
      break;
    case ConfigureAction::Deactivate:
      rt.status = SliceStatus::Deactivated;
      net.state(id_, "slice:" + rid.to_string(), slice_status_name(rt.status));
      break;
    case ConfigureAction::Restart:
      if (rt.status == SliceStatus::Active) {
        auto booted = boot_slice(net, rt);
        if (!booted) return booted.error();
      }
      break;
  }
  (void)chain_log(net, "configure", cmd.encode());
  return {};
}

void NodeActor::recompute_firewall(Network& net) {
  // Default deny; permitted pairs are recomputed from certified policies.
  size_t allowed = 0;
  for (const auto& [a, rta] : slices_) {
    for (const auto& [b, rtb] : slices_) {
      if (a != b && firewall_permits(a, b)) ++allowed;
    }
  }
  net.state(id_, "firewall_allowed_pairs", std::to_string(allowed));
}

bool NodeActor::firewall_permits(const ResourceId& from, const ResourceId& to) const {
  auto fi = slices_.find(from);
  auto ti = slices_.find(to);
  if (fi == slices_.end() || ti == slices_.end()) return false;
  if (from == to) return true;
  const auto& fp = fi->second.config.policy;
  const auto& tp = ti->second.config.policy;
  return fp.allowed_slice_traffic.count(to) != 0 &&
         tp.allowed_slice_traffic.count(from) != 0;
}

Result<void> NodeActor::send_slice_traffic(Network& net, const ResourceId& from,
                                           const ResourceId& to) {
  WireMessage m;
  m.type = MsgType::SliceTraffic;
  m.body = to_bytes(from.to_string());
  auto reply = net.call(slice_alias(from), slice_alias(to), m);
  if (!reply) return reply.error();
  return {};
}

void NodeActor::corrupt_slice_image(const ResourceId& rid) {
  auto it = slices_.find(rid);
  if (it == slices_.end() || it->second.image.empty()) return;
  it->second.image[0] ^= 0x01;
}

// ---------------------------------------------------------------------------
// User requests (UI)

Result<UserResponse> NodeActor::handle_user_request(Network& net, const std::string& user,
                                                    const ResourceId& slice_rid,
                                                    const UserRequest& req) {
  struct Labels {
    const char* console;
    const char* forward;
    const char* log;
  };
  Labels labels{};
  switch (req.kind) {
    case UserCommand::Content:
      labels = {"user/01 request-content", "user/02 forward-to-slice",
                "user/03 signed-command-log"};
      break;
    case UserCommand::Play:
      labels = {"user/06 request-play", "user/07 forward-to-slice",
                "user/08 signed-command-log"};
      break;
    case UserCommand::Stop:
      labels = {"user/10 request-stop", "user/11 forward-to-slice",
                "user/12 signed-command-log"};
      break;
  }

  net.step(labels.console);
  net.console_msg(MsgType::UserRequestMsg, user, id_, user_command_name(req.kind));

  auto it = slices_.find(slice_rid);
  if (it == slices_.end()) {
    return Error(make_error(Errc::UnknownSlice, "no slice " + slice_rid.to_string()));
  }
  SliceRuntime& rt = it->second;
  if (rt.status != SliceStatus::Active) {
    return Error(make_error(Errc::SliceInactive, slice_rid.to_string() + " not active"));
  }
  if (!slice_trusted(rt)) {
    return Error(make_error(Errc::UntrustedSlice,
                            slice_rid.to_string() + " fails its fingerprint", "M5"));
  }

  net.step(labels.forward);
  UserForwardBody fwd{slice_rid, req};
  WireMessage fm;
  fm.type = MsgType::UserRequestMsg;
  fm.body = fwd.encode();
  auto forwarded = net.call(id_, slice_alias(slice_rid), fm);
  if (!forwarded) return forwarded.error();

  net.step(labels.log);
  auto entry = chain_log(net, "user_command", req.encode());
  if (!entry) return entry.error();
  auto logged = send_app_log(net, slice_rid, entry.value());
  if (!logged) return logged.error();

  UserResponse resp;
  resp.provider_identity = net.mitigation_enabled("M14") ? rt.provider : "";

  switch (req.kind) {
    case UserCommand::Content: {
      auto cat = rt.catalog.find(req.content_id);
      if (cat == rt.catalog.end()) {
        return Error(make_error(Errc::UnknownContent, "not in catalog: " + req.content_id));
      }
      net.step("user/04 slice-p2p-download");
      auto bytes = download_content(net, cat->second, slice_rid, slice_rid);
      if (!bytes) return bytes.error();
      auto stored = store_put(net, slice_rid.to_string(), slice_rid,
                              "content:" + req.content_id, bytes.value());
      if (!stored) return stored.error();

      net.step("user/05 response-to-user");
      UserResponseBody body{slice_rid, rt.provider, true, "content-ready"};
      WireMessage rm;
      rm.type = MsgType::UserResponseMsg;
      rm.body = body.encode();
      auto up = net.call(slice_alias(slice_rid), id_, rm);
      if (!up) return up.error();
      net.console_msg(MsgType::UserResponseMsg, id_, user, "content-ready");
      resp.ok = true;
      resp.status = "content-ready";
      resp.content_handle = "content:" + req.content_id;
      return resp;
    }
    case UserCommand::Play: {
      if (rt.catalog.count(req.content_id) == 0) {
        return Error(make_error(Errc::UnknownContent, "not in catalog: " + req.content_id));
      }
      net.step("user/09 periodic-play-log");
      plays_.push_back({slice_rid, req.content_id, params_.play_log_interval, net.now()});
      resp.ok = true;
      resp.status = "playing";
      return resp;
    }
    case UserCommand::Stop: {
      auto is_target = [&](const PlaySession& p) {
        return p.slice == slice_rid && p.content_id == req.content_id;
      };
      plays_.erase(std::remove_if(plays_.begin(), plays_.end(), is_target), plays_.end());
      resp.ok = true;
      resp.status = "stopped";
      return resp;
    }
  }
  return Error(make_error(Errc::UnknownContent, "unreachable"));
}

// ---------------------------------------------------------------------------
// Tracker flows (COMM/API)

Result<void> NodeActor::tracker_flow(Network& net, const std::string& user,
                                     const ResourceId& slice_rid,
                                     const std::string& content_id,
                                     const std::string& app_tracker,
                                     const std::string& nada_tracker) {
  const std::string comm = id_ + ":comm";

  net.step("tracker/1 user-request");
  net.console_msg(MsgType::UserRequestMsg, user, comm, content_id);

  net.step("tracker/2 signed-request-to-node-management");
  SignedTrackerRequest req;
  req.node = id_;
  req.customer = slice_rid.first();
  req.content_id = content_id;
  req.nonce = rng_.bytes(16);
  req.comm_sig = sign(comm_key_, req.signing_bytes());

  WireMessage m;
  m.type = MsgType::TrackerRequest;
  m.body = req.encode();
  auto to_mgmt = net.call(comm, id_, m);
  if (!to_mgmt) return to_mgmt.error();

  net.step("tracker/3 store-request");
  auto stored = store_put(net, id_, slice_rid, "request:" + content_id, req.encode());
  if (!stored) return stored.error();

  net.step("tracker/4 request-to-app-tracker");
  auto tracker_reply = net.call(comm, app_tracker, m);
  if (!tracker_reply) return tracker_reply.error();

  net.step("tracker/5 download-definition-file");
  auto dd = mgmt::DownloadDefinitionFile::decode(tracker_reply.value().msg.body);
  if (!dd) {
    net.mark_rejected(tracker_reply.value().reply_id,
                      make_error(Errc::IntegrityFailure, "dd undecodable", "M8"));
    return dd.error();
  }
  auto tracker_pub = params_.tracker_pubs.find(dd.value().issuing_tracker);
  if (tracker_pub == params_.tracker_pubs.end() ||
      !verify(tracker_pub->second, dd.value().signing_bytes(), dd.value().signature)) {
    Error e = make_error(Errc::BadSignature, "dd not signed by a known tracker", "M8");
    net.mark_rejected(tracker_reply.value().reply_id, e);
    return e;
  }
  net.mark_accepted(tracker_reply.value().reply_id);

  net.step("tracker/6 route-via-nada-tracker");
  WireMessage route;
  route.type = MsgType::TrackerRoute;
  route.body = tracker_reply.value().msg.body;
  auto routed = net.call(comm, nada_tracker, route);
  if (!routed) return routed.error();
  return {};
}

// ---------------------------------------------------------------------------
// Periodic work

void NodeActor::on_tick(Network& net) {
  anchor_.update_clock(net.now());

  for (auto& play : plays_) {
    if (net.now() > play.started && (net.now() - play.started) % play.interval == 0) {
      auto entry = chain_log(net, "play", to_bytes(play.content_id));
      if (entry) (void)send_app_log(net, play.slice, entry.value());
    }
  }

  if (reporter_armed_ && phase_ >= NodePhase::Registered &&
      net.now() % params_.incentive_interval == 0) {
    Measurement link;
    link.subject = id_;
    link.metric = "link_utilization";
    link.value = static_cast<double>((sha256(to_bytes(id_))[0] + net.now()) % 100);
    link.unit = "mbit/s";
    link.at = net.now();
    record_measurement(net, link);
    for (const auto& [rid, rt] : slices_) {
      if (rt.status != SliceStatus::Active) continue;
      Measurement storage;
      storage.subject = rid.to_string();
      storage.metric = "storage_utilization";
      storage.value = static_cast<double>(stores_.count(rid.to_string()) != 0
                                              ? stores_.at(rid.to_string()).size()
                                              : 0);
      storage.unit = "records";
      storage.at = net.now();
      record_measurement(net, storage);
    }

    Session* s = session_for(params_.mgmt_id, "mgmt");
    if (s != nullptr && !unshipped_log_.empty()) {
      MeasureReportBody body{id_, unshipped_log_};
      WireMessage m = overlay::session_wrap(*s, MsgType::MeasureReport, body.encode());
      auto sent = net.call(id_, params_.mgmt_id, m);
      if (sent) unshipped_log_.clear();
    }
  }
}

Bytes NodeActor::persistent_image() const {
  Encoder e;
  e.field(anchor_.tds().persistent_image());
  e.count(static_cast<uint32_t>(stores_.size()));
  for (const auto& [owner, records] : stores_) {
    e.str(owner);
    e.count(static_cast<uint32_t>(records.size()));
    for (const auto& [name, rec] : records) {
      e.str(name);
      e.field(ByteView(rec.first.data(), rec.first.size()));
      e.field(rec.second);
    }
  }
  if (mib_cipher_.has_value()) {
    e.field(ByteView(mib_cipher_->first.data(), mib_cipher_->first.size()));
    e.field(mib_cipher_->second);
  }
  return std::move(e).take();
}

}  // namespace nada::node
