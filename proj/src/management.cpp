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

#include "nada/management.hpp"

#include <algorithm>
#include <cstring>

namespace nada::mgmt {

using overlay::Session;
using sim::Delivery;
using sim::MsgType;
using sim::Network;
using sim::WireMessage;

namespace {

WireMessage ack_message() {
  WireMessage m;
  m.type = MsgType::Ack;
  return m;
}

Result<SymKey> key_from_bytes(ByteView b) {
  if (b.size() != kSymKeySize) {
    return make_error(Errc::IntegrityFailure, "session key width");
  }
  SymKey k;
  std::memcpy(k.data(), b.data(), k.size());
  return k;
}

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

}  // namespace

trust::PcrArray RegistryEntry::expected_pcrs() const {
  trust::PcrArray pcrs = base_pcrs;
  for (const auto& d : measured_slices) {
    pcrs[trust::kPcrSlices] = trust::extend_digest(pcrs[trust::kPcrSlices], d);
  }
  return pcrs;
}

Bytes DownloadDefinitionFile::signing_bytes() const {
  Encoder e;
  e.str("dd-file");
  e.field(digest_view(request_digest));
  e.str(content_id);
  e.str(requester_node);
  e.count(static_cast<uint32_t>(locations.size()));
  for (const auto& loc : locations) loc.encode(e);
  e.str(issuing_tracker);
  e.field(meta);
  return std::move(e).take();
}

Bytes DownloadDefinitionFile::encode() const {
  Encoder e;
  e.field(digest_view(request_digest));
  e.str(content_id);
  e.str(requester_node);
  e.count(static_cast<uint32_t>(locations.size()));
  for (const auto& loc : locations) loc.encode(e);
  e.str(issuing_tracker);
  e.field(meta);
  put_sig(e, signature);
  return std::move(e).take();
}

Result<DownloadDefinitionFile> DownloadDefinitionFile::decode(ByteView data) {
  Decoder d(data);
  DownloadDefinitionFile dd;
  auto rq = d.field();
  if (!rq) return rq.error();
  if (rq.value().size() != kDigestSize) {
    return make_error(Errc::IntegrityFailure, "request digest width");
  }
  std::memcpy(dd.request_digest.data(), rq.value().data(), kDigestSize);
  auto cid = d.str();
  if (!cid) return cid.error();
  dd.content_id = cid.take();
  auto rn = d.str();
  if (!rn) return rn.error();
  dd.requester_node = rn.take();
  auto n = d.count();
  if (!n) return n.error();
  for (uint32_t i = 0; i < n.value(); ++i) {
    auto loc = ContentLocation::decode(d);
    if (!loc) return loc.error();
    dd.locations.push_back(loc.take());
  }
  auto tr = d.str();
  if (!tr) return tr.error();
  dd.issuing_tracker = tr.take();
  auto mb = d.field();
  if (!mb) return mb.error();
  dd.meta = mb.take();
  auto sig = get_sig(d);
  if (!sig) return sig.error();
  dd.signature = sig.take();
  return dd;
}

Bytes ExportRequestBody::signing_bytes() const {
  Encoder e;
  e.str("export-request");
  e.str(requester);
  e.field(nonce);
  e.count(static_cast<uint32_t>(attrs.size()));
  for (const auto& [k, v] : attrs) {
    e.str(k);
    e.str(v);
  }
  return std::move(e).take();
}

Bytes ExportRequestBody::encode() const {
  Encoder e;
  e.str(requester);
  e.field(nonce);
  e.count(static_cast<uint32_t>(attrs.size()));
  for (const auto& [k, v] : attrs) {
    e.str(k);
    e.str(v);
  }
  put_sig(e, sig);
  return std::move(e).take();
}

Result<ExportRequestBody> ExportRequestBody::decode(ByteView data) {
  Decoder d(data);
  ExportRequestBody b;
  auto r = d.str();
  if (!r) return r.error();
  b.requester = r.take();
  auto nonce = d.field();
  if (!nonce) return nonce.error();
  b.nonce = nonce.take();
  auto n = d.count();
  if (!n) return n.error();
  for (uint32_t i = 0; i < n.value(); ++i) {
    auto k = d.str();
    if (!k) return k.error();
    auto v = d.str();
    if (!v) return v.error();
    b.attrs.emplace(k.take(), v.take());
  }
  auto sig = get_sig(d);
  if (!sig) return sig.error();
  b.sig = sig.take();
  return b;
}

// ---------------------------------------------------------------------------
// ManagementActor

ManagementActor::ManagementActor(std::string id, const std::string& mgmt_rid_id,
                                 const Digest& seed, uint64_t ticket_ttl)
    : id_(std::move(id)),
      maintenance_(ResourceId::management(mgmt_rid_id).value()),
      anchor_(id_, sha256(to_bytes(id_ + "-anchor-seed"))),
      rng_(seed),
      ticket_ttl_(ticket_ttl) {
  isp_key_ = SigningKey::from_seed(rng_.fork("isp").digest());
  anchor_ = trust::TrustAnchor(id_, rng_.fork("anchor").digest());
  anchor_.synchronize_clock(0);  // management is the clock authority
}

void ManagementActor::provision_node(const std::string& node_id, RegistryEntry entry) {
  registry_.entries[node_id] = std::move(entry);
}

void ManagementActor::assign_slice(const std::string& node_id,
                                   SliceAssignment assignment) {
  assignments_[node_id].push_back(std::move(assignment));
}

const AppSlicePolicy* ManagementActor::certified_policy(const ResourceId& rid) const {
  auto it = certified_.find(rid);
  return it == certified_.end() ? nullptr : &it->second;
}

const ContentRecord* ManagementActor::content(const std::string& id) const {
  auto it = contents_.find(id);
  return it == contents_.end() ? nullptr : &it->second;
}

Session* ManagementActor::session_for(const std::string& peer) {
  auto it = sessions_.find(peer);
  return it == sessions_.end() ? nullptr : &it->second;
}

MetaData ManagementActor::publish_content(const std::string& content_id, ByteView bytes,
                                          const std::vector<ContentLocation>& locations,
                                          MetaKind kind, const std::string& tracker,
                                          const std::string& customer) {
  MetaData meta;
  meta.content_id = content_id;
  meta.fingerprint = fingerprint_of(bytes);
  meta.locations = locations;
  meta.tracker = tracker;
  meta.kind = kind;
  meta.signature = sign(isp_key_, meta.signing_bytes());
  contents_[content_id] = {Bytes(bytes.begin(), bytes.end()), meta, customer};
  return meta;
}

Result<AppSlicePolicy> ManagementActor::certify_policy(AppSlicePolicy policy) {
  if (!policy.owner.is_app_slice() && policy.owner != maintenance_) {
    return make_error(Errc::RejectedPolicy, "owner must be an app slice");
  }
  if (policy.owner != maintenance_) {
    auto references_maintenance = [&](const std::set<ResourceId>& rids) {
      return rids.count(maintenance_) != 0;
    };
    if (references_maintenance(policy.allowed_overlay_peers) ||
        references_maintenance(policy.allowed_slice_traffic) ||
        references_maintenance(policy.mib_read_grants)) {
      return make_error(Errc::RejectedPolicy,
                        "customer policy references the maintenance overlay");
    }
  }
  policy.certified_by_isp = sign(isp_key_, policy.signing_bytes());
  certified_[policy.owner] = policy;
  return policy;
}

Result<void> ManagementActor::push_install(Network& net, const std::string& node_id,
                                           const std::string& content_id) {
  auto it = contents_.find(content_id);
  if (it == contents_.end()) {
    return make_error(Errc::UnknownContent, content_id);
  }
  Session* s = session_for(node_id);
  if (s == nullptr) {
    return make_error(Errc::UnknownNode, "no session with " + node_id);
  }
  net.step("install/1 metadata");
  WireMessage m = overlay::session_wrap(*s, MsgType::MetaDataPush,
                                        it->second.meta.encode());
  auto reply = net.call(id_, node_id, m);
  if (!reply) return reply.error();
  return {};
}

Result<LogEntry> ManagementActor::chain_log(Network& net, const std::string& kind,
                                            ByteView payload) {
  anchor_.update_clock(net.now());
  auto entry = anchor_.sign_log(kind, payload);
  if (!entry) return entry.error();
  chain_.push_back(entry.value());
  net.chain_entry(id_, entry.value());
  return entry.take();
}

Result<WireMessage> ManagementActor::handle_auth_challenge(Network& net,
                                                           const Delivery& d) {
  auto body = overlay::AuthChallengeBody::decode(d.msg.body);
  if (!body) return Error(make_error(Errc::IntegrityFailure, "bad challenge", "M10"));
  const std::string nonce_hex = to_hex(body.value().nonce);
  if (seen_challenge_nonces_.count(nonce_hex) != 0) {
    return Error(make_error(Errc::Freshness, "challenge nonce replayed", "M10"));
  }
  seen_challenge_nonces_.insert(nonce_hex);
  auto entry = registry_.entries.find(body.value().initiator);
  if (entry == registry_.entries.end()) {
    return Error(make_error(Errc::UnknownNode,
                            "no reference measurements for " + body.value().initiator,
                            "M8"));
  }
  // A boot implies fresh registers; expectations restart from the base state.
  entry->second.measured_slices.clear();
  entry->second.registered = false;

  overlay::AuthOfferBody offer;
  offer.responder = id_;
  offer.initiator_nonce = body.value().nonce;
  offer.responder_nonce = rng_.bytes(16);
  offer.isp_sig = sign(isp_key_, offer.signing_bytes());
  pending_auth_[body.value().initiator] = {body.value().nonce, offer.responder_nonce};

  WireMessage reply;
  reply.type = MsgType::AuthOffer;
  reply.body = offer.encode();
  return reply;
}

Result<WireMessage> ManagementActor::handle_auth_quote(Network& net, const Delivery& d) {
  auto body = overlay::AuthQuoteBody::decode(d.msg.body);
  if (!body) return Error(make_error(Errc::IntegrityFailure, "bad quote body", "M10"));
  auto pending = pending_auth_.find(body.value().node);
  if (pending == pending_auth_.end()) {
    return Error(make_error(Errc::UnexpectedMessage, "no handshake in progress", "M10"));
  }
  auto entry = registry_.entries.find(body.value().node);
  if (entry == registry_.entries.end()) {
    return Error(make_error(Errc::UnknownNode, body.value().node, "M8"));
  }
  if (body.value().attestation_pub != entry->second.attestation_pub) {
    return Error(make_error(Errc::CertificateFailure,
                            "attestation key not certified for this node", "M8"));
  }
  auto quote = trust::Quote::decode(body.value().quote);
  if (!quote) return Error(make_error(Errc::IntegrityFailure, "bad quote", "M9"));

  Bytes nonce_material = pending->second.initiator_nonce;
  append(nonce_material, pending->second.responder_nonce);
  Digest expected_nonce = sha256(nonce_material);
  auto verdict = trust::verify_quote(quote.value(), digest_view(expected_nonce),
                                     entry->second.expected_pcrs(),
                                     entry->second.attestation_pub);
  if (verdict == trust::QuoteVerdict::Freshness) {
    return Error(make_error(Errc::Freshness, "stale quote", "M10"));
  }
  if (verdict != trust::QuoteVerdict::Accept) {
    return Error(make_error(Errc::AttestationFailure,
                            std::string("node attestation: ") +
                                trust::quote_verdict_name(verdict),
                            "M9"));
  }

  Bytes key_bytes = rng_.bytes(kSymKeySize);
  Bytes key_blob = trust::TrustAnchor::bind_to_state(
      rng_, entry->second.bind_pub, entry->second.expected_pcrs(), trust::full_mask(),
      key_bytes);
  overlay::AuthAcceptBody accept;
  accept.key_blob = key_blob;
  accept.isp_sig = sign(isp_key_, overlay::AuthAcceptBody::signing_bytes(
                                      pending->second.initiator_nonce,
                                      pending->second.responder_nonce, key_blob));

  Session s;
  s.self = id_;
  s.peer = body.value().node;
  s.overlay = "mgmt";
  auto key = key_from_bytes(key_bytes);
  if (!key) return key.error();
  s.key = key.take();
  s.established_at = net.now();
  s.conf_mitigation = "M12";
  sessions_[s.peer] = s;
  pending_auth_.erase(pending);
  (void)chain_log(net, "session", to_bytes(body.value().node));

  WireMessage reply;
  reply.type = MsgType::AuthAccept;
  reply.body = accept.encode();
  return reply;
}

Result<WireMessage> ManagementActor::handle_register(Network& net, const Delivery& d,
                                                     const Bytes& plain,
                                                     Session& session) {
  auto body = node::RegisterRequestBody::decode(plain);
  if (!body) return body.error();
  if (body.value().node != session.peer) {
    return Error(make_error(Errc::AuthenticationFailure,
                            "registration names a different node", "M10"));
  }
  auto entry = registry_.entries.find(body.value().node);
  if (entry == registry_.entries.end()) {
    return Error(make_error(Errc::UnknownNode, body.value().node, "M8"));
  }
  entry->second.registered = true;
  entry->second.last_registration = net.now();
  entry->second.measured_slices.clear();

  node::RegisterAcceptBody accept;
  accept.clock = net.now();
  auto assigned = assignments_.find(body.value().node);
  if (assigned != assignments_.end()) {
    for (const auto& a : assigned->second) {
      auto pol = certified_.find(a.rid);
      if (pol == certified_.end()) continue;
      ConfigureCommand cmd{pol->second, a.package_fingerprint, ConfigureAction::Activate};
      accept.configure_cmds.push_back(cmd.encode());
      entry->second.measured_slices.push_back(a.image_digest);
    }
  }
  (void)chain_log(net, "register", to_bytes(body.value().node));
  net.state(id_, "registered:" + body.value().node, "1");
  (void)d;
  return overlay::session_wrap(session, MsgType::RegisterAccept, accept.encode());
}

Result<WireMessage> ManagementActor::handle_ticket_request(Network& net,
                                                           const Delivery& d,
                                                           const Bytes& plain,
                                                           Session& session) {
  auto body = overlay::TicketRequestBody::decode(plain);
  if (!body) return body.error();
  const auto& req = body.value();

  // M3: the certified policy of the overlay decides membership.
  if (req.overlay == maintenance_) {
    if (req.requester != maintenance_) {
      return Error(make_error(Errc::PolicyDenied,
                              "maintenance overlay restricted to management", "M3"));
    }
  } else {
    auto pol = certified_.find(req.overlay);
    if (pol == certified_.end()) {
      return Error(make_error(Errc::PolicyDenied,
                              "no certified policy for " + req.overlay.to_string(),
                              "M3"));
    }
    if (pol->second.allowed_overlay_peers.count(req.requester) == 0) {
      return Error(make_error(Errc::PolicyDenied,
                              req.requester.to_string() + " not an overlay peer", "M3"));
    }
    // The requester must actually run on the node asking for the ticket.
    bool on_node = false;
    auto assigned = assignments_.find(session.peer);
    if (assigned != assignments_.end()) {
      for (const auto& a : assigned->second) {
        if (a.rid == req.requester) {
          on_node = true;
          break;
        }
      }
    }
    if (!on_node) {
      return Error(make_error(Errc::PolicyDenied,
                              req.requester.to_string() + " does not run on " +
                                  session.peer,
                              "M3"));
    }
  }

  auto target = registry_.entries.find(req.target_node);
  if (target == registry_.entries.end()) {
    return Error(make_error(Errc::UnknownTarget, req.target_node));
  }
  auto requester_entry = registry_.entries.find(session.peer);
  if (requester_entry == registry_.entries.end()) {
    return Error(make_error(Errc::UnknownNode, session.peer, "M8"));
  }

  Bytes session_key = rng_.bytes(kSymKeySize);
  overlay::Ticket ticket;
  ticket.issuer = maintenance_.first();
  ticket.requester = req.requester;
  ticket.target_node = req.target_node;
  ticket.overlay = req.overlay;
  ticket.nonce = rng_.bytes(16);
  ticket.issued_at = net.now();
  ticket.ttl = ticket_ttl_;
  ticket.key_material = trust::TrustAnchor::bind_to_state(
      rng_, target->second.bind_pub, target->second.expected_pcrs(), trust::full_mask(),
      session_key);
  ticket.requester_ref_pcrs = requester_entry->second.expected_pcrs();
  ticket.requester_att_pub = requester_entry->second.attestation_pub;
  ticket.signature = sign(isp_key_, ticket.signing_bytes());

  overlay::TicketGrantBody grant;
  grant.ticket = ticket.encode();
  grant.requester_key_blob = trust::TrustAnchor::bind_to_state(
      rng_, requester_entry->second.bind_pub, requester_entry->second.expected_pcrs(),
      trust::full_mask(), session_key);
  grant.target_ref_pcrs = target->second.expected_pcrs();
  grant.target_att_pub = target->second.attestation_pub;

  (void)chain_log(net, "ticket_issued",
                  to_bytes(req.requester.to_string() + "->" + req.target_node + "@" +
                           req.overlay.to_string()));
  (void)d;
  return overlay::session_wrap(session, MsgType::TicketGrant, grant.encode());
}

Result<WireMessage> ManagementActor::handle_session_message(Network& net,
                                                            const Delivery& d) {
  Session* session = session_for(d.msg.src);
  if (session == nullptr) {
    return Error(make_error(Errc::UnexpectedMessage, "no session with " + d.msg.src,
                            "M12"));
  }
  auto plain = overlay::session_open_marked(net, *session, d.msg, d.id);
  if (!plain) return plain.error();

  switch (d.msg.type) {
    case MsgType::RegisterRequest:
      return handle_register(net, d, plain.value(), *session);
    case MsgType::TicketRequest:
      return handle_ticket_request(net, d, plain.value(), *session);
    case MsgType::InstallReport: {
      auto report = node::InstallReportBody::decode(plain.value());
      if (!report) return report.error();
      if (report.value().ok) {
        auto content_it = std::find_if(
            contents_.begin(), contents_.end(), [&](const auto& kv) {
              return kv.second.meta.fingerprint == report.value().fingerprint;
            });
        Digest image_digest{};
        if (content_it != contents_.end()) {
          auto pkg = node::SlicePackage::decode(content_it->second.bytes);
          if (pkg) image_digest = sha256(pkg.value().image);
        }
        assignments_[d.msg.src].push_back(
            {report.value().rid, report.value().fingerprint, image_digest});
        auto entry = registry_.entries.find(d.msg.src);
        if (entry != registry_.entries.end()) {
          entry->second.measured_slices.push_back(image_digest);
        }
      }
      (void)chain_log(net, "install_report", plain.value());
      return overlay::session_wrap(*session, MsgType::Ack, Bytes{});
    }
    case MsgType::MeasureReport: {
      auto report = node::MeasureReportBody::decode(plain.value());
      if (!report) return report.error();
      if (report.value().reporter != session->peer) {
        return Error(make_error(Errc::AuthenticationFailure,
                                "report claims a different node", "M19"));
      }
      auto entry = registry_.entries.find(session->peer);
      if (entry == registry_.entries.end()) {
        return Error(make_error(Errc::UnknownNode, session->peer, "M8"));
      }
      for (const auto& le : report.value().entries) {
        if (!verify(entry->second.log_pub, le.signing_bytes(), le.signature)) {
          return Error(make_error(Errc::BadSignature,
                                  "measurement entry not signed by the node", "M4.0"));
        }
      }
      return overlay::session_wrap(*session, MsgType::Ack, Bytes{});
    }
    case MsgType::ContentRequest: {
      auto req = overlay::ContentRequestBody::decode(plain.value());
      if (!req) return req.error();
      auto it = contents_.find(req.value().content_id);
      if (it == contents_.end()) {
        return Error(make_error(Errc::UnknownContent, req.value().content_id));
      }
      overlay::ContentChunkBody chunk;
      chunk.content_id = req.value().content_id;
      chunk.index = req.value().index;
      chunk.total = overlay::chunk_count(it->second.bytes.size());
      chunk.data = overlay::chunk_of(it->second.bytes, req.value().index);
      if (net.wants_source_tamper(MsgType::ContentChunk, id_) && !chunk.data.empty()) {
        chunk.data[0] ^= 0x01;
      }
      return overlay::session_wrap(*session, MsgType::ContentChunk, chunk.encode());
    }
    default:
      return Error(make_error(Errc::UnexpectedMessage,
                              std::string("unexpected over session: ") +
                                  sim::msg_type_name(d.msg.type),
                              "M12"));
  }
}

Result<WireMessage> ManagementActor::handle(Network& net, const Delivery& d) {
  switch (d.msg.type) {
    case MsgType::AuthChallenge:
      return handle_auth_challenge(net, d);
    case MsgType::AuthQuote:
      return handle_auth_quote(net, d);
    case MsgType::RegisterRequest:
    case MsgType::TicketRequest:
    case MsgType::InstallReport:
    case MsgType::MeasureReport:
    case MsgType::ContentRequest:
      return handle_session_message(net, d);
    case MsgType::AuthOffer:
    case MsgType::AuthAccept:
      return Error(make_error(Errc::UnexpectedMessage, "management initiates no handshake",
                              "M10"));
    default:
      return Error(make_error(Errc::UnexpectedMessage,
                              std::string("management does not serve ") +
                                  sim::msg_type_name(d.msg.type),
                              "M12"));
  }
}

void ManagementActor::on_tick(Network& net) { anchor_.update_clock(net.now()); }

Bytes ManagementActor::persistent_image() const {
  return anchor_.tds().persistent_image();
}

}  // namespace nada::mgmt
