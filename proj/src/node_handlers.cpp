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

#include <cstring>

#include "nada/management.hpp"
#include "nada/node.hpp"

namespace nada::node {

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

std::string overlay_key(const std::string& overlay_field) {
  return overlay_field.empty() ? "mgmt" : overlay_field;
}

// PEP -> PDP forward inside the node.
struct PdpForwardBody {
  std::string requester;
  std::string subject;
  std::string metric;
  bool trusted = false;

  Bytes encode() const {
    Encoder e;
    e.str(requester);
    e.str(subject);
    e.str(metric);
    e.tag(trusted ? 1 : 0);
    return std::move(e).take();
  }
  static Result<PdpForwardBody> decode(ByteView data) {
    Decoder d(data);
    PdpForwardBody b;
    auto r = d.str();
    if (!r) return r.error();
    b.requester = r.take();
    auto s = d.str();
    if (!s) return s.error();
    b.subject = s.take();
    auto m = d.str();
    if (!m) return m.error();
    b.metric = m.take();
    auto t = d.tag();
    if (!t) return t.error();
    b.trusted = t.value() != 0;
    return b;
  }
};

struct PdpDecisionBody {
  bool permit = false;
  std::string rule_id;

  Bytes encode() const {
    Encoder e;
    e.tag(permit ? 1 : 0);
    e.str(rule_id);
    return std::move(e).take();
  }
  static Result<PdpDecisionBody> decode(ByteView data) {
    Decoder d(data);
    PdpDecisionBody b;
    auto p = d.tag();
    if (!p) return p.error();
    b.permit = p.value() != 0;
    auto r = d.str();
    if (!r) return r.error();
    b.rule_id = r.take();
    return b;
  }
};

}  // namespace

Result<Session*> NodeActor::session_from_wire(const Delivery& d) {
  const std::string okey = overlay_key(d.msg.overlay);
  Session* s = session_for(d.msg.src, okey);
  if (s == nullptr) {
    const std::string mit = d.msg.src == params_.mgmt_id ? "M12" : "M13";
    return make_error(Errc::UnexpectedMessage, "no session with " + d.msg.src, mit);
  }
  return s;
}

policy::AccessPolicy NodeActor::pdp_rules() const {
  policy::AccessPolicy rules;
  for (const auto& [rid, rt] : slices_) {
    const std::string subject = rid.to_string();
    policy::AccessRule self;
    self.id = "self:" + subject;
    self.match = {{"requester", subject}, {"subject", subject}};
    self.effect = policy::Effect::Permit;
    rules.rules.push_back(self);
    for (const auto& grant : rt.config.policy.mib_read_grants) {
      policy::AccessRule r;
      r.id = "grant:" + subject + ":" + grant.to_string();
      r.match = {{"requester", grant.to_string()}, {"subject", subject}};
      r.effect = policy::Effect::Permit;
      rules.rules.push_back(r);
    }
  }
  return rules;
}

Result<WireMessage> NodeActor::handle_node_auth(Network& net, const Delivery& d) {
  auto body = overlay::NodeAuthRequestBody::decode(d.msg.body);
  if (!body) return Error(make_error(Errc::IntegrityFailure, "bad node auth body", "M3"));
  auto ticket_r = overlay::Ticket::decode(body.value().ticket);
  if (!ticket_r) return Error(make_error(Errc::IntegrityFailure, "bad ticket", "M3"));
  const overlay::Ticket ticket = ticket_r.take();

  if (!verify(params_.isp_pub, ticket.signing_bytes(), ticket.signature)) {
    return Error(make_error(Errc::BadSignature, "ticket not signed by management", "M3"));
  }
  if (ticket.expired(net.now())) {
    return Error(make_error(Errc::TicketExpired, "ticket past ttl", "M3"));
  }
  if (ticket.target_node != id_) {
    return Error(make_error(Errc::UnknownTarget, "ticket for " + ticket.target_node, "M3"));
  }
  const std::string nonce_hex = to_hex(ticket.nonce);
  if (seen_ticket_nonces_.count(nonce_hex) != 0) {
    return Error(make_error(Errc::ReplayDetected, "ticket nonce replayed", "M3"));
  }
  seen_ticket_nonces_.insert(nonce_hex);

  // Overlay access policy: the certified policy installed with the overlay's
  // owning slice decides who may connect.
  if (ticket.overlay == params_.maintenance) {
    if (ticket.requester != params_.maintenance) {
      return Error(make_error(Errc::PolicyDenied,
                              "maintenance overlay restricted to management", "M3"));
    }
  } else {
    auto it = slices_.find(ticket.overlay);
    if (it == slices_.end()) {
      return Error(make_error(Errc::PolicyDenied,
                              "overlay not hosted here: " + ticket.overlay.to_string(),
                              "M3"));
    }
    const auto& pol = it->second.config.policy;
    if (pol.allowed_overlay_peers.count(ticket.requester) == 0) {
      return Error(make_error(Errc::PolicyDenied,
                              ticket.requester.to_string() + " not an overlay peer",
                              "M3"));
    }
  }

  auto quote = trust::Quote::decode(body.value().quote);
  if (!quote) return Error(make_error(Errc::IntegrityFailure, "bad quote", "M9"));
  auto verdict = trust::verify_quote(quote.value(), ticket.nonce,
                                     ticket.requester_ref_pcrs, ticket.requester_att_pub);
  if (verdict != trust::QuoteVerdict::Accept) {
    return Error(make_error(Errc::AttestationFailure,
                            std::string("requester attestation: ") +
                                trust::quote_verdict_name(verdict),
                            "M9"));
  }

  auto key_bytes = anchor_.unbind(ticket.key_material);
  if (!key_bytes) {
    return Error(make_error(Errc::SealMismatch,
                            "ticket key bound to a different platform state", "M6.2"));
  }
  if (key_bytes.value().size() != kSymKeySize) {
    return Error(make_error(Errc::IntegrityFailure, "ticket key width", "M3"));
  }

  Session s;
  s.self = id_;
  s.peer = d.msg.src;
  s.overlay = ticket.overlay.to_string();
  std::memcpy(s.key.data(), key_bytes.value().data(), s.key.size());
  s.established_at = net.now();
  s.conf_mitigation = "M13";
  sessions_[s.peer + "|" + s.overlay] = s;

  overlay::NodeAuthAcceptBody accept;
  accept.quote = anchor_.make_quote(ticket.nonce).encode();
  WireMessage reply;
  reply.type = MsgType::NodeAuthAccept;
  reply.overlay = ticket.overlay.to_string();
  reply.body = accept.encode();
  return reply;
}

Result<WireMessage> NodeActor::handle_content_request(Network& net, const Delivery& d) {
  auto session = session_from_wire(d);
  if (!session) return session.error();
  auto plain = overlay::session_open_marked(net, *session.value(), d.msg, d.id);
  if (!plain) return plain.error();
  auto req = overlay::ContentRequestBody::decode(plain.value());
  if (!req) return req.error();

  Bytes content;
  const std::string okey = overlay_key(d.msg.overlay);
  if (okey == "mgmt" || okey == params_.maintenance.to_string()) {
    auto held = held_content_.find(req.value().content_id);
    if (held == held_content_.end()) {
      return Error(make_error(Errc::UnknownContent, req.value().content_id));
    }
    auto bytes = store_get(net, id_, params_.maintenance, held->second);
    if (!bytes) return bytes.error();
    content = bytes.take();
  } else {
    auto rid = ResourceId::parse(okey);
    if (!rid) return rid.error();
    auto bytes = store_get(net, id_, rid.value(), "content:" + req.value().content_id);
    if (!bytes) {
      return Error(make_error(Errc::UnknownContent, req.value().content_id));
    }
    content = bytes.take();
  }

  overlay::ContentChunkBody chunk;
  chunk.content_id = req.value().content_id;
  chunk.index = req.value().index;
  chunk.total = overlay::chunk_count(content.size());
  chunk.data = overlay::chunk_of(content, req.value().index);
  if (net.wants_source_tamper(MsgType::ContentChunk, id_) && !chunk.data.empty()) {
    chunk.data[0] ^= 0x01;
  }
  return overlay::session_wrap(*session.value(), MsgType::ContentChunk, chunk.encode());
}

Result<WireMessage> NodeActor::handle_internal_log_request(Network& net,
                                                           const Delivery& d) {
  net.step("imon/1 slice-log-request");
  auto query = MibQueryBody::decode(d.msg.body);
  if (!query) return query.error();

  net.step("imon/2 pep-authenticate");
  const std::string src_prefix = id_ + ":";
  auto claimed = ResourceId::parse(d.msg.src.substr(src_prefix.size()));
  if (!claimed || claimed.value() != query.value().requester) {
    return Error(make_error(Errc::AuthenticationFailure,
                            "claimed requester does not match channel identity", "M19"));
  }
  auto it = slices_.find(query.value().requester);
  if (it == slices_.end()) {
    return Error(make_error(Errc::NoGrant, "requester is not a local slice", "M15"));
  }
  const bool trusted = it->second.status == SliceStatus::Active &&
                       slice_trusted(it->second);
  (void)chain_log(net, "mib_request", d.msg.body);
  if (!trusted) {
    net.mib_access("internal", query.value().requester.to_string(),
                   query.value().subject + "/" + query.value().metric, false);
    return Error(make_error(Errc::UntrustedSlice,
                            "requester fails its trust check", "M5"));
  }

  net.step("imon/3 forward-to-pdp");
  PdpForwardBody fwd{query.value().requester.to_string(), query.value().subject,
                     query.value().metric, trusted};
  WireMessage fm;
  fm.type = MsgType::LogRequest;
  fm.body = fwd.encode();
  auto decision_reply = net.call(id_, id_ + ":monitor", fm);
  if (!decision_reply) return decision_reply.error();
  auto decision = PdpDecisionBody::decode(decision_reply.value().msg.body);
  if (!decision) return decision.error();

  if (!decision.value().permit) {
    (void)chain_log(net, "mib_deny", to_bytes(decision.value().rule_id));
    net.mib_access("internal", query.value().requester.to_string(),
                   query.value().subject + "/" + query.value().metric, false);
    return Error(make_error(Errc::NoGrant,
                            "denied by rule " + decision.value().rule_id, "M15"));
  }

  net.step("imon/7 unseal-local-mib");
  auto rows = read_local_mib(net, query.value().requester.to_string(),
                             query.value().subject, query.value().metric);
  if (!rows) return rows.error();

  net.step("imon/8 query-measurements");
  net.mib_access("internal", query.value().requester.to_string(),
                 query.value().subject + "/" + query.value().metric, true);

  net.step("imon/9 log-response");
  (void)chain_log(net, "mib_grant", to_bytes(decision.value().rule_id));
  RowsBody out{rows.take()};
  WireMessage reply;
  reply.type = MsgType::LogResponse;
  reply.body = out.encode();
  return reply;
}

Result<WireMessage> NodeActor::handle_collection_log_request(Network& net,
                                                             const Delivery& d) {
  if (!d.msg.is_encrypted) {
    // Collection step I: the signed measurement-request metafile.
    auto meta = MetaData::decode(d.msg.body);
    if (!meta) return Error(make_error(Errc::IntegrityFailure, "bad metadata", "M11"));
    auto ok = overlay::verify_metadata(meta.value(), params_.isp_pub);
    if (!ok) return ok.error();
    if (meta.value().kind != MetaKind::MeasurementRequest) {
      return Error(make_error(Errc::UnexpectedMessage, "not a measurement request",
                              "M11"));
    }
    return ack_message();
  }

  auto session = session_from_wire(d);
  if (!session) return session.error();
  auto plain = overlay::session_open_marked(net, *session.value(), d.msg, d.id);
  if (!plain) return plain.error();
  auto query = MibQueryBody::decode(plain.value());
  if (!query) return query.error();
  if (query.value().requester != params_.maintenance) {
    return Error(make_error(Errc::NoGrant, "collection restricted to management", "M15"));
  }
  auto rows = read_local_mib(net, query.value().requester.to_string(),
                             query.value().subject, query.value().metric);
  if (!rows) return rows.error();
  net.mib_access("collection", query.value().requester.to_string(), "local-mib", true);
  (void)chain_log(net, "mib_collection", to_bytes(d.msg.src));
  RowsBody out{rows.take()};
  return overlay::session_wrap(*session.value(), MsgType::LogResponse, out.encode());
}

Result<WireMessage> NodeActor::handle_app_log(Network& net, const Delivery& d) {
  auto entry = LogEntry::decode(d.msg.body);
  if (!entry) return Error(make_error(Errc::IntegrityFailure, "bad log entry", "M4.2"));
  if (!verify(anchor_.log_pub(), entry.value().signing_bytes(), entry.value().signature)) {
    return Error(make_error(Errc::BadSignature,
                            "accounting entry not signed by node management", "M4.2"));
  }
  const std::string prefix = id_ + ":";
  auto rid = ResourceId::parse(d.msg.dst.substr(prefix.size()));
  if (!rid) return rid.error();
  auto it = slices_.find(rid.value());
  if (it == slices_.end()) {
    return Error(make_error(Errc::UnknownSlice, d.msg.dst));
  }
  it->second.account_log.push_back(entry.take());
  (void)net;
  return ack_message();
}

Result<WireMessage> NodeActor::handle_user_forward(Network& net, const Delivery& d) {
  auto body = UserForwardBody::decode(d.msg.body);
  if (!body) return body.error();
  const std::string prefix = id_ + ":";
  auto rid = ResourceId::parse(d.msg.dst.substr(prefix.size()));
  if (!rid || body.value().slice != rid.value()) {
    return Error(make_error(Errc::AuthenticationFailure,
                            "forwarded request names a different slice", "M19"));
  }
  auto it = slices_.find(rid.value());
  if (it == slices_.end()) return Error(make_error(Errc::UnknownSlice, d.msg.dst));
  if (it->second.status != SliceStatus::Active) {
    return Error(make_error(Errc::SliceInactive, rid.value().to_string()));
  }
  (void)net;
  return ack_message();
}

Result<WireMessage> NodeActor::handle_user_response_msg(Network& net, const Delivery& d) {
  auto body = UserResponseBody::decode(d.msg.body);
  if (!body) return body.error();
  const std::string prefix = id_ + ":";
  if (d.msg.src.rfind(prefix, 0) != 0) {
    return Error(make_error(Errc::UnexpectedMessage, "response from foreign node", "M19"));
  }
  auto src_rid = ResourceId::parse(d.msg.src.substr(prefix.size()));
  if (!src_rid || body.value().slice != src_rid.value()) {
    return Error(make_error(Errc::AuthenticationFailure,
                            "response claims a different slice identity", "M19"));
  }
  auto it = slices_.find(src_rid.value());
  if (it == slices_.end()) return Error(make_error(Errc::UnknownSlice, d.msg.src));
  if (net.mitigation_enabled("M14") &&
      body.value().claimed_provider != it->second.provider) {
    return Error(make_error(Errc::AuthenticationFailure,
                            "claimed provider '" + body.value().claimed_provider +
                                "' differs from registered identity",
                            "M14"));
  }
  return ack_message();
}

Result<WireMessage> NodeActor::handle_slice_content_request(Network& net,
                                                            const Delivery& d) {
  auto req = overlay::ContentRequestBody::decode(d.msg.body);
  if (!req) return req.error();
  const std::string prefix = id_ + ":";
  auto rid = ResourceId::parse(d.msg.dst.substr(prefix.size()));
  if (!rid) return rid.error();
  auto it = slices_.find(rid.value());
  if (it == slices_.end()) return Error(make_error(Errc::UnknownSlice, d.msg.dst));
  if (it->second.status != SliceStatus::Active) {
    return Error(make_error(Errc::SliceInactive, rid.value().to_string()));
  }
  auto bytes = store_get(net, rid.value().to_string(), rid.value(),
                         "content:" + req.value().content_id);
  if (!bytes) return Error(make_error(Errc::UnknownContent, req.value().content_id));

  overlay::ContentChunkBody out;
  out.content_id = req.value().content_id;
  out.index = 0;
  out.total = 1;
  out.data = bytes.take();
  if (net.wants_source_tamper(MsgType::SliceContentResponse, id_) && !out.data.empty()) {
    out.data[0] ^= 0x01;
  }
  WireMessage reply;
  reply.type = MsgType::SliceContentResponse;
  reply.body = out.encode();
  return reply;
}

Result<WireMessage> NodeActor::handle_push_content(Network& net, const Delivery& d) {
  auto session = session_from_wire(d);
  if (!session) return session.error();
  auto plain = overlay::session_open_marked(net, *session.value(), d.msg, d.id);
  if (!plain) return plain.error();
  auto body = PushContentBody::decode(plain.value());
  if (!body) return body.error();

  auto dd = mgmt::DownloadDefinitionFile::decode(body.value().dd);
  if (!dd) return Error(make_error(Errc::IntegrityFailure, "bad dd file", "M8"));
  auto tracker_pub = params_.tracker_pubs.find(dd.value().issuing_tracker);
  if (tracker_pub == params_.tracker_pubs.end() ||
      !verify(tracker_pub->second, dd.value().signing_bytes(), dd.value().signature)) {
    return Error(make_error(Errc::BadSignature, "dd not signed by a known tracker", "M8"));
  }
  auto meta = MetaData::decode(dd.value().meta);
  if (!meta) return Error(make_error(Errc::IntegrityFailure, "bad metadata in dd", "M11"));
  auto meta_ok = overlay::verify_metadata(meta.value(), params_.isp_pub);
  if (!meta_ok) return meta_ok.error();
  if (net.mitigation_enabled("M5") &&
      fingerprint_of(body.value().content) != meta.value().fingerprint) {
    return Error(make_error(Errc::FingerprintMismatch,
                            "pushed content fails signed fingerprint", "M5"));
  }

  // Find the local slice of the owning customer to store under.
  const std::string customer = dd.value().issuing_tracker.rfind("apptracker:", 0) == 0
                                   ? dd.value().issuing_tracker.substr(11)
                                   : "";
  const ResourceId* target = nullptr;
  for (const auto& [rid, rt] : slices_) {
    if (rid.first() == customer) {
      target = &rid;
      break;
    }
  }
  if (target == nullptr) {
    return Error(make_error(Errc::UnknownSlice, "no local slice for " + customer));
  }

  net.step("dist/11 store-via-node-management");
  StoreWriteBody sw{*target, "content:" + dd.value().content_id, body.value().content};
  WireMessage m;
  m.type = MsgType::StoreWrite;
  m.body = sw.encode();
  auto written = net.call(id_ + ":comm", id_, m);
  if (!written) return written.error();
  net.step("dist/12 node-store-write");
  return ack_message();
}

Result<WireMessage> NodeActor::handle_store_write(Network& net, const Delivery& d) {
  auto body = StoreWriteBody::decode(d.msg.body);
  if (!body) return body.error();
  if (d.msg.src != id_ + ":comm") {
    return Error(make_error(Errc::AuthenticationFailure,
                            "store writes come from the COMM/API", "M19"));
  }
  auto written = store_put(net, id_, body.value().owner, body.value().name,
                           body.value().payload);
  if (!written) return written.error();
  return ack_message();
}

Result<WireMessage> NodeActor::handle_slice_traffic(Network& net, const Delivery& d) {
  const std::string prefix = id_ + ":";
  if (d.msg.src.rfind(prefix, 0) != 0) {
    return Error(make_error(Errc::PolicyDenied, "foreign slice traffic", "M2"));
  }
  auto from = ResourceId::parse(d.msg.src.substr(prefix.size()));
  auto to = ResourceId::parse(d.msg.dst.substr(prefix.size()));
  if (!from || !to) {
    return Error(make_error(Errc::PolicyDenied, "unparseable slice pair", "M2"));
  }
  const std::string claimed(d.msg.body.begin(), d.msg.body.end());
  if (claimed != from.value().to_string()) {
    return Error(make_error(Errc::AuthenticationFailure,
                            "traffic claims a different source slice", "M19"));
  }
  if (!firewall_permits(from.value(), to.value())) {
    return Error(make_error(Errc::PolicyDenied,
                            "firewall: " + from.value().to_string() + " -> " +
                                to.value().to_string(),
                            "M2"));
  }
  (void)net;
  return ack_message();
}

Result<WireMessage> NodeActor::handle_dd_delivery(Network& net, const Delivery& d) {
  net.step("dist/7 dd-received");
  auto dd = mgmt::DownloadDefinitionFile::decode(d.msg.body);
  if (!dd) return Error(make_error(Errc::IntegrityFailure, "bad dd file", "M8"));
  auto tracker_pub = params_.tracker_pubs.find(dd.value().issuing_tracker);
  if (tracker_pub == params_.tracker_pubs.end() ||
      !verify(tracker_pub->second, dd.value().signing_bytes(), dd.value().signature)) {
    return Error(make_error(Errc::BadSignature, "dd not signed by a known tracker", "M8"));
  }
  const std::string dd_digest = to_hex(digest_view(sha256(d.msg.body)));
  if (seen_dd_digests_.count(dd_digest) != 0) {
    return Error(make_error(Errc::ReplayDetected, "dd already processed", "M3"));
  }
  seen_dd_digests_.insert(dd_digest);
  auto meta = MetaData::decode(dd.value().meta);
  if (!meta) return Error(make_error(Errc::IntegrityFailure, "bad metadata in dd", "M11"));
  auto meta_ok = overlay::verify_metadata(meta.value(), params_.isp_pub);
  if (!meta_ok) return meta_ok.error();

  const std::string customer = dd.value().issuing_tracker.rfind("apptracker:", 0) == 0
                                   ? dd.value().issuing_tracker.substr(11)
                                   : "";
  const ResourceId* serving = nullptr;
  for (const auto& [rid, rt] : slices_) {
    if (rid.first() == customer && rt.status == SliceStatus::Active) {
      serving = &rid;
      break;
    }
  }
  if (serving == nullptr) {
    return Error(make_error(Errc::UnknownSlice, "no serving slice for " + customer));
  }

  net.step("dist/8 content-request-to-slice");
  overlay::ContentRequestBody creq{dd.value().content_id, 0};
  WireMessage cm;
  cm.type = MsgType::SliceContentRequest;
  cm.body = creq.encode();
  auto creply = net.call(id_ + ":comm", slice_alias(*serving), cm);
  if (!creply) return creply.error();
  auto chunk = overlay::ContentChunkBody::decode(creply.value().msg.body);
  if (!chunk) return chunk.error();
  net.step("dist/9 content-from-slice");
  if (net.mitigation_enabled("M5") &&
      fingerprint_of(chunk.value().data) != meta.value().fingerprint) {
    Error e = make_error(Errc::FingerprintMismatch,
                         "slice served content failing its fingerprint", "M5");
    net.mark_rejected(creply.value().reply_id, e);
    return Error(e);
  }
  net.mark_accepted(creply.value().reply_id);

  net.step("dist/10 encrypted-transfer");
  auto session = connect_entity(net, *serving, dd.value().requester_node,
                                Domain::NadaNetwork, *serving);
  if (!session) return session.error();
  PushContentBody push{d.msg.body, chunk.value().data};
  WireMessage pm = overlay::session_wrap(*session.value(), MsgType::PushContent,
                                         push.encode());
  auto pushed = net.call(id_, dd.value().requester_node + ":comm", pm);
  if (!pushed) return pushed.error();
  return ack_message();
}

Result<WireMessage> NodeActor::handle_metadata_push(Network& net, const Delivery& d) {
  auto session = session_from_wire(d);
  if (!session) return session.error();
  auto plain = overlay::session_open_marked(net, *session.value(), d.msg, d.id);
  if (!plain) return plain.error();
  auto meta = MetaData::decode(plain.value());
  if (!meta) return Error(make_error(Errc::IntegrityFailure, "bad metadata", "M11"));
  auto ok = overlay::verify_metadata(meta.value(), params_.isp_pub);
  if (!ok) return ok.error();
  auto installed = install_from_meta(net, meta.value());
  if (!installed) return installed.error();
  return ack_message();
}

Result<WireMessage> NodeActor::handle(Network& net, const Delivery& d) {
  const WireMessage& msg = d.msg;
  const bool to_comm = msg.dst == id_ + ":comm";
  const bool to_monitor = msg.dst == id_ + ":monitor";
  const bool to_slice = msg.dst.rfind(id_ + ":slice:", 0) == 0;
  const bool from_own_slice = msg.src.rfind(id_ + ":slice:", 0) == 0;

  switch (msg.type) {
    case MsgType::NodeAuthRequest:
      return handle_node_auth(net, d);
    case MsgType::ContentRequest:
      return handle_content_request(net, d);
    case MsgType::MetaDataPush:
      return handle_metadata_push(net, d);
    case MsgType::LogRequest:
      if (to_monitor) {
        auto fwd = PdpForwardBody::decode(msg.body);
        if (!fwd) return fwd.error();
        net.step("imon/4 fetch-policy-rules");
        policy::AccessPolicy rules = pdp_rules();
        net.step("imon/5 pdp-decision");
        policy::RequestContext ctx;
        ctx.attrs = {{"requester", fwd.value().requester},
                     {"subject", fwd.value().subject},
                     {"metric", fwd.value().metric},
                     {"trust", fwd.value().trusted ? "1" : "0"}};
        auto decision = policy::pdp_evaluate(rules, ctx);
        net.step("imon/6 decision-to-pep");
        PdpDecisionBody out{decision.effect == policy::Effect::Permit, decision.rule_id};
        WireMessage reply;
        reply.type = MsgType::LogRequest;
        reply.body = out.encode();
        return reply;
      }
      if (from_own_slice && d.carrier == sim::Carrier::Vmm) {
        return handle_internal_log_request(net, d);
      }
      return handle_collection_log_request(net, d);
    case MsgType::AppLog:
      if (to_slice) return handle_app_log(net, d);
      return Error(make_error(Errc::UnexpectedMessage, "stray app log", "M4.2"));
    case MsgType::UserRequestMsg:
      if (to_slice) return handle_user_forward(net, d);
      return Error(make_error(Errc::UnexpectedMessage, "stray user request", "M19"));
    case MsgType::UserResponseMsg:
      return handle_user_response_msg(net, d);
    case MsgType::SliceContentRequest:
      if (to_slice) return handle_slice_content_request(net, d);
      return Error(make_error(Errc::UnexpectedMessage, "stray content request", "M19"));
    case MsgType::PushContent:
      if (to_comm) return handle_push_content(net, d);
      return Error(make_error(Errc::UnexpectedMessage, "stray push", "M13"));
    case MsgType::StoreWrite:
      return handle_store_write(net, d);
    case MsgType::SliceTraffic:
      if (to_slice) return handle_slice_traffic(net, d);
      return Error(make_error(Errc::PolicyDenied, "slice traffic to non-slice", "M2"));
    case MsgType::DDDelivery:
      if (to_comm) return handle_dd_delivery(net, d);
      return Error(make_error(Errc::UnexpectedMessage, "dd outside comm", "M8"));
    case MsgType::TrackerRequest:
      // Signed user request handed from our own COMM/API for safekeeping.
      if (msg.src == id_ + ":comm") return WireMessage{MsgType::Ack, "", "", "", {}, false, 0};
      return Error(make_error(Errc::UnexpectedMessage, "stray tracker request", "M8"));
    // Reply types never arrive unsolicited on an honest run.
    case MsgType::AuthChallenge:
    case MsgType::AuthQuote:
    case MsgType::RegisterRequest:
    case MsgType::TicketRequest:
    case MsgType::InstallReport:
      return Error(make_error(Errc::UnexpectedMessage, "node does not serve this", "M10"));
    case MsgType::AuthOffer:
    case MsgType::AuthAccept:
      return Error(make_error(Errc::UnexpectedMessage, "no handshake in progress", "M10"));
    case MsgType::RegisterAccept:
    case MsgType::TicketGrant:
    case MsgType::MeasureReport:
      return Error(make_error(Errc::ReplayDetected, "unsolicited management reply", "M12"));
    case MsgType::NodeAuthAccept:
      return Error(make_error(Errc::ReplayDetected, "unsolicited node auth reply", "M3"));
    case MsgType::ContentChunk:
    case MsgType::LogResponse:
    case MsgType::SliceContentResponse:
      return Error(make_error(Errc::ReplayDetected, "unsolicited data reply",
                              d.carrier == sim::Carrier::Vmm ? "M2" : "M13"));
    case MsgType::TrackerResponse:
    case MsgType::TrackerRoute:
      return Error(make_error(Errc::UnexpectedMessage, "stray tracker message", "M8"));
    case MsgType::Ack:
    case MsgType::ErrorReply:
      return Error(make_error(Errc::UnexpectedMessage, "stray transport frame"));
  }
  return Error(make_error(Errc::UnexpectedMessage, "unhandled type"));
}

}  // namespace nada::node
