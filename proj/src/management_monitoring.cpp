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

#include <algorithm>
#include <cstring>

#include "nada/management.hpp"

namespace nada::mgmt {

using overlay::Session;
using sim::Delivery;
using sim::MsgType;
using sim::Network;
using sim::WireMessage;

// ---------------------------------------------------------------------------
// MonitoringServerActor

MonitoringServerActor::MonitoringServerActor(std::string id, const Digest& seed,
                                             ManagementActor* mgmt,
                                             node::NodeParams params)
    : id_(std::move(id)),
      mgmt_(mgmt),
      platform_(id_, seed, std::move(params)),
      anchor_(platform_.anchor()),
      rng_(sha256(to_bytes(id_ + "-monsrv"))) {
  rng_ = DeterministicRng(sha256(to_bytes(id_)));
}

Result<void> MonitoringServerActor::boot_and_register(Network& net) {
  auto booted = platform_.boot(net);
  if (!booted) return booted.error();
  auto session = platform_.authenticate_management(net);
  if (!session) return session.error();
  return platform_.register_with_management(net, false);
}

void MonitoringServerActor::register_credential(const std::string& requester,
                                                const SignPub& pub, const BoxPub& box) {
  credentials_[requester] = pub;
  credential_boxes_[requester] = box;
}

void MonitoringServerActor::enable_periodic_collection(std::vector<std::string> nodes,
                                                       uint64_t interval) {
  collection_nodes_ = std::move(nodes);
  collection_interval_ = interval;
}

Result<SymKey> MonitoringServerActor::gmib_key(Network& net) {
  (void)net;
  auto key = anchor_.get_storage_key(platform_.params().maintenance);
  if (!key && key.error().code == Errc::NotFound) {
    key = anchor_.compute_storage_key(platform_.params().maintenance);
  }
  return key;
}

Result<std::vector<Measurement>> MonitoringServerActor::gmib_rows(Network& net) {
  if (!gmib_cipher_.has_value()) return std::vector<Measurement>{};
  auto key = gmib_key(net);
  if (!key) return key.error();
  auto plain = secretbox_decrypt(key.value(), gmib_cipher_->first, gmib_cipher_->second);
  if (!plain) return make_error(Errc::IntegrityFailure, "global MIB corrupted", "M7.1");
  auto rows = node::RowsBody::decode(plain.value());
  if (!rows) return rows.error();
  return rows.value().rows;
}

Result<void> MonitoringServerActor::gmib_store(Network& net,
                                               const std::vector<Measurement>& rows) {
  auto key = gmib_key(net);
  if (!key) return key.error();
  node::RowsBody body{rows};
  Nonce nonce;
  Bytes nb = rng_.bytes(kNonceSize);
  std::memcpy(nonce.data(), nb.data(), kNonceSize);
  gmib_cipher_ = {nonce, secretbox_encrypt(key.value(), nonce, body.encode())};
  return {};
}

void MonitoringServerActor::install_pap_rules(Network& net,
                                              const policy::AccessPolicy& rules) {
  auto key = gmib_key(net);
  if (!key) return;
  Nonce nonce;
  Bytes nb = rng_.bytes(kNonceSize);
  std::memcpy(nonce.data(), nb.data(), kNonceSize);
  pap_cipher_ = {nonce, secretbox_encrypt(key.value(), nonce, rules.encode())};
}

Result<policy::AccessPolicy> MonitoringServerActor::pap_rules(Network& net) {
  if (!pap_cipher_.has_value()) return policy::AccessPolicy{};
  auto key = gmib_key(net);
  if (!key) return key.error();
  auto plain = secretbox_decrypt(key.value(), pap_cipher_->first, pap_cipher_->second);
  if (!plain) {
    return make_error(Errc::IntegrityFailure, "policy repository corrupted", "M7.1");
  }
  return policy::AccessPolicy::decode(plain.value());
}

Result<size_t> MonitoringServerActor::collect(Network& net, const std::string& node_id) {
  net.step("collect/I log-request");
  const ContentRecord* req_meta = mgmt_->content("measurement-request");
  if (req_meta == nullptr) {
    return make_error(Errc::UnknownContent, "no measurement-request metafile published");
  }
  WireMessage m;
  m.type = MsgType::LogRequest;
  m.body = req_meta->meta.encode();
  auto step1 = net.call(id_, node_id, m);
  if (!step1) return step1.error();

  net.step("collect/II mutual-auth-session");
  const ResourceId maintenance = platform_.params().maintenance;
  Session* session = platform_.session_for(node_id, maintenance.to_string());
  if (session == nullptr) {
    auto pkg = platform_.request_ticket(net, maintenance, node_id, maintenance);
    if (!pkg) return pkg.error();
    auto connected = platform_.connect_peer(net, pkg.value());
    if (!connected) return connected.error();
    session = connected.value();
  }

  net.step("collect/III encrypted-log-response");
  node::MibQueryBody query{maintenance, "*", "*"};
  WireMessage qm = overlay::session_wrap(*session, MsgType::LogRequest, query.encode());
  auto reply = net.call(id_, node_id, qm);
  if (!reply) return reply.error();
  auto plain = overlay::session_open_marked(net, *session, reply.value().msg,
                                            reply.value().reply_id);
  if (!plain) return plain.error();

  net.step("collect/IV decrypt-orchestrate");
  auto rows = node::RowsBody::decode(plain.value());
  if (!rows) return rows.error();

  net.step("collect/V unseal-update-mib");
  auto existing = gmib_rows(net);
  if (!existing) return existing.error();
  auto merged = existing.take();
  size_t added = 0;
  for (const auto& row : rows.value().rows) {
    auto same = [&](const Measurement& x) {
      return x.subject == row.subject && x.metric == row.metric && x.at == row.at;
    };
    if (std::find_if(merged.begin(), merged.end(), same) == merged.end()) {
      merged.push_back(row);
      ++added;
    }
  }
  std::sort(merged.begin(), merged.end());
  auto stored = gmib_store(net, merged);
  if (!stored) return stored.error();
  net.mib_access("collect", id_, node_id, true);
  (void)chain_append(net, "collect", to_bytes(node_id));
  return added;
}

Result<LogEntry> MonitoringServerActor::chain_append(Network& net,
                                                     const std::string& kind,
                                                     ByteView payload) {
  anchor_.update_clock(net.now());
  auto entry = anchor_.sign_log(kind, payload);
  if (!entry) return entry.error();
  chain_.push_back(entry.value());
  net.chain_entry(id_, entry.value());
  return entry.take();
}

Result<std::vector<Measurement>> MonitoringServerActor::export_measurements(
    Network& net, const ExportRequestBody& req, uint64_t delivery_id) {
  (void)delivery_id;
  net.step("export/2 pep-authenticate");
  auto cred = credentials_.find(req.requester);
  if (cred == credentials_.end()) {
    net.mib_access("export", req.requester, "unknown-credential", false);
    return make_error(Errc::AuthenticationFailure,
                      "no credential on file for " + req.requester, "M15");
  }
  if (!verify(cred->second, req.signing_bytes(), req.sig)) {
    net.mib_access("export", req.requester, "bad-signature", false);
    return make_error(Errc::AuthenticationFailure, "query signature invalid", "M15");
  }
  const std::string nonce_hex = to_hex(req.nonce);
  if (seen_export_nonces_.count(nonce_hex) != 0) {
    net.mib_access("export", req.requester, "replayed-query", false);
    return make_error(Errc::ReplayDetected, "query nonce replayed", "M15");
  }
  seen_export_nonces_.insert(nonce_hex);

  net.step("export/3 fetch-rules");
  auto rules = pap_rules(net);
  if (!rules) return rules.error();

  net.step("export/4 pdp-decision");
  policy::RequestContext ctx;
  ctx.attrs = req.attrs;
  ctx.attrs["requester"] = req.requester;
  auto decision = policy::pdp_evaluate(rules.value(), ctx);
  if (decision.effect == policy::Effect::Deny) {
    net.mib_access("export", req.requester, "deny:" + decision.rule_id, false);
    (void)chain_append(net, "export_deny", to_bytes(req.requester));
    return make_error(Errc::AccessDenied, "denied by rule " + decision.rule_id, "M15");
  }
  bool has_audit = false;
  for (const auto& o : decision.obligations) {
    if (o == "audit-log") has_audit = true;
  }
  if (has_audit) ++permits_with_audit_;

  net.step("export/5 query-and-respond");
  auto rows = gmib_rows(net);
  if (!rows) return rows.error();
  std::vector<Measurement> out;
  for (const auto& row : rows.value()) {
    auto want = [&](const std::string& attr) -> const std::string* {
      auto it = req.attrs.find(attr);
      return it == req.attrs.end() ? nullptr : &it->second;
    };
    if (const std::string* s = want("subject"); s != nullptr && row.subject != *s) {
      continue;
    }
    if (const std::string* c = want("subject_customer"); c != nullptr) {
      auto rid = ResourceId::parse(row.subject);
      if (!rid || !rid.value().is_app_slice() || rid.value().first() != *c) continue;
    }
    if (const std::string* m = want("metric"); m != nullptr && row.metric != *m) {
      continue;
    }
    out.push_back(row);
  }
  if (has_audit) {
    ++audits_fired_;
    (void)chain_append(net, "export_audit",
                       to_bytes(req.requester + ":" + decision.rule_id));
  }
  net.mib_access("export", req.requester, "permit:" + decision.rule_id, true);
  return out;
}

Result<WireMessage> MonitoringServerActor::handle(Network& net, const Delivery& d) {
  if (d.msg.type == MsgType::LogRequest && !d.msg.is_encrypted) {
    auto req = ExportRequestBody::decode(d.msg.body);
    if (req) {
      net.step("export/1 request-with-credentials");
      auto rows = export_measurements(net, req.value(), d.id);
      if (!rows) return rows.error();
      node::RowsBody body{rows.take()};
      auto box = credential_boxes_.find(req.value().requester);
      if (box == credential_boxes_.end()) {
        return Error(make_error(Errc::AuthenticationFailure, "no reply key", "M15"));
      }
      WireMessage reply;
      reply.type = MsgType::LogResponse;
      reply.body = sealed_box_encrypt(rng_, box->second, body.encode());
      return reply;
    }
  }
  return platform_.handle(net, d);
}

void MonitoringServerActor::on_tick(Network& net) {
  platform_.on_tick(net);
  if (collection_interval_ == 0 || collection_nodes_.empty()) return;
  if (net.now() < last_collection_ + collection_interval_) return;
  last_collection_ = net.now();
  for (const auto& node_id : collection_nodes_) {
    auto collected = collect(net, node_id);
    if (!collected) {
      net.incident(id_, "collection from " + node_id + " failed: " +
                            collected.error().to_string());
    }
  }
}

Bytes MonitoringServerActor::persistent_image() const {
  Encoder e;
  e.field(platform_.persistent_image());
  if (gmib_cipher_.has_value()) {
    e.field(ByteView(gmib_cipher_->first.data(), gmib_cipher_->first.size()));
    e.field(gmib_cipher_->second);
  }
  if (pap_cipher_.has_value()) {
    e.field(ByteView(pap_cipher_->first.data(), pap_cipher_->first.size()));
    e.field(pap_cipher_->second);
  }
  return std::move(e).take();
}

// ---------------------------------------------------------------------------
// AppTrackerActor

AppTrackerActor::AppTrackerActor(std::string id, const Digest& seed, std::string customer,
                                 const SignPub& isp_pub)
    : id_(std::move(id)), customer_(std::move(customer)), isp_pub_(isp_pub) {
  key_ = SigningKey::from_seed(seed);
}

void AppTrackerActor::register_content(const MetaData& meta) {
  contents_[meta.content_id] = meta;
}

void AppTrackerActor::register_node_comm_key(const std::string& node,
                                             const SignPub& comm_pub) {
  node_comm_keys_[node] = comm_pub;
}

Result<DownloadDefinitionFile> AppTrackerActor::resolve(const node::SignedTrackerRequest& req) {
  auto key = node_comm_keys_.find(req.node);
  if (key == node_comm_keys_.end()) {
    return make_error(Errc::BadSignature, "unknown requesting node " + req.node, "M8");
  }
  if (!verify(key->second, req.signing_bytes(), req.comm_sig)) {
    return make_error(Errc::BadSignature, "request signature invalid", "M8");
  }
  if (req.customer != customer_ || customer_nodes_.count(req.node) == 0) {
    return make_error(Errc::AccessDenied,
                      req.node + " is not provisioned for customer " + customer_, "M1");
  }
  const std::string digest_hex = to_hex(digest_view(sha256(req.encode())));
  if (seen_request_digests_.count(digest_hex) != 0) {
    return make_error(Errc::ReplayDetected, "request replayed", "M3");
  }
  seen_request_digests_.insert(digest_hex);
  auto meta = contents_.find(req.content_id);
  if (meta == contents_.end()) {
    return make_error(Errc::UnknownContent, req.content_id);
  }

  DownloadDefinitionFile dd;
  dd.request_digest = sha256(req.encode());
  dd.content_id = req.content_id;
  dd.requester_node = req.node;
  dd.locations = meta->second.locations;
  dd.issuing_tracker = id_;
  dd.meta = meta->second.encode();
  dd.signature = sign(key_, dd.signing_bytes());
  return dd;
}

Result<WireMessage> AppTrackerActor::handle(Network& net, const Delivery& d) {
  (void)net;
  if (d.msg.type != MsgType::TrackerRequest) {
    return Error(make_error(Errc::UnexpectedMessage, "tracker serves requests only",
                            "M8"));
  }
  auto req = node::SignedTrackerRequest::decode(d.msg.body);
  if (!req) return Error(make_error(Errc::IntegrityFailure, "bad request", "M8"));
  auto dd = resolve(req.value());
  if (!dd) return dd.error();
  WireMessage reply;
  reply.type = MsgType::TrackerResponse;
  reply.body = dd.value().encode();
  return reply;
}

// ---------------------------------------------------------------------------
// NadaTrackerActor

NadaTrackerActor::NadaTrackerActor(std::string id,
                                   std::map<std::string, SignPub> tracker_pubs)
    : id_(std::move(id)), tracker_pubs_(std::move(tracker_pubs)) {}

Result<std::string> NadaTrackerActor::route(Network& net,
                                            const DownloadDefinitionFile& dd) {
  auto pub = tracker_pubs_.find(dd.issuing_tracker);
  if (pub == tracker_pubs_.end() ||
      !verify(pub->second, dd.signing_bytes(), dd.signature)) {
    return make_error(Errc::BadSignature, "dd not signed by a known tracker", "M8");
  }
  const std::string digest_hex = to_hex(digest_view(sha256(dd.encode())));
  if (seen_dd_digests_.count(digest_hex) != 0) {
    return make_error(Errc::ReplayDetected, "dd already routed", "M3");
  }
  seen_dd_digests_.insert(digest_hex);

  std::vector<std::string> holders;
  for (const auto& loc : dd.locations) {
    if (loc.domain == Domain::NadaNetwork && loc.node != dd.requester_node) {
      holders.push_back(loc.node);
    }
  }
  if (holders.empty()) {
    return make_error(Errc::NoHolder, "no holder for " + dd.content_id);
  }
  std::sort(holders.begin(), holders.end());
  const std::string holder = holders.front();

  net.step("tracker/7 dd-delivery");
  WireMessage m;
  m.type = MsgType::DDDelivery;
  m.body = dd.encode();
  auto delivered = net.call(id_, holder + ":comm", m);
  if (!delivered) return delivered.error();
  return holder;
}

Result<WireMessage> NadaTrackerActor::handle(Network& net, const Delivery& d) {
  if (d.msg.type != MsgType::TrackerRoute) {
    return Error(make_error(Errc::UnexpectedMessage, "nada tracker routes dd files only",
                            "M8"));
  }
  auto dd = DownloadDefinitionFile::decode(d.msg.body);
  if (!dd) return Error(make_error(Errc::IntegrityFailure, "bad dd", "M8"));
  auto holder = route(net, dd.value());
  if (!holder) return holder.error();
  WireMessage reply;
  reply.type = MsgType::Ack;
  reply.body = to_bytes(holder.value());
  return reply;
}

}  // namespace nada::mgmt
