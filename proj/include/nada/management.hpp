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

#ifndef NADA_MANAGEMENT_HPP
#define NADA_MANAGEMENT_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nada/core_types.hpp"
#include "nada/node.hpp"
#include "nada/overlay.hpp"
#include "nada/policy_engine.hpp"
#include "nada/simnet.hpp"
#include "nada/trust_anchor.hpp"

namespace nada::mgmt {

struct RegistryEntry {
  SignPub attestation_pub{};
  BoxPub bind_pub{};
  SignPub comm_pub{};
  SignPub log_pub{};
  trust::PcrArray base_pcrs{};            // firmware + management image reference
  std::vector<Digest> measured_slices;    // slice image digests in boot order
  uint64_t last_registration = 0;
  bool registered = false;

  trust::PcrArray expected_pcrs() const;  // base plus folded slice measurements
};

struct NodeRegistry {
  std::map<std::string, RegistryEntry> entries;
};

struct ContentRecord {
  Bytes bytes;
  MetaData meta;
  std::string customer;  // owner, empty for platform content
};

// Signed routing record from the App Tracker: where a requested content can
// be fetched, and which metadata governs the transfer.
struct DownloadDefinitionFile {
  Digest request_digest{};
  std::string content_id;
  std::string requester_node;
  std::vector<ContentLocation> locations;
  std::string issuing_tracker;
  Bytes meta;  // encoded MetaData
  Signature signature{};

  Bytes signing_bytes() const;
  Bytes encode() const;
  static Result<DownloadDefinitionFile> decode(ByteView data);
};

struct ExportRequestBody {
  std::string requester;
  Bytes nonce;
  std::map<std::string, std::string> attrs;
  Signature sig{};
  Bytes signing_bytes() const;
  Bytes encode() const;
  static Result<ExportRequestBody> decode(ByteView data);
};

// ISP-side services: node registry, policy certification, content
// publication, configuration, and ticket issuance.
class ManagementActor : public sim::Entity {
 public:
  ManagementActor(std::string id, const std::string& mgmt_rid_id, const Digest& seed,
                  uint64_t ticket_ttl);

  const std::string& id() const override { return id_; }
  Result<sim::WireMessage> handle(sim::Network& net, const sim::Delivery& d) override;
  void on_tick(sim::Network& net) override;

  const SignPub& isp_pub() const { return isp_key_.pub; }
  const SigningKey& isp_key() const { return isp_key_; }
  const ResourceId& maintenance_rid() const { return maintenance_; }

  struct SliceAssignment {
    ResourceId rid;
    std::string package_fingerprint;
    Digest image_digest{};
  };

  void provision_node(const std::string& node_id, RegistryEntry entry);
  void assign_slice(const std::string& node_id, SliceAssignment assignment);

  MetaData publish_content(const std::string& content_id, ByteView bytes,
                           const std::vector<ContentLocation>& locations, MetaKind kind,
                           const std::string& tracker, const std::string& customer);
  Result<AppSlicePolicy> certify_policy(AppSlicePolicy policy);
  const std::map<ResourceId, AppSlicePolicy>& certified_policies() const {
    return certified_;
  }
  const AppSlicePolicy* certified_policy(const ResourceId& rid) const;
  const ContentRecord* content(const std::string& id) const;

  Result<void> push_install(sim::Network& net, const std::string& node_id,
                            const std::string& content_id);

  NodeRegistry& registry() { return registry_; }
  const NodeRegistry& registry() const { return registry_; }
  trust::TrustAnchor& anchor() { return anchor_; }
  std::vector<LogEntry>& mutable_chain() { return chain_; }
  const std::vector<LogEntry>& chain() const { return chain_; }
  overlay::Session* session_for(const std::string& peer);
  Bytes persistent_image() const;

 private:
  Result<sim::WireMessage> handle_auth_challenge(sim::Network& net,
                                                 const sim::Delivery& d);
  Result<sim::WireMessage> handle_auth_quote(sim::Network& net, const sim::Delivery& d);
  Result<sim::WireMessage> handle_register(sim::Network& net, const sim::Delivery& d,
                                           const Bytes& plain,
                                           overlay::Session& session);
  Result<sim::WireMessage> handle_ticket_request(sim::Network& net,
                                                 const sim::Delivery& d,
                                                 const Bytes& plain,
                                                 overlay::Session& session);
  Result<sim::WireMessage> handle_session_message(sim::Network& net,
                                                  const sim::Delivery& d);
  Result<LogEntry> chain_log(sim::Network& net, const std::string& kind, ByteView payload);

  std::string id_;
  ResourceId maintenance_;
  SigningKey isp_key_;
  trust::TrustAnchor anchor_;
  DeterministicRng rng_;
  uint64_t ticket_ttl_;
  NodeRegistry registry_;
  std::map<std::string, std::vector<SliceAssignment>> assignments_;
  std::map<ResourceId, AppSlicePolicy> certified_;
  std::map<std::string, ContentRecord> contents_;
  std::map<std::string, overlay::Session> sessions_;  // peer -> session
  struct PendingAuth {
    Bytes initiator_nonce;
    Bytes responder_nonce;
  };
  std::map<std::string, PendingAuth> pending_auth_;
  std::set<std::string> seen_challenge_nonces_;
  std::vector<LogEntry> chain_;
};

// Monitoring server: Controller (collection), sealed global MIB, Exporter
// (PEP+PDP), and the Policy Manager's sealed rule repository.
class MonitoringServerActor : public sim::Entity {
 public:
  MonitoringServerActor(std::string id, const Digest& seed, ManagementActor* mgmt,
                        node::NodeParams params);

  const std::string& id() const override { return id_; }
  Result<sim::WireMessage> handle(sim::Network& net, const sim::Delivery& d) override;
  void on_tick(sim::Network& net) override;

  Result<void> boot_and_register(sim::Network& net);
  void install_pap_rules(sim::Network& net, const policy::AccessPolicy& rules);
  void register_credential(const std::string& requester, const SignPub& pub,
                           const BoxPub& box);

  // Secure measurement collection, §-style steps I..V.
  Result<size_t> collect(sim::Network& net, const std::string& node_id);
  // Secure measurement export, steps 1..5. The request arrives as a signed
  // envelope; the reply is sealed to the requester's box key.
  Result<std::vector<Measurement>> export_measurements(sim::Network& net,
                                                       const ExportRequestBody& req,
                                                       uint64_t delivery_id = 0);

  void enable_periodic_collection(std::vector<std::string> nodes, uint64_t interval);

  trust::TrustAnchor& anchor() { return anchor_; }
  std::vector<LogEntry>& mutable_chain() { return chain_; }
  const std::vector<LogEntry>& chain() const { return chain_; }
  size_t audit_obligations_fired() const { return audits_fired_; }
  size_t permits_with_audit() const { return permits_with_audit_; }
  Bytes persistent_image() const;
  node::NodeActor& platform() { return platform_; }

 private:
  Result<SymKey> gmib_key(sim::Network& net);
  Result<std::vector<Measurement>> gmib_rows(sim::Network& net);
  Result<void> gmib_store(sim::Network& net, const std::vector<Measurement>& rows);
  Result<policy::AccessPolicy> pap_rules(sim::Network& net);
  Result<LogEntry> chain_append(sim::Network& net, const std::string& kind,
                                ByteView payload);

  std::string id_;
  ManagementActor* mgmt_;
  // The server runs on NaDa node plumbing: trust anchor, measured boot,
  // management session; reuse the node actor for that machinery.
  node::NodeActor platform_;
  trust::TrustAnchor& anchor_;
  DeterministicRng rng_;
  std::optional<std::pair<Nonce, Bytes>> gmib_cipher_;
  std::optional<std::pair<Nonce, Bytes>> pap_cipher_;
  std::map<std::string, SignPub> credentials_;
  std::map<std::string, BoxPub> credential_boxes_;
  std::set<std::string> seen_export_nonces_;
  std::vector<LogEntry> chain_;
  size_t audits_fired_ = 0;
  size_t permits_with_audit_ = 0;
  std::vector<std::string> collection_nodes_;
  uint64_t collection_interval_ = 0;
  uint64_t last_collection_ = 0;
};

// Customer-side application tracker (§-style Fig. 8).
class AppTrackerActor : public sim::Entity {
 public:
  AppTrackerActor(std::string id, const Digest& seed, std::string customer,
                  const SignPub& isp_pub);

  const std::string& id() const override { return id_; }
  Result<sim::WireMessage> handle(sim::Network& net, const sim::Delivery& d) override;

  const SignPub& pub() const { return key_.pub; }
  void register_content(const MetaData& meta);
  void register_node_comm_key(const std::string& node, const SignPub& comm_pub);
  void register_customer_node(const std::string& node) { customer_nodes_.insert(node); }

  Result<DownloadDefinitionFile> resolve(const node::SignedTrackerRequest& req);

 private:
  std::string id_;
  SigningKey key_;
  std::string customer_;
  SignPub isp_pub_{};
  std::map<std::string, MetaData> contents_;
  std::map<std::string, SignPub> node_comm_keys_;
  std::set<std::string> customer_nodes_;
  std::set<std::string> seen_request_digests_;
};

// ISP-side NaDa tracker: routes download definition files to holder nodes.
class NadaTrackerActor : public sim::Entity {
 public:
  NadaTrackerActor(std::string id, std::map<std::string, SignPub> tracker_pubs);

  const std::string& id() const override { return id_; }
  Result<sim::WireMessage> handle(sim::Network& net, const sim::Delivery& d) override;

  Result<std::string> route(sim::Network& net, const DownloadDefinitionFile& dd);

 private:
  std::string id_;
  std::map<std::string, SignPub> tracker_pubs_;
  std::set<std::string> seen_dd_digests_;
};

}  // namespace nada::mgmt

#endif  // NADA_MANAGEMENT_HPP
