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

#ifndef NADA_NODE_HPP
#define NADA_NODE_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nada/core_types.hpp"
#include "nada/overlay.hpp"
#include "nada/policy_engine.hpp"
#include "nada/simnet.hpp"
#include "nada/trust_anchor.hpp"

namespace nada::node {

enum class NodePhase : uint8_t { PoweredOff, Booted, Registered, Operational };
const char* node_phase_name(NodePhase p);

enum class SliceStatus : uint8_t { Installed, Active, Deactivated };
const char* slice_status_name(SliceStatus s);

// What a slice-image content blob decodes to: the measured image, the
// customer policy delivered with the slice, the app-content catalog, and
// the provider identity shown to users.
struct SlicePackage {
  Bytes image;
  AppSlicePolicy policy;
  std::map<std::string, MetaData> catalog;
  std::string provider;

  Bytes encode() const;
  static Result<SlicePackage> decode(ByteView data);
};

struct SliceRuntime {
  AppSliceConfiguration config;
  SliceStatus status = SliceStatus::Installed;
  Bytes image;  // loaded at boot from the encrypted store
  bool image_loaded = false;
  std::map<std::string, MetaData> catalog;
  std::string provider;
  std::vector<LogEntry> account_log;  // App_Log copies, customer accounting
};

struct NodeParams {
  std::string mgmt_id = "mgmt";
  ResourceId maintenance;
  SignPub isp_pub{};
  Bytes firmware;
  Bytes image;
  uint64_t play_log_interval = 1;
  uint64_t incentive_interval = 5;
  std::string log_sink = "both";  // tds | monitoring | both
  std::map<std::string, SignPub> tracker_pubs;
};

struct TicketPackage {
  overlay::Ticket ticket;
  Bytes requester_key_blob;
  trust::PcrArray target_ref_pcrs{};
  SignPub target_att_pub{};
};

struct PlaySession {
  ResourceId slice;
  std::string content_id;
  uint64_t interval = 1;
  uint64_t started = 0;
};

// Message bodies specific to node flows.
struct RegisterRequestBody {
  std::string node;
  Bytes encode() const;
  static Result<RegisterRequestBody> decode(ByteView data);
};

struct RegisterAcceptBody {
  uint64_t clock = 0;
  std::vector<Bytes> configure_cmds;  // encoded ConfigureCommand, apply in order
  Bytes encode() const;
  static Result<RegisterAcceptBody> decode(ByteView data);
};

struct InstallReportBody {
  ResourceId rid;
  std::string fingerprint;
  bool ok = false;
  Bytes encode() const;
  static Result<InstallReportBody> decode(ByteView data);
};

struct StoreWriteBody {
  ResourceId owner;
  std::string name;
  Bytes payload;
  Bytes encode() const;
  static Result<StoreWriteBody> decode(ByteView data);
};

struct MibQueryBody {
  ResourceId requester;
  std::string subject;  // "*" = all
  std::string metric;   // "*" = all
  Bytes encode() const;
  static Result<MibQueryBody> decode(ByteView data);
};

struct RowsBody {
  std::vector<Measurement> rows;
  Bytes encode() const;
  static Result<RowsBody> decode(ByteView data);
};

struct MeasureReportBody {
  std::string reporter;
  std::vector<LogEntry> entries;
  Bytes encode() const;
  static Result<MeasureReportBody> decode(ByteView data);
};

struct UserForwardBody {
  ResourceId slice;
  UserRequest request;
  Bytes encode() const;
  static Result<UserForwardBody> decode(ByteView data);
};

struct UserResponseBody {
  ResourceId slice;
  std::string claimed_provider;
  bool ok = false;
  std::string status;
  Bytes encode() const;
  static Result<UserResponseBody> decode(ByteView data);
};

struct PushContentBody {
  Bytes dd;  // encoded DownloadDefinitionFile
  Bytes content;
  Bytes encode() const;
  static Result<PushContentBody> decode(ByteView data);
};

struct SignedTrackerRequest {
  std::string node;
  std::string customer;
  std::string content_id;
  Bytes nonce;
  Signature comm_sig{};
  Bytes signing_bytes() const;
  Bytes encode() const;
  static Result<SignedTrackerRequest> decode(ByteView data);
};

// The NaDa node: node-management state machine, trust anchor, slice
// runtimes and their encrypted stores, slice firewall, user-request
// routing, and the internal monitoring PEP/PDP with the sealed local MIB.
class NodeActor : public sim::Entity {
 public:
  NodeActor(std::string id, const Digest& seed, NodeParams params);

  const std::string& id() const override { return id_; }
  Result<sim::WireMessage> handle(sim::Network& net, const sim::Delivery& d) override;
  void on_tick(sim::Network& net) override;
  void on_send_failure(sim::Network& net, const sim::WireMessage& msg) override;

  // --- lifecycle -----------------------------------------------------
  Result<void> boot(sim::Network& net);
  Result<void> bringup(sim::Network& net);  // reboot..configure, step-labelled
  Result<void> register_with_management(sim::Network& net, bool labelled = true);

  // --- overlay operations ---------------------------------------------
  Result<overlay::Session*> authenticate_management(sim::Network& net);
  Result<TicketPackage> request_ticket(sim::Network& net, const ResourceId& requester,
                                       const std::string& target_node,
                                       const ResourceId& overlay_rid);
  Result<overlay::Session*> connect_peer(sim::Network& net, const TicketPackage& pkg);
  Result<overlay::Session*> connect_entity(sim::Network& net, const ResourceId& requester,
                                           const std::string& dest, Domain dest_domain,
                                           const ResourceId& overlay_rid);
  Result<Bytes> download_content(sim::Network& net, const MetaData& meta,
                                 const ResourceId& overlay_rid,
                                 const ResourceId& requester);

  // --- slice lifecycle -------------------------------------------------
  // Setup-time provisioning of a slice as if installed in an earlier epoch.
  Result<void> preinstall_slice(sim::Network& net, const SlicePackage& pkg,
                                const std::string& fingerprint);
  Result<void> install_from_meta(sim::Network& net, const MetaData& meta);
  Result<void> apply_configure(sim::Network& net, const ConfigureCommand& cmd,
                               bool labelled = false);
  bool firewall_permits(const ResourceId& from, const ResourceId& to) const;
  Result<void> send_slice_traffic(sim::Network& net, const ResourceId& from,
                                  const ResourceId& to);

  // --- user interface ----------------------------------------------------
  Result<UserResponse> handle_user_request(sim::Network& net, const std::string& user,
                                           const ResourceId& slice, const UserRequest& req);

  // --- monitoring --------------------------------------------------------
  void record_measurement(sim::Network& net, const Measurement& m);
  Result<std::vector<Measurement>> read_local_mib(sim::Network& net,
                                                  const std::string& reader,
                                                  const std::string& subject,
                                                  const std::string& metric);

  // --- stores -------------------------------------------------------------
  Result<void> store_put(sim::Network& net, const std::string& reader,
                         const ResourceId& owner, const std::string& name,
                         ByteView payload);
  Result<Bytes> store_get(sim::Network& net, const std::string& reader,
                          const ResourceId& owner, const std::string& name);
  void seed_held_content(sim::Network& net, const std::string& content_id,
                         ByteView bytes);
  void seed_slice_content(sim::Network& net, const ResourceId& rid,
                          const std::string& content_id, ByteView bytes);

  // --- tracker flows (COMM/API) -------------------------------------------
  Result<void> tracker_flow(sim::Network& net, const std::string& user,
                            const ResourceId& slice, const std::string& content_id,
                            const std::string& app_tracker, const std::string& nada_tracker);

  // --- accessors / test and attack hooks -----------------------------------
  NodePhase phase() const { return phase_; }
  trust::TrustAnchor& anchor() { return anchor_; }
  const trust::TrustAnchor& anchor() const { return anchor_; }
  const SignPub& comm_pub() const { return comm_key_.pub; }
  const std::map<ResourceId, SliceRuntime>& slices() const { return slices_; }
  SliceRuntime* slice(const ResourceId& rid);
  std::vector<LogEntry>& mutable_chain() { return chain_; }
  const std::vector<LogEntry>& chain() const { return chain_; }
  overlay::Session* session_for(const std::string& peer, const std::string& overlay_key);
  const NodeParams& params() const { return params_; }
  void corrupt_slice_image(const ResourceId& rid);
  Bytes persistent_image() const;  // TDS + stores + sealed MIB, for sweeps
  std::vector<std::string> store_names(const ResourceId& owner) const;

 private:
  Result<sim::WireMessage> handle_node_auth(sim::Network& net, const sim::Delivery& d);
  Result<sim::WireMessage> handle_content_request(sim::Network& net,
                                                  const sim::Delivery& d);
  Result<sim::WireMessage> handle_internal_log_request(sim::Network& net,
                                                       const sim::Delivery& d);
  Result<sim::WireMessage> handle_collection_log_request(sim::Network& net,
                                                         const sim::Delivery& d);
  Result<sim::WireMessage> handle_app_log(sim::Network& net, const sim::Delivery& d);
  Result<sim::WireMessage> handle_user_forward(sim::Network& net, const sim::Delivery& d);
  Result<sim::WireMessage> handle_user_response_msg(sim::Network& net,
                                                    const sim::Delivery& d);
  Result<sim::WireMessage> handle_slice_content_request(sim::Network& net,
                                                        const sim::Delivery& d);
  Result<sim::WireMessage> handle_push_content(sim::Network& net, const sim::Delivery& d);
  Result<sim::WireMessage> handle_store_write(sim::Network& net, const sim::Delivery& d);
  Result<sim::WireMessage> handle_slice_traffic(sim::Network& net, const sim::Delivery& d);
  Result<sim::WireMessage> handle_dd_delivery(sim::Network& net, const sim::Delivery& d);
  Result<sim::WireMessage> handle_metadata_push(sim::Network& net, const sim::Delivery& d);

  Result<void> boot_slice(sim::Network& net, SliceRuntime& rt);
  Result<void> install_package(sim::Network& net, const SlicePackage& pkg,
                               const std::string& fingerprint, bool labelled);
  void recompute_firewall(sim::Network& net);
  Result<LogEntry> chain_log(sim::Network& net, const std::string& kind, ByteView payload);
  Result<void> send_app_log(sim::Network& net, const ResourceId& slice,
                            const LogEntry& entry);
  Result<void> mib_append(sim::Network& net, const LogEntry& wrapped);
  Result<std::vector<LogEntry>> mib_entries(sim::Network& net);
  Result<SymKey> mib_key(sim::Network& net);
  bool slice_trusted(const SliceRuntime& rt) const;
  std::string slice_alias(const ResourceId& rid) const;
  Result<overlay::Session*> session_from_wire(const sim::Delivery& d);
  policy::AccessPolicy pdp_rules() const;

  std::string id_;
  NodeParams params_;
  trust::TrustAnchor anchor_;
  SigningKey comm_key_;
  DeterministicRng rng_;
  NodePhase phase_ = NodePhase::PoweredOff;
  std::map<ResourceId, SliceRuntime> slices_;
  std::map<std::string, overlay::Session> sessions_;  // key: peer|overlay
  std::set<std::string> seen_ticket_nonces_;
  std::set<std::string> seen_dd_digests_;
  std::optional<Bytes> pending_auth_nonce_;
  std::vector<LogEntry> chain_;
  std::vector<LogEntry> unshipped_log_;  // queued for the monitoring sink
  std::vector<PlaySession> plays_;
  bool reporter_armed_ = false;
  // Encrypted block stores: owner rid string -> name -> {nonce, cipher}.
  std::map<std::string, std::map<std::string, std::pair<Nonce, Bytes>>> stores_;
  std::map<std::string, std::string> held_content_;  // content id -> record name
  // Sealed local MIB (ciphertext + nonce under the maintenance storage key).
  std::optional<std::pair<Nonce, Bytes>> mib_cipher_;
  uint64_t mib_rows_ = 0;
};

}  // namespace nada::node

#endif  // NADA_NODE_HPP
