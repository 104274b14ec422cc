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

#ifndef NADA_WORLD_HPP
#define NADA_WORLD_HPP

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nada/management.hpp"
#include "nada/node.hpp"
#include "nada/policy_engine.hpp"
#include "nada/simnet.hpp"

namespace nada::sim {

struct NodeSpec {
  std::string id;
  std::string firmware = "firmware-1.0";
  std::string image = "node-management-1.0";
};

struct SliceSpec {
  ResourceId rid;
  std::vector<std::string> nodes;  // instances of this app, one per node
  std::string provider;
  bool preinstalled = true;
  std::vector<ResourceId> overlay_peers;
  std::vector<ResourceId> slice_traffic;
  std::vector<ResourceId> mib_read;
  std::vector<std::string> contents;  // app content ids in the slice catalog
};

struct ContentSpec {
  std::string id;
  std::string customer;  // owning content provider; empty = platform content
  size_t size = 4096;
  std::vector<std::string> holders;
};

struct ScriptStep {
  std::string op;
  std::map<std::string, std::string> args;
};

struct AdversaryConfig {
  bool standard_suite = false;
  std::vector<AdversaryAction> actions;
  std::string rogue_slice;  // rid string of the adversary-controlled slice
};

struct ScenarioParams {
  uint64_t collection_interval = 10;
  bool periodic_collection = false;
  uint64_t play_log_interval = 1;
  uint64_t incentive_interval = 5;
  uint64_t ticket_ttl = 1000;
  std::string log_sink = "both";
};

struct ScenarioConfig {
  std::string name = "scenario";
  uint64_t seed = 1;
  std::string mgmt_rid_id = "NM1";
  std::vector<NodeSpec> nodes;
  bool with_monitoring_server = true;
  NodeSpec monitoring_server{"monsrv", "firmware-1.0", "monitoring-server-1.0"};
  std::vector<std::string> customers;
  std::vector<SliceSpec> slices;
  std::vector<ContentSpec> contents;
  std::vector<policy::AccessRule> pap_rules;
  std::vector<ScriptStep> script;
  std::set<std::string> mitigations_disabled;
  ScenarioParams params;
  AdversaryConfig adversary;
};

// Loaded from a scenario YAML file; errors carry file/line/key context.
Result<ScenarioConfig> load_scenario(const std::string& path);
Result<ScenarioConfig> parse_scenario(const std::string& yaml_text,
                                      const std::string& origin);

struct InvariantVerdict {
  std::string id;
  bool pass = false;
  std::string detail;
};

struct AttackOutcome {
  std::string label;
  std::string kind;
  std::string msg_type;
  std::string carrier;
  bool blocked = false;
  std::string mitigation;
  std::string detail;
};

struct RunReport {
  std::string scenario;
  uint64_t seed = 0;
  std::string trace_digest;
  std::vector<InvariantVerdict> invariants;
  std::vector<AttackOutcome> attacks;
  std::vector<std::string> notes;

  bool invariants_pass() const;
  bool attacks_all_blocked() const;
  std::string to_json() const;
};

// One scenario instance: entities, provisioning, script execution, and the
// post-run invariant checks.
class World {
 public:
  explicit World(ScenarioConfig cfg);

  Result<void> setup();       // structure validation + provisioning
  void run_script();          // executes cfg.script; failures become incidents
  std::vector<InvariantVerdict> check_invariants();
  RunReport run();            // setup + script + invariants (+ inline actions)

  Network& net() { return net_; }
  const ScenarioConfig& config() const { return cfg_; }
  node::NodeActor& node_actor(const std::string& id);
  mgmt::ManagementActor& management() { return *mgmt_; }
  mgmt::MonitoringServerActor& monserver() { return *monsrv_; }
  mgmt::AppTrackerActor& app_tracker(const std::string& customer);
  const MetaData* slice_image_meta(const ResourceId& rid) const;
  const Bytes* content_bytes(const std::string& id) const;

  // Script-level operations, also used directly by tests and the attack
  // driver.
  Result<void> step_bringup();
  Result<void> step_install(const std::string& node, const ResourceId& slice);
  Result<UserResponse> step_user_request(const std::string& node, const ResourceId& slice,
                                         const std::string& content, UserCommand kind);
  Result<std::vector<Measurement>> step_internal_monitoring(const std::string& node,
                                                            const ResourceId& requester,
                                                            const std::string& subject,
                                                            const std::string& metric);
  Result<size_t> step_collect(const std::string& node);
  Result<std::vector<Measurement>> step_export(const std::string& requester,
                                               std::map<std::string, std::string> attrs);
  Result<void> step_tracker_flow(const std::string& user, const std::string& node,
                                 const ResourceId& slice, const std::string& content);

  // Credentials used by export flows; the adversary does not hold these.
  mgmt::ExportRequestBody make_export_request(const std::string& requester,
                                              std::map<std::string, std::string> attrs);
  Result<std::vector<Measurement>> decode_export_reply(const std::string& requester,
                                                       ByteView sealed);

  // Spawns an unprovisioned node (no registry entry); used by the attack
  // driver for elevation-of-privilege probes.
  node::NodeActor& spawn_rogue_node();

  static constexpr const char* kDosNote =
      "availability attacks are detected and logged, not absorbed";

 private:
  Result<void> validate();
  void provision();
  Bytes make_content_bytes(const ContentSpec& spec) const;
  node::NodeParams node_params() const;

  ScenarioConfig cfg_;
  DeterministicRng rng_;
  Network net_;
  std::unique_ptr<mgmt::ManagementActor> mgmt_;
  std::unique_ptr<mgmt::MonitoringServerActor> monsrv_;
  std::unique_ptr<mgmt::NadaTrackerActor> nada_tracker_;
  std::map<std::string, std::unique_ptr<mgmt::AppTrackerActor>> trackers_;
  std::map<std::string, std::unique_ptr<node::NodeActor>> nodes_;
  std::unique_ptr<node::NodeActor> rogue_;
  std::map<std::string, SigningKey> cp_keys_;
  std::map<std::string, BoxKey> cp_boxes_;
  std::map<std::string, Bytes> content_bytes_;
  std::map<ResourceId, MetaData> slice_image_meta_;
  std::map<std::string, SignPub> tracker_pubs_;
  bool setup_done_ = false;
};

}  // namespace nada::sim

#endif  // NADA_WORLD_HPP
