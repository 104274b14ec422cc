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

#include "nada/world.hpp"

#include <algorithm>

#include "json.hpp"
#include "nada/attacks.hpp"
#include "nada/trust_anchor.hpp"

namespace nada::sim {

using json = nlohmann::json;

bool RunReport::invariants_pass() const {
  return std::all_of(invariants.begin(), invariants.end(),
                     [](const InvariantVerdict& v) { return v.pass; });
}

bool RunReport::attacks_all_blocked() const {
  return std::all_of(attacks.begin(), attacks.end(),
                     [](const AttackOutcome& a) { return a.blocked; });
}

std::string RunReport::to_json() const {
  json j;
  j["scenario"] = scenario;
  j["seed"] = seed;
  j["trace_digest"] = trace_digest;
  j["invariants"] = json::array();
  for (const auto& v : invariants) {
    j["invariants"].push_back({{"id", v.id}, {"pass", v.pass}, {"detail", v.detail}});
  }
  j["attacks"] = json::array();
  for (const auto& a : attacks) {
    j["attacks"].push_back({{"label", a.label},
                            {"kind", a.kind},
                            {"msg_type", a.msg_type},
                            {"carrier", a.carrier},
                            {"outcome", a.blocked ? "Blocked" : "Succeeded"},
                            {"mitigation", a.mitigation},
                            {"detail", a.detail}});
  }
  j["notes"] = notes;
  return j.dump(2);
}

World::World(ScenarioConfig cfg)
    : cfg_(std::move(cfg)),
      rng_(sha256(to_bytes("nada-scenario:" + cfg_.name + ":" +
                           std::to_string(cfg_.seed)))) {}

node::NodeActor& World::node_actor(const std::string& id) {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw std::out_of_range("no node " + id);
  return *it->second;
}

mgmt::AppTrackerActor& World::app_tracker(const std::string& customer) {
  auto it = trackers_.find("apptracker:" + customer);
  if (it == trackers_.end()) throw std::out_of_range("no tracker for " + customer);
  return *it->second;
}

const MetaData* World::slice_image_meta(const ResourceId& rid) const {
  auto it = slice_image_meta_.find(rid);
  return it == slice_image_meta_.end() ? nullptr : &it->second;
}

const Bytes* World::content_bytes(const std::string& id) const {
  auto it = content_bytes_.find(id);
  return it == content_bytes_.end() ? nullptr : &it->second;
}

Result<void> World::validate() {
  std::set<std::string> customer_ids(cfg_.customers.begin(), cfg_.customers.end());
  std::set<std::string> mgmt_ids{cfg_.mgmt_rid_id};
  auto disjoint = check_namespaces(customer_ids, mgmt_ids);
  if (!disjoint) return disjoint.error();

  std::set<std::string> node_ids;
  for (const auto& n : cfg_.nodes) {
    if (!valid_id_text(n.id)) {
      return make_error(Errc::ConfigInvalid, "bad node id: " + n.id);
    }
    if (!node_ids.insert(n.id).second) {
      return make_error(Errc::ConfigInvalid, "duplicate node id: " + n.id);
    }
  }
  std::set<ResourceId> slice_rids;
  for (const auto& s : cfg_.slices) {
    if (!s.rid.is_app_slice()) {
      // Exactly one overlay is keyed by the management id: the maintenance
      // overlay the world itself creates.
      return make_error(Errc::ConfigInvalid,
                        "slice rid must be an app slice: " + s.rid.to_string());
    }
    if (!slice_rids.insert(s.rid).second) {
      return make_error(Errc::ConfigInvalid,
                        "duplicate slice spec: " + s.rid.to_string());
    }
    if (s.nodes.empty()) {
      return make_error(Errc::ConfigInvalid, "slice with no node: " + s.rid.to_string());
    }
    for (const auto& n : s.nodes) {
      if (node_ids.count(n) == 0) {
        return make_error(Errc::ConfigInvalid, "slice on unknown node: " + n);
      }
    }
    if (customer_ids.count(s.rid.first()) == 0) {
      return make_error(Errc::ConfigInvalid, "slice of unknown customer: " +
                                                 s.rid.to_string());
    }
  }
  for (const auto& c : cfg_.contents) {
    for (const auto& h : c.holders) {
      if (node_ids.count(h) == 0) {
        return make_error(Errc::ConfigInvalid, "content holder unknown: " + h);
      }
    }
    if (!c.customer.empty() && customer_ids.count(c.customer) == 0) {
      return make_error(Errc::ConfigInvalid, "content of unknown customer: " + c.id);
    }
  }
  return {};
}

Bytes World::make_content_bytes(const ContentSpec& spec) const {
  std::string pattern =
      "content:" + spec.id + ";SENTINEL{content:" + spec.id + "};";
  Bytes out;
  out.reserve(spec.size);
  while (out.size() < spec.size) {
    size_t take = std::min(pattern.size(), spec.size - out.size());
    append(out, ByteView(reinterpret_cast<const uint8_t*>(pattern.data()), take));
  }
  return out;
}

node::NodeParams World::node_params() const {
  node::NodeParams p;
  p.mgmt_id = "mgmt";
  p.maintenance = ResourceId::management(cfg_.mgmt_rid_id).value();
  p.isp_pub = mgmt_->isp_pub();
  p.play_log_interval = cfg_.params.play_log_interval;
  p.incentive_interval = cfg_.params.incentive_interval;
  p.log_sink = cfg_.params.log_sink;
  p.tracker_pubs = tracker_pubs_;
  return p;
}

Result<void> World::setup() {
  auto valid = validate();
  if (!valid) return valid.error();

  for (const auto& m : cfg_.mitigations_disabled) net_.disable_mitigation(m);
  if (!cfg_.adversary.rogue_slice.empty()) {
    // Rogue slice aliases live on the node hosting it.
    for (const auto& s : cfg_.slices) {
      if (s.rid.to_string() == cfg_.adversary.rogue_slice && !s.nodes.empty()) {
        net_.set_adversary_slice(s.nodes.front() + ":" + s.rid.to_string());
      }
    }
  }

  mgmt_ = std::make_unique<mgmt::ManagementActor>(
      "mgmt", cfg_.mgmt_rid_id, rng_.fork("mgmt").digest(), cfg_.params.ticket_ttl);
  net_.register_entity(mgmt_.get(), Domain::IspDomain);

  for (const auto& customer : cfg_.customers) {
    auto tracker = std::make_unique<mgmt::AppTrackerActor>(
        "apptracker:" + customer, rng_.fork("tracker:" + customer).digest(), customer,
        mgmt_->isp_pub());
    tracker_pubs_[tracker->id()] = tracker->pub();
    net_.register_entity(tracker.get(), Domain::NadaNetwork);
    trackers_[tracker->id()] = std::move(tracker);

    cp_keys_["CP-" + customer] =
        SigningKey::from_seed(rng_.fork("cp-sign:" + customer).digest());
    cp_boxes_["CP-" + customer] =
        BoxKey::from_seed(rng_.fork("cp-box:" + customer).digest());
  }
  nada_tracker_ = std::make_unique<mgmt::NadaTrackerActor>("nadatracker", tracker_pubs_);
  net_.register_entity(nada_tracker_.get(), Domain::IspDomain);
  cp_keys_["mgmt"] = mgmt_->isp_key();
  cp_boxes_["mgmt"] = BoxKey::from_seed(rng_.fork("mgmt-box").digest());

  for (const auto& spec : cfg_.nodes) {
    auto actor = std::make_unique<node::NodeActor>(
        spec.id, rng_.fork("node:" + spec.id).digest(), node_params());
    net_.register_entity(actor.get(), Domain::NadaNetwork);
    net_.register_alias(spec.id + ":comm", actor.get());
    net_.register_alias(spec.id + ":monitor", actor.get());
    nodes_[spec.id] = std::move(actor);
  }

  // Firmware and image bytes per node spec; reference measurements follow.
  for (const auto& spec : cfg_.nodes) {
    node::NodeActor& actor = *nodes_[spec.id];
    node::NodeParams p = actor.params();
    mgmt::RegistryEntry entry;
    entry.attestation_pub = actor.anchor().attestation_pub();
    entry.bind_pub = actor.anchor().bind_pub();
    entry.comm_pub = actor.comm_pub();
    entry.log_pub = actor.anchor().log_pub();
    entry.base_pcrs = trust::replay_boot_log(
        {{"firmware", trust::kPcrFirmware, sha256(to_bytes(spec.firmware))},
         {"node-management", trust::kPcrImage, sha256(to_bytes(spec.image))}});
    mgmt_->provision_node(spec.id, entry);
  }

  if (cfg_.with_monitoring_server) {
    node::NodeParams p = node_params();
    p.firmware = to_bytes(cfg_.monitoring_server.firmware);
    p.image = to_bytes(cfg_.monitoring_server.image);
    monsrv_ = std::make_unique<mgmt::MonitoringServerActor>(
        cfg_.monitoring_server.id, rng_.fork("monsrv").digest(), mgmt_.get(), p);
    net_.register_entity(monsrv_.get(), Domain::IspDomain);
    mgmt::RegistryEntry entry;
    entry.attestation_pub = monsrv_->platform().anchor().attestation_pub();
    entry.bind_pub = monsrv_->platform().anchor().bind_pub();
    entry.comm_pub = monsrv_->platform().comm_pub();
    entry.log_pub = monsrv_->platform().anchor().log_pub();
    entry.base_pcrs = trust::replay_boot_log(
        {{"firmware", trust::kPcrFirmware,
          sha256(to_bytes(cfg_.monitoring_server.firmware))},
         {"node-management", trust::kPcrImage,
          sha256(to_bytes(cfg_.monitoring_server.image))}});
    mgmt_->provision_node(cfg_.monitoring_server.id, entry);

    for (const auto& [cp, key] : cp_keys_) {
      monsrv_->register_credential(cp, key.pub, cp_boxes_.at(cp).pub);
    }
  }

  provision();
  setup_done_ = true;
  return {};
}

void World::provision() {
  // Maintenance overlay policy: one overlay keyed by the management id.
  AppSlicePolicy maintenance;
  maintenance.owner = mgmt_->maintenance_rid();
  maintenance.allowed_overlay_peers.insert(mgmt_->maintenance_rid());
  (void)mgmt_->certify_policy(maintenance);

  // Certified customer policies.
  std::map<ResourceId, AppSlicePolicy> policies;
  for (const auto& s : cfg_.slices) {
    AppSlicePolicy pol;
    pol.owner = s.rid;
    pol.allowed_overlay_peers.insert(s.overlay_peers.begin(), s.overlay_peers.end());
    pol.allowed_slice_traffic.insert(s.slice_traffic.begin(), s.slice_traffic.end());
    pol.mib_read_grants.insert(s.mib_read.begin(), s.mib_read.end());
    auto certified = mgmt_->certify_policy(pol);
    if (certified) policies[s.rid] = certified.take();
  }

  // Published contents with embedded sentinels.
  for (const auto& c : cfg_.contents) {
    Bytes bytes = make_content_bytes(c);
    content_bytes_[c.id] = bytes;
    std::vector<ContentLocation> locations;
    for (const auto& h : c.holders) locations.push_back({h, Domain::NadaNetwork});
    const std::string tracker =
        c.customer.empty() ? "nadatracker" : "apptracker:" + c.customer;
    MetaData meta = mgmt_->publish_content(c.id, bytes, locations,
                                           MetaKind::NadaContent, tracker, c.customer);
    if (!c.customer.empty()) {
      app_tracker(c.customer).register_content(meta);
    }
  }

  // The measurement-request metafile used by collection step I.
  (void)mgmt_->publish_content("measurement-request", to_bytes("all-metrics"), {},
                               MetaKind::MeasurementRequest, "nadatracker", "");

  // Slice packages; preinstalled slices are provisioned in a factory epoch
  // (boot, install, shut down), installed-later slices become published
  // content fetched by the install script step.
  std::set<std::string> provisioned_nodes;
  for (const auto& s : cfg_.slices) {
    if (policies.count(s.rid) == 0) continue;
    node::SlicePackage pkg;
    std::string image_text =
        "image:" + s.rid.to_string() + ";SENTINEL{image:" + s.rid.to_string() + "};";
    while (image_text.size() < 1536) image_text += image_text;
    pkg.image = to_bytes(image_text.substr(0, 1536));
    pkg.policy = policies[s.rid];
    pkg.provider = s.provider.empty() ? "Provider " + s.rid.first() : s.provider;
    for (const auto& cid : s.contents) {
      const mgmt::ContentRecord* rec = mgmt_->content(cid);
      if (rec != nullptr) pkg.catalog[cid] = rec->meta;
    }
    Bytes pkg_bytes = pkg.encode();
    const std::string fingerprint = fingerprint_of(pkg_bytes);

    if (s.preinstalled) {
      for (const auto& host_id : s.nodes) {
        node::NodeActor& host = node_actor(host_id);
        if (provisioned_nodes.insert(host_id).second) {
          (void)host.boot(net_);
          host.anchor().synchronize_clock(0);
        }
        auto installed = host.preinstall_slice(net_, pkg, fingerprint);
        if (!installed) {
          net_.incident(host_id, "provisioning failed for " + s.rid.to_string() + ": " +
                                     installed.error().to_string());
          continue;
        }
        mgmt_->assign_slice(host_id, {s.rid, fingerprint, sha256(pkg.image)});
      }
    } else {
      const std::string content_id = "img:" + s.rid.to_string();
      content_bytes_[content_id] = pkg_bytes;
      std::vector<ContentLocation> locations{{"mgmt", Domain::IspDomain}};
      for (const auto& other : cfg_.nodes) {
        if (std::find(s.nodes.begin(), s.nodes.end(), other.id) == s.nodes.end() &&
            nodes_.count(other.id) != 0) {
          // A peer node seeded with the image exercises the ticketed path.
          locations.push_back({other.id, Domain::NadaNetwork});
          break;
        }
      }
      MetaData meta = mgmt_->publish_content(content_id, pkg_bytes, locations,
                                             MetaKind::NadaContent, "nadatracker", "");
      slice_image_meta_[s.rid] = meta;
      for (const auto& loc : locations) {
        if (loc.domain == Domain::NadaNetwork) {
          node::NodeActor& holder = node_actor(loc.node);
          if (provisioned_nodes.insert(loc.node).second) {
            (void)holder.boot(net_);
            holder.anchor().synchronize_clock(0);
          }
          holder.seed_held_content(net_, content_id, pkg_bytes);
        }
      }
    }
  }

  // App content seeded at holder slices; a sentinel MIB row per node.
  for (const auto& c : cfg_.contents) {
    for (const auto& h : c.holders) {
      node::NodeActor& holder = node_actor(h);
      if (provisioned_nodes.insert(h).second) {
        (void)holder.boot(net_);
        holder.anchor().synchronize_clock(0);
      }
      if (c.customer.empty()) {
        holder.seed_held_content(net_, c.id, content_bytes_[c.id]);
        continue;
      }
      for (const auto& s : cfg_.slices) {
        if (s.rid.first() == c.customer &&
            std::find(s.nodes.begin(), s.nodes.end(), h) != s.nodes.end()) {
          holder.seed_slice_content(net_, s.rid, c.id, content_bytes_[c.id]);
          break;
        }
      }
    }
  }
  for (const auto& spec : cfg_.nodes) {
    node::NodeActor& actor = node_actor(spec.id);
    if (provisioned_nodes.insert(spec.id).second) {
      (void)actor.boot(net_);
      actor.anchor().synchronize_clock(0);
    }
    Measurement sentinel_row;
    sentinel_row.subject = spec.id;
    sentinel_row.metric = "sentinel";
    sentinel_row.value = 1.0;
    sentinel_row.unit = "SENTINEL{mib:" + spec.id + "}";
    sentinel_row.at = 0;
    actor.record_measurement(net_, sentinel_row);
  }

  // Tracker provisioning: node comm keys and customer placement.
  for (auto& [tid, tracker] : trackers_) {
    for (const auto& spec : cfg_.nodes) {
      tracker->register_node_comm_key(spec.id, node_actor(spec.id).comm_pub());
    }
  }
  for (const auto& s : cfg_.slices) {
    auto it = trackers_.find("apptracker:" + s.rid.first());
    if (it == trackers_.end()) continue;
    for (const auto& n : s.nodes) it->second->register_customer_node(n);
  }

  if (monsrv_ != nullptr) {
    auto up = monsrv_->boot_and_register(net_);
    if (!up) {
      net_.incident(monsrv_->id(), "monitoring server bring-up failed: " +
                                       up.error().to_string());
    }
    policy::AccessPolicy pap;
    pap.rules = cfg_.pap_rules;
    monsrv_->install_pap_rules(net_, pap);
    if (cfg_.params.periodic_collection) {
      std::vector<std::string> node_ids;
      for (const auto& n : cfg_.nodes) node_ids.push_back(n.id);
      monsrv_->enable_periodic_collection(node_ids, cfg_.params.collection_interval);
    }
  }
}

node::NodeActor& World::spawn_rogue_node() {
  if (rogue_ == nullptr) {
    rogue_ = std::make_unique<node::NodeActor>("rogue", rng_.fork("rogue").digest(),
                                               node_params());
    net_.register_entity(rogue_.get(), Domain::NadaNetwork);
    (void)rogue_->boot(net_);
  }
  return *rogue_;
}

}  // namespace nada::sim
