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

#include "json.hpp"
#include "nada/attacks.hpp"
#include "nada/world.hpp"

namespace nada::sim {

using json = nlohmann::json;

namespace {

std::string arg_or(const std::map<std::string, std::string>& args, const std::string& key,
                   const std::string& fallback) {
  auto it = args.find(key);
  return it == args.end() ? fallback : it->second;
}

}  // namespace

Result<void> World::step_bringup() {
  for (const auto& spec : cfg_.nodes) {
    auto up = node_actor(spec.id).bringup(net_);
    if (!up) {
      net_.incident(spec.id, "bringup failed: " + up.error().to_string());
      return up.error();
    }
  }
  return {};
}

Result<void> World::step_install(const std::string& node, const ResourceId& slice) {
  return mgmt_->push_install(net_, node, "img:" + slice.to_string());
}

Result<UserResponse> World::step_user_request(const std::string& node,
                                              const ResourceId& slice,
                                              const std::string& content,
                                              UserCommand kind) {
  UserRequest req{kind, content};
  return node_actor(node).handle_user_request(net_, "user:U1", slice, req);
}

Result<std::vector<Measurement>> World::step_internal_monitoring(
    const std::string& node, const ResourceId& requester, const std::string& subject,
    const std::string& metric) {
  node::MibQueryBody query{requester, subject, metric};
  WireMessage m;
  m.type = MsgType::LogRequest;
  m.body = query.encode();
  const std::string alias = node + ":" + requester.to_string();
  auto reply = net_.call(alias, node, m);
  if (!reply) return reply.error();
  auto rows = node::RowsBody::decode(reply.value().msg.body);
  if (!rows) return rows.error();
  return rows.value().rows;
}

Result<size_t> World::step_collect(const std::string& node) {
  if (monsrv_ == nullptr) {
    return make_error(Errc::ConfigInvalid, "no monitoring server in this scenario");
  }
  return monsrv_->collect(net_, node);
}

mgmt::ExportRequestBody World::make_export_request(
    const std::string& requester, std::map<std::string, std::string> attrs) {
  mgmt::ExportRequestBody req;
  req.requester = requester;
  req.nonce = rng_.bytes(16);
  req.attrs = std::move(attrs);
  auto key = cp_keys_.find(requester);
  if (key != cp_keys_.end()) {
    req.sig = sign(key->second, req.signing_bytes());
  }
  return req;
}

Result<std::vector<Measurement>> World::decode_export_reply(const std::string& requester,
                                                            ByteView sealed) {
  auto box = cp_boxes_.find(requester);
  if (box == cp_boxes_.end()) {
    return make_error(Errc::AuthenticationFailure, "no box key for " + requester);
  }
  auto plain = sealed_box_decrypt(box->second, sealed);
  if (!plain) return plain.error();
  auto rows = node::RowsBody::decode(plain.value());
  if (!rows) return rows.error();
  return rows.value().rows;
}

Result<std::vector<Measurement>> World::step_export(
    const std::string& requester, std::map<std::string, std::string> attrs) {
  if (monsrv_ == nullptr) {
    return make_error(Errc::ConfigInvalid, "no monitoring server in this scenario");
  }
  mgmt::ExportRequestBody req = make_export_request(requester, std::move(attrs));
  WireMessage m;
  m.type = MsgType::LogRequest;
  m.body = req.encode();
  const std::string src = requester == "mgmt" ? "mgmt" : "cp:" + requester;
  auto reply = net_.call(src, monsrv_->id(), m);
  if (!reply) return reply.error();
  return decode_export_reply(requester, reply.value().msg.body);
}

Result<void> World::step_tracker_flow(const std::string& user, const std::string& node,
                                      const ResourceId& slice,
                                      const std::string& content) {
  return node_actor(node).tracker_flow(net_, user, slice, content,
                                       "apptracker:" + slice.first(), "nadatracker");
}

void World::run_script() {
  for (const auto& step : cfg_.script) {
    auto note_failure = [&](const Error& e) {
      net_.incident("script", step.op + " failed: " + e.to_string());
    };
    if (step.op == "bringup") {
      auto r = step_bringup();
      if (!r) note_failure(r.error());
    } else if (step.op == "advance") {
      uint64_t ticks = std::stoull(arg_or(step.args, "ticks", "1"));
      net_.advance(ticks);
    } else if (step.op == "install") {
      auto rid = ResourceId::parse(arg_or(step.args, "slice", ""));
      if (!rid) {
        note_failure(rid.error());
        continue;
      }
      auto r = step_install(arg_or(step.args, "node", ""), rid.value());
      if (!r) note_failure(r.error());
    } else if (step.op == "user_request") {
      auto rid = ResourceId::parse(arg_or(step.args, "slice", ""));
      if (!rid) {
        note_failure(rid.error());
        continue;
      }
      const std::string node = arg_or(step.args, "node", "");
      const std::string content = arg_or(step.args, "content", "");
      auto c = step_user_request(node, rid.value(), content, UserCommand::Content);
      if (!c) note_failure(c.error());
      auto p = step_user_request(node, rid.value(), content, UserCommand::Play);
      if (!p) note_failure(p.error());
      net_.advance(std::stoull(arg_or(step.args, "play_ticks", "3")));
      auto s = step_user_request(node, rid.value(), content, UserCommand::Stop);
      if (!s) note_failure(s.error());
    } else if (step.op == "internal_monitoring") {
      auto rid = ResourceId::parse(arg_or(step.args, "requester", ""));
      if (!rid) {
        note_failure(rid.error());
        continue;
      }
      auto r = step_internal_monitoring(arg_or(step.args, "node", ""), rid.value(),
                                        arg_or(step.args, "subject", "*"),
                                        arg_or(step.args, "metric", "*"));
      if (!r) note_failure(r.error());
    } else if (step.op == "collect") {
      auto r = step_collect(arg_or(step.args, "node", ""));
      if (!r) note_failure(r.error());
    } else if (step.op == "export") {
      std::map<std::string, std::string> attrs;
      for (const auto& [k, v] : step.args) {
        if (k != "requester") attrs[k] = v;
      }
      auto r = step_export(arg_or(step.args, "requester", "mgmt"), attrs);
      if (!r) note_failure(r.error());
    } else if (step.op == "tracker_flow") {
      auto rid = ResourceId::parse(arg_or(step.args, "slice", ""));
      if (!rid) {
        note_failure(rid.error());
        continue;
      }
      auto r = step_tracker_flow(arg_or(step.args, "user", "user:U1"),
                                 arg_or(step.args, "node", ""), rid.value(),
                                 arg_or(step.args, "content", ""));
      if (!r) note_failure(r.error());
    } else if (step.op == "slice_traffic") {
      auto from = ResourceId::parse(arg_or(step.args, "from", ""));
      auto to = ResourceId::parse(arg_or(step.args, "to", ""));
      if (!from || !to) {
        net_.incident("script", "slice_traffic: bad rid");
        continue;
      }
      auto r = node_actor(arg_or(step.args, "node", ""))
                   .send_slice_traffic(net_, from.value(), to.value());
      if (!r) note_failure(r.error());
    } else {
      net_.incident("script", "unknown step op: " + step.op);
    }
  }
}

// ---------------------------------------------------------------------------
// Invariant checks

std::vector<InvariantVerdict> World::check_invariants() {
  std::vector<InvariantVerdict> out;
  auto add = [&](std::string id, bool pass, std::string detail = "") {
    out.push_back({std::move(id), pass, std::move(detail)});
  };

  // Namespaces were validated at load; restate the checks literally.
  {
    std::set<std::string> customers(cfg_.customers.begin(), cfg_.customers.end());
    add("namespace_disjointness", customers.count(cfg_.mgmt_rid_id) == 0);
    bool all_app = std::all_of(cfg_.slices.begin(), cfg_.slices.end(),
                               [](const SliceSpec& s) { return s.rid.is_app_slice(); });
    add("maintenance_overlay_uniqueness", all_app,
        all_app ? "one management-keyed overlay" : "slice uses a management rid");
  }

  // Overlay confinement: each established session's overlay id must admit
  // the requester under the certified policy of the overlay owner.
  {
    bool pass = true;
    std::string detail;
    for (const auto& s : net_.sessions()) {
      if (s.overlay == "mgmt") continue;  // management link, not an overlay net
      auto rid = ResourceId::parse(s.overlay);
      if (!rid) {
        pass = false;
        detail = "unparseable overlay " + s.overlay;
        break;
      }
      if (rid.value() == mgmt_->maintenance_rid()) {
        if (s.a != mgmt_->maintenance_rid().to_string()) {
          pass = false;
          detail = "maintenance session from " + s.a;
          break;
        }
        continue;
      }
      const AppSlicePolicy* pol = mgmt_->certified_policy(rid.value());
      auto requester = ResourceId::parse(s.a);
      if (pol == nullptr || !requester ||
          pol->allowed_overlay_peers.count(requester.value()) == 0) {
        pass = false;
        detail = s.a + " not a certified peer of " + s.overlay;
        break;
      }
    }
    add("overlay_confinement", pass, detail);
  }

  add("eavesdropper_exclusion", !net_.knowledge_contains("SENTINEL{"));

  // Sealed persistence: no planted plaintext below any sealed surface.
  {
    bool clean = true;
    for (const auto& [id, actor] : nodes_) {
      if (contains(actor->persistent_image(), "SENTINEL{")) clean = false;
    }
    if (monsrv_ != nullptr && contains(monsrv_->persistent_image(), "SENTINEL{")) {
      clean = false;
    }
    if (contains(mgmt_->persistent_image(), "SENTINEL{")) clean = false;
    for (const auto& line : net_.trace_lines()) {
      if (line.find("SENTINEL{") != std::string::npos) clean = false;
    }
    add("sealed_persistence", clean);
  }

  // Store and MIB isolation, checked literally on the access log.
  {
    bool pass = true;
    std::string detail;
    for (const auto& rec : net_.store_accesses()) {
      if (!rec.granted) continue;
      if (rec.reader == rec.owner) continue;
      bool is_node_mgmt = nodes_.count(rec.reader) != 0 ||
                          (monsrv_ != nullptr && rec.reader == monsrv_->id());
      if (!is_node_mgmt) {
        pass = false;
        detail = rec.reader + " read store of " + rec.owner;
        break;
      }
    }
    for (const auto& rec : net_.mib_accesses()) {
      if (!rec.granted || rec.op != "internal") continue;
      auto slash = rec.detail.rfind('/');
      const std::string subject =
          slash == std::string::npos ? rec.detail : rec.detail.substr(0, slash);
      if (subject == "*" || subject == rec.requester) continue;
      auto subject_rid = ResourceId::parse(subject);
      if (!subject_rid) {
        // Node-level subjects are management-only.
        pass = false;
        detail = rec.requester + " read node subject " + subject;
        break;
      }
      const AppSlicePolicy* pol = mgmt_->certified_policy(subject_rid.value());
      auto requester = ResourceId::parse(rec.requester);
      if (pol == nullptr || !requester ||
          pol->mib_read_grants.count(requester.value()) == 0) {
        pass = false;
        detail = rec.requester + " read MIB of " + subject + " without grant";
        break;
      }
    }
    add("store_isolation", pass, detail);
  }

  // Accounting completeness: one signed command log per user command.
  {
    size_t console_commands = 0;
    for (const auto& line : net_.trace_lines()) {
      json j = json::parse(line, nullptr, false);
      if (j.is_discarded()) continue;
      if (j.value("k", "") == "msg" && j.value("carrier", "") == "console" &&
          j.value("type", "") == "UserRequest" &&
          j.value("dst", std::string("x")).find(':') == std::string::npos) {
        ++console_commands;
      }
    }
    size_t logged = 0;
    for (const auto& [id, actor] : nodes_) {
      for (const auto& le : actor->chain()) {
        if (le.kind == "user_command") ++logged;
      }
    }
    add("accounting_completeness", console_commands == logged,
        std::to_string(console_commands) + " commands, " + std::to_string(logged) +
            " signed entries");
  }

  // Every chain verifies end to end.
  {
    bool pass = true;
    std::string detail;
    for (const auto& [id, actor] : nodes_) {
      auto v = trust::verify_log_chain(actor->chain(), actor->anchor().log_pub());
      if (!v.ok) {
        pass = false;
        detail = id + " chain fails at " + std::to_string(v.failed_index);
      }
      for (const auto& [rid, rt] : actor->slices()) {
        auto av = trust::verify_log_chain(rt.account_log, actor->anchor().log_pub());
        // Account logs are copies of chain entries; verify signatures only.
        for (const auto& le : rt.account_log) {
          if (!verify(actor->anchor().log_pub(), le.signing_bytes(), le.signature)) {
            pass = false;
            detail = rid.to_string() + " holds a bad accounting entry";
          }
        }
        (void)av;
      }
    }
    auto mv = trust::verify_log_chain(mgmt_->chain(), mgmt_->anchor().log_pub());
    if (!mv.ok) {
      pass = false;
      detail = "management chain fails at " + std::to_string(mv.failed_index);
    }
    if (monsrv_ != nullptr) {
      auto sv = trust::verify_log_chain(monsrv_->chain(), monsrv_->anchor().log_pub());
      if (!sv.ok) {
        pass = false;
        detail = "monitoring chain fails at " + std::to_string(sv.failed_index);
      }
    }
    add("log_chains_verify", pass, detail);
  }

  // PEP non-bypass: every MIB access names one of the sanctioned operations.
  {
    bool pass = true;
    for (const auto& rec : net_.mib_accesses()) {
      if (rec.op != "internal" && rec.op != "collection" && rec.op != "collect" &&
          rec.op != "export") {
        pass = false;
      }
    }
    add("pep_non_bypass", pass);
  }

  if (monsrv_ != nullptr) {
    add("obligation_completeness",
        monsrv_->audit_obligations_fired() == monsrv_->permits_with_audit(),
        std::to_string(monsrv_->audit_obligations_fired()) + " fired / " +
            std::to_string(monsrv_->permits_with_audit()) + " owed");
  } else {
    add("obligation_completeness", true, "no monitoring server configured");
  }

  // ResourceId assignment: slice -> (store, policy, overlay) stays injective
  // and round-trips through install/configure.
  {
    bool pass = true;
    std::string detail;
    for (const auto& [id, actor] : nodes_) {
      for (const auto& [rid, rt] : actor->slices()) {
        if (rt.config.resource_id != rid || rt.config.policy.owner != rid ||
            rt.config.store_key_handle != rid) {
          pass = false;
          detail = id + " misassigned " + rid.to_string();
        }
      }
    }
    add("rid_assignment_injective", pass, detail);
  }

  // No adversary action has produced an accepting quote without the node's
  // attestation key.
  {
    bool pass = true;
    for (const auto& d : net_.deliveries()) {
      if (d.adversarial && d.type == MsgType::AuthQuote &&
          d.fate == DeliveryFate::Accepted) {
        pass = false;
      }
    }
    add("quote_unforgeability", pass);
  }

  return out;
}

RunReport World::run() {
  RunReport report;
  report.scenario = cfg_.name;
  report.seed = cfg_.seed;
  auto ready = setup();
  if (!ready) {
    report.invariants.push_back({"config_valid", false, ready.error().to_string()});
    return report;
  }
  if (!cfg_.adversary.actions.empty()) {
    net_.set_actions(cfg_.adversary.actions);
  }
  run_script();
  report.invariants = check_invariants();
  for (const auto& action : cfg_.adversary.actions) {
    report.attacks.push_back(attacks::evaluate_action(*this, action));
  }
  report.trace_digest = net_.trace_digest();
  report.notes.push_back(kDosNote);
  return report;
}

}  // namespace nada::sim
