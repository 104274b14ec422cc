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

#include "nada/attacks.hpp"

#include <algorithm>

#include "nada/management.hpp"
#include "nada/node.hpp"
#include "nada/world.hpp"

namespace nada::sim::attacks {

namespace {

struct Probe {
  bool blocked = false;
  std::string mitigation;
  std::string detail;
};

// Confidentiality attribution per message type: which measure keeps the
// captured bytes useless to an eavesdropper.
std::string eavesdrop_mitigation(MsgType t, Carrier c) {
  if (c == Carrier::Vmm) return "M2";
  switch (t) {
    case MsgType::RegisterRequest:
    case MsgType::RegisterAccept:
    case MsgType::MetaDataPush:
    case MsgType::InstallReport:
    case MsgType::TicketRequest:
    case MsgType::TicketGrant:
    case MsgType::MeasureReport:
      return "M12";
    case MsgType::ContentRequest:
    case MsgType::ContentChunk:
    case MsgType::PushContent:
    case MsgType::LogRequest:
    case MsgType::LogResponse:
      return "M13";
    default:
      // Handshake and tracker envelopes are cleartext by design and carry
      // no secret payload.
      return "M18";
  }
}

Probe probe_from(const Result<void>& r) {
  if (r.ok()) return {false, "", "operation succeeded"};
  return {true, r.error().mitigation, r.error().to_string()};
}

template <typename T>
Probe probe_from(const Result<T>& r) {
  if (r.ok()) return {false, "", "operation succeeded"};
  return {true, r.error().mitigation, r.error().to_string()};
}

struct Cast {
  std::string node1;
  std::string node2;
  ResourceId victim;   // customer slice on node1
  ResourceId partner;  // second slice of the same customer on node1
  ResourceId rival;    // adversary-controlled slice on node1
  bool ok = false;
};

Cast find_cast(const ScenarioConfig& cfg) {
  Cast c;
  if (cfg.nodes.size() < 2) return c;
  c.node1 = cfg.nodes[0].id;
  c.node2 = cfg.nodes[1].id;
  auto rogue = ResourceId::parse(cfg.adversary.rogue_slice);
  for (const auto& s : cfg.slices) {
    const bool on_node1 =
        std::find(s.nodes.begin(), s.nodes.end(), c.node1) != s.nodes.end();
    if (!on_node1) continue;
    if (rogue && s.rid == rogue.value()) {
      c.rival = s.rid;
    } else if (c.victim.to_string() == ResourceId().to_string()) {
      c.victim = s.rid;
    } else if (s.rid.first() == c.victim.first()) {
      c.partner = s.rid;
    }
  }
  c.ok = !c.node1.empty() && c.victim.is_app_slice() && c.rival.is_app_slice();
  return c;
}

// --- Spoof routines --------------------------------------------------------

std::vector<Probe> spoof_probes(World& w, MsgType type, Carrier carrier) {
  Network& net = w.net();
  const ScenarioConfig& cfg = w.config();
  Cast cast = find_cast(cfg);
  std::vector<Probe> probes;
  DeterministicRng rng("spoof-material");
  auto rogue_sign = SigningKey::from_seed(rng.fork("sig").digest());
  auto push_delivery_probe = [&](const Result<Reply>& r) {
    // Delivery fates are tracked by the network; rejection details surface
    // through the returned error.
    if (r.ok()) return;
    (void)r;
  };

  auto inject = [&](MsgType t, const std::string& src, const std::string& dst,
                    Bytes body, const std::string& overlay = "", bool enc = false,
                    uint64_t ctr = 0) {
    WireMessage m;
    m.type = t;
    m.src = src;
    m.dst = dst;
    m.overlay = overlay;
    m.body = std::move(body);
    m.is_encrypted = enc;
    m.counter = ctr;
    auto r = net.inject(AttackKind::Spoof, m);
    push_delivery_probe(r);
  };

  const std::string victim_alias = cast.node1 + ":" + cast.victim.to_string();
  const std::string rival_alias = cast.node1 + ":" + cast.rival.to_string();

  switch (type) {
    case MsgType::AuthChallenge:
    case MsgType::AuthQuote: {
      // Full impersonation attempt against management: open a handshake in
      // the victim node's name, then answer with a forged quote.
      overlay::AuthChallengeBody challenge{cast.node1, rng.bytes(16)};
      WireMessage cm;
      cm.type = MsgType::AuthChallenge;
      cm.src = cast.node1;
      cm.dst = "mgmt";
      cm.body = challenge.encode();
      auto offer_reply = net.inject(AttackKind::Spoof, cm);
      if (offer_reply) {
        auto offer = overlay::AuthOfferBody::decode(offer_reply.value().msg.body);
        if (offer) {
          Bytes material = challenge.nonce;
          append(material, offer.value().responder_nonce);
          Digest qn = sha256(material);
          trust::Quote fake;
          fake.nonce = digest_bytes(qn);
          fake.signature = sign(rogue_sign, fake.signing_bytes());
          overlay::AuthQuoteBody qb;
          qb.node = cast.node1;
          qb.attestation_pub = rogue_sign.pub;
          qb.quote = fake.encode();
          inject(MsgType::AuthQuote, cast.node1, "mgmt", qb.encode());
        }
      }
      break;
    }
    case MsgType::AuthOffer: {
      overlay::AuthOfferBody offer;
      offer.responder = "mgmt";
      offer.initiator_nonce = rng.bytes(16);
      offer.responder_nonce = rng.bytes(16);
      offer.isp_sig = sign(rogue_sign, offer.signing_bytes());
      inject(MsgType::AuthOffer, "mgmt", cast.node1, offer.encode());
      break;
    }
    case MsgType::AuthAccept: {
      overlay::AuthAcceptBody accept;
      accept.key_blob = rng.bytes(80);
      accept.isp_sig = sign(rogue_sign, Bytes{0x01});
      inject(MsgType::AuthAccept, "mgmt", cast.node1, accept.encode());
      break;
    }
    case MsgType::NodeAuthRequest: {
      // Self-made ticket signed with the adversary's key.
      overlay::Ticket forged;
      forged.issuer = cfg.mgmt_rid_id;
      forged.requester = cast.rival;
      forged.target_node = cast.node2;
      forged.overlay = cast.victim;
      forged.nonce = rng.bytes(16);
      forged.issued_at = net.now();
      forged.key_material = rng.bytes(80);
      forged.signature = sign(rogue_sign, forged.signing_bytes());
      overlay::NodeAuthRequestBody body;
      body.ticket = forged.encode();
      body.quote = rng.bytes(32);
      inject(MsgType::NodeAuthRequest, cast.node1, cast.node2, body.encode(),
             cast.victim.to_string());
      break;
    }
    case MsgType::NodeAuthAccept: {
      overlay::NodeAuthAcceptBody body;
      body.quote = rng.bytes(48);
      inject(MsgType::NodeAuthAccept, cast.node2, cast.node1, body.encode(),
             cast.victim.to_string());
      break;
    }
    case MsgType::TrackerRequest: {
      node::SignedTrackerRequest req;
      req.node = cast.node1;
      req.customer = cast.victim.first();
      req.content_id = "movie-1";
      req.nonce = rng.bytes(16);
      req.comm_sig = sign(rogue_sign, req.signing_bytes());
      inject(MsgType::TrackerRequest, cast.node1 + ":comm",
             "apptracker:" + cast.victim.first(), req.encode());
      break;
    }
    case MsgType::TrackerResponse: {
      inject(MsgType::TrackerResponse, "apptracker:" + cast.victim.first(),
             cast.node1 + ":comm", rng.bytes(64));
      break;
    }
    case MsgType::TrackerRoute:
    case MsgType::DDDelivery: {
      mgmt::DownloadDefinitionFile dd;
      dd.request_digest = sha256(rng.bytes(8));
      dd.content_id = "movie-1";
      dd.requester_node = cast.node1;
      dd.locations = {{cast.node2, Domain::NadaNetwork}};
      dd.issuing_tracker = "apptracker:" + cast.victim.first();
      dd.meta = rng.bytes(32);
      dd.signature = sign(rogue_sign, dd.signing_bytes());
      if (type == MsgType::TrackerRoute) {
        inject(MsgType::TrackerRoute, cast.node1 + ":comm", "nadatracker", dd.encode());
      } else {
        inject(MsgType::DDDelivery, "nadatracker", cast.node2 + ":comm", dd.encode());
      }
      break;
    }
    case MsgType::UserResponseMsg: {
      // A malicious co-located slice answers users in a rival provider's
      // name; the UI pins the registered identity (M14).
      node::UserResponseBody body;
      body.slice = cast.rival;
      body.claimed_provider = "Provider-" + cast.victim.first();
      body.ok = true;
      body.status = "content-ready";
      inject(MsgType::UserResponseMsg, rival_alias, cast.node1, body.encode());
      break;
    }
    case MsgType::UserRequestMsg: {
      node::UserForwardBody body{cast.victim, UserRequest{UserCommand::Play, "movie-1"}};
      inject(MsgType::UserRequestMsg, rival_alias, victim_alias, body.encode());
      break;
    }
    case MsgType::LogRequest: {
      if (carrier == Carrier::Vmm) {
        // Claim the victim's identity from the rival's channel.
        node::MibQueryBody q{cast.victim, cast.victim.to_string(), "*"};
        inject(MsgType::LogRequest, rival_alias, cast.node1, q.encode());
      } else {
        mgmt::ExportRequestBody req;
        req.requester = "CP-" + cast.victim.first();
        req.nonce = rng.bytes(16);
        req.attrs = {{"subject_customer", cast.victim.first()}};
        req.sig = sign(rogue_sign, req.signing_bytes());
        inject(MsgType::LogRequest, "cp:CP-" + cast.victim.first(), "monsrv",
               req.encode());
        // Forged measurement-request metafile at a node.
        MetaData meta;
        meta.content_id = "measurement-request";
        meta.fingerprint = fingerprint_of(rng.bytes(4));
        meta.kind = MetaKind::MeasurementRequest;
        meta.signature = sign(rogue_sign, meta.signing_bytes());
        inject(MsgType::LogRequest, "monsrv", cast.node1, meta.encode());
      }
      break;
    }
    case MsgType::AppLog: {
      LogEntry forged;
      forged.timestamp = net.now();
      forged.kind = "user_command";
      forged.payload = rng.bytes(8);
      forged.signer = cast.node1;
      forged.signature = sign(rogue_sign, forged.signing_bytes());
      inject(MsgType::AppLog, rival_alias, victim_alias, forged.encode());
      break;
    }
    case MsgType::SliceTraffic: {
      inject(MsgType::SliceTraffic, rival_alias, victim_alias,
             to_bytes(cast.victim.to_string()));
      break;
    }
    case MsgType::StoreWrite: {
      node::StoreWriteBody body{cast.victim, "content:poison", rng.bytes(16)};
      inject(MsgType::StoreWrite, rival_alias, cast.node1, body.encode());
      break;
    }
    case MsgType::SliceContentRequest: {
      overlay::ContentRequestBody body{"movie-1", 0};
      inject(MsgType::SliceContentRequest, rival_alias, victim_alias, body.encode());
      break;
    }
    case MsgType::SliceContentResponse: {
      overlay::ContentChunkBody body{"movie-1", 0, 1, rng.bytes(32)};
      inject(MsgType::SliceContentResponse, rival_alias, cast.node1 + ":comm",
             body.encode());
      break;
    }
    default: {
      // Session-borne types: forged ciphertext under a claimed peer.
      std::string src = "mgmt";
      std::string dst = cast.node1;
      std::string overlay;
      switch (type) {
        case MsgType::RegisterRequest:
        case MsgType::TicketRequest:
        case MsgType::InstallReport:
        case MsgType::MeasureReport:
          src = cast.node1;
          dst = "mgmt";
          break;
        case MsgType::ContentRequest:
        case MsgType::ContentChunk:
        case MsgType::PushContent:
          src = cast.node2;
          dst = cast.node1;
          overlay = cast.victim.to_string();
          break;
        case MsgType::LogResponse:
          src = cast.node1;
          dst = "monsrv";
          overlay = ResourceId::management(cfg.mgmt_rid_id).value().to_string();
          break;
        default:
          break;
      }
      inject(type, src, dst, rng.bytes(72), overlay, true, 999999);
      break;
    }
  }
  return probes;
}

// --- Elevate routines -------------------------------------------------------

std::vector<Probe> elevate_probes(World& w, MsgType type, Carrier carrier) {
  Network& net = w.net();
  const ScenarioConfig& cfg = w.config();
  Cast cast = find_cast(cfg);
  std::vector<Probe> probes;
  if (!cast.ok) return probes;

  switch (type) {
    case MsgType::AuthChallenge:
    case MsgType::AuthOffer:
    case MsgType::AuthQuote:
    case MsgType::AuthAccept:
    case MsgType::RegisterRequest:
    case MsgType::RegisterAccept: {
      // An unprovisioned node tries to join the platform.
      node::NodeActor& rogue = w.spawn_rogue_node();
      probes.push_back(probe_from(rogue.authenticate_management(net)));
      break;
    }
    case MsgType::TicketRequest:
    case MsgType::TicketGrant: {
      // The rival asks for a ticket into the victim's overlay.
      auto r = w.node_actor(cast.node1)
                   .request_ticket(net, cast.rival, cast.node2, cast.victim);
      probes.push_back(probe_from(r));
      break;
    }
    case MsgType::NodeAuthRequest:
    case MsgType::NodeAuthAccept: {
      // Valid ticket presented to a node that does not host the overlay.
      auto pkg = w.node_actor(cast.node1)
                     .request_ticket(net, cast.rival, cast.node2, cast.rival);
      if (!pkg) {
        probes.push_back(probe_from(pkg));
      } else {
        probes.push_back(
            probe_from(w.node_actor(cast.node1).connect_peer(net, pkg.value())));
      }
      break;
    }
    case MsgType::ContentRequest:
    case MsgType::ContentChunk:
    case MsgType::PushContent: {
      // A customer slice asks for a maintenance-overlay ticket.
      auto maintenance = ResourceId::management(cfg.mgmt_rid_id).value();
      auto r = w.node_actor(cast.node1)
                   .request_ticket(net, cast.rival, cast.node2, maintenance);
      probes.push_back(probe_from(r));
      break;
    }
    case MsgType::MetaDataPush:
    case MsgType::InstallReport: {
      // A customer policy that grants itself the maintenance overlay.
      AppSlicePolicy greedy;
      greedy.owner = cast.rival;
      greedy.allowed_overlay_peers.insert(
          ResourceId::management(cfg.mgmt_rid_id).value());
      auto r = w.management().certify_policy(greedy);
      if (r.ok()) {
        probes.push_back({false, "", "greedy policy certified"});
      } else {
        probes.push_back({true, "M1", r.error().to_string()});
      }
      break;
    }
    case MsgType::LogRequest:
    case MsgType::LogResponse: {
      if (carrier == Carrier::Vmm) {
        auto r = w.step_internal_monitoring(cast.node1, cast.rival,
                                            cast.victim.to_string(), "*");
        probes.push_back(probe_from(r));
        auto host = w.step_internal_monitoring(cast.node1, cast.rival, cast.node1,
                                               "link_utilization");
        probes.push_back(probe_from(host));
      } else {
        auto r = w.step_export("CP-" + cast.rival.first(),
                               {{"subject_customer", cast.victim.first()}});
        probes.push_back(probe_from(r));
      }
      break;
    }
    case MsgType::MeasureReport: {
      // A node reports measurements in another node's name.
      node::NodeActor& n1 = w.node_actor(cast.node1);
      overlay::Session* s = n1.session_for("mgmt", "mgmt");
      if (s == nullptr) {
        probes.push_back({true, "M12", "no management session to abuse"});
        break;
      }
      node::MeasureReportBody body{cast.node2, {}};
      WireMessage m = overlay::session_wrap(*s, MsgType::MeasureReport, body.encode());
      m.src = cast.node1;
      m.dst = "mgmt";
      auto r = net.inject(AttackKind::Elevate, m);
      probes.push_back(probe_from(r));
      break;
    }
    case MsgType::AppLog: {
      // The rival fabricates accounting entries for the victim slice.
      LogEntry forged;
      forged.timestamp = net.now();
      forged.kind = "play";
      forged.signer = cast.node1;
      DeterministicRng rng("appfake");
      forged.signature = sign(SigningKey::from_seed(rng.digest()),
                              forged.signing_bytes());
      WireMessage m;
      m.type = MsgType::AppLog;
      m.src = cast.node1 + ":" + cast.rival.to_string();
      m.dst = cast.node1 + ":" + cast.victim.to_string();
      m.body = forged.encode();
      auto r = net.inject(AttackKind::Elevate, m);
      probes.push_back(probe_from(r));
      break;
    }
    case MsgType::UserRequestMsg:
    case MsgType::UserResponseMsg: {
      // A slice whose runtime image drifted keeps serving users.
      w.node_actor(cast.node1).corrupt_slice_image(cast.victim);
      auto r = w.step_user_request(cast.node1, cast.victim, "movie-1",
                                   UserCommand::Play);
      probes.push_back(probe_from(r));
      break;
    }
    case MsgType::SliceContentRequest:
    case MsgType::SliceContentResponse:
    case MsgType::StoreWrite: {
      // Cross-slice store access without a grant.
      auto r = w.node_actor(cast.node1)
                   .store_get(net, cast.rival.to_string(), cast.victim,
                              "content:movie-1");
      probes.push_back(probe_from(r));
      auto wput = w.node_actor(cast.node1)
                      .store_put(net, cast.rival.to_string(), cast.victim, "poison",
                                 to_bytes("x"));
      probes.push_back(probe_from(wput));
      break;
    }
    case MsgType::SliceTraffic: {
      auto r = w.node_actor(cast.node1).send_slice_traffic(net, cast.rival, cast.victim);
      probes.push_back(probe_from(r));
      break;
    }
    case MsgType::TrackerRequest:
    case MsgType::TrackerResponse:
    case MsgType::TrackerRoute:
    case MsgType::DDDelivery: {
      // A node outside the customer's footprint queries its tracker.
      node::NodeActor& outsider = w.node_actor(cast.node2);
      node::SignedTrackerRequest req;
      req.node = cast.node2;
      req.customer = cast.rival.first();
      req.content_id = "movie-1";
      DeterministicRng rng("elevate-tracker");
      req.nonce = rng.bytes(16);
      Bytes sb = req.signing_bytes();
      req.comm_sig = Signature{};
      // Sign honestly with the outsider's key; authorization, not
      // authentication, is under test.
      req.comm_sig = sign_with_comm(outsider, sb);
      auto dd = w.app_tracker(cast.rival.first()).resolve(req);
      probes.push_back(probe_from(dd));
      break;
    }
    default:
      probes.push_back({true, "M10",
                        std::string("no privileged surface for ") +
                            msg_type_name(type)});
      break;
  }
  return probes;
}

}  // namespace

// The comm key is private to the node; tests and the attack driver sign
// through this hook.
Signature sign_with_comm(node::NodeActor& n, ByteView data);

namespace {

AttackOutcome finish(const World& w, AttackOutcome out,
                     const std::vector<Probe>& probes) {
  const Network& net = const_cast<World&>(w).net();
  bool any_success = false;
  bool any_rejected = false;
  std::string mitigation;
  std::string detail;

  for (const auto& d : net.deliveries()) {
    if (!d.adversarial) continue;
    if (d.type == MsgType::AuthChallenge && d.fate == DeliveryFate::Accepted) continue;
    if (d.fate == DeliveryFate::Rejected) {
      any_rejected = true;
      if (mitigation.empty() && !d.mitigation.empty()) {
        mitigation = d.mitigation;
        detail = d.reason;
      }
    } else {
      any_success = true;
      detail = std::string(msg_type_name(d.type)) + " from " + d.src + " accepted";
    }
  }
  for (const auto& p : probes) {
    if (p.blocked) {
      any_rejected = true;
      if (mitigation.empty() && !p.mitigation.empty()) {
        mitigation = p.mitigation;
        detail = p.detail;
      }
    } else {
      any_success = true;
      detail = p.detail;
    }
  }

  if (any_success) {
    out.blocked = false;
    out.mitigation = "";
    out.detail = detail;
    return out;
  }
  if (any_rejected) {
    out.blocked = true;
    out.mitigation = mitigation;
    out.detail = detail;
    return out;
  }
  if (net.guard_blocks() > 0) {
    out.blocked = true;
    out.mitigation = "M2";
    out.detail = "isolation engine suppressed the action";
    return out;
  }
  out.blocked = false;
  out.detail = "attack was never exercised";
  return out;
}

}  // namespace

AttackOutcome evaluate_action(World& w, const AdversaryAction& action) {
  AttackOutcome out;
  out.label = action.label.empty()
                  ? std::string(attack_kind_name(action.kind)) + "/" +
                        (action.type_sel ? msg_type_name(*action.type_sel) : "*")
                  : action.label;
  out.kind = attack_kind_name(action.kind);
  out.msg_type = action.type_sel ? msg_type_name(*action.type_sel) : "*";
  out.carrier = action.carrier_sel ? carrier_name(*action.carrier_sel) : "*";

  Network& net = w.net();
  if (action.kind == AttackKind::Eavesdrop) {
    if (net.knowledge_contains("SENTINEL{")) {
      out.blocked = false;
      out.detail = "captured plaintext contains planted sentinel";
    } else {
      out.blocked = true;
      out.mitigation = eavesdrop_mitigation(
          action.type_sel.value_or(MsgType::Ack),
          action.carrier_sel.value_or(Carrier::Wire));
      out.detail = "only ciphertext or non-secret bytes captured";
    }
    return out;
  }
  if (action.kind == AttackKind::Drop) {
    if (net.guard_blocks() > 0) {
      out.blocked = true;
      out.mitigation = "M2";
      out.detail = "isolation engine suppressed the drop";
    } else if (!net.incidents().empty()) {
      out.blocked = true;
      out.mitigation = "M4.1";
      out.detail = "loss detected and logged (" +
                   std::to_string(net.incidents().size()) + " incidents)";
    } else {
      out.blocked = false;
      out.detail = "message loss went undetected";
    }
    return out;
  }
  return finish(w, out, {});
}

std::vector<SuiteEntry> standard_suite(const ScenarioConfig& base) {
  // Observe which message types cross boundaries in an adversary-free run.
  ScenarioConfig clean = base;
  clean.adversary = {};
  World observer(clean);
  RunReport base_report = observer.run();
  (void)base_report;

  std::set<std::pair<std::string, Carrier>> observed;
  for (const auto& d : observer.net().deliveries()) {
    if (!d.boundary || d.carrier == Carrier::Console) continue;
    if (d.type == MsgType::Ack || d.type == MsgType::ErrorReply) continue;
    observed.insert({msg_type_name(d.type), d.carrier});
  }

  std::vector<SuiteEntry> suite;
  for (const auto& [type_name, carrier] : observed) {
    MsgType type = *msg_type_from_name(type_name);
    for (AttackKind kind :
         {AttackKind::Spoof, AttackKind::Tamper, AttackKind::Replay,
          AttackKind::Eavesdrop, AttackKind::Drop, AttackKind::Elevate}) {
      SuiteEntry entry;
      entry.action.kind = kind;
      entry.action.type_sel = type;
      entry.action.carrier_sel = carrier;
      entry.action.at_source =
          kind == AttackKind::Tamper && (type == MsgType::ContentChunk ||
                                         type == MsgType::SliceContentResponse);
      entry.label = std::string(attack_kind_name(kind)) + "/" + type_name + "@" +
                    carrier_name(carrier);
      entry.action.label = entry.label;
      if (kind == AttackKind::Spoof) entry.injection = "spoof";
      if (kind == AttackKind::Elevate) entry.injection = "elevate";
      suite.push_back(entry);
    }
  }

  // Post-hoc repudiation and stored-data tampering.
  const std::string node1 = base.nodes.empty() ? "" : base.nodes[0].id;
  SuiteEntry chain_node{{}, "chain:node", "Replay/log-chain@" + node1};
  chain_node.action.kind = AttackKind::Replay;
  chain_node.action.chain_target = node1;
  chain_node.action.label = chain_node.label;
  suite.push_back(chain_node);

  SuiteEntry chain_account{{}, "chain:account", "Replay/account-log@" + node1};
  chain_account.action.kind = AttackKind::Replay;
  chain_account.action.chain_target = node1;
  chain_account.action.label = chain_account.label;
  suite.push_back(chain_account);

  SuiteEntry chain_mib{{}, "chain:mib", "Replay/measurement-log@" + node1};
  chain_mib.action.kind = AttackKind::Replay;
  chain_mib.action.chain_target = node1;
  chain_mib.action.label = chain_mib.label;
  suite.push_back(chain_mib);

  SuiteEntry store{{}, "store", "Tamper/sealed-store@" + node1};
  store.action.kind = AttackKind::Tamper;
  store.action.store_target = node1;
  store.action.label = store.label;
  suite.push_back(store);

  return suite;
}

AttackOutcome run_entry(const ScenarioConfig& base, const SuiteEntry& entry) {
  ScenarioConfig cfg = base;
  cfg.adversary.actions.clear();
  cfg.adversary.standard_suite = false;

  World w(cfg);
  AttackOutcome out;
  out.label = entry.label;
  out.kind = attack_kind_name(entry.action.kind);
  out.msg_type = entry.action.type_sel ? msg_type_name(*entry.action.type_sel) : "-";
  out.carrier =
      entry.action.carrier_sel ? carrier_name(*entry.action.carrier_sel) : "-";

  auto ready = w.setup();
  if (!ready) {
    out.blocked = false;
    out.detail = "setup failed: " + ready.error().to_string();
    return out;
  }

  const bool pipeline_kind = entry.injection.empty();
  if (pipeline_kind) {
    w.net().set_actions({entry.action});
  }
  w.run_script();

  if (entry.injection == "spoof" || entry.injection == "elevate") {
    auto probes = entry.injection == "spoof"
                      ? spoof_probes(w, *entry.action.type_sel,
                                     entry.action.carrier_sel.value_or(Carrier::Wire))
                      : elevate_probes(w, *entry.action.type_sel,
                                       entry.action.carrier_sel.value_or(Carrier::Wire));
    return finish(w, out, probes);
  }
  if (entry.injection.rfind("chain:", 0) == 0) {
    return run_chain_attack(w, entry, out);
  }
  if (entry.injection == "store") {
    return run_store_attack(w, entry, out);
  }
  return evaluate_action(w, entry.action);
}

std::vector<AttackOutcome> run_standard_suite(const ScenarioConfig& base) {
  std::vector<AttackOutcome> outcomes;
  for (const auto& entry : standard_suite(base)) {
    outcomes.push_back(run_entry(base, entry));
  }
  return outcomes;
}

}  // namespace nada::sim::attacks
