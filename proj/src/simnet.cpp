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

#include "nada/simnet.hpp"

#include <algorithm>

#include "json.hpp"
#include "nada/log.hpp"

namespace nada::sim {

using json = nlohmann::json;

namespace {

struct MsgTypeName {
  MsgType type;
  const char* name;
};

constexpr MsgTypeName kMsgTypeNames[] = {
    {MsgType::AuthChallenge, "AuthChallenge"},
    {MsgType::AuthOffer, "AuthOffer"},
    {MsgType::AuthQuote, "AuthQuote"},
    {MsgType::AuthAccept, "AuthAccept"},
    {MsgType::RegisterRequest, "RegisterRequest"},
    {MsgType::RegisterAccept, "RegisterAccept"},
    {MsgType::MetaDataPush, "MetaDataPush"},
    {MsgType::InstallReport, "InstallReport"},
    {MsgType::TicketRequest, "TicketRequest"},
    {MsgType::TicketGrant, "TicketGrant"},
    {MsgType::NodeAuthRequest, "NodeAuthRequest"},
    {MsgType::NodeAuthAccept, "NodeAuthAccept"},
    {MsgType::ContentRequest, "ContentRequest"},
    {MsgType::ContentChunk, "ContentChunk"},
    {MsgType::LogRequest, "LogRequest"},
    {MsgType::LogResponse, "LogResponse"},
    {MsgType::AppLog, "AppLog"},
    {MsgType::MeasureReport, "MeasureReport"},
    {MsgType::UserRequestMsg, "UserRequest"},
    {MsgType::UserResponseMsg, "UserResponse"},
    {MsgType::TrackerRequest, "TrackerRequest"},
    {MsgType::TrackerResponse, "TrackerResponse"},
    {MsgType::TrackerRoute, "TrackerRoute"},
    {MsgType::DDDelivery, "DDDelivery"},
    {MsgType::SliceContentRequest, "SliceContentRequest"},
    {MsgType::SliceContentResponse, "SliceContentResponse"},
    {MsgType::PushContent, "PushContent"},
    {MsgType::StoreWrite, "StoreWrite"},
    {MsgType::SliceTraffic, "SliceTraffic"},
    {MsgType::Ack, "Ack"},
    {MsgType::ErrorReply, "ErrorReply"},
};

uint64_t latency(Carrier c) { return c == Carrier::Wire ? 1 : 0; }

std::string prefix_of(const std::string& id) {
  auto colon = id.find(':');
  return colon == std::string::npos ? id : id.substr(0, colon);
}

bool is_slice_id(const std::string& id) {
  return id.find(":slice:") != std::string::npos;
}

bool is_user_id(const std::string& id) { return id.rfind("user:", 0) == 0; }

}  // namespace

const char* msg_type_name(MsgType t) {
  for (const auto& e : kMsgTypeNames) {
    if (e.type == t) return e.name;
  }
  return "?";
}

std::optional<MsgType> msg_type_from_name(std::string_view name) {
  for (const auto& e : kMsgTypeNames) {
    if (name == e.name) return e.type;
  }
  return std::nullopt;
}

const char* carrier_name(Carrier c) {
  switch (c) {
    case Carrier::Wire: return "wire";
    case Carrier::Vmm: return "vmm";
    case Carrier::Console: return "console";
  }
  return "?";
}

const char* attack_kind_name(AttackKind k) {
  switch (k) {
    case AttackKind::Spoof: return "Spoof";
    case AttackKind::Tamper: return "Tamper";
    case AttackKind::Replay: return "Replay";
    case AttackKind::Eavesdrop: return "Eavesdrop";
    case AttackKind::Drop: return "Drop";
    case AttackKind::Elevate: return "Elevate";
  }
  return "?";
}

char attack_kind_letter(AttackKind k) {
  switch (k) {
    case AttackKind::Spoof: return 'S';
    case AttackKind::Tamper: return 'T';
    case AttackKind::Replay: return 'R';
    case AttackKind::Eavesdrop: return 'I';
    case AttackKind::Drop: return 'D';
    case AttackKind::Elevate: return 'E';
  }
  return '?';
}

Bytes WireMessage::wire_bytes() const {
  Encoder e;
  e.tag(static_cast<uint8_t>(type));
  e.str(src);
  e.str(dst);
  e.str(overlay);
  e.tag(is_encrypted ? 1 : 0);
  e.u64(counter);
  e.field(body);
  return std::move(e).take();
}

Network::Network() = default;

void Network::register_entity(Entity* e, Domain domain) {
  entities_[e->id()] = e;
  domains_[e->id()] = domain;
  tick_order_.push_back(e);
  std::sort(tick_order_.begin(), tick_order_.end(),
            [](const Entity* a, const Entity* b) { return a->id() < b->id(); });
}

void Network::register_alias(const std::string& alias, Entity* e) {
  entities_[alias] = e;
}

Domain Network::domain_of(const std::string& id) const {
  auto it = domains_.find(prefix_of(id));
  if (it != domains_.end()) return it->second;
  auto full = domains_.find(id);
  return full != domains_.end() ? full->second : Domain::NadaNetwork;
}

bool Network::knows_entity(const std::string& id) const {
  return entities_.count(id) != 0;
}

void Network::advance(uint64_t ticks) {
  for (uint64_t i = 0; i < ticks; ++i) {
    ++now_;
    for (Entity* e : tick_order_) e->on_tick(*this);
  }
}

Carrier Network::carrier_for(const std::string& src, const std::string& dst) {
  if (is_user_id(src) || is_user_id(dst)) return Carrier::Console;
  if (prefix_of(src) == prefix_of(dst)) return Carrier::Vmm;
  return Carrier::Wire;
}

bool Network::boundary_for(const std::string& src, const std::string& dst) const {
  switch (carrier_for(src, dst)) {
    case Carrier::Console:
      return true;  // external entity <-> process
    case Carrier::Vmm:
      // Privilege boundary only where a slice is involved; the privileged
      // components of one node share a trust zone (dashed flows).
      return is_slice_id(src) || is_slice_id(dst);
    case Carrier::Wire:
      // Everything except ISP-internal backbone links crosses a boundary.
      return !(domain_of(src) == Domain::IspDomain && domain_of(dst) == Domain::IspDomain);
  }
  return true;
}

bool Network::action_matches(const AdversaryAction& a, AttackKind kind,
                             const WireMessage& msg, Carrier carrier) const {
  if (a.kind != kind) return false;
  if (a.type_sel && *a.type_sel != msg.type) return false;
  if (a.carrier_sel && *a.carrier_sel != carrier) return false;
  if (!a.src_sel.empty() && a.src_sel != msg.src) return false;
  if (!a.dst_sel.empty() && a.dst_sel != msg.dst) return false;
  return true;
}

void Network::record_guard(AttackKind kind, MsgType type) {
  ++guard_blocks_;
  emit("attack_guard", {{"kind", attack_kind_name(kind)},
                        {"type", msg_type_name(type)},
                        {"mitigation", "M2"}});
}

bool Network::wants_source_tamper(MsgType type, const std::string& src) const {
  for (const auto& a : actions_) {
    if (a.kind == AttackKind::Tamper && a.at_source && a.type_sel && *a.type_sel == type &&
        (a.src_sel.empty() || a.src_sel == src)) {
      return true;
    }
  }
  return false;
}

Network::PipelineOutcome Network::adversary_pipeline(WireMessage& msg, Carrier carrier,
                                                     bool boundary) {
  PipelineOutcome out;
  if (carrier == Carrier::Console) return out;  // not adversary-reachable

  const bool vmm_guard = carrier == Carrier::Vmm && mitigation_enabled("M2");

  for (const auto& a : actions_) {
    if (a.at_source) continue;  // handled at the serving entity
    if (action_matches(a, AttackKind::Drop, msg, carrier)) {
      if (vmm_guard) {
        record_guard(AttackKind::Drop, msg.type);
        continue;
      }
      out.dropped = true;
      return out;
    }
    if (action_matches(a, AttackKind::Tamper, msg, carrier)) {
      if (vmm_guard) {
        record_guard(AttackKind::Tamper, msg.type);
        continue;
      }
      if (!msg.body.empty()) {
        msg.body[a.flip_index % msg.body.size()] ^= 0x01;
      } else {
        msg.body.push_back(0x01);
      }
      out.adversarial = true;
      out.via = AttackKind::Tamper;
    }
    if (action_matches(a, AttackKind::Eavesdrop, msg, carrier)) {
      if (vmm_guard) {
        record_guard(AttackKind::Eavesdrop, msg.type);
        continue;
      }
      // Knowledge only ever accumulates from boundary-tagged links.
      if (boundary) knowledge_.push_back(msg.wire_bytes());
    }
  }
  return out;
}

void Network::mark_accepted(uint64_t delivery_id) {
  for (auto& d : deliveries_) {
    if (d.id == delivery_id && d.fate == DeliveryFate::Pending) {
      d.fate = DeliveryFate::Accepted;
      return;
    }
  }
}

void Network::mark_rejected(uint64_t delivery_id, const Error& e) {
  for (auto& d : deliveries_) {
    if (d.id == delivery_id) {
      d.fate = DeliveryFate::Rejected;
      d.mitigation = e.mitigation;
      d.reason = e.to_string();
      return;
    }
  }
}

Result<Reply> Network::call(const std::string& src, const std::string& dst,
                            WireMessage msg) {
  msg.src = src;
  msg.dst = dst;
  return deliver(std::move(msg), false, AttackKind::Eavesdrop, true);
}

Result<Reply> Network::inject(AttackKind kind, WireMessage msg) {
  // Identity forgery inside a node is stopped by the isolation engine: only
  // the adversary's own slice can originate VMM traffic.
  if (carrier_for(msg.src, msg.dst) == Carrier::Vmm && mitigation_enabled("M2") &&
      !adversary_slice_.empty() && msg.src != adversary_slice_) {
    record_guard(kind, msg.type);
    return make_error(Errc::PolicyDenied, "vmm injection blocked", "M2");
  }
  return deliver(std::move(msg), true, kind, false);
}

Result<Reply> Network::deliver(WireMessage msg, bool adversarial, AttackKind via,
                               bool allow_hooks) {
  const Carrier carrier = carrier_for(msg.src, msg.dst);
  const bool boundary = boundary_for(msg.src, msg.dst);
  now_ += latency(carrier);

  WireMessage delivered = msg;
  PipelineOutcome pipe;
  if (!adversarial) pipe = adversary_pipeline(delivered, carrier, boundary);

  if (pipe.dropped) {
    emit("drop", {{"type", msg_type_name(msg.type)}, {"src", msg.src}, {"dst", msg.dst}});
    incident(msg.src, std::string("delivery timeout: ") + msg_type_name(msg.type));
    auto it = entities_.find(msg.src);
    if (it != entities_.end()) it->second->on_send_failure(*this, msg);
    return make_error(Errc::Dropped, std::string("dropped ") + msg_type_name(msg.type));
  }

  Delivery d;
  d.id = next_delivery_++;
  d.msg = delivered;
  d.boundary = boundary;
  d.carrier = carrier;
  d.adversarial = adversarial || pipe.adversarial;
  d.via = adversarial ? via : pipe.via;
  deliveries_.push_back({d.id, d.msg.type, d.msg.src, d.msg.dst, carrier, boundary,
                         d.adversarial, d.via, DeliveryFate::Pending, "", ""});
  trace_msg(d);

  auto target_it = entities_.find(msg.dst);
  if (target_it == entities_.end()) {
    return make_error(Errc::UnknownTarget, "no entity " + msg.dst);
  }

  auto handled = target_it->second->handle(*this, d);
  if (!handled) {
    mark_rejected(d.id, handled.error());
    emit("reject", {{"type", msg_type_name(msg.type)},
                    {"by", msg.dst},
                    {"reason", handled.error().to_string()},
                    {"mitigation", handled.error().mitigation}});
    return handled.error();
  }
  mark_accepted(d.id);

  // Replay hook: re-present the recorded request bytes once.
  if (allow_hooks && replay_depth_ == 0) {
    for (const auto& a : actions_) {
      if (!action_matches(a, AttackKind::Replay, d.msg, carrier)) continue;
      if (carrier == Carrier::Vmm && mitigation_enabled("M2")) {
        record_guard(AttackKind::Replay, d.msg.type);
        continue;
      }
      if (carrier == Carrier::Console) continue;
      ++replay_depth_;
      (void)deliver(d.msg, true, AttackKind::Replay, false);
      --replay_depth_;
      break;
    }
  }

  // Response leg.
  WireMessage reply_msg = std::move(handled).take();
  reply_msg.src = msg.dst;
  reply_msg.dst = msg.src;
  now_ += latency(carrier);

  WireMessage delivered_reply = reply_msg;
  PipelineOutcome rpipe;
  if (!adversarial) rpipe = adversary_pipeline(delivered_reply, carrier, boundary);
  if (rpipe.dropped) {
    emit("drop", {{"type", msg_type_name(reply_msg.type)},
                  {"src", reply_msg.src},
                  {"dst", reply_msg.dst}});
    incident(reply_msg.dst, std::string("response timeout: ") + msg_type_name(reply_msg.type));
    return make_error(Errc::Dropped, std::string("dropped ") + msg_type_name(reply_msg.type));
  }

  Delivery rd;
  rd.id = next_delivery_++;
  rd.msg = delivered_reply;
  rd.boundary = boundary;
  rd.carrier = carrier;
  rd.adversarial = rpipe.adversarial ||
                   wants_source_tamper(delivered_reply.type, delivered_reply.src);
  rd.via = AttackKind::Tamper;
  deliveries_.push_back({rd.id, rd.msg.type, rd.msg.src, rd.msg.dst, carrier, boundary,
                         rd.adversarial, rd.via, DeliveryFate::Pending, "", ""});
  trace_msg(rd);
  if (!rd.adversarial) mark_accepted(rd.id);

  // Replay hook on the response: re-present it to the original caller.
  if (allow_hooks && replay_depth_ == 0) {
    for (const auto& a : actions_) {
      if (!action_matches(a, AttackKind::Replay, rd.msg, carrier)) continue;
      if (carrier == Carrier::Vmm && mitigation_enabled("M2")) {
        record_guard(AttackKind::Replay, rd.msg.type);
        continue;
      }
      if (carrier == Carrier::Console) continue;
      ++replay_depth_;
      (void)deliver(rd.msg, true, AttackKind::Replay, false);
      --replay_depth_;
      break;
    }
  }

  return Reply{delivered_reply, d.id, rd.id};
}

void Network::trace_msg(const Delivery& d) {
  emit("msg", {{"type", msg_type_name(d.msg.type)},
               {"src", d.msg.src},
               {"dst", d.msg.dst},
               {"overlay", d.msg.overlay},
               {"carrier", carrier_name(d.carrier)},
               {"boundary", d.boundary ? "1" : "0"},
               {"enc", d.msg.is_encrypted ? "1" : "0"},
               {"adv", d.adversarial ? "1" : "0"},
               {"body", to_hex(digest_view(sha256(d.msg.body))).substr(0, 16)}});
}

void Network::emit(const std::string& kind, std::map<std::string, std::string> fields) {
  json j;
  j["k"] = kind;
  j["t"] = now_;
  j["q"] = next_seq_++;
  for (auto& [k, v] : fields) j[k] = v;
  trace_.push_back(j.dump());
  logging::trace(trace_.back());
}

void Network::step(const std::string& label) { emit("step", {{"label", label}}); }

void Network::state(const std::string& entity, const std::string& what,
                    const std::string& value) {
  emit("state", {{"entity", entity}, {"what", what}, {"value", value}});
}

void Network::incident(const std::string& entity, const std::string& what) {
  incidents_.push_back({now_, entity, what});
  emit("incident", {{"entity", entity}, {"what", what}});
}

void Network::mib_access(const std::string& op, const std::string& requester,
                         const std::string& detail, bool granted) {
  mib_records_.push_back({op, requester, detail, granted});
  emit("mib", {{"op", op},
               {"requester", requester},
               {"detail", detail},
               {"granted", granted ? "1" : "0"}});
}

void Network::store_access(const std::string& reader, const std::string& owner,
                           const std::string& what, bool granted) {
  store_records_.push_back({reader, owner, what, granted});
  emit("store", {{"reader", reader},
                 {"owner", owner},
                 {"what", what},
                 {"granted", granted ? "1" : "0"}});
}

void Network::session_established(const std::string& a, const std::string& b,
                                  const std::string& overlay) {
  session_records_.push_back({a, b, overlay});
  emit("session", {{"a", a}, {"b", b}, {"overlay", overlay}});
}

void Network::chain_entry(const std::string& entity, const LogEntry& entry) {
  emit("log", {{"entity", entity},
               {"kind", entry.kind},
               {"ts", std::to_string(entry.timestamp)},
               {"digest", to_hex(digest_view(entry.chain_digest())).substr(0, 16)}});
}

void Network::console_msg(MsgType type, const std::string& src, const std::string& dst,
                          const std::string& detail) {
  emit("msg", {{"type", msg_type_name(type)},
               {"src", src},
               {"dst", dst},
               {"overlay", ""},
               {"carrier", "console"},
               {"boundary", "1"},
               {"enc", "0"},
               {"adv", "0"},
               {"body", detail}});
}

void Network::note(const std::string& text) { emit("note", {{"text", text}}); }

bool Network::knowledge_contains(std::string_view sentinel) const {
  for (const auto& captured : knowledge_) {
    if (contains(captured, sentinel)) return true;
  }
  return false;
}

std::string Network::trace_digest() const {
  Bytes all;
  for (const auto& line : trace_) {
    append(all, to_bytes(line));
    all.push_back('\n');
  }
  return to_hex(digest_view(sha256(all)));
}

}  // namespace nada::sim
