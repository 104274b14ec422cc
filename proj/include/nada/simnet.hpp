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

#ifndef NADA_SIMNET_HPP
#define NADA_SIMNET_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nada/core_types.hpp"
#include "nada/crypto.hpp"
#include "nada/error.hpp"

namespace nada::sim {

enum class MsgType : uint8_t {
  AuthChallenge,
  AuthOffer,
  AuthQuote,
  AuthAccept,
  RegisterRequest,
  RegisterAccept,
  MetaDataPush,
  InstallReport,
  TicketRequest,
  TicketGrant,
  NodeAuthRequest,
  NodeAuthAccept,
  ContentRequest,
  ContentChunk,
  LogRequest,
  LogResponse,
  AppLog,
  MeasureReport,
  UserRequestMsg,
  UserResponseMsg,
  TrackerRequest,
  TrackerResponse,
  TrackerRoute,
  DDDelivery,
  SliceContentRequest,
  SliceContentResponse,
  PushContent,
  StoreWrite,
  SliceTraffic,
  Ack,
  ErrorReply,
};

const char* msg_type_name(MsgType t);
std::optional<MsgType> msg_type_from_name(std::string_view name);

enum class Carrier : uint8_t { Wire, Vmm, Console };

const char* carrier_name(Carrier c);

// One adversary kind per STRIDE class: Spoof=S, Tamper=T, Replay=R (message
// replay and post-hoc log tampering), Eavesdrop=I, Drop=D, Elevate=E.
enum class AttackKind : uint8_t { Spoof, Tamper, Replay, Eavesdrop, Drop, Elevate };

const char* attack_kind_name(AttackKind k);
char attack_kind_letter(AttackKind k);

struct AdversaryAction {
  AttackKind kind = AttackKind::Eavesdrop;
  std::optional<MsgType> type_sel;
  std::optional<Carrier> carrier_sel;
  std::string src_sel;  // empty = any
  std::string dst_sel;  // empty = any
  bool at_source = false;  // corrupt payload at the serving entity, not in flight
  std::string chain_target;  // entity whose signed log chain to tamper post-hoc
  std::string store_target;  // entity whose sealed store to tamper post-hoc
  size_t flip_index = 0;
  std::string label;
};

struct WireMessage {
  MsgType type = MsgType::Ack;
  std::string src;
  std::string dst;
  std::string overlay;  // ResourceId string or empty
  Bytes body;
  bool is_encrypted = false;
  uint64_t counter = 0;  // session nonce counter when encrypted

  Bytes wire_bytes() const;
};

struct Delivery {
  uint64_t id = 0;
  WireMessage msg;
  bool boundary = false;
  Carrier carrier = Carrier::Wire;
  bool adversarial = false;
  AttackKind via = AttackKind::Eavesdrop;
};

class Network;

class Entity {
 public:
  virtual ~Entity() = default;
  virtual const std::string& id() const = 0;
  virtual Result<WireMessage> handle(Network& net, const Delivery& d) = 0;
  virtual void on_tick(Network& net) {}
  // Called when a message this entity sent was never delivered (transport
  // timeout); default records nothing beyond the network's incident record.
  virtual void on_send_failure(Network& net, const WireMessage& msg) {}
};

struct Reply {
  WireMessage msg;
  uint64_t request_id = 0;
  uint64_t reply_id = 0;
};

enum class DeliveryFate : uint8_t { Pending, Accepted, Rejected };

struct DeliveryRecord {
  uint64_t id = 0;
  MsgType type = MsgType::Ack;
  std::string src, dst;
  Carrier carrier = Carrier::Wire;
  bool boundary = false;
  bool adversarial = false;
  AttackKind via = AttackKind::Eavesdrop;
  DeliveryFate fate = DeliveryFate::Pending;
  std::string mitigation;
  std::string reason;
};

struct IncidentRecord {
  uint64_t tick = 0;
  std::string entity;
  std::string what;
};

// Deterministic message transport with trust-boundary tagging, trace
// recording, and a Dolev-Yao adversary hooked into the delivery pipeline.
class Network {
 public:
  Network();

  void register_entity(Entity* e, Domain domain);
  void register_alias(const std::string& alias, Entity* e);
  Domain domain_of(const std::string& id) const;
  bool knows_entity(const std::string& id) const;

  uint64_t now() const { return now_; }
  void advance(uint64_t ticks);

  // Request/response exchange. The request and the reply each run through
  // the adversary pipeline and are trace-recorded. Errors from the remote
  // handler come back as the Result error; transport drops come back as
  // Errc::Dropped.
  Result<Reply> call(const std::string& src, const std::string& dst, WireMessage msg);

  // Adversary-initiated delivery (spoofed or replayed bytes).
  Result<Reply> inject(AttackKind kind, WireMessage msg);

  // Mitigation toggles (scenario config; ablation runs disable entries).
  void disable_mitigation(const std::string& id) { disabled_.insert(id); }
  bool mitigation_enabled(const std::string& id) const { return disabled_.count(id) == 0; }

  void set_actions(std::vector<AdversaryAction> actions) { actions_ = std::move(actions); }
  const std::vector<AdversaryAction>& actions() const { return actions_; }
  bool wants_source_tamper(MsgType type, const std::string& src) const;

  // The one co-located slice the adversary controls; identity forgery on the
  // VMM carrier from anywhere else is stopped by the isolation engine (M2).
  void set_adversary_slice(const std::string& alias) { adversary_slice_ = alias; }
  size_t guard_blocks() const { return guard_blocks_; }

  // Delivery fate bookkeeping; rejection overrides acceptance.
  void mark_accepted(uint64_t delivery_id);
  void mark_rejected(uint64_t delivery_id, const Error& e);
  const std::vector<DeliveryRecord>& deliveries() const { return deliveries_; }

  const std::vector<Bytes>& adversary_knowledge() const { return knowledge_; }
  bool knowledge_contains(std::string_view sentinel) const;
  const std::vector<IncidentRecord>& incidents() const { return incidents_; }

  // Trace emission.
  void step(const std::string& label);
  void state(const std::string& entity, const std::string& what, const std::string& value);
  void incident(const std::string& entity, const std::string& what);
  void mib_access(const std::string& op, const std::string& requester,
                  const std::string& detail, bool granted);
  void store_access(const std::string& reader, const std::string& owner,
                    const std::string& what, bool granted);
  void session_established(const std::string& a, const std::string& b,
                           const std::string& overlay);
  void chain_entry(const std::string& entity, const LogEntry& entry);
  void console_msg(MsgType type, const std::string& src, const std::string& dst,
                   const std::string& detail);
  void note(const std::string& text);

  const std::vector<std::string>& trace_lines() const { return trace_; }
  std::string trace_digest() const;

  // Structured views used by the invariant checks.
  struct SessionRecord {
    std::string a, b, overlay;
  };
  const std::vector<SessionRecord>& sessions() const { return session_records_; }
  struct MibAccessRecord {
    std::string op, requester, detail;
    bool granted = false;
  };
  const std::vector<MibAccessRecord>& mib_accesses() const { return mib_records_; }
  struct StoreAccessRecord {
    std::string reader, owner, what;
    bool granted = false;
  };
  const std::vector<StoreAccessRecord>& store_accesses() const { return store_records_; }

  static Carrier carrier_for(const std::string& src, const std::string& dst);
  bool boundary_for(const std::string& src, const std::string& dst) const;

 private:
  struct PipelineOutcome {
    bool dropped = false;
    bool adversarial = false;
    AttackKind via = AttackKind::Eavesdrop;
  };
  PipelineOutcome adversary_pipeline(WireMessage& msg, Carrier carrier, bool boundary);
  Result<Reply> deliver(WireMessage msg, bool adversarial, AttackKind via,
                        bool record_replay);
  void trace_msg(const Delivery& d);
  void emit(const std::string& kind, std::map<std::string, std::string> fields);
  bool action_matches(const AdversaryAction& a, AttackKind kind, const WireMessage& msg,
                      Carrier carrier) const;
  void record_guard(AttackKind kind, MsgType type);

  uint64_t now_ = 0;
  uint64_t next_seq_ = 0;
  uint64_t next_delivery_ = 1;
  std::map<std::string, Entity*> entities_;
  std::map<std::string, Domain> domains_;
  std::vector<Entity*> tick_order_;
  std::set<std::string> disabled_;
  std::vector<AdversaryAction> actions_;
  std::vector<Bytes> knowledge_;
  std::vector<DeliveryRecord> deliveries_;
  std::vector<IncidentRecord> incidents_;
  std::vector<std::string> trace_;
  std::vector<SessionRecord> session_records_;
  std::vector<MibAccessRecord> mib_records_;
  std::vector<StoreAccessRecord> store_records_;
  std::string adversary_slice_;
  size_t guard_blocks_ = 0;
  int replay_depth_ = 0;
};

}  // namespace nada::sim

#endif  // NADA_SIMNET_HPP
