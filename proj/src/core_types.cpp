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

#include "nada/core_types.hpp"

#include <cmath>
#include <cstring>

namespace nada {

namespace {

void encode_signature(Encoder& e, const Signature& sig) {
  e.field(ByteView(sig.data(), sig.size()));
}

Result<Signature> decode_signature(Decoder& d) {
  auto f = d.field();
  if (!f) return f.error();
  if (f.value().size() != kSigSize) {
    return make_error(Errc::IntegrityFailure, "signature width");
  }
  Signature sig;
  std::memcpy(sig.data(), f.value().data(), kSigSize);
  return sig;
}

void encode_rid_set(Encoder& e, const std::set<ResourceId>& rids) {
  e.count(static_cast<uint32_t>(rids.size()));
  for (const auto& r : rids) r.encode(e);
}

Result<std::set<ResourceId>> decode_rid_set(Decoder& d) {
  auto n = d.count();
  if (!n) return n.error();
  std::set<ResourceId> out;
  for (uint32_t i = 0; i < n.value(); ++i) {
    auto r = ResourceId::decode(d);
    if (!r) return r.error();
    out.insert(r.take());
  }
  return out;
}

// IEEE bits big-endian; measurements are data, not arithmetic, here.
void encode_f64(Encoder& e, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, 8);
  e.u64(bits);
}

Result<double> decode_f64(Decoder& d) {
  auto bits = d.u64();
  if (!bits) return bits.error();
  double v;
  uint64_t b = bits.value();
  std::memcpy(&v, &b, 8);
  return v;
}

}  // namespace

std::string fingerprint_of(ByteView content) { return hex(sha256(content)); }

void ContentLocation::encode(Encoder& e) const {
  e.str(node);
  e.tag(static_cast<uint8_t>(domain));
}

Result<ContentLocation> ContentLocation::decode(Decoder& d) {
  ContentLocation loc;
  auto n = d.str();
  if (!n) return n.error();
  loc.node = n.take();
  auto t = d.tag();
  if (!t) return t.error();
  if (t.value() > 1) return make_error(Errc::IntegrityFailure, "domain tag");
  loc.domain = static_cast<Domain>(t.value());
  return loc;
}

Bytes MetaData::signing_bytes() const {
  Encoder e;
  e.str(content_id);
  e.str(fingerprint);
  e.count(static_cast<uint32_t>(locations.size()));
  for (const auto& loc : locations) loc.encode(e);
  e.str(tracker);
  e.tag(static_cast<uint8_t>(kind));
  return std::move(e).take();
}

Bytes MetaData::encode() const {
  Encoder e;
  e.field(signing_bytes());
  encode_signature(e, signature);
  return std::move(e).take();
}

Result<MetaData> MetaData::decode(ByteView data) {
  Decoder outer(data);
  auto body = outer.field();
  if (!body) return body.error();
  auto sig = decode_signature(outer);
  if (!sig) return sig.error();

  Decoder d(body.value());
  MetaData m;
  auto cid = d.str();
  if (!cid) return cid.error();
  m.content_id = cid.take();
  auto fp = d.str();
  if (!fp) return fp.error();
  m.fingerprint = fp.take();
  auto n = d.count();
  if (!n) return n.error();
  for (uint32_t i = 0; i < n.value(); ++i) {
    auto loc = ContentLocation::decode(d);
    if (!loc) return loc.error();
    m.locations.push_back(loc.take());
  }
  auto tr = d.str();
  if (!tr) return tr.error();
  m.tracker = tr.take();
  auto k = d.tag();
  if (!k) return k.error();
  if (k.value() > 1) return make_error(Errc::IntegrityFailure, "meta kind tag");
  m.kind = static_cast<MetaKind>(k.value());
  m.signature = sig.take();
  return m;
}

Bytes AppSlicePolicy::signing_bytes() const {
  Encoder e;
  owner.encode(e);
  encode_rid_set(e, allowed_overlay_peers);
  encode_rid_set(e, allowed_slice_traffic);
  encode_rid_set(e, mib_read_grants);
  return std::move(e).take();
}

Bytes AppSlicePolicy::encode() const {
  Encoder e;
  e.field(signing_bytes());
  encode_signature(e, certified_by_isp);
  return std::move(e).take();
}

Result<AppSlicePolicy> AppSlicePolicy::decode(ByteView data) {
  Decoder outer(data);
  auto body = outer.field();
  if (!body) return body.error();
  auto sig = decode_signature(outer);
  if (!sig) return sig.error();

  Decoder d(body.value());
  auto owner = ResourceId::decode(d);
  if (!owner) return owner.error();
  AppSlicePolicy p{owner.take(), {}, {}, {}, sig.take()};
  auto peers = decode_rid_set(d);
  if (!peers) return peers.error();
  p.allowed_overlay_peers = peers.take();
  auto traffic = decode_rid_set(d);
  if (!traffic) return traffic.error();
  p.allowed_slice_traffic = traffic.take();
  auto mib = decode_rid_set(d);
  if (!mib) return mib.error();
  p.mib_read_grants = mib.take();
  return p;
}

Bytes AppSliceConfiguration::encode() const {
  Encoder e;
  resource_id.encode(e);
  store_key_handle.encode(e);
  e.field(policy.encode());
  e.str(fingerprint);
  return std::move(e).take();
}

Result<AppSliceConfiguration> AppSliceConfiguration::decode(ByteView data) {
  Decoder d(data);
  auto rid = ResourceId::decode(d);
  if (!rid) return rid.error();
  auto handle = ResourceId::decode(d);
  if (!handle) return handle.error();
  auto pol_bytes = d.field();
  if (!pol_bytes) return pol_bytes.error();
  auto pol = AppSlicePolicy::decode(pol_bytes.value());
  if (!pol) return pol.error();
  auto fp = d.str();
  if (!fp) return fp.error();
  return AppSliceConfiguration{rid.take(), handle.take(), pol.take(), fp.take()};
}

Bytes ConfigureCommand::encode() const {
  Encoder e;
  e.field(policy.encode());
  e.str(slice_fingerprint);
  e.tag(static_cast<uint8_t>(action));
  return std::move(e).take();
}

Result<ConfigureCommand> ConfigureCommand::decode(ByteView data) {
  Decoder d(data);
  auto pol_bytes = d.field();
  if (!pol_bytes) return pol_bytes.error();
  auto pol = AppSlicePolicy::decode(pol_bytes.value());
  if (!pol) return pol.error();
  auto fp = d.str();
  if (!fp) return fp.error();
  auto a = d.tag();
  if (!a) return a.error();
  if (a.value() > 2) return make_error(Errc::IntegrityFailure, "configure action tag");
  return ConfigureCommand{pol.take(), fp.take(), static_cast<ConfigureAction>(a.value())};
}

Bytes LogEntry::signing_bytes() const {
  Encoder e;
  e.u64(timestamp);
  e.str(kind);
  e.field(payload);
  e.str(signer);
  e.field(digest_view(prev_digest));
  return std::move(e).take();
}

Bytes LogEntry::encode() const {
  Encoder e;
  e.field(signing_bytes());
  encode_signature(e, signature);
  return std::move(e).take();
}

Result<LogEntry> LogEntry::decode(ByteView data) {
  Decoder outer(data);
  auto body = outer.field();
  if (!body) return body.error();
  auto sig = decode_signature(outer);
  if (!sig) return sig.error();

  Decoder d(body.value());
  LogEntry le;
  auto ts = d.u64();
  if (!ts) return ts.error();
  le.timestamp = ts.value();
  auto k = d.str();
  if (!k) return k.error();
  le.kind = k.take();
  auto pl = d.field();
  if (!pl) return pl.error();
  le.payload = pl.take();
  auto sg = d.str();
  if (!sg) return sg.error();
  le.signer = sg.take();
  auto prev = d.field();
  if (!prev) return prev.error();
  if (prev.value().size() != kDigestSize) {
    return make_error(Errc::IntegrityFailure, "prev digest width");
  }
  std::memcpy(le.prev_digest.data(), prev.value().data(), kDigestSize);
  le.signature = sig.take();
  return le;
}

Digest LogEntry::chain_digest() const { return sha256(encode()); }

const char* user_command_name(UserCommand c) {
  switch (c) {
    case UserCommand::Content: return "content";
    case UserCommand::Play: return "play";
    case UserCommand::Stop: return "stop";
  }
  return "?";
}

Bytes UserRequest::encode() const {
  Encoder e;
  e.tag(static_cast<uint8_t>(kind));
  e.str(content_id);
  return std::move(e).take();
}

Result<UserRequest> UserRequest::decode(ByteView data) {
  Decoder d(data);
  auto t = d.tag();
  if (!t) return t.error();
  if (t.value() > 2) return make_error(Errc::IntegrityFailure, "user command tag");
  auto cid = d.str();
  if (!cid) return cid.error();
  return UserRequest{static_cast<UserCommand>(t.value()), cid.take()};
}

Bytes Measurement::encode() const {
  Encoder e;
  e.str(subject);
  e.str(metric);
  encode_f64(e, value);
  e.str(unit);
  e.u64(at);
  return std::move(e).take();
}

Result<Measurement> Measurement::decode(ByteView data) {
  Decoder d(data);
  Measurement m;
  auto s = d.str();
  if (!s) return s.error();
  m.subject = s.take();
  auto met = d.str();
  if (!met) return met.error();
  m.metric = met.take();
  auto v = decode_f64(d);
  if (!v) return v.error();
  m.value = v.value();
  auto u = d.str();
  if (!u) return u.error();
  m.unit = u.take();
  auto at = d.u64();
  if (!at) return at.error();
  m.at = at.value();
  return m;
}

}  // namespace nada
