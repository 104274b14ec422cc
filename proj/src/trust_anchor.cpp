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

#include "nada/trust_anchor.hpp"

#include <cstring>

namespace nada::trust {

Digest extend_digest(const Digest& current, const Digest& measurement) {
  Bytes material(current.begin(), current.end());
  append(material, digest_view(measurement));
  return sha256(material);
}

namespace {

void encode_mask(Encoder& e, const PcrMask& mask) {
  uint8_t bits = 0;
  for (size_t i = 0; i < kNumPcrs; ++i) {
    if (mask[i]) bits |= static_cast<uint8_t>(1u << i);
  }
  e.tag(bits);
}

Result<PcrMask> decode_mask(Decoder& d) {
  auto t = d.tag();
  if (!t) return t.error();
  PcrMask mask{};
  for (size_t i = 0; i < kNumPcrs; ++i) mask[i] = (t.value() >> i) & 1;
  return mask;
}

Bytes masked_pcr_bytes(const PcrArray& pcrs, const PcrMask& mask) {
  Encoder e;
  encode_mask(e, mask);
  for (size_t i = 0; i < kNumPcrs; ++i) {
    if (mask[i]) e.field(digest_view(pcrs[i]));
  }
  return std::move(e).take();
}

}  // namespace

Bytes PlatformState::encode_pcrs() const { return masked_pcr_bytes(pcrs, full_mask()); }

Bytes PlatformState::encode_pcrs(const PcrMask& mask) const {
  return masked_pcr_bytes(pcrs, mask);
}

PcrArray replay_boot_log(const std::vector<BootMeasurement>& log) {
  PcrArray pcrs{};
  for (const auto& m : log) {
    if (m.pcr_index >= kNumPcrs) continue;  // invalid entries cannot occur honestly
    pcrs[m.pcr_index] = extend_digest(pcrs[m.pcr_index], m.code_digest);
  }
  return pcrs;
}

Bytes Quote::signing_bytes() const {
  Encoder e;
  for (const auto& p : pcrs) e.field(digest_view(p));
  e.field(nonce);
  return std::move(e).take();
}

Bytes Quote::encode() const {
  Encoder e;
  e.field(signing_bytes());
  e.field(ByteView(signature.data(), signature.size()));
  return std::move(e).take();
}

Result<Quote> Quote::decode(ByteView data) {
  Decoder outer(data);
  auto body = outer.field();
  if (!body) return body.error();
  auto sig = outer.field();
  if (!sig) return sig.error();
  if (sig.value().size() != kSigSize) {
    return make_error(Errc::IntegrityFailure, "quote signature width");
  }

  Decoder d(body.value());
  Quote q;
  for (auto& p : q.pcrs) {
    auto f = d.field();
    if (!f) return f.error();
    if (f.value().size() != kDigestSize) {
      return make_error(Errc::IntegrityFailure, "pcr width");
    }
    std::memcpy(p.data(), f.value().data(), kDigestSize);
  }
  auto nonce = d.field();
  if (!nonce) return nonce.error();
  q.nonce = nonce.take();
  std::memcpy(q.signature.data(), sig.value().data(), kSigSize);
  return q;
}

const char* quote_verdict_name(QuoteVerdict v) {
  switch (v) {
    case QuoteVerdict::Accept: return "Accept";
    case QuoteVerdict::BadSignature: return "BadSignature";
    case QuoteVerdict::Freshness: return "Freshness";
    case QuoteVerdict::StateMismatch: return "StateMismatch";
  }
  return "?";
}

QuoteVerdict verify_quote(const Quote& q, ByteView nonce, const PcrArray& expected,
                          const SignPub& attestation_pub) {
  if (!verify(attestation_pub, q.signing_bytes(), q.signature)) {
    return QuoteVerdict::BadSignature;
  }
  if (q.nonce.size() != nonce.size() ||
      !std::equal(q.nonce.begin(), q.nonce.end(), nonce.begin())) {
    return QuoteVerdict::Freshness;
  }
  if (q.pcrs != expected) return QuoteVerdict::StateMismatch;
  return QuoteVerdict::Accept;
}

Bytes SealedBlob::encode() const {
  Encoder e;
  encode_mask(e, mask);
  for (size_t i = 0; i < kNumPcrs; ++i) {
    if (mask[i]) e.field(digest_view(bound_pcrs[i]));
  }
  e.field(ByteView(nonce.data(), nonce.size()));
  e.field(ciphertext);
  return std::move(e).take();
}

Result<SealedBlob> SealedBlob::decode(ByteView data) {
  Decoder d(data);
  SealedBlob b;
  auto mask = decode_mask(d);
  if (!mask) return mask.error();
  b.mask = mask.value();
  for (size_t i = 0; i < kNumPcrs; ++i) {
    if (!b.mask[i]) continue;
    auto f = d.field();
    if (!f) return f.error();
    if (f.value().size() != kDigestSize) {
      return make_error(Errc::IntegrityFailure, "bound pcr width");
    }
    std::memcpy(b.bound_pcrs[i].data(), f.value().data(), kDigestSize);
  }
  auto nonce = d.field();
  if (!nonce) return nonce.error();
  if (nonce.value().size() != kNonceSize) {
    return make_error(Errc::IntegrityFailure, "nonce width");
  }
  std::memcpy(b.nonce.data(), nonce.value().data(), kNonceSize);
  auto ct = d.field();
  if (!ct) return ct.error();
  b.ciphertext = ct.take();
  return b;
}

const SealedBlob* TrustedDataStore::get(const std::string& slot) const {
  auto it = entries_.find(slot);
  return it == entries_.end() ? nullptr : &it->second;
}

Bytes TrustedDataStore::persistent_image() const {
  Encoder e;
  e.count(static_cast<uint32_t>(entries_.size()));
  for (const auto& [slot, blob] : entries_) {
    e.str(slot);
    e.field(blob.encode());
  }
  return std::move(e).take();
}

std::vector<std::string> TrustedDataStore::slots() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [slot, blob] : entries_) out.push_back(slot);
  return out;
}

TrustAnchor::TrustAnchor(std::string owner_id, const Digest& seed)
    : owner_id_(std::move(owner_id)), rng_(seed) {
  attestation_key_ = SigningKey::from_seed(rng_.fork("attestation").digest());
  log_key_ = SigningKey::from_seed(rng_.fork("log").digest());
  bind_key_ = BoxKey::from_seed(rng_.fork("bind").digest());
  storage_root_ = rng_.fork("storage-root").digest();
}

void TrustAnchor::reset_platform() {
  platform_.pcrs = PcrArray{};
  platform_.boot_log.clear();
  clock_synced_ = false;
}

Result<void> TrustAnchor::measure_and_extend(size_t pcr_index, std::string component,
                                             ByteView code) {
  if (pcr_index >= kNumPcrs) {
    return make_error(Errc::IndexOutOfRange, "pcr index " + std::to_string(pcr_index));
  }
  Digest code_digest = sha256(code);
  platform_.pcrs[pcr_index] = extend_digest(platform_.pcrs[pcr_index], code_digest);
  platform_.boot_log.push_back({std::move(component), pcr_index, code_digest});
  return {};
}

Quote TrustAnchor::make_quote(ByteView nonce) const {
  Quote q;
  q.pcrs = platform_.pcrs;
  q.nonce = Bytes(nonce.begin(), nonce.end());
  q.signature = sign(attestation_key_, q.signing_bytes());
  return q;
}

SymKey TrustAnchor::derive_seal_key(const PcrArray& pcrs, const PcrMask& mask) const {
  Bytes material(storage_root_.begin(), storage_root_.end());
  append(material, masked_pcr_bytes(pcrs, mask));
  Digest d = sha256(material);
  SymKey key;
  std::memcpy(key.data(), d.data(), key.size());
  return key;
}

SealedBlob TrustAnchor::seal(ByteView payload, const PcrMask& mask) {
  SealedBlob blob;
  blob.mask = mask;
  for (size_t i = 0; i < kNumPcrs; ++i) {
    if (mask[i]) blob.bound_pcrs[i] = platform_.pcrs[i];
  }
  Bytes nonce_bytes = rng_.bytes(kNonceSize);
  std::memcpy(blob.nonce.data(), nonce_bytes.data(), kNonceSize);
  blob.ciphertext =
      secretbox_encrypt(derive_seal_key(platform_.pcrs, mask), blob.nonce, payload);
  return blob;
}

Result<Bytes> TrustAnchor::unseal(const SealedBlob& blob) const {
  for (size_t i = 0; i < kNumPcrs; ++i) {
    if (blob.mask[i] && blob.bound_pcrs[i] != platform_.pcrs[i]) {
      return make_error(Errc::StateMismatch,
                        "pcr " + std::to_string(i) + " differs from sealing state");
    }
  }
  auto pt = secretbox_decrypt(derive_seal_key(platform_.pcrs, blob.mask), blob.nonce,
                              blob.ciphertext);
  if (!pt) return make_error(Errc::IntegrityFailure, "sealed blob tag mismatch");
  return pt.take();
}

Bytes TrustAnchor::bind_to_state(DeterministicRng& rng, const BoxPub& recipient,
                                 const PcrArray& bound, const PcrMask& mask,
                                 ByteView payload) {
  Encoder e;
  e.field(masked_pcr_bytes(bound, mask));
  e.field(payload);
  return sealed_box_encrypt(rng, recipient, e.bytes());
}

Result<Bytes> TrustAnchor::unbind(ByteView blob) const {
  auto opened = sealed_box_decrypt(bind_key_, blob);
  if (!opened) return make_error(Errc::IntegrityFailure, "bound blob undecryptable");
  Decoder d(opened.value());
  auto bound = d.field();
  if (!bound) return bound.error();
  auto payload = d.field();
  if (!payload) return payload.error();

  // The bound bytes carry their own mask; compare against the live pcrs.
  Decoder bd(bound.value());
  auto mask = decode_mask(bd);
  if (!mask) return mask.error();
  Bytes current = masked_pcr_bytes(platform_.pcrs, mask.value());
  if (current != bound.value()) {
    return make_error(Errc::SealMismatch, "platform state drifted from bound state");
  }
  return payload.take();
}

std::string TrustAnchor::store_key_slot(const ResourceId& rid) {
  return "storekey:" + rid.to_string();
}

Result<SymKey> TrustAnchor::compute_storage_key(const ResourceId& rid) {
  const std::string slot = store_key_slot(rid);
  if (tds_.has(slot)) {
    return make_error(Errc::DuplicateKey, "storage key exists for " + rid.to_string());
  }
  Bytes key_bytes = rng_.bytes(kSymKeySize);
  tds_.put(slot, seal(key_bytes));
  SymKey key;
  std::memcpy(key.data(), key_bytes.data(), key.size());
  return key;
}

Result<SymKey> TrustAnchor::get_storage_key(const ResourceId& rid) const {
  const SealedBlob* blob = tds_.get(store_key_slot(rid));
  if (blob == nullptr) {
    return make_error(Errc::NotFound, "no storage key for " + rid.to_string());
  }
  auto pt = unseal(*blob);
  if (!pt) return pt.error();
  if (pt.value().size() != kSymKeySize) {
    return make_error(Errc::IntegrityFailure, "storage key width");
  }
  SymKey key;
  std::memcpy(key.data(), pt.value().data(), key.size());
  return key;
}

void TrustAnchor::synchronize_clock(uint64_t now) {
  clock_ = now;
  clock_synced_ = true;
}

void TrustAnchor::update_clock(uint64_t now) {
  if (now > clock_) clock_ = now;
}

Result<LogEntry> TrustAnchor::sign_log(std::string kind, ByteView payload) {
  if (!clock_synced_) {
    return make_error(Errc::ClockUnsynchronized,
                      "trusted log requires time synchronization", "M4.0");
  }
  LogEntry le;
  le.timestamp = clock_;
  le.kind = std::move(kind);
  le.payload = Bytes(payload.begin(), payload.end());
  le.signer = owner_id_;
  le.prev_digest = chain_tail_;
  le.signature = sign(log_key_, le.signing_bytes());
  chain_tail_ = le.chain_digest();
  return le;
}

ChainVerdict verify_log_chain(const std::vector<LogEntry>& entries,
                              const SignPub& signer_pub) {
  Digest prev{};  // genesis sentinel
  for (size_t i = 0; i < entries.size(); ++i) {
    const LogEntry& le = entries[i];
    if (le.prev_digest != prev) return {false, i};
    if (!verify(signer_pub, le.signing_bytes(), le.signature)) return {false, i};
    prev = le.chain_digest();
  }
  return {true, 0};
}

}  // namespace nada::trust
