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

#ifndef NADA_TRUST_ANCHOR_HPP
#define NADA_TRUST_ANCHOR_HPP

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nada/core_types.hpp"
#include "nada/crypto.hpp"
#include "nada/ids.hpp"

namespace nada::trust {

inline constexpr size_t kNumPcrs = 8;
// Register layout: 0 = firmware, 1 = node-management image, 2 = slice images.
inline constexpr size_t kPcrFirmware = 0;
inline constexpr size_t kPcrImage = 1;
inline constexpr size_t kPcrSlices = 2;

using PcrArray = std::array<Digest, kNumPcrs>;
using PcrMask = std::array<bool, kNumPcrs>;

// Storage keys and TDS blobs bind to the platform-integrity registers only;
// slice boots extend PCR 2 and must not invalidate earlier sealed data.
constexpr PcrMask boot_mask() {
  PcrMask m{};
  m[kPcrFirmware] = true;
  m[kPcrImage] = true;
  return m;
}

constexpr PcrMask full_mask() {
  PcrMask m{};
  for (auto& b : m) b = true;
  return m;
}

struct BootMeasurement {
  std::string component;
  size_t pcr_index = 0;
  Digest code_digest{};
};

struct PlatformState {
  PcrArray pcrs{};
  std::vector<BootMeasurement> boot_log;

  Bytes encode_pcrs() const;
  Bytes encode_pcrs(const PcrMask& mask) const;
};

// One PCR extension step: H(current || measurement).
Digest extend_digest(const Digest& current, const Digest& measurement);

// Replays a boot log from the all-zero state; the result must equal the
// recorded pcrs for any honestly produced PlatformState.
PcrArray replay_boot_log(const std::vector<BootMeasurement>& log);

struct Quote {
  PcrArray pcrs{};
  Bytes nonce;
  Signature signature{};

  Bytes signing_bytes() const;
  Bytes encode() const;
  static Result<Quote> decode(ByteView data);
};

enum class QuoteVerdict { Accept, BadSignature, Freshness, StateMismatch };

const char* quote_verdict_name(QuoteVerdict v);

QuoteVerdict verify_quote(const Quote& q, ByteView nonce, const PcrArray& expected,
                          const SignPub& attestation_pub);

struct SealedBlob {
  PcrMask mask{};
  PcrArray bound_pcrs{};  // only entries selected by mask are meaningful
  Nonce nonce{};
  Bytes ciphertext;  // secretbox output, tag included

  Bytes encode() const;
  static Result<SealedBlob> decode(ByteView data);
};

// Node-local sealed store: app slice configurations, storage keys, log
// segments, and the local MIB. Every entry is a SealedBlob; there is no
// plaintext persistence path.
class TrustedDataStore {
 public:
  bool has(const std::string& slot) const { return entries_.count(slot) != 0; }
  void put(const std::string& slot, SealedBlob blob) { entries_[slot] = std::move(blob); }
  const SealedBlob* get(const std::string& slot) const;
  void erase(const std::string& slot) { entries_.erase(slot); }

  // All persisted bytes, for the sealed-persistence sweep and report digests.
  Bytes persistent_image() const;
  std::vector<std::string> slots() const;

 private:
  std::map<std::string, SealedBlob> entries_;
};

// Simulated per-node TPM: measured boot into PCRs, quotes, state-bound
// sealing, storage-key derivation, and signed chained logging.
class TrustAnchor {
 public:
  TrustAnchor(std::string owner_id, const Digest& seed);

  const std::string& owner() const { return owner_id_; }
  const PlatformState& platform() const { return platform_; }
  const SignPub& attestation_pub() const { return attestation_key_.pub; }
  const BoxPub& bind_pub() const { return bind_key_.pub; }

  // Power cycle: volatile PCRs reset, boot log cleared, sealed store kept.
  void reset_platform();

  Result<void> measure_and_extend(size_t pcr_index, std::string component,
                                  ByteView code);

  Quote make_quote(ByteView nonce) const;

  SealedBlob seal(ByteView payload, const PcrMask& mask = boot_mask());
  Result<Bytes> unseal(const SealedBlob& blob) const;

  // State-bound key transport: anyone holding bind_pub can wrap a secret so
  // that only this anchor, in the stated platform state, can recover it.
  static Bytes bind_to_state(DeterministicRng& rng, const BoxPub& recipient,
                             const PcrArray& bound, const PcrMask& mask,
                             ByteView payload);
  Result<Bytes> unbind(ByteView blob) const;

  Result<SymKey> compute_storage_key(const ResourceId& rid);
  Result<SymKey> get_storage_key(const ResourceId& rid) const;

  // Trusted time: adopted from management at registration.
  void synchronize_clock(uint64_t now);
  void update_clock(uint64_t now);
  bool clock_synced() const { return clock_synced_; }
  uint64_t clock() const { return clock_; }

  Result<LogEntry> sign_log(std::string kind, ByteView payload);
  const SignPub& log_pub() const { return log_key_.pub; }

  TrustedDataStore& tds() { return tds_; }
  const TrustedDataStore& tds() const { return tds_; }

  static std::string store_key_slot(const ResourceId& rid);

 private:
  SymKey derive_seal_key(const PcrArray& pcrs, const PcrMask& mask) const;

  std::string owner_id_;
  PlatformState platform_;
  SigningKey attestation_key_;
  SigningKey log_key_;  // derived from the same root seed (root of trust)
  BoxKey bind_key_;
  Digest storage_root_{};
  DeterministicRng rng_;
  TrustedDataStore tds_;
  Digest chain_tail_{};  // all-zero sentinel before the first entry
  uint64_t clock_ = 0;
  bool clock_synced_ = false;
};

// Accept, or the index of the first entry whose signature or chain link
// fails. Entries must be given in append order.
struct ChainVerdict {
  bool ok = true;
  size_t failed_index = 0;
};

ChainVerdict verify_log_chain(const std::vector<LogEntry>& entries,
                              const SignPub& signer_pub);

}  // namespace nada::trust

#endif  // NADA_TRUST_ANCHOR_HPP
