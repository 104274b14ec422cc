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

#include "nada/crypto.hpp"

#include <sodium.h>

#include <cstring>
#include <mutex>
#include <stdexcept>

namespace nada {

namespace {

void ensure_sodium() {
  static std::once_flag flag;
  std::call_once(flag, [] {
    if (sodium_init() < 0) throw std::runtime_error("sodium_init failed");
  });
}

}  // namespace

std::string to_hex(ByteView data) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (uint8_t b : data) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0x0f]);
  }
  return out;
}

Bytes from_hex(std::string_view hexstr) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  if (hexstr.size() % 2 != 0) throw std::invalid_argument("odd hex length");
  Bytes out;
  out.reserve(hexstr.size() / 2);
  for (size_t i = 0; i < hexstr.size(); i += 2) {
    int hi = nibble(hexstr[i]), lo = nibble(hexstr[i + 1]);
    if (hi < 0 || lo < 0) throw std::invalid_argument("bad hex digit");
    out.push_back(static_cast<uint8_t>(hi << 4 | lo));
  }
  return out;
}

bool contains(ByteView hay, std::string_view needle) {
  if (needle.empty()) return true;
  if (hay.size() < needle.size()) return false;
  const auto* first = reinterpret_cast<const char*>(hay.data());
  return std::string_view(first, hay.size()).find(needle) != std::string_view::npos;
}

Digest sha256(ByteView data) {
  ensure_sodium();
  Digest out;
  crypto_hash_sha256(out.data(), data.data(), data.size());
  return out;
}

std::string hex(const Digest& d) { return to_hex(digest_view(d)); }

void DeterministicRng::fill(uint8_t* out, size_t n) {
  ensure_sodium();
  // Counter-mode expansion over the rolling state.
  size_t produced = 0;
  while (produced < n) {
    Bytes block(state_.begin(), state_.end());
    for (int i = 7; i >= 0; --i) block.push_back(static_cast<uint8_t>(counter_ >> (8 * i)));
    Digest d = sha256(block);
    size_t take = std::min(n - produced, d.size());
    std::memcpy(out + produced, d.data(), take);
    produced += take;
    ++counter_;
  }
}

Bytes DeterministicRng::bytes(size_t n) {
  Bytes out(n);
  fill(out.data(), n);
  return out;
}

Digest DeterministicRng::digest() {
  Digest d;
  fill(d.data(), d.size());
  return d;
}

uint64_t DeterministicRng::next_u64() {
  uint8_t buf[8];
  fill(buf, 8);
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = v << 8 | buf[i];
  return v;
}

DeterministicRng DeterministicRng::fork(std::string_view label) {
  Bytes material(state_.begin(), state_.end());
  append(material, to_bytes(label));
  Digest child = sha256(material);
  // Advance the parent so repeated forks with the same label differ.
  Bytes adv(state_.begin(), state_.end());
  append(adv, to_bytes("fork"));
  state_ = sha256(adv);
  return DeterministicRng(child);
}

SigningKey SigningKey::from_seed(const Digest& seed) {
  ensure_sodium();
  SigningKey k;
  crypto_sign_seed_keypair(k.pub.data(), k.sec.data(), seed.data());
  return k;
}

Signature sign(const SigningKey& key, ByteView msg) {
  ensure_sodium();
  Signature sig;
  crypto_sign_detached(sig.data(), nullptr, msg.data(), msg.size(), key.sec.data());
  return sig;
}

bool verify(const SignPub& pub, ByteView msg, const Signature& sig) {
  ensure_sodium();
  return crypto_sign_verify_detached(sig.data(), msg.data(), msg.size(), pub.data()) == 0;
}

BoxKey BoxKey::from_seed(const Digest& seed) {
  ensure_sodium();
  BoxKey k;
  crypto_box_seed_keypair(k.pub.data(), k.sec.data(), seed.data());
  return k;
}

Bytes sealed_box_encrypt(DeterministicRng& rng, const BoxPub& recipient,
                         ByteView plaintext) {
  ensure_sodium();
  // crypto_box_seal with a deterministic ephemeral key:
  //   out = eph_pk || box(m, nonce=blake2b(eph_pk||recipient_pk), recipient_pk, eph_sk)
  Digest eph_seed = rng.digest();
  BoxKey eph = BoxKey::from_seed(eph_seed);

  Nonce nonce;
  crypto_generichash_state st;
  crypto_generichash_init(&st, nullptr, 0, nonce.size());
  crypto_generichash_update(&st, eph.pub.data(), eph.pub.size());
  crypto_generichash_update(&st, recipient.data(), recipient.size());
  crypto_generichash_final(&st, nonce.data(), nonce.size());

  Bytes out(eph.pub.begin(), eph.pub.end());
  Bytes boxed(plaintext.size() + crypto_box_MACBYTES);
  if (crypto_box_easy(boxed.data(), plaintext.data(), plaintext.size(), nonce.data(),
                      recipient.data(), eph.sec.data()) != 0) {
    throw std::runtime_error("crypto_box_easy failed");
  }
  append(out, boxed);
  return out;
}

Result<Bytes> sealed_box_decrypt(const BoxKey& recipient, ByteView box) {
  ensure_sodium();
  if (box.size() < crypto_box_SEALBYTES) {
    return make_error(Errc::DecryptFailure, "sealed box too short");
  }
  Bytes out(box.size() - crypto_box_SEALBYTES);
  if (crypto_box_seal_open(out.data(), box.data(), box.size(), recipient.pub.data(),
                           recipient.sec.data()) != 0) {
    return make_error(Errc::DecryptFailure, "sealed box open failed");
  }
  return out;
}

Bytes secretbox_encrypt(const SymKey& key, const Nonce& nonce, ByteView plaintext) {
  ensure_sodium();
  Bytes out(plaintext.size() + crypto_secretbox_MACBYTES);
  crypto_secretbox_easy(out.data(), plaintext.data(), plaintext.size(), nonce.data(),
                        key.data());
  return out;
}

Result<Bytes> secretbox_decrypt(const SymKey& key, const Nonce& nonce,
                                ByteView ciphertext) {
  ensure_sodium();
  if (ciphertext.size() < crypto_secretbox_MACBYTES) {
    return make_error(Errc::IntegrityFailure, "ciphertext too short");
  }
  Bytes out(ciphertext.size() - crypto_secretbox_MACBYTES);
  if (crypto_secretbox_open_easy(out.data(), ciphertext.data(), ciphertext.size(),
                                 nonce.data(), key.data()) != 0) {
    return make_error(Errc::IntegrityFailure, "authentication tag mismatch");
  }
  return out;
}

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::EmptyId: return "EmptyId";
    case Errc::NamespaceCollision: return "NamespaceCollision";
    case Errc::ConfigInvalid: return "ConfigInvalid";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::StateMismatch: return "StateMismatch";
    case Errc::IntegrityFailure: return "IntegrityFailure";
    case Errc::DuplicateKey: return "DuplicateKey";
    case Errc::NotFound: return "NotFound";
    case Errc::ClockUnsynchronized: return "ClockUnsynchronized";
    case Errc::AttestationFailure: return "AttestationFailure";
    case Errc::CertificateFailure: return "CertificateFailure";
    case Errc::Freshness: return "Freshness";
    case Errc::PolicyDenied: return "PolicyDenied";
    case Errc::UnknownTarget: return "UnknownTarget";
    case Errc::TicketExpired: return "TicketExpired";
    case Errc::ReplayDetected: return "ReplayDetected";
    case Errc::SealMismatch: return "SealMismatch";
    case Errc::UnknownDomain: return "UnknownDomain";
    case Errc::FingerprintMismatch: return "FingerprintMismatch";
    case Errc::NoLocationReachable: return "NoLocationReachable";
    case Errc::BadSignature: return "BadSignature";
    case Errc::DecryptFailure: return "DecryptFailure";
    case Errc::UnexpectedMessage: return "UnexpectedMessage";
    case Errc::UncertifiedPolicy: return "UncertifiedPolicy";
    case Errc::UnknownSlice: return "UnknownSlice";
    case Errc::StoreKeyExists: return "StoreKeyExists";
    case Errc::SliceInactive: return "SliceInactive";
    case Errc::UnknownContent: return "UnknownContent";
    case Errc::NoGrant: return "NoGrant";
    case Errc::UntrustedSlice: return "UntrustedSlice";
    case Errc::UnknownNode: return "UnknownNode";
    case Errc::NoHolder: return "NoHolder";
    case Errc::AuthenticationFailure: return "AuthenticationFailure";
    case Errc::RejectedPolicy: return "RejectedPolicy";
    case Errc::AccessDenied: return "AccessDenied";
    case Errc::Dropped: return "Dropped";
    case Errc::ManagementUnreachable: return "ManagementUnreachable";
    case Errc::ParseError: return "ParseError";
    case Errc::SchemaError: return "SchemaError";
    case Errc::UnknownReference: return "UnknownReference";
    case Errc::CyclicDependency: return "CyclicDependency";
  }
  return "UnknownError";
}

}  // namespace nada
