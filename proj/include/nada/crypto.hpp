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

#ifndef NADA_CRYPTO_HPP
#define NADA_CRYPTO_HPP

#include <array>
#include <cstdint>
#include <string>

#include "nada/bytes.hpp"
#include "nada/error.hpp"

namespace nada {

// One project-wide hash: SHA-256. Fingerprints are its lowercase-hex form.
inline constexpr size_t kDigestSize = 32;
using Digest = std::array<uint8_t, kDigestSize>;

Digest sha256(ByteView data);
std::string hex(const Digest& d);
inline ByteView digest_view(const Digest& d) { return ByteView(d.data(), d.size()); }
inline Bytes digest_bytes(const Digest& d) { return Bytes(d.begin(), d.end()); }

constexpr Digest zero_digest() { return Digest{}; }

// Deterministic byte stream seeded from a digest. All randomness in a
// scenario run flows through one of these, which is what makes traces a
// pure function of (config, seed).
class DeterministicRng {
 public:
  explicit DeterministicRng(const Digest& seed) : state_(seed) {}
  explicit DeterministicRng(std::string_view label)
      : state_(sha256(to_bytes(label))) {}

  void fill(uint8_t* out, size_t n);
  Bytes bytes(size_t n);
  Digest digest();
  uint64_t next_u64();
  // Independent child stream; the parent advances too.
  DeterministicRng fork(std::string_view label);

 private:
  Digest state_;
  uint64_t counter_ = 0;
};

// Ed25519 signing.
inline constexpr size_t kSigSize = 64;
using Signature = std::array<uint8_t, kSigSize>;
using SignPub = std::array<uint8_t, 32>;

struct SigningKey {
  SignPub pub{};
  std::array<uint8_t, 64> sec{};

  static SigningKey from_seed(const Digest& seed);
};

Signature sign(const SigningKey& key, ByteView msg);
bool verify(const SignPub& pub, ByteView msg, const Signature& sig);

// Curve25519 box keys, used for state-bound key transport.
using BoxPub = std::array<uint8_t, 32>;

struct BoxKey {
  BoxPub pub{};
  std::array<uint8_t, 32> sec{};

  static BoxKey from_seed(const Digest& seed);
};

// Sealed box with caller-supplied (deterministic) ephemeral randomness.
// Output is wire-compatible with libsodium's crypto_box_seal.
Bytes sealed_box_encrypt(DeterministicRng& rng, const BoxPub& recipient,
                         ByteView plaintext);
Result<Bytes> sealed_box_decrypt(const BoxKey& recipient, ByteView box);

// XSalsa20-Poly1305 secretbox.
inline constexpr size_t kSymKeySize = 32;
inline constexpr size_t kNonceSize = 24;
using SymKey = std::array<uint8_t, kSymKeySize>;
using Nonce = std::array<uint8_t, kNonceSize>;

Bytes secretbox_encrypt(const SymKey& key, const Nonce& nonce, ByteView plaintext);
Result<Bytes> secretbox_decrypt(const SymKey& key, const Nonce& nonce, ByteView ciphertext);

}  // namespace nada

#endif  // NADA_CRYPTO_HPP
