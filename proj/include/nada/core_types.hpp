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

#ifndef NADA_CORE_TYPES_HPP
#define NADA_CORE_TYPES_HPP

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nada/crypto.hpp"
#include "nada/encoding.hpp"
#include "nada/ids.hpp"

namespace nada {

enum class Domain : uint8_t { IspDomain = 0, NadaNetwork = 1 };

struct ContentLocation {
  std::string node;  // entity id holding the content
  Domain domain = Domain::NadaNetwork;

  void encode(Encoder& e) const;
  static Result<ContentLocation> decode(Decoder& d);
  auto operator<=>(const ContentLocation&) const = default;
};

enum class MetaKind : uint8_t { NadaContent = 0, MeasurementRequest = 1 };

// Signed metafile describing content: which nodes hold it, in which domain
// they sit, the tracker to ask, and the fingerprint the reassembled bytes
// must hash to.
struct MetaData {
  std::string content_id;
  std::string fingerprint;  // lowercase hex sha256 of the content bytes
  std::vector<ContentLocation> locations;
  std::string tracker;
  MetaKind kind = MetaKind::NadaContent;
  Signature signature{};

  Bytes signing_bytes() const;  // canonical encoding of everything but the signature
  Bytes encode() const;
  static Result<MetaData> decode(ByteView data);
};

// Access rights to an app slice, keyed by ResourceId throughout. Installed
// only once carrying an ISP certification signature.
struct AppSlicePolicy {
  ResourceId owner;
  std::set<ResourceId> allowed_overlay_peers;
  std::set<ResourceId> allowed_slice_traffic;
  std::set<ResourceId> mib_read_grants;
  Signature certified_by_isp{};

  Bytes signing_bytes() const;
  Bytes encode() const;
  static Result<AppSlicePolicy> decode(ByteView data);
};

// Handle to a storage key held sealed in the Trusted Data Store; the key
// bytes themselves never leave the trust anchor API.
struct StoreKeyHandle {
  ResourceId rid;
};

struct AppSliceConfiguration {
  ResourceId resource_id;
  ResourceId store_key_handle;  // TDS slot the sealed key lives under
  AppSlicePolicy policy;
  std::string fingerprint;  // digest of the slice package

  Bytes encode() const;
  static Result<AppSliceConfiguration> decode(ByteView data);
};

enum class ConfigureAction : uint8_t { Activate = 0, Deactivate = 1, Restart = 2 };

struct ConfigureCommand {
  AppSlicePolicy policy;
  std::string slice_fingerprint;
  ConfigureAction action = ConfigureAction::Activate;

  Bytes encode() const;
  static Result<ConfigureCommand> decode(ByteView data);
};

// Hash-chained, signed log entry. prev_digest of the first entry in a chain
// is the all-zero sentinel.
struct LogEntry {
  uint64_t timestamp = 0;
  std::string kind;   // e.g. "user_command", "play", "measurement", "incident"
  Bytes payload;
  std::string signer;
  Digest prev_digest{};
  Signature signature{};

  Bytes signing_bytes() const;
  Bytes encode() const;
  static Result<LogEntry> decode(ByteView data);
  Digest chain_digest() const;  // digest over the full encoded entry
};

enum class UserCommand : uint8_t { Content = 0, Play = 1, Stop = 2 };

const char* user_command_name(UserCommand c);

struct UserRequest {
  UserCommand kind = UserCommand::Content;
  std::string content_id;

  Bytes encode() const;
  static Result<UserRequest> decode(ByteView data);
};

struct UserResponse {
  bool ok = false;
  std::string status;
  std::string content_handle;     // store reference when a download completed
  std::string provider_identity;  // always shown to the user
};

struct Measurement {
  std::string subject;  // ResourceId string or node id
  std::string metric;
  double value = 0.0;
  std::string unit;
  uint64_t at = 0;

  Bytes encode() const;
  static Result<Measurement> decode(ByteView data);
  auto operator<=>(const Measurement&) const = default;
};

std::string fingerprint_of(ByteView content);

}  // namespace nada

#endif  // NADA_CORE_TYPES_HPP
