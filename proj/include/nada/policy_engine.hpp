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

#ifndef NADA_POLICY_ENGINE_HPP
#define NADA_POLICY_ENGINE_HPP

#include <map>
#include <string>
#include <vector>

#include "nada/encoding.hpp"
#include "nada/error.hpp"

namespace nada::policy {

enum class Effect : uint8_t { Permit = 0, Deny = 1 };

// Flat attribute-equality rule. "*" matches any value as long as the
// attribute is present in the request context.
struct AccessRule {
  std::string id;
  std::map<std::string, std::string> match;
  Effect effect = Effect::Deny;
  std::vector<std::string> obligations;  // e.g. "audit-log"

  Bytes encode() const;
  static Result<AccessRule> decode(Decoder& d);
};

struct AccessPolicy {
  std::vector<AccessRule> rules;

  Bytes encode() const;
  static Result<AccessPolicy> decode(ByteView data);
};

struct RequestContext {
  std::map<std::string, std::string> attrs;
};

struct Decision {
  Effect effect = Effect::Deny;
  std::string rule_id;  // "default-deny" when no rule applied
  std::vector<std::string> obligations;
};

bool rule_matches(const AccessRule& rule, const RequestContext& ctx);

// First-applicable combining, default deny. Deterministic and total; the
// same engine backs the node-local PDP and the monitoring exporter.
Decision pdp_evaluate(const AccessPolicy& policy, const RequestContext& ctx);

}  // namespace nada::policy

#endif  // NADA_POLICY_ENGINE_HPP
