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

#include "nada/policy_engine.hpp"

namespace nada::policy {

Bytes AccessRule::encode() const {
  Encoder e;
  e.str(id);
  e.count(static_cast<uint32_t>(match.size()));
  for (const auto& [k, v] : match) {
    e.str(k);
    e.str(v);
  }
  e.tag(static_cast<uint8_t>(effect));
  e.count(static_cast<uint32_t>(obligations.size()));
  for (const auto& o : obligations) e.str(o);
  return std::move(e).take();
}

Result<AccessRule> AccessRule::decode(Decoder& d) {
  AccessRule r;
  auto id = d.str();
  if (!id) return id.error();
  r.id = id.take();
  auto n = d.count();
  if (!n) return n.error();
  for (uint32_t i = 0; i < n.value(); ++i) {
    auto k = d.str();
    if (!k) return k.error();
    auto v = d.str();
    if (!v) return v.error();
    r.match.emplace(k.take(), v.take());
  }
  auto eff = d.tag();
  if (!eff) return eff.error();
  if (eff.value() > 1) return make_error(Errc::IntegrityFailure, "effect tag");
  r.effect = static_cast<Effect>(eff.value());
  auto no = d.count();
  if (!no) return no.error();
  for (uint32_t i = 0; i < no.value(); ++i) {
    auto o = d.str();
    if (!o) return o.error();
    r.obligations.push_back(o.take());
  }
  return r;
}

Bytes AccessPolicy::encode() const {
  Encoder e;
  e.count(static_cast<uint32_t>(rules.size()));
  for (const auto& r : rules) e.field(r.encode());
  return std::move(e).take();
}

Result<AccessPolicy> AccessPolicy::decode(ByteView data) {
  Decoder d(data);
  auto n = d.count();
  if (!n) return n.error();
  AccessPolicy p;
  for (uint32_t i = 0; i < n.value(); ++i) {
    auto f = d.field();
    if (!f) return f.error();
    Decoder rd(f.value());
    auto r = AccessRule::decode(rd);
    if (!r) return r.error();
    p.rules.push_back(r.take());
  }
  return p;
}

bool rule_matches(const AccessRule& rule, const RequestContext& ctx) {
  for (const auto& [attr, want] : rule.match) {
    auto it = ctx.attrs.find(attr);
    if (it == ctx.attrs.end()) return false;
    if (want != "*" && it->second != want) return false;
  }
  return true;
}

Decision pdp_evaluate(const AccessPolicy& policy, const RequestContext& ctx) {
  for (const auto& rule : policy.rules) {
    if (rule_matches(rule, ctx)) {
      return {rule.effect, rule.id, rule.obligations};
    }
  }
  return {Effect::Deny, "default-deny", {}};
}

}  // namespace nada::policy
