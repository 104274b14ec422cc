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

#include "nada/ids.hpp"

#include <algorithm>

namespace nada {

bool valid_id_text(std::string_view s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return c >= 0x21 && c < 0x7f && c != '/';  // printable ASCII, '/' reserved
  });
}

Result<ResourceId> ResourceId::management(std::string id) {
  if (!valid_id_text(id)) return make_error(Errc::EmptyId, "management id");
  return ResourceId(Kind::Management, std::move(id), {});
}

Result<ResourceId> ResourceId::app_slice(std::string customer, std::string app) {
  if (!valid_id_text(customer)) return make_error(Errc::EmptyId, "customer id");
  if (!valid_id_text(app)) return make_error(Errc::EmptyId, "app id");
  return ResourceId(Kind::AppSlice, std::move(customer), std::move(app));
}

void ResourceId::encode(Encoder& e) const {
  e.tag(static_cast<uint8_t>(kind_));
  e.str(first_);
  e.str(second_);
}

Result<ResourceId> ResourceId::decode(Decoder& d) {
  auto t = d.tag();
  if (!t) return t.error();
  auto a = d.str();
  if (!a) return a.error();
  auto b = d.str();
  if (!b) return b.error();
  switch (t.value()) {
    case 0x00: return management(a.take());
    case 0x01: return app_slice(a.take(), b.take());
    default: return make_error(Errc::IntegrityFailure, "resource id tag");
  }
}

std::string ResourceId::to_string() const {
  if (is_management()) return "mgmt:" + first_;
  return "slice:" + first_ + "/" + second_;
}

Result<ResourceId> ResourceId::parse(std::string_view t) {
  if (t.rfind("mgmt:", 0) == 0) return management(std::string(t.substr(5)));
  if (t.rfind("slice:", 0) == 0) {
    auto rest = t.substr(6);
    auto slash = rest.find('/');
    if (slash == std::string_view::npos) {
      return make_error(Errc::ConfigInvalid, "slice id needs customer/app");
    }
    return app_slice(std::string(rest.substr(0, slash)),
                     std::string(rest.substr(slash + 1)));
  }
  return make_error(Errc::ConfigInvalid, "unrecognized resource id: " + std::string(t));
}

Result<ResourceId> make_resource_id(ResourceKind kind, std::string first,
                                    std::string second) {
  if (kind == ResourceKind::Management) {
    if (!second.empty()) {
      return make_error(Errc::ConfigInvalid, "management id carries nil second slot");
    }
    return ResourceId::management(std::move(first));
  }
  return ResourceId::app_slice(std::move(first), std::move(second));
}

Result<void> check_namespaces(const std::set<std::string>& customer_ids,
                              const std::set<std::string>& management_ids) {
  for (const auto& c : customer_ids) {
    if (management_ids.count(c) != 0) {
      return make_error(Errc::NamespaceCollision,
                        "customer id collides with node management id: " + c);
    }
  }
  return {};
}

}  // namespace nada
