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

#ifndef NADA_IDS_HPP
#define NADA_IDS_HPP

#include <compare>
#include <set>
#include <string>
#include <vector>

#include "nada/encoding.hpp"
#include "nada/error.hpp"

namespace nada {

// Identifier syntax is not fixed anywhere upstream; non-empty ASCII strings.
bool valid_id_text(std::string_view s);

struct CustomerId {
  std::string value;
  auto operator<=>(const CustomerId&) const = default;
};

struct AppId {
  std::string value;
  auto operator<=>(const AppId&) const = default;
};

struct NodeManagementId {
  std::string value;
  auto operator<=>(const NodeManagementId&) const = default;
};

// Addressing tuple for every entity: either the management role
// (Node_Management_ID, nil) or an app slice (Customer_ID, APP_ID).
class ResourceId {
 public:
  enum class Kind : uint8_t { Management = 0x00, AppSlice = 0x01 };

  // Unset placeholder (empty management id); well-formed values only come
  // from the factories below.
  ResourceId() = default;

  static Result<ResourceId> management(std::string id);
  static Result<ResourceId> app_slice(std::string customer, std::string app);

  Kind kind() const { return kind_; }
  bool is_management() const { return kind_ == Kind::Management; }
  bool is_app_slice() const { return kind_ == Kind::AppSlice; }

  // Management variant: the management id; AppSlice variant: the customer id.
  const std::string& first() const { return first_; }
  // Management variant: empty (the nil slot); AppSlice variant: the app id.
  const std::string& second() const { return second_; }

  void encode(Encoder& e) const;
  static Result<ResourceId> decode(Decoder& d);

  // "mgmt:NM1" or "slice:C1/A1"; used for trace records and store keys.
  std::string to_string() const;
  static Result<ResourceId> parse(std::string_view text);

  auto operator<=>(const ResourceId&) const = default;

 private:
  ResourceId(Kind k, std::string a, std::string b)
      : kind_(k), first_(std::move(a)), second_(std::move(b)) {}

  Kind kind_ = Kind::Management;
  std::string first_;
  std::string second_;
};

enum class ResourceKind { Management, AppSlice };

// Factory per the contract: Management takes one id (second slot nil),
// AppSlice takes both, all components non-empty ASCII.
Result<ResourceId> make_resource_id(ResourceKind kind, std::string first,
                                    std::string second = {});

// Scenario-load check: customer ids and node-management ids must be disjoint.
Result<void> check_namespaces(const std::set<std::string>& customer_ids,
                              const std::set<std::string>& management_ids);

}  // namespace nada

#endif  // NADA_IDS_HPP
