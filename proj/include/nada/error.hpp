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

#ifndef NADA_ERROR_HPP
#define NADA_ERROR_HPP

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>

namespace nada {

enum class Errc {
  // identifiers / config
  EmptyId,
  NamespaceCollision,
  ConfigInvalid,
  // trust anchor
  IndexOutOfRange,
  StateMismatch,
  IntegrityFailure,
  DuplicateKey,
  NotFound,
  ClockUnsynchronized,
  // overlay / sessions
  AttestationFailure,
  CertificateFailure,
  Freshness,
  PolicyDenied,
  UnknownTarget,
  TicketExpired,
  ReplayDetected,
  SealMismatch,
  UnknownDomain,
  FingerprintMismatch,
  NoLocationReachable,
  BadSignature,
  DecryptFailure,
  UnexpectedMessage,
  // node
  UncertifiedPolicy,
  UnknownSlice,
  StoreKeyExists,
  SliceInactive,
  UnknownContent,
  NoGrant,
  UntrustedSlice,
  // management
  UnknownNode,
  NoHolder,
  AuthenticationFailure,
  RejectedPolicy,
  AccessDenied,
  // network
  Dropped,
  ManagementUnreachable,
  // stride
  ParseError,
  SchemaError,
  UnknownReference,
  CyclicDependency,
};

const char* errc_name(Errc c);

struct Error {
  Errc code;
  std::string detail;
  // Id of the mitigation whose check rejected (e.g. "M5"); used by the
  // adversary bookkeeping to attribute Blocked verdicts.
  std::string mitigation;

  std::string to_string() const {
    std::string s = errc_name(code);
    if (!detail.empty()) s += ": " + detail;
    return s;
  }
};

inline Error make_error(Errc code, std::string detail = {},
                        std::string mitigation = {}) {
  return Error{code, std::move(detail), std::move(mitigation)};
}

// Minimal expected-style result. Deliberately small: the codebase only
// needs value-or-error with an accessor that throws on misuse.
template <typename T>
class Result {
 public:
  Result(T value) : v_(std::move(value)) {}            // NOLINT(implicit)
  Result(Error err) : v_(std::move(err)) {}            // NOLINT(implicit)

  bool ok() const { return std::holds_alternative<T>(v_); }
  explicit operator bool() const { return ok(); }

  const T& value() const& {
    if (!ok()) throw std::logic_error("Result::value on error: " + error().to_string());
    return std::get<T>(v_);
  }
  T& value() & {
    if (!ok()) throw std::logic_error("Result::value on error: " + error().to_string());
    return std::get<T>(v_);
  }
  // Moves the value out; the Result is left in a consumed state.
  T take() {
    if (!ok()) throw std::logic_error("Result::take on error: " + error().to_string());
    return std::get<T>(std::move(v_));
  }
  const Error& error() const {
    if (ok()) throw std::logic_error("Result::error on value");
    return std::get<Error>(v_);
  }

 private:
  std::variant<T, Error> v_;
};

template <>
class Result<void> {
 public:
  Result() = default;
  Result(Error err) : err_(std::move(err)) {}          // NOLINT(implicit)

  bool ok() const { return !err_.has_value(); }
  explicit operator bool() const { return ok(); }
  const Error& error() const {
    if (ok()) throw std::logic_error("Result::error on value");
    return *err_;
  }

 private:
  std::optional<Error> err_;
};

inline Result<void> ok_result() { return Result<void>{}; }

}  // namespace nada

#endif  // NADA_ERROR_HPP
