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

#ifndef NADA_ENCODING_HPP
#define NADA_ENCODING_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "nada/bytes.hpp"
#include "nada/error.hpp"

namespace nada {

// Canonical encoding: fields in declaration order, each as a 4-byte
// big-endian length prefix followed by the raw bytes; enum/variant tags as
// one raw byte. Deterministic and injective for a fixed schema, and trivial
// to port, which is all signatures and fingerprints need.
class Encoder {
 public:
  void tag(uint8_t t) { out_.push_back(t); }

  void field(ByteView data) {
    put_len(static_cast<uint32_t>(data.size()));
    append(out_, data);
  }
  void str(std::string_view s) { field(to_bytes(s)); }
  void u64(uint64_t v) {
    uint8_t buf[8];
    for (int i = 7; i >= 0; --i) {
      buf[7 - i] = static_cast<uint8_t>(v >> (8 * i));
    }
    field(ByteView(buf, 8));
  }
  void count(uint32_t n) { put_len(n); }

  const Bytes& bytes() const& { return out_; }
  Bytes take() && { return std::move(out_); }

 private:
  void put_len(uint32_t n) {
    out_.push_back(static_cast<uint8_t>(n >> 24));
    out_.push_back(static_cast<uint8_t>(n >> 16));
    out_.push_back(static_cast<uint8_t>(n >> 8));
    out_.push_back(static_cast<uint8_t>(n));
  }

  Bytes out_;
};

class Decoder {
 public:
  explicit Decoder(ByteView data) : data_(data) {}

  Result<uint8_t> tag() {
    if (pos_ >= data_.size()) return decode_error("tag past end");
    return data_[pos_++];
  }
  Result<Bytes> field() {
    auto n = len();
    if (!n) return n.error();
    if (pos_ + n.value() > data_.size()) return decode_error("field past end");
    Bytes out(data_.begin() + static_cast<long>(pos_),
              data_.begin() + static_cast<long>(pos_ + n.value()));
    pos_ += n.value();
    return out;
  }
  Result<std::string> str() {
    auto f = field();
    if (!f) return f.error();
    return std::string(f.value().begin(), f.value().end());
  }
  Result<uint64_t> u64() {
    auto f = field();
    if (!f) return f.error();
    if (f.value().size() != 8) return decode_error("u64 width");
    uint64_t v = 0;
    for (uint8_t b : f.value()) v = v << 8 | b;
    return v;
  }
  Result<uint32_t> count() { return len(); }

  bool done() const { return pos_ == data_.size(); }
  Result<void> expect_done() const {
    if (!done()) return Error(decode_error("trailing bytes"));
    return {};
  }

 private:
  Result<uint32_t> len() {
    if (pos_ + 4 > data_.size()) return decode_error("length past end");
    uint32_t n = 0;
    for (int i = 0; i < 4; ++i) n = n << 8 | data_[pos_++];
    return n;
  }
  static Error decode_error(std::string what) {
    return make_error(Errc::IntegrityFailure, "decode: " + std::move(what));
  }

  ByteView data_;
  size_t pos_ = 0;
};

}  // namespace nada

#endif  // NADA_ENCODING_HPP
