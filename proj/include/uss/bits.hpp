// Copyright 2026 The QKD-USS Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace uss {

// A bitstring with big-bit-endian byte packing: bit 0 is the most significant
// bit of byte 0, and the final partial byte is zero-padded. Multi-bit integers
// are written most-significant bit first, so the last bit written is the
// coefficient of x^0 when the integer is read back as a GF(2) polynomial.
class BitString {
 public:
  BitString() = default;
  explicit BitString(std::size_t size) : bytes_((size + 7) / 8, 0), size_(size) {}

  // Interprets `bytes` as a packed bitstring of `size` bits (size <= 8*bytes).
  static BitString from_bytes(std::span<const std::uint8_t> bytes, std::size_t size);
  static BitString from_bytes(std::span<const std::uint8_t> bytes) {
    return from_bytes(bytes, bytes.size() * 8);
  }
  // "0110..." -> bits; whitespace and '_' are skipped.
  static BitString from_binary(std::string_view text);

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  bool get(std::size_t i) const { return (bytes_[i >> 3] >> (7 - (i & 7))) & 1U; }
  void set(std::size_t i, bool v);

  void push_back(bool v);
  // Appends the low `width` bits of `value`, MSB first.
  void append_uint(std::uint64_t value, unsigned width);
  void append(const BitString& other);
  // Reads `width` bits starting at `pos`, MSB first. Bits past size() read as 0.
  std::uint64_t read_uint(std::size_t pos, unsigned width) const;

  BitString slice(std::size_t pos, std::size_t len) const;
  void resize(std::size_t size);

  // XOR with `pad` (same length).
  BitString operator^(const BitString& pad) const;

  std::span<const std::uint8_t> bytes() const { return bytes_; }
  std::string to_hex() const;
  std::string to_binary() const;

  friend bool operator==(const BitString&, const BitString&) = default;
  friend auto operator<=>(const BitString& a, const BitString& b) {
    if (auto c = a.size_ <=> b.size_; c != 0) return c;
    return a.bytes_ <=> b.bytes_;
  }

 private:
  std::vector<std::uint8_t> bytes_;
  std::size_t size_ = 0;
};

// Number of bits needed to encode any value in [0, n): ceil(log2(n)), 0 for n <= 1.
unsigned ceil_log2(std::uint64_t n);

}  // namespace uss
