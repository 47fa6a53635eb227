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

#include "uss/bits.hpp"

#include <bit>
#include <stdexcept>

namespace uss {

BitString BitString::from_bytes(std::span<const std::uint8_t> bytes, std::size_t size) {
  if (size > bytes.size() * 8) throw std::invalid_argument("BitString::from_bytes: size exceeds data");
  BitString out;
  out.bytes_.assign(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>((size + 7) / 8));
  out.size_ = size;
  if (size % 8 != 0) out.bytes_.back() &= static_cast<std::uint8_t>(0xFF00U >> (size % 8));
  return out;
}

BitString BitString::from_binary(std::string_view text) {
  BitString out;
  for (char c : text) {
    if (c == '0' || c == '1') {
      out.push_back(c == '1');
    } else if (c != '_' && c != ' ' && c != '\n' && c != '\t') {
      throw std::invalid_argument("BitString::from_binary: invalid character");
    }
  }
  return out;
}

void BitString::set(std::size_t i, bool v) {
  std::uint8_t mask = static_cast<std::uint8_t>(0x80U >> (i & 7));
  if (v) {
    bytes_[i >> 3] |= mask;
  } else {
    bytes_[i >> 3] &= static_cast<std::uint8_t>(~mask);
  }
}

void BitString::push_back(bool v) {
  if (size_ % 8 == 0) bytes_.push_back(0);
  ++size_;
  set(size_ - 1, v);
}

void BitString::append_uint(std::uint64_t value, unsigned width) {
  if (width > 64) throw std::invalid_argument("BitString::append_uint: width > 64");
  for (unsigned i = width; i-- > 0;) push_back((value >> i) & 1U);
}

void BitString::append(const BitString& other) {
  if (size_ % 8 == 0) {
    bytes_.insert(bytes_.end(), other.bytes_.begin(), other.bytes_.end());
    size_ += other.size_;
    return;
  }
  for (std::size_t i = 0; i < other.size_; ++i) push_back(other.get(i));
}

std::uint64_t BitString::read_uint(std::size_t pos, unsigned width) const {
  if (width > 64) throw std::invalid_argument("BitString::read_uint: width > 64");
  std::uint64_t v = 0;
  for (unsigned i = 0; i < width; ++i) {
    std::size_t p = pos + i;
    v = (v << 1) | (p < size_ ? static_cast<std::uint64_t>(get(p)) : 0U);
  }
  return v;
}

BitString BitString::slice(std::size_t pos, std::size_t len) const {
  if (pos + len > size_) throw std::out_of_range("BitString::slice");
  BitString out;
  if (len == 0) return out;
  if (pos % 8 == 0) {
    auto first = bytes_.begin() + static_cast<std::ptrdiff_t>(pos / 8);
    return from_bytes(std::span<const std::uint8_t>(&*first, (len + 7) / 8), len);
  }
  for (std::size_t i = 0; i < len; ++i) out.push_back(get(pos + i));
  return out;
}

void BitString::resize(std::size_t size) {
  bytes_.resize((size + 7) / 8, 0);
  size_ = size;
  if (size % 8 != 0) bytes_.back() &= static_cast<std::uint8_t>(0xFF00U >> (size % 8));
}

BitString BitString::operator^(const BitString& pad) const {
  if (pad.size_ != size_) throw std::invalid_argument("BitString xor: length mismatch");
  BitString out = *this;
  for (std::size_t i = 0; i < bytes_.size(); ++i) out.bytes_[i] ^= pad.bytes_[i];
  return out;
}

std::string BitString::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes_.size() * 2);
  for (std::uint8_t b : bytes_) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xF]);
  }
  return out;
}

std::string BitString::to_binary() const {
  std::string out;
  out.reserve(size_);
  for (std::size_t i = 0; i < size_; ++i) out.push_back(get(i) ? '1' : '0');
  return out;
}

unsigned ceil_log2(std::uint64_t n) {
  if (n <= 1) return 0;
  return static_cast<unsigned>(std::bit_width(n - 1));
}

}  // namespace uss
