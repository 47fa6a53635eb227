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

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "uss/bits.hpp"
#include "uss/gf2m.hpp"
#include "uss/rng.hpp"

// The 2^(1-b)-almost strongly 2-universal hash family used for every
// authentication tag of a signature.
//
// A message of at most a bits is zero-padded to (2^s + 1) chunks of b+s bits;
// chunk 0 (the first b+s bits) is the constant coefficient of a polynomial
// over GF(2^(b+s)). The polynomial is evaluated at a secret point (the
// Reed-Solomon based almost-universal stage), the result is multiplied by a
// secret field element, truncated to its low b bits and offset by a secret
// b-bit value (the strongly-universal stage).
namespace uss::as2u {

struct FamilyParams {
  std::uint64_t a = 0;  // maximal message length in bits
  unsigned b = 0;       // tag length in bits
  unsigned s = 0;       // Reed-Solomon parameter
  unsigned y = 0;       // key length in bits, 3b + 2s

  unsigned field_degree() const { return b + s; }
  std::uint64_t chunk_count() const { return (std::uint64_t{1} << s) + 1; }
  std::uint64_t padded_length() const { return chunk_count() * field_degree(); }

  friend bool operator==(const FamilyParams&, const FamilyParams&) = default;
};

// Smallest s >= 0 with a <= (2^s + 1)(b + s). Throws ParameterError if a < 1,
// b < 2, or the resulting field would need more than 64 bits.
unsigned min_s(std::uint64_t a, unsigned b);
FamilyParams make_params(std::uint64_t a, unsigned b);

// One key of the family. Bit layout on the wire (y bits, MSB first):
//   point (b+s) | multiplier (b+s) | offset (b)
struct AuthKey {
  std::uint64_t point = 0;       // evaluation point of the message polynomial
  std::uint64_t multiplier = 0;  // strongly-universal multiplier
  std::uint64_t offset = 0;      // strongly-universal offset, b bits

  friend bool operator==(const AuthKey&, const AuthKey&) = default;
};

using Tag = std::uint64_t;

AuthKey parse_key(const FamilyParams& params, const BitString& bits);
BitString key_bits(const FamilyParams& params, const AuthKey& key);
void append_key(BitString& out, const FamilyParams& params, const AuthKey& key);
AuthKey read_key(const BitString& in, std::size_t pos, const FamilyParams& params);
AuthKey random_key(const FamilyParams& params, CounterRng& rng);
// Throws LengthError if any component does not fit its width.
void check_key(const FamilyParams& params, const AuthKey& key);

// Message chunks as raw GF(2^(b+s)) values. Throws LengthError if |m| > a.
std::vector<std::uint64_t> encode_message_raw(const FamilyParams& params, const BitString& m);
std::vector<gf2m::FieldElement> encode_message(const FamilyParams& params, const BitString& m);

class Family {
 public:
  explicit Family(const FamilyParams& params);

  const FamilyParams& params() const { return params_; }
  const gf2m::FieldSpec& field() const { return field_; }

  // Message in polynomial form; reuse it when one message is hashed under many keys.
  struct Encoded {
    std::vector<std::uint64_t> coeffs;
  };
  Encoded encode(const BitString& m) const { return {encode_message_raw(params_, m)}; }

  Tag eval(const AuthKey& key, const Encoded& m) const;
  Tag eval(const AuthKey& key, const BitString& m) const { return eval(key, encode(m)); }

 private:
  FamilyParams params_;
  gf2m::FieldSpec field_;
};

inline Tag eval(const FamilyParams& params, const AuthKey& key, const BitString& m) {
  return Family(params).eval(key, m);
}

// 64-bit length followed by m. Zero padding makes m and m||0 hash alike, so
// variable-length messages are framed this way before signing; the prefix
// counts toward a.
BitString with_length_prefix(const BitString& m);

// Outcome of enumerating the whole key space for a set of message pairs.
struct ExhaustiveReport {
  std::uint64_t keys = 0;    // 2^y
  std::uint64_t pairs = 0;   // message pairs examined
  bool uniform = true;       // every tag hit by exactly 2^(y-b) keys, for every message
  double worst_ratio = 0.0;  // max #{f(m1)=t1, f(m2)=t2} / #{f(m2)=t2}
  double ratio_limit = 0.0;  // 2^(1-b)
  bool holds() const { return uniform && worst_ratio <= ratio_limit; }
};

// Checks both defining conditions of the family by brute force. Throws
// ParameterError when y > 24 (the enumeration would not finish) or a pair
// repeats a message.
ExhaustiveReport exhaustive_check(const FamilyParams& params,
                                  std::span<const std::pair<BitString, BitString>> pairs);

}  // namespace uss::as2u
