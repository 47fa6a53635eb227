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

#include "uss/as2u.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "uss/error.hpp"

namespace uss::as2u {

unsigned min_s(std::uint64_t a, unsigned b) {
  if (a < 1) throw ParameterError("message length a must be >= 1");
  if (b < 2) throw ParameterError("tag length b must be >= 2");
  for (unsigned s = 0; b + s <= gf2m::kMaxDegree; ++s) {
    const std::uint64_t chunks = (std::uint64_t{1} << s) + 1;
    // A capacity past 2^64 covers every representable a.
    if (chunks > std::numeric_limits<std::uint64_t>::max() / (b + s)) return s;
    if (a <= chunks * (b + s)) return s;
  }
  throw ParameterError("message length " + std::to_string(a) + " needs a field wider than 64 bits for b=" +
                       std::to_string(b));
}

FamilyParams make_params(std::uint64_t a, unsigned b) {
  unsigned s = min_s(a, b);
  return FamilyParams{a, b, s, 3 * b + 2 * s};
}

void check_key(const FamilyParams& params, const AuthKey& key) {
  const std::uint64_t wide = gf2m::standard_field(params.field_degree()).mask();
  const std::uint64_t narrow = params.b >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << params.b) - 1;
  if ((key.point & ~wide) || (key.multiplier & ~wide) || (key.offset & ~narrow)) {
    throw LengthError("authentication key component exceeds its width");
  }
}

void append_key(BitString& out, const FamilyParams& params, const AuthKey& key) {
  out.append_uint(key.point, params.field_degree());
  out.append_uint(key.multiplier, params.field_degree());
  out.append_uint(key.offset, params.b);
}

AuthKey read_key(const BitString& in, std::size_t pos, const FamilyParams& params) {
  const unsigned w = params.field_degree();
  return AuthKey{in.read_uint(pos, w), in.read_uint(pos + w, w), in.read_uint(pos + 2 * w, params.b)};
}

AuthKey parse_key(const FamilyParams& params, const BitString& bits) {
  if (bits.size() != params.y) {
    throw LengthError("key must be " + std::to_string(params.y) + " bits, got " + std::to_string(bits.size()));
  }
  return read_key(bits, 0, params);
}

BitString key_bits(const FamilyParams& params, const AuthKey& key) {
  check_key(params, key);
  BitString out;
  append_key(out, params, key);
  return out;
}

AuthKey random_key(const FamilyParams& params, CounterRng& rng) {
  AuthKey key;
  key.point = rng.bits(params.field_degree());
  key.multiplier = rng.bits(params.field_degree());
  key.offset = rng.bits(params.b);
  return key;
}

std::vector<std::uint64_t> encode_message_raw(const FamilyParams& params, const BitString& m) {
  if (m.size() > params.a) {
    throw LengthError("message of " + std::to_string(m.size()) + " bits exceeds a=" + std::to_string(params.a));
  }
  const unsigned w = params.field_degree();
  std::vector<std::uint64_t> coeffs(params.chunk_count(), 0);
  // Chunks past the end of m are all-zero padding; read_uint pads partial ones.
  const std::size_t used = (m.size() + w - 1) / w;
  for (std::size_t i = 0; i < used; ++i) coeffs[i] = m.read_uint(i * w, w);
  return coeffs;
}

std::vector<gf2m::FieldElement> encode_message(const FamilyParams& params, const BitString& m) {
  const auto& field = gf2m::standard_field(params.field_degree());
  std::vector<gf2m::FieldElement> out;
  for (std::uint64_t c : encode_message_raw(params, m)) out.emplace_back(field, c);
  return out;
}

Family::Family(const FamilyParams& params)
    : params_(params), field_(gf2m::standard_field(params.field_degree())) {
  if (params.y != 3 * params.b + 2 * params.s) throw ParameterError("key length must equal 3b+2s");
}

Tag Family::eval(const AuthKey& key, const Encoded& m) const {
  check_key(params_, key);
  std::uint64_t h = gf2m::poly_eval_raw(field_, m.coeffs, key.point);
  std::uint64_t product = gf2m::mul_raw(field_, key.multiplier, h);
  const std::uint64_t narrow = params_.b >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << params_.b) - 1;
  return (product & narrow) ^ key.offset;
}

BitString with_length_prefix(const BitString& m) {
  BitString out;
  out.append_uint(m.size(), 64);
  out.append(m);
  return out;
}

ExhaustiveReport exhaustive_check(const FamilyParams& params,
                                  std::span<const std::pair<BitString, BitString>> pairs) {
  if (params.y > 24) throw ParameterError("exhaustive check limited to y <= 24");
  const Family family(params);
  const unsigned w = params.field_degree();
  const std::uint64_t field_size = std::uint64_t{1} << w;
  const std::uint64_t tags = std::uint64_t{1} << params.b;
  const auto& field = family.field();

  ExhaustiveReport report;
  report.keys = std::uint64_t{1} << params.y;
  report.ratio_limit = std::ldexp(1.0, 1 - static_cast<int>(params.b));
  const std::uint64_t expected = report.keys / tags;
  std::vector<std::uint64_t> joint(tags * tags);
  for (const auto& [m1, m2] : pairs) {
    if (m1 == m2) throw ParameterError("exhaustive check needs distinct messages");
    const auto e1 = family.encode(m1);
    const auto e2 = family.encode(m2);
    std::fill(joint.begin(), joint.end(), 0);
    // point | multiplier | offset, enumerated in that nesting order.
    for (std::uint64_t point = 0; point < field_size; ++point) {
      const std::uint64_t h1 = gf2m::poly_eval_raw(field, e1.coeffs, point);
      const std::uint64_t h2 = gf2m::poly_eval_raw(field, e2.coeffs, point);
      for (std::uint64_t mult = 0; mult < field_size; ++mult) {
        const std::uint64_t p1 = gf2m::mul_raw(field, mult, h1) & (tags - 1);
        const std::uint64_t p2 = gf2m::mul_raw(field, mult, h2) & (tags - 1);
        for (std::uint64_t off = 0; off < tags; ++off) ++joint[(p1 ^ off) * tags + (p2 ^ off)];
      }
    }
    for (std::uint64_t t = 0; t < tags; ++t) {
      std::uint64_t row = 0;
      std::uint64_t col = 0;
      for (std::uint64_t u = 0; u < tags; ++u) {
        row += joint[t * tags + u];
        col += joint[u * tags + t];
      }
      if (row != expected || col != expected) report.uniform = false;
      if (col == 0) continue;
      for (std::uint64_t t1 = 0; t1 < tags; ++t1) {
        report.worst_ratio = std::max(report.worst_ratio, double(joint[t1 * tags + t]) / double(col));
      }
    }
    ++report.pairs;
  }
  return report;
}

}  // namespace uss::as2u
