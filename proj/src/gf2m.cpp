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

#include "uss/gf2m.hpp"

#include <bit>
#include <string>

#include "uss/error.hpp"

namespace uss::gf2m {
namespace {

// Exponents below m of each reduction polynomial, m = 2..64.
constexpr std::array<std::uint64_t, 63> kReduction = {
    0x3,      0x3,  0x3,  0x5,  0x3,  0x3,  0x1b, 0x3,   0x9,  0x5,  0x9,        0x1b, 0x21,
    0x3,      0x2b, 0x9,  0x9,  0x27, 0x9,  0x5,  0x3,   0x21, 0x1b, 0x9,        0x1b, 0x27,
    0x3,      0x5,  0x3,  0x9,  0x8d, 0x401, 0x81, 0x5,  0x201, 0x53, 0x63,      0x11, 0x39,
    0x9,      0x81, 0x59, 0x21, 0x1b, 0x3,  0x21, 0x2d,  0x201, 0x1d, 0x4b,      0x9,  0x47,
    0x201,    0x81, 0x95, 0x11, 0x80001, 0x95, 0x3, 0x27, 0x20000001, 0x3,       0x1b};

constexpr std::array<FieldSpec, 63> make_table() {
  std::array<FieldSpec, 63> t{};
  for (unsigned i = 0; i < t.size(); ++i) t[i] = FieldSpec{i + kMinDegree, kReduction[i]};
  return t;
}

constexpr std::array<FieldSpec, 63> kFields = make_table();

void check_same(const FieldSpec& a, const FieldSpec& b) {
  if (!(a == b)) {
    throw FieldMismatch("operands belong to GF(2^" + std::to_string(a.m) + ") and GF(2^" +
                        std::to_string(b.m) + ")");
  }
}

// Multiply by x modulo the reduction polynomial.
inline std::uint64_t times_x(const FieldSpec& f, std::uint64_t a) {
  std::uint64_t carry = (a >> (f.m - 1)) & 1U;
  a = (a << 1) & f.mask();
  return carry ? a ^ f.reduction : a;
}

}  // namespace

const FieldSpec& standard_field(unsigned m) {
  if (m < kMinDegree || m > kMaxDegree) {
    throw ParameterError("GF(2^m) degree out of range: m=" + std::to_string(m));
  }
  return kFields[m - kMinDegree];
}

std::span<const FieldSpec> standard_fields() { return kFields; }

FieldElement::FieldElement(const FieldSpec& field, std::uint64_t value) : field_(field), value_(value) {
  if (field.m < kMinDegree || field.m > kMaxDegree) throw ParameterError("invalid field degree");
  if ((value & ~field.mask()) != 0) {
    throw ParameterError("value does not fit in GF(2^" + std::to_string(field.m) + ")");
  }
}

FieldElement add(const FieldElement& x, const FieldElement& y) {
  check_same(x.field(), y.field());
  return {x.field(), x.value() ^ y.value()};
}

FieldElement mul(const FieldElement& x, const FieldElement& y) {
  check_same(x.field(), y.field());
  return {x.field(), mul_raw(x.field(), x.value(), y.value())};
}

FieldElement poly_eval(std::span<const FieldElement> coeffs, const FieldElement& point) {
  if (coeffs.empty()) throw ParameterError("poly_eval: empty coefficient list");
  std::vector<std::uint64_t> raw;
  raw.reserve(coeffs.size());
  for (const auto& c : coeffs) {
    check_same(c.field(), point.field());
    raw.push_back(c.value());
  }
  return {point.field(), poly_eval_raw(point.field(), raw, point.value())};
}

FieldElement project(const FieldElement& x, unsigned target_m) {
  if (target_m > x.field().m) {
    throw ParameterError("project: target degree " + std::to_string(target_m) + " exceeds source degree " +
                         std::to_string(x.field().m));
  }
  const FieldSpec& target = standard_field(target_m);
  return {target, x.value() & target.mask()};
}

std::uint64_t mul_raw(const FieldSpec& field, std::uint64_t x, std::uint64_t y) {
  std::uint64_t result = 0;
  while (y != 0) {
    if (y & 1U) result ^= x;
    y >>= 1;
    x = times_x(field, x);
  }
  return result;
}

std::uint64_t poly_eval_raw(const FieldSpec& field, std::span<const std::uint64_t> coeffs,
                            std::uint64_t point) {
  if (coeffs.empty()) return 0;
  std::uint64_t acc = coeffs.back();
  if (coeffs.size() <= 64) {
    for (std::size_t i = coeffs.size() - 1; i-- > 0;) acc = mul_raw(field, acc, point) ^ coeffs[i];
    return acc;
  }
  ConstantMultiplier by_point(field, point);
  for (std::size_t i = coeffs.size() - 1; i-- > 0;) acc = by_point(acc) ^ coeffs[i];
  return acc;
}

ConstantMultiplier::ConstantMultiplier(const FieldSpec& field, std::uint64_t c)
    : tables_((field.m + 7) / 8) {
  // basis[i] = c * x^i
  std::array<std::uint64_t, 64> basis{};
  std::uint64_t v = c;
  for (unsigned i = 0; i < field.m; ++i) {
    basis[i] = v;
    v = times_x(field, v);
  }
  for (std::size_t j = 0; j < tables_.size(); ++j) {
    auto& table = tables_[j];
    table[0] = 0;
    for (unsigned byte = 1; byte < 256; ++byte) {
      unsigned low = static_cast<unsigned>(std::countr_zero(byte));
      unsigned bit = static_cast<unsigned>(j * 8 + low);
      std::uint64_t term = bit < field.m ? basis[bit] : 0;
      table[byte] = table[byte & (byte - 1)] ^ term;
    }
  }
}

std::uint64_t ConstantMultiplier::operator()(std::uint64_t y) const {
  std::uint64_t out = 0;
  for (std::size_t j = 0; j < tables_.size(); ++j) out ^= tables_[j][(y >> (8 * j)) & 0xFF];
  return out;
}

}  // namespace uss::gf2m
