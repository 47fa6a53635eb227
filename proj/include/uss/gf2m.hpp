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

#include <array>
#include <cstdint>
#include <span>
#include <vector>

// Arithmetic in binary extension fields GF(2^m), 2 <= m <= 64.
//
// An element is stored as an unsigned integer whose bit i is the coefficient
// of x^i. Addition is XOR; multiplication is the carry-less product reduced
// modulo the field's irreducible polynomial.
namespace uss::gf2m {

inline constexpr unsigned kMinDegree = 2;
inline constexpr unsigned kMaxDegree = 64;

struct FieldSpec {
  unsigned m = 0;
  // Reduction polynomial without its leading x^m term.
  std::uint64_t reduction = 0;

  std::uint64_t mask() const { return m >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << m) - 1; }
  friend bool operator==(const FieldSpec&, const FieldSpec&) = default;
};

// The shipped low-weight irreducible polynomial for GF(2^m) (a trinomial when
// one exists, otherwise the lexicographically smallest pentanomial).
// Throws ParameterError outside [kMinDegree, kMaxDegree].
const FieldSpec& standard_field(unsigned m);
std::span<const FieldSpec> standard_fields();

class FieldElement {
 public:
  // Throws ParameterError if value >= 2^m.
  FieldElement(const FieldSpec& field, std::uint64_t value);

  static FieldElement zero(const FieldSpec& field) { return {field, 0}; }
  static FieldElement one(const FieldSpec& field) { return {field, 1}; }

  std::uint64_t value() const { return value_; }
  const FieldSpec& field() const { return field_; }

  friend bool operator==(const FieldElement&, const FieldElement&) = default;

 private:
  FieldSpec field_;
  std::uint64_t value_;
};

// Field operations. All throw FieldMismatch when operands live in different fields.
FieldElement add(const FieldElement& x, const FieldElement& y);
FieldElement mul(const FieldElement& x, const FieldElement& y);
// sum coeffs[i] * point^i by Horner's rule. Throws ParameterError on empty coeffs.
FieldElement poly_eval(std::span<const FieldElement> coeffs, const FieldElement& point);
// Low `target_m` bits of x, as an element of standard_field(target_m).
// Throws ParameterError if target_m > x.field().m or target_m < kMinDegree.
FieldElement project(const FieldElement& x, unsigned target_m);

// Unchecked integer-level kernels used on hot paths. Inputs must be < 2^m.
std::uint64_t mul_raw(const FieldSpec& field, std::uint64_t x, std::uint64_t y);
std::uint64_t poly_eval_raw(const FieldSpec& field, std::span<const std::uint64_t> coeffs,
                            std::uint64_t point);

// y -> c*y for a fixed c, as eight byte-indexed lookup tables.
class ConstantMultiplier {
 public:
  ConstantMultiplier(const FieldSpec& field, std::uint64_t c);
  std::uint64_t operator()(std::uint64_t y) const;

 private:
  std::vector<std::array<std::uint64_t, 256>> tables_;
};

}  // namespace uss::gf2m
