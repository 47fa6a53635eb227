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
#include <optional>
#include <string>
#include <vector>

// Closed-form security bounds, key-consumption model and the parameter
// optimizer that trades the forgery bound against the non-transferability
// bound. All probabilities are clipped to [0, 1].
namespace uss::bounds {

struct SchemeConfig {
  unsigned N = 4;      // internal recipients
  unsigned M = 0;      // external recipients
  unsigned omega = 1;  // tolerated dishonest internal recipients
  unsigned l_max = 1;  // maximal verification level
  std::uint64_t a = 0; // message length in bits
  double eps_tot = 1e-10;
  std::uint64_t k = 1;  // keys per block
  unsigned b = 2;       // tag length
  double s0 = 0.0;      // tolerable incorrect-tag fraction at level 0
};

// Which gap between consecutive thresholds enters the non-transferability
// exponent: s0/l_max (theorem statement, default) or s0/(2 l_max) (the
// half-gap that the Hoeffding argument actually produces).
enum class GapConvention { kStatement, kHalfGap };

// Largest omega with omega < N / (2 + l_max); 0 means no tolerance.
unsigned acceptability_max_omega(unsigned N, unsigned l_max);
bool acceptability_holds(unsigned N, unsigned l_max, unsigned omega);

double binary_entropy(double p);

// J(N, M, omega) = N^2 [omega + M (omega + M)]
double forgery_prefactor(unsigned N, unsigned M, unsigned omega);
// 2 N^2 (N - 1)
double nontransfer_prefactor(unsigned N);

// Entropy-based exponent (natural-log units); nullopt when s0 >= 1/2 or it is not positive.
std::optional<double> forgery_exponent_entropy(double s0, unsigned b);
double forgery_exponent_hoeffding(double s0, unsigned b);
// max of the two when the entropy form applies, else the Hoeffding form.
double forgery_exponent(double s0, unsigned b);
double nontransfer_exponent(double s0, unsigned l_max, GapConvention gap = GapConvention::kStatement);

// Throws ParameterError unless 0 < s0 < 1 - 2^(1-b).
double forgery_bound(const SchemeConfig& cfg);
double nontransfer_bound(const SchemeConfig& cfg, GapConvention gap = GapConvention::kStatement);
double repudiation_bound(const SchemeConfig& cfg, GapConvention gap = GapConvention::kStatement);
double false_blocking_bound(const SchemeConfig& cfg, GapConvention gap = GapConvention::kStatement);

struct KeyConsumption {
  unsigned y = 0;
  std::uint64_t L_sr = 0;     // per signer-recipient link
  std::uint64_t L_rr = 0;     // per recipient-recipient link, both directions
  std::uint64_t L_tot = 0;    // whole internal subnetwork
  std::uint64_t sig_len = 0;  // signature length
};

KeyConsumption key_consumption(unsigned N, std::uint64_t k, unsigned y, unsigned b);
// Derives y from (a, b); errors propagate from as2u::make_params.
KeyConsumption key_consumption(const SchemeConfig& cfg);

struct LinkModel {
  double rate0 = 0.0;  // secret-key rate at zero distance, bits/s
  double gamma = 0.0;  // loss coefficient, 1/km
  // (N+1) x (N+1) distances in km among signer (0) and internal recipients;
  // negative or NaN entries mean "no link".
  std::vector<std::vector<double>> distances;

  double rate(std::size_t i, std::size_t j) const;
};

// Converts a fibre loss in dB/km into the exponential loss coefficient.
double gamma_from_db_per_km(double db_per_km);

// Maximal signing-key-set generation rate (sets per second).
double uss_rate(const SchemeConfig& cfg, const LinkModel& links);

// floor(-log2 eps_auth) + 1
unsigned auth_key_cost(double eps_auth);

struct OptimizeInput {
  unsigned N = 4;
  unsigned M = 0;
  unsigned omega = 1;
  unsigned l_max = 1;
  std::uint64_t a = 0;
  double eps_tot = 1e-10;
};

struct OptimizeOptions {
  unsigned b_min = 2;
  unsigned b_max = 20;
  // Holds s0 at this value instead of solving for it; k then follows from
  // the two half-epsilon constraints alone.
  std::optional<double> fixed_s0;
  GapConvention gap = GapConvention::kStatement;
  double s0_tolerance = 1e-6;
  double bracket_offset = 1e-9;
};

struct OptimizerResult {
  unsigned b = 0;
  std::uint64_t k = 0;
  double s0 = 0.0;
  KeyConsumption consumption;
  double forgery = 0.0;      // forgery_bound at the returned parameters
  double nontransfer = 0.0;  // nontransfer_bound at the returned parameters
};

struct TagLengthCandidate {
  unsigned b = 0;
  std::optional<OptimizerResult> result;
  std::string diagnostic;  // why result is empty
};

// Optimal (k, s0) for one fixed tag length; nullopt result with a diagnostic
// when the s0 equation has no root in the admissible interval.
TagLengthCandidate optimize_for_b(const OptimizeInput& in, unsigned b, const OptimizeOptions& opts = {});
std::vector<TagLengthCandidate> scan_tag_lengths(const OptimizeInput& in, const OptimizeOptions& opts = {});
// Best candidate by L_tot, ties toward smaller b. Throws NoFeasibleSolution
// listing every per-b diagnostic, ParameterError on invalid input.
OptimizerResult optimize(const OptimizeInput& in, const OptimizeOptions& opts = {});

SchemeConfig to_config(const OptimizeInput& in, const OptimizerResult& r);

}  // namespace uss::bounds
