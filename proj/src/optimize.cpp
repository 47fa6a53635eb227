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

#include <cmath>
#include <sstream>
#include <string>

#include "uss/as2u.hpp"
#include "uss/bounds.hpp"
#include "uss/error.hpp"

namespace uss::bounds {
namespace {

constexpr std::uint64_t kMaxBlockSize = std::uint64_t{1} << 40;

void validate(const OptimizeInput& in, const OptimizeOptions& opts) {
  if (in.N < 4) throw ParameterError("N must be >= 4");
  if (in.l_max < 1) throw ParameterError("l_max must be >= 1");
  if (in.omega < 1 || !acceptability_holds(in.N, in.l_max, in.omega)) {
    throw ParameterError("omega=" + std::to_string(in.omega) + " violates omega < N/(2+l_max) for N=" +
                         std::to_string(in.N) + ", l_max=" + std::to_string(in.l_max));
  }
  if (in.a < 1) throw ParameterError("message length a must be positive");
  if (!(in.eps_tot > 0.0) || !(in.eps_tot < 1.0)) throw ParameterError("eps_tot must lie in (0, 1)");
  if (opts.b_min < 2 || opts.b_max < opts.b_min) throw ParameterError("invalid tag length range");
}

SchemeConfig config_for(const OptimizeInput& in, unsigned b, std::uint64_t k, double s0) {
  SchemeConfig cfg;
  cfg.N = in.N;
  cfg.M = in.M;
  cfg.omega = in.omega;
  cfg.l_max = in.l_max;
  cfg.a = in.a;
  cfg.eps_tot = in.eps_tot;
  cfg.k = k;
  cfg.b = b;
  cfg.s0 = s0;
  return cfg;
}

}  // namespace

SchemeConfig to_config(const OptimizeInput& in, const OptimizerResult& r) { return config_for(in, r.b, r.k, r.s0); }

TagLengthCandidate optimize_for_b(const OptimizeInput& in, unsigned b, const OptimizeOptions& opts) {
  validate(in, opts);
  TagLengthCandidate out;
  out.b = b;

  as2u::FamilyParams params;
  try {
    params = as2u::make_params(in.a, b);
  } catch (const ParameterError& e) {
    out.diagnostic = e.what();
    return out;
  }

  const double half_eps = in.eps_tot / 2.0;
  const double alpha1 = forgery_prefactor(in.N, in.M, in.omega);
  const double alpha2 = nontransfer_prefactor(in.N);
  const double numerator = std::log(alpha2) - std::log(half_eps);
  auto beta2 = [&](double s) { return nontransfer_exponent(s, in.l_max, opts.gap); };
  // k from the non-transferability constraint, before rounding.
  auto k_real = [&](double s) { return numerator / beta2(s); };
  auto balance = [&](double s) {
    return (beta2(s) - forgery_exponent(s, b)) * k_real(s) - std::log(alpha2 / alpha1);
  };

  const double lo_limit = opts.bracket_offset;
  const double hi_limit = 1.0 - std::ldexp(1.0, 1 - static_cast<int>(b)) - opts.bracket_offset;

  double s0 = 0.0;
  if (opts.fixed_s0) {
    s0 = *opts.fixed_s0;
    if (!(s0 > 0.0) || !(s0 < hi_limit + opts.bracket_offset)) {
      out.diagnostic = "fixed s0 outside (0, 1 - 2^(1-b))";
      return out;
    }
  } else {
    double lo = lo_limit, hi = hi_limit;
    double f_lo = balance(lo), f_hi = balance(hi);
    if (!(lo < hi) || std::signbit(f_lo) == std::signbit(f_hi)) {
      std::ostringstream msg;
      msg << "no sign change of the s0 balance equation on (" << lo << ", " << hi << "): f(lo)=" << f_lo
          << ", f(hi)=" << f_hi;
      out.diagnostic = msg.str();
      return out;
    }
    while (hi - lo > opts.s0_tolerance) {
      const double mid = 0.5 * (lo + hi);
      const double f_mid = balance(mid);
      if (std::signbit(f_mid) == std::signbit(f_lo)) {
        lo = mid;
        f_lo = f_mid;
      } else {
        hi = mid;
      }
    }
    s0 = 0.5 * (lo + hi);
  }

  // Smallest k meeting both half-epsilon constraints: start from the closed
  // forms, then step past any rounding shortfall.
  const double beta1 = forgery_exponent(s0, b);
  double k_start = std::ceil(k_real(s0));
  if (beta1 > 0.0) k_start = std::max(k_start, std::ceil((std::log(alpha1) - std::log(half_eps)) / beta1));
  if (!(k_start < static_cast<double>(kMaxBlockSize))) {
    out.diagnostic = "required block size k exceeds 2^40";
    return out;
  }
  std::uint64_t k = static_cast<std::uint64_t>(std::max(1.0, k_start));
  for (;; ++k) {
    const auto cfg = config_for(in, b, k, s0);
    const double forgery = forgery_bound(cfg);
    const double nontransfer = nontransfer_bound(cfg, opts.gap);
    if (forgery <= half_eps && nontransfer <= half_eps) {
      OptimizerResult r;
      r.b = b;
      r.k = k;
      r.s0 = s0;
      r.consumption = key_consumption(in.N, k, params.y, b);
      r.forgery = forgery;
      r.nontransfer = nontransfer;
      out.result = r;
      return out;
    }
    if (k - static_cast<std::uint64_t>(k_start) > 1000) {
      out.diagnostic = "bounds not met within 1000 increments of k";
      return out;
    }
  }
}

std::vector<TagLengthCandidate> scan_tag_lengths(const OptimizeInput& in, const OptimizeOptions& opts) {
  validate(in, opts);
  std::vector<TagLengthCandidate> out;
  for (unsigned b = opts.b_min; b <= opts.b_max; ++b) out.push_back(optimize_for_b(in, b, opts));
  return out;
}

OptimizerResult optimize(const OptimizeInput& in, const OptimizeOptions& opts) {
  const auto candidates = scan_tag_lengths(in, opts);
  const OptimizerResult* best = nullptr;
  for (const auto& c : candidates) {
    if (!c.result) continue;
    // Strict comparison keeps the smaller b on ties (scan is in increasing b).
    if (best == nullptr || c.result->consumption.L_tot < best->consumption.L_tot) best = &*c.result;
  }
  if (best == nullptr) {
    std::ostringstream msg;
    msg << "no admissible (k, s0) for any b in [" << opts.b_min << ", " << opts.b_max << "]:";
    for (const auto& c : candidates) msg << "\n  b=" << c.b << ": " << c.diagnostic;
    throw NoFeasibleSolution(msg.str());
  }
  return *best;
}

}  // namespace uss::bounds
