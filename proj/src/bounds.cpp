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

#include "uss/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "uss/as2u.hpp"
#include "uss/bits.hpp"
#include "uss/error.hpp"

namespace uss::bounds {
namespace {

double clip(double p) { return std::clamp(p, 0.0, 1.0); }

double s0_limit(unsigned b) { return 1.0 - std::ldexp(1.0, 1 - static_cast<int>(b)); }

void require_s0(double s0, unsigned b) {
  if (b < 2) throw ParameterError("tag length b must be >= 2");
  if (!(s0 > 0.0) || !(s0 < s0_limit(b))) {
    throw ParameterError("s0=" + std::to_string(s0) + " outside (0, 1 - 2^(1-b)) for b=" + std::to_string(b));
  }
}

}  // namespace

unsigned acceptability_max_omega(unsigned N, unsigned l_max) {
  // omega < N/(2+l_max)  <=>  omega * (2+l_max) < N
  const unsigned d = 2 + l_max;
  return N == 0 ? 0 : (N - 1) / d;
}

bool acceptability_holds(unsigned N, unsigned l_max, unsigned omega) {
  return static_cast<std::uint64_t>(omega) * (2 + l_max) < N;
}

double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double forgery_prefactor(unsigned N, unsigned M, unsigned omega) {
  const double n = N, m = M, w = omega;
  return n * n * (w + m * (w + m));
}

double nontransfer_prefactor(unsigned N) {
  const double n = N;
  return 2.0 * n * n * (n - 1.0);
}

std::optional<double> forgery_exponent_entropy(double s0, unsigned b) {
  if (!(s0 < 0.5)) return std::nullopt;
  const double bm1 = static_cast<double>(b) - 1.0;
  const double beta = bm1 * std::numbers::ln2 * (1.0 - s0 - binary_entropy(s0) / bm1);
  if (!(beta > 0.0)) return std::nullopt;
  return beta;
}

double forgery_exponent_hoeffding(double s0, unsigned b) {
  const double gap = 1.0 - s0 - std::ldexp(1.0, 1 - static_cast<int>(b));
  return 2.0 * gap * gap;
}

double forgery_exponent(double s0, unsigned b) {
  double beta = forgery_exponent_hoeffding(s0, b);
  if (auto entropy = forgery_exponent_entropy(s0, b)) beta = std::max(beta, *entropy);
  return beta;
}

double nontransfer_exponent(double s0, unsigned l_max, GapConvention gap) {
  if (l_max == 0) throw ParameterError("l_max must be >= 1");
  double delta = s0 / static_cast<double>(l_max);
  if (gap == GapConvention::kHalfGap) delta /= 2.0;
  return delta * delta / 2.0;
}

double forgery_bound(const SchemeConfig& cfg) {
  require_s0(cfg.s0, cfg.b);
  const double k = static_cast<double>(cfg.k);
  return clip(forgery_prefactor(cfg.N, cfg.M, cfg.omega) * std::exp(-k * forgery_exponent(cfg.s0, cfg.b)));
}

double nontransfer_bound(const SchemeConfig& cfg, GapConvention gap) {
  const double k = static_cast<double>(cfg.k);
  return clip(nontransfer_prefactor(cfg.N) * std::exp(-k * nontransfer_exponent(cfg.s0, cfg.l_max, gap)));
}

double repudiation_bound(const SchemeConfig& cfg, GapConvention gap) { return nontransfer_bound(cfg, gap); }

double false_blocking_bound(const SchemeConfig& cfg, GapConvention gap) {
  return clip(forgery_bound(cfg) + nontransfer_bound(cfg, gap));
}

KeyConsumption key_consumption(unsigned N, std::uint64_t k, unsigned y, unsigned b) {
  KeyConsumption c;
  const std::uint64_t n = N;
  c.y = y;
  c.L_sr = n * k * y;
  c.L_rr = 2 * k * (y + ceil_log2(n * k));
  c.L_tot = n * c.L_sr + n * (n - 1) / 2 * c.L_rr;
  c.sig_len = n * n * k * b;
  return c;
}

KeyConsumption key_consumption(const SchemeConfig& cfg) {
  const auto params = as2u::make_params(cfg.a, cfg.b);
  return key_consumption(cfg.N, cfg.k, params.y, cfg.b);
}

double LinkModel::rate(std::size_t i, std::size_t j) const {
  if (i >= distances.size() || j >= distances[i].size()) {
    throw ParameterError("missing link distance (" + std::to_string(i) + "," + std::to_string(j) + ")");
  }
  const double d = distances[i][j];
  if (std::isnan(d) || d < 0.0) {
    throw ParameterError("missing link distance (" + std::to_string(i) + "," + std::to_string(j) + ")");
  }
  return rate0 * std::exp(-gamma * d);
}

double gamma_from_db_per_km(double db_per_km) { return db_per_km * std::log(10.0) / 10.0; }

double uss_rate(const SchemeConfig& cfg, const LinkModel& links) {
  if (!(links.rate0 > 0.0) || links.gamma < 0.0) throw ParameterError("link model needs rate0 > 0, gamma >= 0");
  double sr_min = std::numeric_limits<double>::infinity();
  double rr_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i <= cfg.N; ++i) {
    sr_min = std::min(sr_min, links.rate(0, i));
    for (std::size_t j = 1; j <= cfg.N; ++j) {
      if (i != j) rr_min = std::min(rr_min, links.rate(i, j));
    }
  }
  const auto c = key_consumption(cfg);
  return std::min(sr_min / static_cast<double>(c.L_sr), rr_min / static_cast<double>(c.L_rr));
}

unsigned auth_key_cost(double eps_auth) {
  if (!(eps_auth > 0.0) || !(eps_auth < 1.0)) throw ParameterError("eps_auth must lie in (0, 1)");
  return static_cast<unsigned>(std::floor(-std::log2(eps_auth))) + 1;
}

}  // namespace uss::bounds
