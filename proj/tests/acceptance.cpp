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

// Acceptance checks. Prints one PASS/FAIL line per criterion; with
// --criterion N only that one runs. Exit status is 0 iff every selected
// criterion passed.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cli.hpp"
#include "uss/as2u.hpp"
#include "uss/attacks.hpp"
#include "uss/bounds.hpp"
#include "uss/netsim.hpp"
#include "uss/rng.hpp"
#include "uss/scenario.hpp"

namespace {

using namespace uss;
using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = true;
  std::string summary;
  std::vector<std::string> details;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------- 1

struct ReferenceRow {
  bounds::OptimizeInput in;
  std::uint64_t k;
  unsigned b;
  double s0;
  std::uint64_t k2;
  double s02;
};

constexpr std::uint64_t kA = std::uint64_t{8} << 20;

// Reference optimization table: inputs, optimal (k, b, s0), then (k, s0) at b=2.
const std::vector<ReferenceRow> kReference{
    {{4, 0, 1, 1, kA, 1e-10}, 125, 7, 0.658, 482, 0.334},
    {{4, 10, 1, 1, kA, 1e-10}, 136, 6, 0.630, 510, 0.325},
    {{10, 10, 1, 7, kA, 1e-10}, 2947, 9, 0.996, 13517, 0.465},
    {{10, 10, 3, 1, kA, 1e-10}, 147, 6, 0.632, 549, 0.326},
    {{10, 10, 2, 2, kA, 1e-10}, 403, 6, 0.766, 1511, 0.395},
    {{10, 10, 2, 2, 4 * kA, 1e-10}, 403, 6, 0.766, 1511, 0.395},
    {{10, 10, 2, 2, kA, 1e-12}, 475, 6, 0.758, 1783, 0.391},
    {{10, 100, 2, 2, kA, 1e-10}, 414, 6, 0.756, 1552, 0.390},
};

Verdict criterion1() {
  Verdict v;
  const auto t0 = Clock::now();
  unsigned bad = 0;
  for (std::size_t i = 0; i < kReference.size(); ++i) {
    const auto& ref = kReference[i];
    const auto best = bounds::optimize(ref.in);
    const auto two = bounds::optimize_for_b(ref.in, 2);
    const double dk = std::fabs(double(best.k) - double(ref.k)) / double(ref.k);
    const bool ok_best = dk <= 0.05 && std::fabs(best.s0 - ref.s0) <= 0.015 &&
                         std::abs(int(best.b) - int(ref.b)) <= 1;
    bool ok_two = false;
    double s2 = NAN;
    std::uint64_t k2 = 0;
    if (two.result) {
      k2 = two.result->k;
      s2 = two.result->s0;
      ok_two = std::fabs(double(k2) - double(ref.k2)) / double(ref.k2) <= 0.05 && std::fabs(s2 - ref.s02) <= 0.015;
    }
    if (!ok_best || !ok_two) ++bad;
    v.details.push_back(fmt("row %zu: b_opt k=%llu (ref %llu, %+.1f%%) b=%u (ref %u) s0=%.3f (ref %.3f) %s; "
                            "b=2 k=%llu (ref %llu, %+.1f%%) s0=%.3f (ref %.3f) %s",
                            i + 1, (unsigned long long)best.k, (unsigned long long)ref.k,
                            100.0 * (double(best.k) - double(ref.k)) / double(ref.k), best.b, ref.b, best.s0, ref.s0,
                            ok_best ? "ok" : "OUT", (unsigned long long)k2, (unsigned long long)ref.k2,
                            100.0 * (double(k2) - double(ref.k2)) / double(ref.k2), s2, ref.s02,
                            ok_two ? "ok" : "OUT"));
  }
  const double secs = seconds_since(t0);
  v.pass = bad == 0 && secs < 10.0;
  v.summary = fmt("%u of 8 reference rows outside tolerance (k 5%%, s0 0.015, b 1); %.2f s", bad, secs);
  return v;
}

// ---------------------------------------------------------------- 2

std::vector<std::pair<BitString, BitString>> random_pairs(unsigned a, std::size_t n, std::uint64_t seed) {
  CounterRng rng(seed, a);
  std::set<std::pair<std::uint64_t, std::uint64_t>> seen;
  std::vector<std::pair<BitString, BitString>> out;
  while (out.size() < n) {
    const auto x = rng.bits(a), y = rng.bits(a);
    if (x == y || !seen.insert({std::min(x, y), std::max(x, y)}).second) continue;
    BitString p, q;
    p.append_uint(x, a);
    q.append_uint(y, a);
    out.emplace_back(std::move(p), std::move(q));
  }
  return out;
}

Verdict criterion2() {
  Verdict v;
  const auto t0 = Clock::now();
  auto check = [&](unsigned a, unsigned b, const std::vector<std::pair<BitString, BitString>>& pairs,
                   const std::string& label) {
    const auto p = as2u::make_params(a, b);
    const auto r = as2u::exhaustive_check(p, pairs);
    v.pass = v.pass && r.holds();
    v.details.push_back(fmt("a=%u b=%u s=%u y=%u: %llu keys, %llu %s, uniform=%s, worst ratio %.4f <= %.4f %s", a, b,
                            p.s, p.y, (unsigned long long)r.keys, (unsigned long long)r.pairs, label.c_str(),
                            r.uniform ? "yes" : "no", r.worst_ratio, r.ratio_limit, r.holds() ? "ok" : "FAIL"));
    return p.s;
  };
  {
    std::vector<std::pair<BitString, BitString>> all;
    for (std::uint64_t x = 0; x < 512; ++x) {
      for (std::uint64_t y = x + 1; y < 512; ++y) {
        BitString p, q;
        p.append_uint(x, 9);
        q.append_uint(y, 9);
        all.emplace_back(std::move(p), std::move(q));
      }
    }
    if (check(9, 2, all, "pairs (all)") != 1) v.pass = false;
  }
  if (check(12, 3, random_pairs(12, 200, 1), "random pairs") != 1) v.pass = false;
  // s=1 caps a at 12 for b=3; longer messages need more chunks.
  check(24, 3, random_pairs(24, 200, 2), "random pairs");
  check(36, 3, random_pairs(36, 200, 3), "random pairs");
  const double secs = seconds_since(t0);
  v.pass = v.pass && secs < 60.0;
  v.summary = fmt("exhaustive key enumeration, both conditions; %.2f s", secs);
  return v;
}

// ---------------------------------------------------------------- 3

Verdict criterion3() {
  Verdict v;
  const auto t0 = Clock::now();
  unsigned cases = 0;
  for (unsigned N = 4; N <= 7; ++N) {
    for (unsigned l = 1; l + 3 <= N; ++l) {
      const auto r = attacks::attack_acceptability(N, l, 1);
      ++cases;
      v.pass = v.pass && r.pass();
      v.details.push_back(fmt("N=%u l_max=%u: omega_max=%u, %llu patterns, %llu below l_max; omega=%u %s", N, l,
                              r.omega_max, (unsigned long long)r.patterns, (unsigned long long)r.failures,
                              r.omega_max + 1,
                              r.counterexample ? ("defeated: " + r.example).c_str() : "NOT defeated"));
    }
  }
  const double secs = seconds_since(t0);
  v.pass = v.pass && secs < 300.0;
  v.summary = fmt("%u (N, l_max) cases, both directions; %.2f s", cases, secs);
  return v;
}

// ---------------------------------------------------------------- 4

std::string report_line(const attacks::TrialReport& r) {
  return fmt("%s: %llu/%llu = %.3g, Wilson 99%% [%.3g, %.3g], bound %.3g, %s%s", r.name.c_str(),
             (unsigned long long)r.successes, (unsigned long long)r.trials, r.rate, r.lower, r.upper, r.bound,
             r.pass ? "ok" : "FAIL", r.observable ? "" : " (unobservable)");
}

Verdict criterion4() {
  Verdict v;
  const bounds::SchemeConfig cfg{4, 0, 1, 1, 25, 1e-10, 20, 3, 0.3};
  const auto r = attacks::attack_forgery(cfg, 100000, 1);
  v.pass = r.pass && r.trials == 100000;
  v.summary = fmt("forgery rate %.3g vs bound %.3g", r.rate, r.bound);
  v.details.push_back(report_line(r));
  return v;
}

// ---------------------------------------------------------------- 5

Verdict criterion5() {
  Verdict v;
  const bounds::SchemeConfig cfg{4, 0, 1, 1, 25, 1e-10, 30, 3, 0.6};
  std::uint64_t votes = 0, violations = 0;
  for (auto coalition : {attacks::Coalition::kWithSigner, attacks::Coalition::kSignerless}) {
    attacks::NontransferOptions opts;
    opts.coalition = coalition;
    const auto s = attacks::nontransfer_study(cfg, 100000, 1, opts);
    v.pass = v.pass && s.nontransfer.pass && s.repudiation.pass && s.subset_violations == 0;
    votes += s.votes;
    violations += s.subset_violations;
    v.details.push_back(report_line(s.nontransfer));
    v.details.push_back(report_line(s.repudiation));
  }
  v.pass = v.pass && violations == 0;
  v.summary = fmt("both coalitions within bound; %llu repudiations without non-transferability (%llu votes)",
                  (unsigned long long)violations, (unsigned long long)votes);
  return v;
}

// ---------------------------------------------------------------- 6

Verdict criterion6() {
  Verdict v;
  const auto ex = attacks::broadcast_exhaustive(4, 1);
  const auto rnd = attacks::broadcast_randomized(7, 2, 10000, 1);
  v.pass = ex.pass() && rnd.pass() && rnd.cases == 10000;
  v.summary = fmt("%llu exhaustive + %llu randomized strategies, %llu violations", (unsigned long long)ex.cases,
                  (unsigned long long)rnd.cases,
                  (unsigned long long)(ex.agreement_violations + ex.validity_violations + rnd.agreement_violations +
                                       rnd.validity_violations));
  return v;
}

// ---------------------------------------------------------------- 7

netsim::Scenario honest_scenario(unsigned N, unsigned M, unsigned omega, unsigned l_max, bool auth) {
  nlohmann::json doc{{"seed", 3},
                     {"scheme", {{"N", N}, {"M", M}, {"omega", omega}, {"l_max", l_max}, {"k", 24}, {"b", 4},
                                 {"s0", 0.3}}},
                     {"auth", {{"enabled", auth}, {"eps_auth", 1e-14}}}};
  return netsim::parse_scenario(doc);
}

Verdict criterion7() {
  Verdict v;
  v.pass = bounds::auth_key_cost(1e-14) == 47;
  const std::pair<unsigned, unsigned> shapes[] = {{4, 1}, {7, 2}};
  for (const auto& [N, omega] : shapes) {
    for (bool auth : {false, true}) {
      const auto sc = honest_scenario(N, 2, omega, 1, auth);
      const auto r = netsim::run(netsim::Topology::build(sc.topology), sc);
      bool exact = !r.aborted && r.ledger_matches;
      // Authentication debits come in whole messages of L_auth bits.
      bool whole = true;
      for (const auto& l : r.ledger) {
        if (auth ? l.auth % 47 != 0 : l.auth != 0) whole = false;
      }
      v.pass = v.pass && exact && whole && (!auth || r.auth_bits_per_message == 47);
      v.details.push_back(fmt("N=%u omega=%u auth=%s: L_sr=%llu L_rr=%llu, ledger %s, auth per message %u%s", N, omega,
                              auth ? "on" : "off", (unsigned long long)r.expected.L_sr,
                              (unsigned long long)r.expected.L_rr, exact ? "exact" : "MISMATCH",
                              r.auth_bits_per_message, whole ? "" : ", partial auth debit"));
    }
  }
  v.summary = fmt("OTP debits equal L_sr/L_rr; L_auth(1e-14) = %u bits", bounds::auth_key_cost(1e-14));
  return v;
}

// ---------------------------------------------------------------- 8

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Verdict criterion8() {
  Verdict v;
  const std::string dir = USS_SCENARIO_DIR;
  const auto tmp = std::filesystem::temp_directory_path() / "uss_acceptance_determinism";
  unsigned runs = 0;
  for (const char* name : {"honest", "rubbish", "pool_starved", "disputed"}) {
    std::string stdout_text[2], files[2];
    for (int rep = 0; rep < 2; ++rep) {
      const auto out = tmp / (std::string(name) + std::to_string(rep));
      std::filesystem::remove_all(out);
      std::ostringstream o, e;
      uss::cli::run({"simulate", dir + "/" + name + ".json", "--seed", "99", "--out", out.string()}, o, e);
      stdout_text[rep] = o.str();
      stdout_text[rep] = stdout_text[rep].substr(0, stdout_text[rep].find("wrote "));
      files[rep] = slurp(out / "trace.jsonl") + slurp(out / "report.json");
    }
    const bool same = stdout_text[0] == stdout_text[1] && files[0] == files[1] && !files[0].empty();
    v.pass = v.pass && same;
    ++runs;
    v.details.push_back(fmt("%s: trace, report and tables %s", name, same ? "identical" : "DIFFER"));
  }
  // Monte Carlo reports must not depend on the thread count either.
  const bounds::SchemeConfig cfg{4, 0, 1, 1, 25, 1e-10, 2, 3, 0.6};
  attacks::ForgeryOptions one, many;
  one.threads = 1;
  many.threads = 4;
  const auto a = attacks::attack_forgery(cfg, 5000, 42, one);
  const auto b = attacks::attack_forgery(cfg, 5000, 42, many);
  const bool same = a.successes == b.successes;
  v.pass = v.pass && same;
  v.details.push_back(fmt("forgery 1 vs 4 threads: %llu vs %llu successes", (unsigned long long)a.successes,
                          (unsigned long long)b.successes));
  v.summary = fmt("%u scenarios re-run byte-identically; trial results thread-independent", runs);
  return v;
}

// ---------------------------------------------------------------- 9

Verdict criterion9() {
  Verdict v;
  std::vector<double> ratios;
  for (unsigned b : {2u, 6u}) {
    const bounds::OptimizeInput one{10, 10, 2, 1, kA, 1e-10}, two{10, 10, 2, 2, kA, 1e-10};
    const auto base = bounds::optimize_for_b(one, b);
    const auto free2 = bounds::optimize_for_b(two, b);
    if (!base.result || !free2.result) {
      v.pass = false;
      v.details.push_back(fmt("b=%u: infeasible", b));
      continue;
    }
    // The quadratic law compares levels at an equal per-level gap, so s0 is
    // held at the l_max=1 optimum.
    bounds::OptimizeOptions fixed;
    fixed.fixed_s0 = base.result->s0;
    const auto held = bounds::optimize_for_b(two, b, fixed);
    if (!held.result) {
      v.pass = false;
      v.details.push_back(fmt("b=%u: fixed-s0 run infeasible: %s", b, held.diagnostic.c_str()));
      continue;
    }
    const double ratio = double(held.result->k) / double(base.result->k);
    const double reopt = double(free2.result->k) / double(base.result->k);
    ratios.push_back(ratio);
    v.pass = v.pass && std::fabs(ratio - 4.0) <= 0.4;
    v.details.push_back(fmt("b=%u s0=%.4f: k(l_max=1)=%llu k(l_max=2)=%llu ratio %.3f; with s0 re-optimized "
                            "k(l_max=2)=%llu ratio %.3f",
                            b, base.result->s0, (unsigned long long)base.result->k,
                            (unsigned long long)held.result->k, ratio, (unsigned long long)free2.result->k, reopt));
  }
  std::string list;
  for (double r : ratios) list += (list.empty() ? "" : ", ") + fmt("%.3f", r);
  v.summary = "k(l_max=2)/k(l_max=1) at fixed b and s0: " + list + " (target 4 +/- 10%)";
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  unsigned only = 0;
  bool verbose = false;
  app.add_option("--criterion", only, "run a single criterion (1-9)")->check(CLI::Range(1, 9));
  app.add_flag("-v,--verbose", verbose, "print per-case detail");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::function<Verdict()>> all{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                  criterion6, criterion7, criterion8, criterion9};
  bool ok = true;
  for (unsigned i = 1; i <= all.size(); ++i) {
    if (only && only != i) continue;
    const auto t0 = Clock::now();
    Verdict v;
    try {
      v = all[i - 1]();
    } catch (const std::exception& e) {
      v.pass = false;
      v.summary = std::string("exception: ") + e.what();
    }
    ok = ok && v.pass;
    std::cout << "criterion " << i << ": " << (v.pass ? "PASS" : "FAIL") << "  " << v.summary
              << fmt("  [%.1f s]", seconds_since(t0)) << '\n';
    if (verbose || !v.pass || only) {
      for (const auto& d : v.details) std::cout << "    " << d << '\n';
    }
    std::cout.flush();
  }
  return ok ? 0 : 1;
}
