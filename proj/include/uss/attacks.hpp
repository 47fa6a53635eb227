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

#include "uss/bounds.hpp"

// Adversary strategies run against the real protocol code, with Monte Carlo
// estimates compared one-sidedly against the closed-form bounds.
namespace uss::attacks {

// Two-sided 99% normal quantile used for Wilson intervals.
inline constexpr double kWilsonZ = 2.5758293035489;

double wilson_lower(std::uint64_t successes, std::uint64_t trials, double z = kWilsonZ);
double wilson_upper(std::uint64_t successes, std::uint64_t trials, double z = kWilsonZ);

struct TrialReport {
  std::string name;
  std::uint64_t trials = 0;
  std::uint64_t successes = 0;
  double rate = 0.0;
  double bound = 0.0;
  double lower = 0.0;  // Wilson 99% interval around rate
  double upper = 0.0;
  // False when bound < 10 / trials: the comparison is then reported but
  // carries no statistical weight.
  bool observable = false;
  // rate <= bound + slack with slack = rate - lower, i.e. the bound is not
  // excluded by the interval.
  bool pass = false;

  double slack() const { return rate - lower; }
};

TrialReport make_report(std::string name, std::uint64_t trials, std::uint64_t successes, double bound);

// Trials run on this many threads; 0 picks the hardware concurrency. Each
// trial draws from (seed, trial index), so results do not depend on it.
struct RunOptions {
  unsigned threads = 0;
};

// A coalition of omega internal recipients holds a valid (m, sigma), its own
// slices and the chunks it produced or received. Each attempt submits a
// message whose difference from m is a polynomial with as many roots as the
// field allows, keeps the known tag where the key is secret and recomputes
// every tag it can. The attempt budget is omega + M (M + omega), and every
// rejection blocks the sender at that recipient. Success: some honest
// recipient reaches l_ver >= 0.
struct ForgeryOptions : RunOptions {
  bool omniscient = false;  // sanity inversion: the coalition knows every key
};
TrialReport attack_forgery(const bounds::SchemeConfig& cfg, std::uint64_t trials, std::uint64_t seed,
                           const ForgeryOptions& opts = {});

// Best single guess (m*, t*) after seeing (m, t), enumerated over every key.
struct GuessReport {
  std::uint64_t keys = 0;
  std::uint64_t pairs = 0;
  double worst = 0.0;  // max P[h(m*) = t* | h(m) = t]
  double limit = 0.0;  // 2^(1-b)
  bool holds() const { return worst <= limit + 1e-12; }
};
GuessReport single_guess_exhaustive(std::uint64_t a, unsigned b, std::uint64_t messages, std::uint64_t seed);

enum class Coalition {
  kWithSigner,  // signer and omega - 1 recipients
  kSignerless,  // omega recipients; rubbish keys towards the victim
};

// Midpoint corruption: every honest slice gets round(N * G) flipped tags,
// G = (s_l k + s_{l-1} k) / 2, so each block's expected mismatch count sits
// between the two thresholds. Coalition blocks fail at one honest victim
// and pass everywhere else.
struct NontransferOptions : RunOptions {
  Coalition coalition = Coalition::kWithSigner;
  unsigned target_level = 0;                       // 0 means l_max
  std::optional<std::uint64_t> corrupt_per_slice;  // overrides round(N * G)
  bounds::GapConvention gap = bounds::GapConvention::kStatement;
};

struct NontransferStudy {
  TrialReport nontransfer;
  TrialReport repudiation;
  std::uint64_t votes = 0;              // majority votes actually run
  std::uint64_t subset_violations = 0;  // repudiation without non-transferability
};

// Non-transferability: honest P_i at l >= 1 while honest P_j sits below l - 1.
// Repudiation: some honest node accepts at l >= 1 and the majority vote
// started by the lowest honest node at level 0 rejects the pair.
NontransferStudy nontransfer_study(const bounds::SchemeConfig& cfg, std::uint64_t trials, std::uint64_t seed,
                                   const NontransferOptions& opts = {});
TrialReport attack_nontransfer(const bounds::SchemeConfig& cfg, std::uint64_t trials, std::uint64_t seed,
                               const NontransferOptions& opts = {});
TrialReport attack_repudiation(const bounds::SchemeConfig& cfg, std::uint64_t trials, std::uint64_t seed,
                               const NontransferOptions& opts = {});

// M - 1 external and omega internal senders each push one bad package at the
// last external node, whose delegated requests then raise its counters.
struct CounterReport {
  unsigned limit = 0;               // M + omega
  unsigned max_honest_counter = 0;  // over honest internal recipients
  unsigned senders_burned = 0;
  bool honest_start_zero = false;   // counters after an honest delivery
  bool replay_unchanged = false;    // blocked resend and repeated request
  bool victim_blocked = false;
  std::vector<std::string> trace;
  bool pass() const {
    return honest_start_zero && replay_unchanged && !victim_blocked && max_honest_counter + 1 <= limit;
  }
};
CounterReport attack_counter_exhaustion(const bounds::SchemeConfig& cfg, std::uint64_t seed);

// Every coalition of at most omega_max recipients and every choice of which
// honest recipients each member feeds rubbish keys, against an honest
// signature. With omega' = omega_max + 1 (scheme configured for omega'),
// the search stops at the first pattern that pushes an honest verdict below
// l_max.
struct AcceptabilityCase {
  unsigned N = 0;
  unsigned l_max = 0;
  unsigned omega_max = 0;
  std::uint64_t patterns = 0;        // checked at omega <= omega_max
  std::uint64_t failures = 0;        // of those, verdicts below l_max
  std::uint64_t search_patterns = 0; // tried at omega_max + 1
  bool counterexample = false;
  std::string example;               // e.g. "P1,P2 -> P3"
  bool pass() const { return failures == 0 && counterexample; }
};
AcceptabilityCase attack_acceptability(unsigned N, unsigned l_max, std::uint64_t seed);

struct BroadcastSweep {
  std::uint64_t cases = 0;
  std::uint64_t agreement_violations = 0;
  std::uint64_t validity_violations = 0;
  bool pass() const { return cases > 0 && agreement_violations == 0 && validity_violations == 0; }
};
// Every faulty node, commander and input in {0, 1}; each message the faulty
// node sends is 0, 1 or dropped, in every combination.
BroadcastSweep broadcast_exhaustive(unsigned n, unsigned omega);
// Random coalitions of omega nodes sending random values or nothing.
BroadcastSweep broadcast_randomized(unsigned n, unsigned omega, std::uint64_t trials, std::uint64_t seed);

}  // namespace uss::attacks
