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

#include "uss/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "uss/as2u.hpp"
#include "uss/broadcast.hpp"
#include "uss/error.hpp"
#include "uss/gf2m.hpp"
#include "uss/protocol.hpp"
#include "uss/rng.hpp"

namespace uss::attacks {
namespace {

using protocol::NodeId;

constexpr std::uint64_t kForgeryStream = 0xf0f0;
constexpr std::uint64_t kNontransferStream = 0x7a7a;
constexpr std::uint64_t kCounterStream = 0xc0c0;
constexpr std::uint64_t kAcceptabilityStream = 0xacac;
constexpr std::uint64_t kGuessStream = 0x9e55;

template <typename Counts, typename Fn>
Counts run_trials(std::uint64_t trials, unsigned threads, Fn fn) {
  unsigned n = threads != 0 ? threads : std::max(1u, std::thread::hardware_concurrency());
  n = static_cast<unsigned>(std::max<std::uint64_t>(1, std::min<std::uint64_t>(n, trials)));
  std::vector<Counts> parts(n);
  std::exception_ptr failure;
  std::mutex guard;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < n; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::uint64_t t = w; t < trials; t += n) fn(t, parts[w]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(guard);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  Counts total;
  for (const auto& p : parts) total += p;
  return total;
}

BitString random_bits(std::uint64_t n, CounterRng& rng) {
  BitString out;
  while (out.size() < n) {
    const unsigned take = static_cast<unsigned>(std::min<std::uint64_t>(64, n - out.size()));
    out.append_uint(rng.bits(take), take);
  }
  return out;
}

// m + D where D(x) is a product of distinct linear factors of the largest
// degree the message length allows. Any key whose point is a root of D
// hashes m and the result alike.
BitString craft_collision(const BitString& m, const as2u::FamilyParams& fp, const gf2m::FieldSpec& field,
                          CounterRng& rng) {
  const unsigned w = fp.field_degree();
  const std::uint64_t whole = m.size() / w;
  const std::uint64_t degree = std::min<std::uint64_t>(fp.chunk_count() - 1, whole == 0 ? 0 : whole - 1);
  BitString out = m;
  if (degree == 0) {
    out.set(m.size() - 1, !m.get(m.size() - 1));
    return out;
  }
  std::set<std::uint64_t> roots;
  while (roots.size() < degree) roots.insert(rng.bits(w));
  std::vector<std::uint64_t> coeffs{1};
  for (std::uint64_t r : roots) {
    std::vector<std::uint64_t> next(coeffs.size() + 1, 0);
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
      next[i + 1] ^= coeffs[i];
      next[i] ^= gf2m::mul_raw(field, r, coeffs[i]);
    }
    coeffs = std::move(next);
  }
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    for (unsigned j = 0; j < w; ++j) {
      if ((coeffs[i] >> (w - 1 - j)) & 1) out.set(i * w + j, !out.get(i * w + j));
    }
  }
  return out;
}

void split(unsigned N, std::size_t coalition_size, CounterRng& rng, std::vector<unsigned>& coalition,
           std::vector<unsigned>& honest) {
  std::vector<unsigned> order(N);
  std::iota(order.begin(), order.end(), 1u);
  shuffle(order, rng);
  coalition.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(coalition_size));
  honest.assign(order.begin() + static_cast<std::ptrdiff_t>(coalition_size), order.end());
  std::sort(coalition.begin(), coalition.end());
  std::sort(honest.begin(), honest.end());
}

bool contains(const std::vector<unsigned>& v, unsigned x) { return std::find(v.begin(), v.end(), x) != v.end(); }

// --- forgery

bool forgery_trial(const protocol::SchemeParams& params, const as2u::Family& family, const CounterRng& trial,
                   bool omniscient) {
  const auto dep = protocol::deploy(params, trial.fork(1));
  auto adv = trial.fork(2);
  std::vector<unsigned> coalition, honest;
  split(params.N, params.omega, adv, coalition, honest);

  const BitString m = random_bits(params.family.a, adv);
  const auto sigma = protocol::sign(family, dep.signing_key, m);
  std::vector<char> known(sigma.tags.size(), omniscient ? 1 : 0);
  const std::uint64_t width = params.slice_length();
  for (unsigned c : coalition) {
    std::fill(known.begin() + static_cast<std::ptrdiff_t>((c - 1) * width),
              known.begin() + static_cast<std::ptrdiff_t>(c * width), 1);
    for (unsigned j = 1; j <= params.N; ++j) {
      for (std::uint64_t g : dep.sent[j - 1][c - 1].indices) known[g] = 1;
    }
  }

  std::vector<NodeId> senders;
  for (unsigned c : coalition) senders.push_back(NodeId::internal(c));
  for (unsigned e = 1; e <= params.M; ++e) senders.push_back(NodeId::external(e));
  // Each (sender, target) pair can fail once before the target blocks the
  // sender; spread the budget so every sender meets distinct targets.
  std::vector<std::pair<NodeId, unsigned>> attempts;
  for (std::size_t r = 0; r < honest.size(); ++r) {
    for (std::size_t s = 0; s < senders.size(); ++s) attempts.emplace_back(senders[s], honest[(r + s) % honest.size()]);
  }
  const std::uint64_t budget = params.omega + std::uint64_t{params.M} * (params.M + params.omega);
  attempts.resize(std::min<std::size_t>(attempts.size(), budget));

  std::map<unsigned, protocol::InternalRecipient> nodes;
  for (const auto& [sender, target] : attempts) {
    const BitString forged_m = craft_collision(m, params.family, family.field(), adv);
    const auto encoded = family.encode(forged_m);
    protocol::Signature forged = sigma;
    for (std::uint64_t g = 0; g < forged.tags.size(); ++g) {
      if (known[g]) forged.tags[g] = family.eval(dep.signing_key.keys[g], encoded);
    }
    auto it = nodes.find(target);
    if (it == nodes.end()) {
      it = nodes.emplace(target, protocol::InternalRecipient(params, target)).first;
      it->second.set_share(dep.shares[target - 1]);
    }
    const auto verdict = it->second.receive({forged_m, forged, 1}, sender);
    if (verdict.level >= 0) return true;
  }
  return false;
}

// --- non-transferability and repudiation

struct NontransferCounts {
  std::uint64_t nontransfer = 0;
  std::uint64_t repudiation = 0;
  std::uint64_t votes = 0;
  std::uint64_t subset_violations = 0;
  NontransferCounts& operator+=(const NontransferCounts& o) {
    nontransfer += o.nontransfer;
    repudiation += o.repudiation;
    votes += o.votes;
    subset_violations += o.subset_violations;
    return *this;
  }
};

void nontransfer_trial(const protocol::SchemeParams& params, const as2u::Family& family, const CounterRng& trial,
                       Coalition kind, std::uint64_t corrupt, NontransferCounts& counts) {
  auto adv = trial.fork(2);
  std::vector<unsigned> coalition, honest;
  const std::size_t size = kind == Coalition::kWithSigner ? params.omega - 1 : params.omega;
  split(params.N, size, adv, coalition, honest);
  const unsigned victim = honest[adv.below(honest.size())];

  protocol::ChunkTamper tamper;
  if (kind == Coalition::kSignerless) {
    tamper = [&](protocol::KeyChunk& chunk) {
      if (chunk.dest == victim && contains(coalition, chunk.source)) {
        for (auto& key : chunk.keys) key.offset ^= 1;
      }
    };
  }
  const auto dep = protocol::deploy(params, trial.fork(1), tamper);
  const BitString m = random_bits(params.family.a, adv);
  auto sigma = protocol::sign(family, dep.signing_key, m);

  const std::uint64_t width = params.slice_length();
  std::vector<std::uint64_t> slots(width);
  for (unsigned h : honest) {
    std::iota(slots.begin(), slots.end(), std::uint64_t{0});
    const std::uint64_t flips = std::min(corrupt, width);
    for (std::uint64_t i = 0; i < flips; ++i) {
      std::swap(slots[i], slots[i + adv.below(width - i)]);
      sigma.tags[(h - 1) * width + slots[i]] ^= 1;
    }
  }
  if (kind == Coalition::kWithSigner) {
    for (unsigned c : coalition) {
      for (std::uint64_t g : dep.sent[c - 1][victim - 1].indices) sigma.tags[g] ^= 1;
    }
  }

  std::map<unsigned, int> levels;
  for (unsigned h : honest) {
    const auto mism = protocol::block_mismatches(params, family, dep.shares[h - 1], m, sigma);
    levels[h] = protocol::verification_level(params, mism);
  }
  int hi = -1, lo = static_cast<int>(params.l_max);
  for (const auto& [h, l] : levels) {
    hi = std::max(hi, l);
    lo = std::min(lo, l);
  }
  const bool nontransfer = hi >= 1 && lo < hi - 1;
  if (nontransfer) ++counts.nontransfer;
  if (hi < 1) return;

  unsigned initiator = 0;
  for (const auto& [h, l] : levels) {
    if (l == 0) {
      initiator = h;
      break;
    }
  }
  if (initiator == 0) return;
  std::vector<protocol::InternalRecipient> nodes;
  for (unsigned j = 1; j <= params.N; ++j) {
    nodes.emplace_back(params, j);
    nodes.back().set_share(dep.shares[j - 1]);
  }
  protocol::VoteAdversary vote_adv;
  vote_adv.faulty.insert(coalition.begin(), coalition.end());
  vote_adv.vote = [](const broadcast::Path&, unsigned, unsigned, int) -> std::optional<int> { return -1; };
  const auto report = protocol::majority_vote(nodes, initiator, m, sigma, vote_adv);
  ++counts.votes;
  if (report.tally[initiator - 1]->result == protocol::MvResult::kRejected) {
    ++counts.repudiation;
    if (!nontransfer) ++counts.subset_violations;
  }
}

}  // namespace

double wilson_lower(std::uint64_t successes, std::uint64_t trials, double z) {
  if (trials == 0) return 0.0;
  const double n = double(trials);
  const double p = double(successes) / n;
  const double denom = 1.0 + z * z / n;
  const double center = (p + z * z / (2 * n)) / denom;
  const double half = z * std::sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom;
  return std::max(0.0, center - half);
}

double wilson_upper(std::uint64_t successes, std::uint64_t trials, double z) {
  if (trials == 0) return 1.0;
  const double n = double(trials);
  const double p = double(successes) / n;
  const double denom = 1.0 + z * z / n;
  const double center = (p + z * z / (2 * n)) / denom;
  const double half = z * std::sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom;
  return std::min(1.0, center + half);
}

TrialReport make_report(std::string name, std::uint64_t trials, std::uint64_t successes, double bound) {
  if (successes > trials) throw ParameterError("more successes than trials");
  TrialReport r;
  r.name = std::move(name);
  r.trials = trials;
  r.successes = successes;
  r.rate = trials == 0 ? 0.0 : double(successes) / double(trials);
  r.bound = bound;
  r.lower = wilson_lower(successes, trials);
  r.upper = wilson_upper(successes, trials);
  r.observable = trials > 0 && bound >= 10.0 / double(trials);
  r.pass = r.lower <= bound;
  return r;
}

TrialReport attack_forgery(const bounds::SchemeConfig& cfg, std::uint64_t trials, std::uint64_t seed,
                           const ForgeryOptions& opts) {
  const auto params = protocol::make_scheme(cfg);
  if (params.omega == 0 || params.omega >= params.N) throw ParameterError("forgery needs 0 < omega < N");
  const as2u::Family family(params.family);
  const CounterRng base(seed, kForgeryStream);
  struct Counts {
    std::uint64_t successes = 0;
    Counts& operator+=(const Counts& o) {
      successes += o.successes;
      return *this;
    }
  };
  const auto counts = run_trials<Counts>(trials, opts.threads, [&](std::uint64_t t, Counts& c) {
    if (forgery_trial(params, family, base.fork(t), opts.omniscient)) ++c.successes;
  });
  if (opts.omniscient) return make_report("forgery (omniscient)", trials, counts.successes, 1.0);
  return make_report("forgery", trials, counts.successes, bounds::forgery_bound(cfg));
}

GuessReport single_guess_exhaustive(std::uint64_t a, unsigned b, std::uint64_t messages, std::uint64_t seed) {
  const auto fp = as2u::make_params(a, b);
  if (fp.y > 20 || a > 16) throw ParameterError("exhaustive guessing needs y <= 20 and a <= 16");
  const as2u::Family family(fp);
  const std::uint64_t keys = std::uint64_t{1} << fp.y;
  const std::uint64_t space = std::uint64_t{1} << a;
  std::vector<as2u::AuthKey> all_keys;
  all_keys.reserve(keys);
  for (std::uint64_t x = 0; x < keys; ++x) {
    BitString bits;
    bits.append_uint(x, fp.y);
    all_keys.push_back(as2u::parse_key(fp, bits));
  }
  // tags[msg * keys + key]
  std::vector<std::uint16_t> tags(space * keys);
  for (std::uint64_t msg = 0; msg < space; ++msg) {
    BitString mb;
    mb.append_uint(msg, static_cast<unsigned>(a));
    const auto enc = family.encode(mb);
    for (std::uint64_t x = 0; x < keys; ++x) tags[msg * keys + x] = static_cast<std::uint16_t>(family.eval(all_keys[x], enc));
  }
  std::vector<std::uint64_t> observed(space);
  std::iota(observed.begin(), observed.end(), std::uint64_t{0});
  CounterRng rng(seed, kGuessStream);
  shuffle(observed, rng);
  observed.resize(std::min(messages, space));

  const std::uint64_t nt = std::uint64_t{1} << b;
  GuessReport r;
  r.keys = keys;
  r.limit = std::ldexp(1.0, 1 - static_cast<int>(b));
  std::vector<std::uint64_t> joint(nt * nt), marginal(nt);
  for (std::uint64_t m : observed) {
    std::fill(marginal.begin(), marginal.end(), 0);
    for (std::uint64_t x = 0; x < keys; ++x) ++marginal[tags[m * keys + x]];
    for (std::uint64_t ms = 0; ms < space; ++ms) {
      if (ms == m) continue;
      std::fill(joint.begin(), joint.end(), 0);
      for (std::uint64_t x = 0; x < keys; ++x) ++joint[tags[m * keys + x] * nt + tags[ms * keys + x]];
      for (std::uint64_t t = 0; t < nt; ++t) {
        for (std::uint64_t ts = 0; ts < nt; ++ts) {
          r.worst = std::max(r.worst, double(joint[t * nt + ts]) / double(marginal[t]));
        }
      }
      ++r.pairs;
    }
  }
  return r;
}

NontransferStudy nontransfer_study(const bounds::SchemeConfig& cfg, std::uint64_t trials, std::uint64_t seed,
                                   const NontransferOptions& opts) {
  const auto params = protocol::make_scheme(cfg);
  if (params.omega == 0 || params.omega >= params.N) throw ParameterError("non-transferability needs 0 < omega < N");
  const unsigned l = opts.target_level == 0 ? params.l_max : opts.target_level;
  if (l > params.l_max) throw ParameterError("target level above l_max");
  const double midpoint = (params.threshold(l) + params.threshold(l - 1)) / 2.0;
  const std::uint64_t corrupt =
      opts.corrupt_per_slice.value_or(static_cast<std::uint64_t>(std::llround(double(params.N) * midpoint)));
  const as2u::Family family(params.family);
  const CounterRng base(seed, kNontransferStream + static_cast<std::uint64_t>(opts.coalition));
  const auto counts = run_trials<NontransferCounts>(trials, opts.threads, [&](std::uint64_t t, NontransferCounts& c) {
    nontransfer_trial(params, family, base.fork(t), opts.coalition, corrupt, c);
  });
  const std::string suffix = opts.coalition == Coalition::kWithSigner ? " (signer)" : " (signerless)";
  NontransferStudy s;
  s.nontransfer = make_report("non-transferability" + suffix, trials, counts.nontransfer,
                              bounds::nontransfer_bound(cfg, opts.gap));
  s.repudiation = make_report("repudiation" + suffix, trials, counts.repudiation,
                              bounds::repudiation_bound(cfg, opts.gap));
  s.votes = counts.votes;
  s.subset_violations = counts.subset_violations;
  return s;
}

TrialReport attack_nontransfer(const bounds::SchemeConfig& cfg, std::uint64_t trials, std::uint64_t seed,
                               const NontransferOptions& opts) {
  return nontransfer_study(cfg, trials, seed, opts).nontransfer;
}

TrialReport attack_repudiation(const bounds::SchemeConfig& cfg, std::uint64_t trials, std::uint64_t seed,
                               const NontransferOptions& opts) {
  return nontransfer_study(cfg, trials, seed, opts).repudiation;
}

CounterReport attack_counter_exhaustion(const bounds::SchemeConfig& cfg, std::uint64_t seed) {
  const auto params = protocol::make_scheme(cfg);
  if (params.M < 1) throw ParameterError("counter exhaustion needs an external recipient");
  if (2 * params.omega + 1 > params.N) {
    throw ParameterError("too few internal recipients for delegated verification");
  }
  const as2u::Family family(params.family);
  const CounterRng root(seed, kCounterStream);
  const auto dep = protocol::deploy(params, root.fork(1));
  auto adv = root.fork(2);
  std::vector<protocol::InternalRecipient> internals;
  std::vector<unsigned> everyone;
  for (unsigned j = 1; j <= params.N; ++j) {
    internals.emplace_back(params, j);
    internals.back().set_share(dep.shares[j - 1]);
    everyone.push_back(j);
  }
  const unsigned first_dishonest = params.N - params.omega + 1;
  const unsigned victim = params.M;
  protocol::ExternalRecipient ext(params, victim, everyone);
  const int l_max = static_cast<int>(params.l_max);
  std::vector<unsigned> asked;  // honest responders of the latest request
  const protocol::Responder ask = [&](unsigned q, const protocol::Package& p, unsigned e) -> std::optional<int> {
    if (q >= first_dishonest) return l_max;  // coalition members vouch for the package
    asked.push_back(q);
    return internals[q - 1].respond(p, e);
  };
  auto counters = [&] {
    std::vector<unsigned> out;
    for (unsigned q = 1; q < first_dishonest; ++q) out.push_back(internals[q - 1].counter(victim));
    return out;
  };
  CounterReport r;
  r.limit = params.M + params.omega;
  auto log = [&](const NodeId& sender, const protocol::Verdict& v) {
    std::ostringstream line;
    line << sender.str() << " -> E" << victim << ": " << protocol::to_string(v.outcome) << " at level " << v.level
         << "; counters";
    for (unsigned c : counters()) line << ' ' << c;
    r.trace.push_back(line.str());
  };

  const BitString m0 = random_bits(params.family.a, adv);
  const auto honest = protocol::delegated_verify(
      ext, {m0, protocol::sign(family, dep.signing_key, m0), l_max}, NodeId::internal(1), ask);
  log(NodeId::internal(1), honest);
  const auto start = counters();
  r.honest_start_zero = honest.outcome == protocol::Outcome::kAccepted &&
                        std::all_of(start.begin(), start.end(), [](unsigned c) { return c == 0; });

  std::vector<NodeId> senders;
  for (unsigned e = 1; e < params.M; ++e) senders.push_back(NodeId::external(e));
  for (unsigned q = first_dishonest; q <= params.N; ++q) senders.push_back(NodeId::internal(q));
  std::optional<protocol::Package> first_bad;
  std::vector<unsigned> first_asked;
  for (const auto& sender : senders) {
    const BitString m = random_bits(params.family.a, adv);
    auto sigma = protocol::sign(family, dep.signing_key, m);
    for (auto& t : sigma.tags) t ^= 1;
    const protocol::Package pkg{m, sigma, l_max};
    asked.clear();
    const auto v = protocol::delegated_verify(ext, pkg, sender, ask);
    log(sender, v);
    if (v.outcome == protocol::Outcome::kRejected) ++r.senders_burned;
    if (!first_bad) {
      first_bad = pkg;
      first_asked = asked;
    }
  }

  const auto before = counters();
  r.replay_unchanged = true;
  if (first_bad) {
    const auto again = protocol::delegated_verify(ext, *first_bad, senders.front(), ask);
    log(senders.front(), again);
    for (unsigned q : first_asked) internals[q - 1].respond(*first_bad, victim);
    r.replay_unchanged = again.outcome == protocol::Outcome::kIgnoredBlocked && counters() == before;
  }
  for (unsigned c : counters()) r.max_honest_counter = std::max(r.max_honest_counter, c);
  for (unsigned q = 1; q < first_dishonest; ++q) {
    if (internals[q - 1].block_list().count(NodeId::external(victim)) != 0) r.victim_blocked = true;
  }
  return r;
}

AcceptabilityCase attack_acceptability(unsigned N, unsigned l_max, std::uint64_t seed) {
  AcceptabilityCase out;
  out.N = N;
  out.l_max = l_max;
  out.omega_max = bounds::acceptability_max_omega(N, l_max);

  // Enumerates coalitions of `size` and their rubbish patterns; returns
  // (patterns tried, failing patterns), stopping at the first failure when
  // asked to.
  auto sweep = [&](unsigned omega, unsigned size, bool stop_at_failure, std::string* example) {
    protocol::SchemeParams params;
    params.N = N;
    params.omega = omega;
    params.l_max = l_max;
    params.k = 2;
    params.s0 = 0.5;
    params.family = as2u::make_params(9, 2);
    protocol::validate(params);
    const as2u::Family family(params.family);
    CounterRng rng(seed, kAcceptabilityStream + 64 * N + l_max);
    const auto dep = protocol::deploy(params, rng.fork(1));
    auto adv = rng.fork(2);
    const BitString m = random_bits(params.family.a, adv);
    const auto sigma = protocol::sign(family, dep.signing_key, m);

    std::pair<std::uint64_t, std::uint64_t> tally{0, 0};
    std::vector<bool> pick(N, false);
    std::fill(pick.begin(), pick.begin() + size, true);
    do {
      std::vector<unsigned> coalition, honest;
      for (unsigned j = 1; j <= N; ++j) (pick[j - 1] ? coalition : honest).push_back(j);
      const std::uint64_t bits = std::uint64_t{size} * honest.size();
      for (std::uint64_t code = 0; code < (std::uint64_t{1} << bits); ++code) {
        ++tally.first;
        bool failed = false;
        for (std::size_t hi = 0; hi < honest.size() && !failed; ++hi) {
          auto share = dep.shares[honest[hi] - 1];
          for (std::size_t ci = 0; ci < coalition.size(); ++ci) {
            if ((code >> (ci * honest.size() + hi)) & 1) {
              for (auto& key : share.blocks[coalition[ci] - 1].keys) key.offset ^= 1;
            }
          }
          const auto mism = protocol::block_mismatches(params, family, share, m, sigma);
          const int level = protocol::verification_level(params, mism);
          if (level != static_cast<int>(l_max)) {
            failed = true;
            if (example && example->empty()) {
              std::ostringstream s;
              for (std::size_t ci = 0; ci < coalition.size(); ++ci) s << (ci ? "," : "") << 'P' << coalition[ci];
              s << " rubbish -> P" << honest[hi] << " drops it to level " << level;
              *example = s.str();
            }
          }
        }
        if (failed) {
          ++tally.second;
          if (stop_at_failure) return tally;
        }
      }
    } while (std::prev_permutation(pick.begin(), pick.end()));
    return tally;
  };

  for (unsigned size = 0; size <= out.omega_max; ++size) {
    const auto [tried, failed] = sweep(out.omega_max, size, false, nullptr);
    out.patterns += tried;
    out.failures += failed;
  }
  const unsigned over = out.omega_max + 1;
  if (over < N) {
    const auto [tried, failed] = sweep(over, over, true, &out.example);
    out.search_patterns = tried;
    out.counterexample = failed > 0;
  }
  return out;
}

namespace {

using Point = std::tuple<broadcast::Path, unsigned, unsigned>;

std::vector<Point> send_points(unsigned n, unsigned commander, unsigned omega, const std::set<unsigned>& faulty) {
  std::vector<Point> points;
  broadcast::Faults<int> recorder{faulty, [&](const broadcast::Path& p, unsigned from, unsigned to, const int& v) {
                                    points.emplace_back(p, from, to);
                                    return std::optional<int>(v);
                                  }};
  broadcast::broadcast(n, commander, 0, omega, recorder, 0);
  return points;
}

void judge(const broadcast::Result<int>& r, unsigned n, const std::set<unsigned>& faulty, unsigned commander,
           int input, BroadcastSweep& out) {
  std::set<int> values;
  for (unsigned i = 0; i < n; ++i) {
    if (!faulty.count(i)) values.insert(r.delivered[i]);
  }
  ++out.cases;
  if (values.size() > 1) ++out.agreement_violations;
  if (!faulty.count(commander) && (values.size() != 1 || *values.begin() != input)) ++out.validity_violations;
}

}  // namespace

BroadcastSweep broadcast_exhaustive(unsigned n, unsigned omega) {
  BroadcastSweep out;
  std::vector<bool> pick(n, false);
  std::fill(pick.begin(), pick.begin() + omega, true);
  do {
    std::set<unsigned> faulty;
    for (unsigned i = 0; i < n; ++i) {
      if (pick[i]) faulty.insert(i);
    }
    for (unsigned commander = 0; commander < n; ++commander) {
      const auto points = send_points(n, commander, omega, faulty);
      if (points.size() > 20) throw ParameterError("too many send points for an exhaustive sweep");
      std::uint64_t combos = 1;
      for (std::size_t i = 0; i < points.size(); ++i) combos *= 3;
      for (int input = 0; input <= 1; ++input) {
        for (std::uint64_t code = 0; code < combos; ++code) {
          std::map<Point, int> choice;
          std::uint64_t c = code;
          for (const auto& p : points) {
            choice[p] = static_cast<int>(c % 3);
            c /= 3;
          }
          broadcast::Faults<int> f{faulty, [&](const broadcast::Path& p, unsigned from, unsigned to,
                                               const int&) -> std::optional<int> {
                                     const int v = choice.at({p, from, to});
                                     if (v == 2) return std::nullopt;
                                     return v;
                                   }};
          judge(broadcast::broadcast(n, commander, input, omega, f, 0), n, faulty, commander, input, out);
        }
      }
    }
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return out;
}

BroadcastSweep broadcast_randomized(unsigned n, unsigned omega, std::uint64_t trials, std::uint64_t seed) {
  BroadcastSweep out;
  const CounterRng base(seed, 0xb0ad);
  for (std::uint64_t t = 0; t < trials; ++t) {
    auto rng = base.fork(t);
    std::vector<unsigned> order(n);
    std::iota(order.begin(), order.end(), 0u);
    shuffle(order, rng);
    const std::set<unsigned> faulty(order.begin(), order.begin() + omega);
    const unsigned commander = static_cast<unsigned>(rng.below(n));
    const int input = static_cast<int>(rng.below(2));
    auto moves = rng.fork(1);
    broadcast::Faults<int> f{faulty, [&](const broadcast::Path&, unsigned, unsigned, const int&) -> std::optional<int> {
                               const auto v = moves.below(3);
                               if (v == 2) return std::nullopt;
                               return static_cast<int>(v);
                             }};
    judge(broadcast::broadcast(n, commander, input, omega, f, 0), n, faulty, commander, input, out);
  }
  return out;
}

}  // namespace uss::attacks
