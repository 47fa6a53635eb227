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

#include "uss/protocol.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "uss/error.hpp"

namespace uss::protocol {

std::string NodeId::str() const {
  switch (role) {
    case Role::kSigner:
      return "S";
    case Role::kInternal:
      return "P" + std::to_string(index);
    case Role::kExternal:
      return "E" + std::to_string(index);
  }
  return "?";
}

NodeId NodeId::parse(std::string_view name) {
  if (name == "S" || name == "P0") return signer();
  if (name.size() < 2 || (name[0] != 'P' && name[0] != 'E')) throw ConfigError("bad node name: " + std::string(name));
  unsigned idx = 0;
  auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), idx);
  if (ec != std::errc() || ptr != name.data() + name.size() || idx == 0) {
    throw ConfigError("bad node name: " + std::string(name));
  }
  return name[0] == 'P' ? internal(idx) : external(idx);
}

void validate(const SchemeParams& p) {
  if (p.N < 1) throw ParameterError("N must be positive");
  if (p.l_max < 1) throw ParameterError("l_max must be at least 1");
  if (p.k < 1) throw ParameterError("k must be positive");
  if (!(p.s0 >= 0.0 && p.s0 < 1.0)) throw ParameterError("s0 must lie in [0, 1)");
  if (p.family.y != 3 * p.family.b + 2 * p.family.s) throw ParameterError("inconsistent family parameters");
  if (p.signature_length() > (std::uint64_t{1} << 32)) throw ParameterError("signature too long to simulate");
}

SchemeParams make_scheme(const bounds::SchemeConfig& cfg) {
  SchemeParams p;
  p.N = cfg.N;
  p.M = cfg.M;
  p.omega = cfg.omega;
  p.l_max = cfg.l_max;
  p.k = cfg.k;
  p.s0 = cfg.s0;
  p.family = as2u::make_params(cfg.a, cfg.b);
  validate(p);
  return p;
}

bool VerificationKeyShare::complete(const SchemeParams& params) const {
  if (blocks.size() != params.N) return false;
  return std::all_of(blocks.begin(), blocks.end(), [&](const KeyChunk& c) { return c.indices.size() == params.k; });
}

Step1Output distribute_step1(const SchemeParams& params, CounterRng& signer_rng) {
  validate(params);
  Step1Output out;
  auto& keys = out.signing_key.keys;
  keys.reserve(params.signature_length());
  for (std::uint64_t g = 0; g < params.signature_length(); ++g) keys.push_back(as2u::random_key(params.family, signer_rng));
  const std::uint64_t width = params.slice_length();
  for (unsigned i = 1; i <= params.N; ++i) {
    KeySlice slice{i, (i - 1) * width, {}};
    slice.keys.assign(keys.begin() + static_cast<std::ptrdiff_t>(slice.first),
                      keys.begin() + static_cast<std::ptrdiff_t>(slice.first + width));
    out.slices.push_back(std::move(slice));
  }
  return out;
}

std::vector<KeyChunk> distribute_step2(const SchemeParams& params, const KeySlice& slice, CounterRng& rng) {
  if (slice.keys.size() != params.slice_length()) throw LengthError("key slice has the wrong size");
  std::vector<std::uint64_t> order(slice.keys.size());
  std::iota(order.begin(), order.end(), std::uint64_t{0});
  shuffle(order, rng);
  std::vector<KeyChunk> chunks(params.N);
  for (unsigned j = 1; j <= params.N; ++j) {
    auto& c = chunks[j - 1];
    c.source = slice.recipient;
    c.dest = j;
    for (std::uint64_t r = 0; r < params.k; ++r) {
      const std::uint64_t local = order[(j - 1) * params.k + r];
      c.indices.push_back(slice.first + local);
      c.keys.push_back(slice.keys[local]);
    }
  }
  return chunks;
}

VerificationKeyShare assemble_share(const SchemeParams& params, unsigned owner, std::vector<KeyChunk> chunks) {
  VerificationKeyShare share;
  share.owner = owner;
  share.blocks.resize(params.N);
  std::vector<bool> seen(params.N + 1, false);
  for (auto& c : chunks) {
    if (c.dest != owner || c.source < 1 || c.source > params.N) throw ConfigError("key chunk addressed elsewhere");
    if (seen[c.source]) throw ConfigError("duplicate key chunk from P" + std::to_string(c.source));
    if (c.indices.size() != c.keys.size()) throw LengthError("key chunk index/key count mismatch");
    seen[c.source] = true;
    share.blocks[c.source - 1] = std::move(c);
  }
  for (unsigned j = 1; j <= params.N; ++j) {
    share.blocks[j - 1].source = j;
    share.blocks[j - 1].dest = owner;
  }
  return share;
}

Deployment deploy(const SchemeParams& params, const CounterRng& rng, const ChunkTamper& tamper) {
  auto signer_rng = rng.fork(0);
  auto step1 = distribute_step1(params, signer_rng);
  Deployment d;
  d.signing_key = std::move(step1.signing_key);
  std::vector<std::vector<KeyChunk>> inbox(params.N);
  for (unsigned i = 1; i <= params.N; ++i) {
    auto node_rng = rng.fork(i);
    auto chunks = distribute_step2(params, step1.slices[i - 1], node_rng);
    d.sent.push_back(chunks);
    for (auto& c : chunks) {
      if (tamper && c.dest != c.source) tamper(c);
      inbox[c.dest - 1].push_back(std::move(c));
    }
  }
  for (unsigned j = 1; j <= params.N; ++j) d.shares.push_back(assemble_share(params, j, std::move(inbox[j - 1])));
  return d;
}

Signature sign(const as2u::Family& family, const SigningKey& key, const BitString& m) {
  const auto encoded = family.encode(m);
  Signature sigma;
  sigma.tags.reserve(key.keys.size());
  for (const auto& k : key.keys) sigma.tags.push_back(family.eval(k, encoded));
  return sigma;
}

std::uint64_t count_mismatches(const as2u::Family& family, const KeyChunk& chunk, const as2u::Family::Encoded& m,
                               const Signature& sigma) {
  std::uint64_t bad = 0;
  for (std::size_t r = 0; r < chunk.indices.size(); ++r) {
    const std::uint64_t g = chunk.indices[r];
    if (g >= sigma.tags.size()) {
      ++bad;
      continue;
    }
    as2u::Tag expected;
    try {
      expected = family.eval(chunk.keys[r], m);
    } catch (const LengthError&) {
      ++bad;  // a malformed key can never confirm a tag
      continue;
    }
    if (expected != sigma.tags[g]) ++bad;
  }
  return bad;
}

std::vector<std::uint64_t> block_mismatches(const SchemeParams& params, const as2u::Family& family,
                                            const VerificationKeyShare& share, const BitString& m,
                                            const Signature& sigma) {
  std::vector<std::uint64_t> out(params.N, params.k);
  if (m.size() > params.family.a) return out;
  const auto encoded = family.encode(m);
  for (unsigned j = 0; j < params.N && j < share.blocks.size(); ++j) {
    const auto& block = share.blocks[j];
    if (block.indices.size() != params.k) continue;
    out[j] = count_mismatches(family, block, encoded, sigma);
  }
  return out;
}

bool test_passes(const SchemeParams& params, std::uint64_t mismatches, unsigned l) {
  if (l >= params.l_max) return mismatches == 0;
  return double(mismatches) < params.threshold(l);
}

bool test_block(const SchemeParams& params, const as2u::Family& family, const VerificationKeyShare& share, unsigned j,
                const BitString& m, const Signature& sigma, unsigned l) {
  if (j < 1 || j > params.N) throw ParameterError("block index out of range");
  const auto counts = block_mismatches(params, family, share, m, sigma);
  return test_passes(params, counts[j - 1], l);
}

int verification_level(const SchemeParams& params, std::span<const std::uint64_t> mismatches) {
  int best = -1;
  for (unsigned l = 0; l <= params.l_max; ++l) {
    std::uint64_t passing = 0;
    for (auto g : mismatches) passing += test_passes(params, g, l) ? 1 : 0;
    if (passing > std::uint64_t{params.omega} + std::uint64_t{l} * params.omega) best = static_cast<int>(l);
  }
  return best;
}

const char* to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::kAccepted:
      return "accepted";
    case Outcome::kRejected:
      return "rejected";
    case Outcome::kIgnoredBlocked:
      return "ignored_blocked";
    case Outcome::kIgnoredDuplicate:
      return "ignored_duplicate";
    case Outcome::kInconclusive:
      return "inconclusive";
  }
  return "?";
}

const char* to_string(MvAnswer answer) {
  switch (answer) {
    case MvAnswer::kAccepted:
      return "accepted";
    case MvAnswer::kRejected:
      return "rejected";
    case MvAnswer::kNone:
      return "none";
  }
  return "?";
}

namespace {

void append_bytes(std::string& out, const BitString& bits) {
  out += std::to_string(bits.size());
  out += ':';
  out.append(bits.bytes().begin(), bits.bytes().end());
}

void append_tags(std::string& out, const Signature& sigma) {
  out += std::to_string(sigma.tags.size());
  out += ':';
  for (auto t : sigma.tags) {
    for (int s = 56; s >= 0; s -= 8) out.push_back(static_cast<char>((t >> s) & 0xff));
  }
}

std::string package_key(const Package& p, NodeId sender) {
  std::string key = sender.str() + '|' + std::to_string(p.l_rec) + '|';
  append_bytes(key, p.m);
  append_tags(key, p.sigma);
  return key;
}

}  // namespace

std::string pair_key(const BitString& m, const Signature& sigma) {
  std::string key;
  append_bytes(key, m);
  append_tags(key, sigma);
  return key;
}

InternalRecipient::InternalRecipient(const SchemeParams& params, unsigned index)
    : params_(params), family_(params.family), index_(index), counters_(params.M + 1, 0) {
  validate(params);
  if (index < 1 || index > params.N) throw ParameterError("internal recipient index out of range");
  share_.owner = index;
}

void InternalRecipient::set_share(VerificationKeyShare share) {
  if (share.owner != index_) throw ConfigError("verification key share belongs to another recipient");
  share_ = std::move(share);
}

int InternalRecipient::level(const BitString& m, const Signature& sigma) const {
  const auto counts = block_mismatches(params_, family_, share_, m, sigma);
  return verification_level(params_, counts);
}

void InternalRecipient::block(NodeId node) {
  if (node != id()) block_list_.insert(node);
}

Verdict InternalRecipient::receive(const Package& package, NodeId sender) {
  if (block_list_.count(sender) != 0) return {Outcome::kIgnoredBlocked, -1, false, "sender is blocked"};
  if (!seen_packages_.insert(package_key(package, sender)).second) {
    return {Outcome::kIgnoredDuplicate, -1, false, "already processed"};
  }
  const int l_ver = level(package.m, package.sigma);
  if (l_ver >= package.l_rec - 1) return {Outcome::kAccepted, l_ver, l_ver >= 1, {}};
  block(sender);
  return {Outcome::kRejected, l_ver, false, "sender blocked"};
}

std::optional<int> InternalRecipient::respond(const Package& package, unsigned external) {
  const NodeId requester = NodeId::external(external);
  if (external < 1 || external > params_.M) throw ParameterError("external recipient index out of range");
  if (block_list_.count(requester) != 0) return std::nullopt;
  const std::string key = package_key(package, requester);
  if (auto it = seen_requests_.find(key); it != seen_requests_.end()) return it->second;
  const int l_ver = level(package.m, package.sigma);
  seen_requests_.emplace(key, l_ver);
  if (l_ver < package.l_rec - 2) {
    auto& cnt = counters_[external];
    if (cnt < params_.M + params_.omega) ++cnt;
    if (cnt >= params_.M + params_.omega) block(requester);
  }
  return l_ver;
}

unsigned InternalRecipient::counter(unsigned external) const {
  if (external < 1 || external > params_.M) throw ParameterError("external recipient index out of range");
  return counters_[external];
}

void InternalRecipient::record_mv(const BitString& m, const Signature& sigma, MvResult result) {
  mv_results_.insert_or_assign(pair_key(m, sigma), result);
}

MvAnswer InternalRecipient::mv_answer(const BitString& m, const Signature& sigma) const {
  auto it = mv_results_.find(pair_key(m, sigma));
  if (it == mv_results_.end()) return MvAnswer::kNone;
  return it->second == MvResult::kAccepted ? MvAnswer::kAccepted : MvAnswer::kRejected;
}

int external_level(std::span<const int> responses, unsigned omega, unsigned l_max) {
  for (int l = static_cast<int>(l_max); l >= 0; --l) {
    const auto count = std::count_if(responses.begin(), responses.end(), [l](int r) { return r >= l; });
    if (static_cast<std::uint64_t>(count) >= omega + 1) return l;
  }
  return -1;
}

ExternalRecipient::ExternalRecipient(const SchemeParams& params, unsigned index, std::vector<unsigned> connected)
    : params_(params), index_(index), connected_(std::move(connected)) {
  validate(params);
  if (index < 1 || index > params.M) throw ParameterError("external recipient index out of range");
  std::sort(connected_.begin(), connected_.end());
  connected_.erase(std::unique(connected_.begin(), connected_.end()), connected_.end());
  for (unsigned c : connected_) {
    if (c < 1 || c > params.N) throw ConfigError("external recipient linked to unknown node");
  }
  preference_ = connected_;
}

void ExternalRecipient::set_preference(std::vector<unsigned> order) {
  for (unsigned c : order) {
    if (!std::binary_search(connected_.begin(), connected_.end(), c)) {
      throw ConfigError("preferred responder P" + std::to_string(c) + " is not connected to " + id().str());
    }
  }
  // Nodes left out of the override keep their default position after it.
  for (unsigned c : connected_) {
    if (std::find(order.begin(), order.end(), c) == order.end()) order.push_back(c);
  }
  preference_ = std::move(order);
}

std::vector<unsigned> ExternalRecipient::candidates(std::optional<unsigned> exclude, std::size_t count) const {
  std::vector<unsigned> out;
  for (unsigned c : preference_) {
    if (out.size() == count) break;
    if (exclude && c == *exclude) continue;
    out.push_back(c);
  }
  if (out.size() < count) {
    throw ConfigError(id().str() + " reaches only " + std::to_string(out.size()) + " of the " +
                      std::to_string(count) + " internal recipients it must query");
  }
  return out;
}

std::vector<unsigned> ExternalRecipient::mv_quorum() const { return candidates(std::nullopt, 2 * params_.omega + 1); }

std::variant<ExternalRecipient::Request, Verdict> ExternalRecipient::begin(const Package& package, NodeId sender) {
  if (block_list_.count(sender) != 0) return Verdict{Outcome::kIgnoredBlocked, -1, false, "sender is blocked"};
  if (!seen_packages_.insert(package_key(package, sender)).second) {
    return Verdict{Outcome::kIgnoredDuplicate, -1, false, "already processed"};
  }
  Request req{package, sender, {}};
  if (sender.is_internal()) {
    req.quorum = candidates(sender.index, 2 * params_.omega);
  } else {
    req.quorum = candidates(std::nullopt, 2 * params_.omega + 1);
  }
  return req;
}

Verdict ExternalRecipient::finish(const Request& request, std::span<const std::optional<int>> responses) {
  if (responses.size() != request.quorum.size()) throw ParameterError("response count does not match the quorum");
  std::vector<int> levels;
  if (request.sender.is_internal()) levels.push_back(request.package.l_rec);
  for (const auto& r : responses) {
    if (r) levels.push_back(*r);
  }
  const int l_ext = external_level(levels, params_.omega, params_.l_max);
  if (levels.size() < 2 * std::size_t{params_.omega} + 1) {
    return {Outcome::kInconclusive, l_ext, false, "too few responders; nobody blocked"};
  }
  if (l_ext >= request.package.l_rec - 1) return {Outcome::kAccepted, l_ext, l_ext >= 1, {}};
  if (request.sender != id()) block_list_.insert(request.sender);
  return {Outcome::kRejected, l_ext, false, "sender blocked"};
}

Verdict delegated_verify(ExternalRecipient& recipient, const Package& package, NodeId sender, const Responder& ask) {
  auto step = recipient.begin(package, sender);
  if (auto* v = std::get_if<Verdict>(&step)) return *v;
  const auto& req = std::get<ExternalRecipient::Request>(step);
  std::vector<std::optional<int>> responses;
  responses.reserve(req.quorum.size());
  for (unsigned q : req.quorum) responses.push_back(ask(q, package, recipient.index()));
  return recipient.finish(req, responses);
}

MvTally tally_votes(std::span<const int> votes, unsigned initiator, unsigned omega) {
  const std::size_t n = votes.size();
  if (initiator < 1 || initiator > n) throw ParameterError("initiator out of range");
  std::size_t accepting = 0;
  std::size_t high = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const int v = (j + 1 == initiator) ? 0 : votes[j];
    accepting += v >= 0 ? 1 : 0;
    high += v >= 2 ? 1 : 0;
  }
  MvTally t;
  t.result = (2 * accepting > n) ? MvResult::kAccepted : MvResult::kRejected;
  t.initiator_dishonest = high >= std::size_t{omega} + 1;
  return t;
}

MvAnswer mv_verify_external(std::span<const MvAnswer> answers, unsigned omega) {
  const auto yes = std::count(answers.begin(), answers.end(), MvAnswer::kAccepted);
  const auto no = std::count(answers.begin(), answers.end(), MvAnswer::kRejected);
  if (static_cast<std::uint64_t>(yes) >= omega + 1) return MvAnswer::kAccepted;
  if (static_cast<std::uint64_t>(no) >= omega + 1) return MvAnswer::kRejected;
  return MvAnswer::kNone;
}

MajorityVoteReport majority_vote(std::vector<InternalRecipient>& nodes, unsigned initiator, const BitString& m,
                                 const Signature& sigma, const VoteAdversary& adversary,
                                 const broadcast::MessageObserver& observer) {
  const unsigned n = static_cast<unsigned>(nodes.size());
  if (n == 0) throw ParameterError("majority vote needs participants");
  const auto& params = nodes.front().params();
  if (initiator < 1 || initiator > n) throw ParameterError("initiator out of range");
  const bool initiator_honest = adversary.faulty.count(initiator) == 0;
  if (initiator_honest && nodes[initiator - 1].level(m, sigma) != 0) {
    throw PreconditionError("an honest initiator holds the pair at a level other than 0");
  }

  // The broadcast engine numbers participants from 0.
  std::set<unsigned> faulty0;
  for (unsigned f : adversary.faulty) {
    if (f < 1 || f > n) throw ParameterError("faulty node out of range");
    faulty0.insert(f - 1);
  }
  const unsigned phase = params.omega + 1;
  MajorityVoteReport report;

  broadcast::Faults<SignedMessage> pair_faults{faulty0, {}};
  if (adversary.pair) {
    pair_faults.send = [&](const broadcast::Path& path, unsigned from, unsigned to, const SignedMessage& honest) {
      broadcast::Path p1;
      for (unsigned q : path) p1.push_back(q + 1);
      return adversary.pair(p1, from + 1, to + 1, honest);
    };
  }
  broadcast::MessageObserver pair_obs;
  if (observer) pair_obs = [&](unsigned round, unsigned from, unsigned to) { observer(round, from + 1, to + 1); };
  const SignedMessage input{m, sigma};
  auto pairs = broadcast::broadcast(n, initiator - 1, input, params.omega, pair_faults, SignedMessage{}, pair_obs);
  report.messages += pairs.messages;

  // Each node votes on the pair it received; every vote is broadcast.
  std::vector<int> own_vote(n, -1);
  for (unsigned j = 0; j < n; ++j) own_vote[j] = nodes[j].level(pairs.delivered[j].m, pairs.delivered[j].sigma);

  broadcast::Faults<int> vote_faults{faulty0, {}};
  if (adversary.vote) {
    vote_faults.send = [&](const broadcast::Path& path, unsigned from, unsigned to, int honest) {
      broadcast::Path p1;
      for (unsigned q : path) p1.push_back(q + 1);
      return adversary.vote(p1, from + 1, to + 1, honest);
    };
  }
  broadcast::MessageObserver vote_obs;
  if (observer) {
    vote_obs = [&](unsigned round, unsigned from, unsigned to) { observer(phase + round, from + 1, to + 1); };
  }
  // received[j][v]: vote of P_{v+1} as delivered at P_{j+1}.
  std::vector<std::vector<int>> received(n, std::vector<int>(n, -1));
  for (unsigned v = 0; v < n; ++v) {
    auto res = broadcast::broadcast(n, v, own_vote[v], params.omega, vote_faults, -1, vote_obs);
    report.messages += res.messages;
    for (unsigned j = 0; j < n; ++j) received[j][v] = res.delivered[j];
  }
  report.rounds = 2 * phase;

  report.tally.resize(n);
  for (unsigned j = 0; j < n; ++j) {
    if (faulty0.count(j) != 0) continue;
    const auto t = tally_votes(received[j], initiator, params.omega);
    report.tally[j] = t;
    nodes[j].record_mv(pairs.delivered[j].m, pairs.delivered[j].sigma, t.result);
  }
  return report;
}

}  // namespace uss::protocol
