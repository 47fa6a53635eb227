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

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "uss/as2u.hpp"
#include "uss/bits.hpp"
#include "uss/bounds.hpp"
#include "uss/broadcast.hpp"
#include "uss/rng.hpp"

// Signing, multi-level verification and dispute resolution for a one-time
// signature shared among N internal recipients (P1..PN) and M external ones.
//
// Global key indices are 0-based: recipient i (1-based) owns the signing keys
// [(i-1)Nk, iNk) after the first distribution step.
namespace uss::protocol {

enum class Role : std::uint8_t { kSigner = 0, kInternal = 1, kExternal = 2 };

struct NodeId {
  Role role = Role::kSigner;
  unsigned index = 0;  // 0 for the signer, 1-based otherwise

  static NodeId signer() { return {Role::kSigner, 0}; }
  static NodeId internal(unsigned i) { return {Role::kInternal, i}; }
  static NodeId external(unsigned i) { return {Role::kExternal, i}; }

  bool is_signer() const { return role == Role::kSigner; }
  bool is_internal() const { return role == Role::kInternal; }
  bool is_external() const { return role == Role::kExternal; }

  // "S", "P3", "E1"
  std::string str() const;
  // Inverse of str(); throws ConfigError on malformed names.
  static NodeId parse(std::string_view name);

  friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

struct SchemeParams {
  unsigned N = 4;
  unsigned M = 0;
  unsigned omega = 1;
  unsigned l_max = 1;
  std::uint64_t k = 1;
  double s0 = 0.0;
  as2u::FamilyParams family;

  std::uint64_t signature_length() const { return std::uint64_t{N} * N * k; }
  std::uint64_t slice_length() const { return std::uint64_t{N} * k; }
  unsigned index_width() const { return ceil_log2(slice_length()); }
  // s_l * k
  double threshold(unsigned l) const { return (1.0 - double(l) / l_max) * s0 * double(k); }
};

// Throws ParameterError on inconsistent parameters. Deliberately does not
// enforce omega < N/(2 + l_max): that is a network property checked when a
// topology is built, and attacks must be able to step past it.
void validate(const SchemeParams& params);
SchemeParams make_scheme(const bounds::SchemeConfig& cfg);

struct SigningKey {
  std::vector<as2u::AuthKey> keys;  // N^2 k keys by global index
};

// Keys handed to one recipient in the first distribution step.
struct KeySlice {
  unsigned recipient = 0;
  std::uint64_t first = 0;  // global index of keys[0]
  std::vector<as2u::AuthKey> keys;
};

// R_{source -> dest} together with the keys at those indices.
struct KeyChunk {
  unsigned source = 0;
  unsigned dest = 0;
  std::vector<std::uint64_t> indices;  // global indices, in drawing order
  std::vector<as2u::AuthKey> keys;

  friend bool operator==(const KeyChunk&, const KeyChunk&) = default;
};

struct VerificationKeyShare {
  unsigned owner = 0;
  // blocks[j-1] = R_{j -> owner}. A block with no indices was never received
  // and fails every test.
  std::vector<KeyChunk> blocks;

  bool complete(const SchemeParams& params) const;
};

struct Step1Output {
  SigningKey signing_key;
  std::vector<KeySlice> slices;  // slices[i-1] for P_i
};

Step1Output distribute_step1(const SchemeParams& params, CounterRng& signer_rng);
// Uniformly random split of a slice into N chunks of k keys; element j-1 is
// destined to P_j (the element for the slice owner is kept).
std::vector<KeyChunk> distribute_step2(const SchemeParams& params, const KeySlice& slice, CounterRng& rng);
// Throws ConfigError if a chunk is addressed elsewhere or duplicated.
VerificationKeyShare assemble_share(const SchemeParams& params, unsigned owner, std::vector<KeyChunk> chunks);

// In-process distribution for tests and Monte Carlo runs. The signer draws
// from rng.fork(0) and P_i from rng.fork(i). `tamper`, when set, may rewrite
// each chunk in transit from P_source to P_dest (source != dest).
using ChunkTamper = std::function<void(KeyChunk& chunk)>;

struct Deployment {
  SigningKey signing_key;
  std::vector<std::vector<KeyChunk>> sent;  // sent[i-1][j-1]: chunk P_i produced for P_j
  std::vector<VerificationKeyShare> shares;  // shares[j-1]
};

Deployment deploy(const SchemeParams& params, const CounterRng& rng, const ChunkTamper& tamper = {});

struct Signature {
  std::vector<as2u::Tag> tags;  // by global key index

  friend bool operator==(const Signature&, const Signature&) = default;
};

Signature sign(const as2u::Family& family, const SigningKey& key, const BitString& m);

struct Package {
  BitString m;
  Signature sigma;
  int l_rec = 1;

  friend bool operator==(const Package&, const Package&) = default;
};

// Tags of `chunk` that disagree with the hash of m. Missing or malformed tags
// count as mismatches.
std::uint64_t count_mismatches(const as2u::Family& family, const KeyChunk& chunk,
                               const as2u::Family::Encoded& m, const Signature& sigma);
std::vector<std::uint64_t> block_mismatches(const SchemeParams& params, const as2u::Family& family,
                                            const VerificationKeyShare& share, const BitString& m,
                                            const Signature& sigma);

// T for one block at level l. At l = l_max the threshold is zero and the test
// passes only on an exact match.
bool test_passes(const SchemeParams& params, std::uint64_t mismatches, unsigned l);
bool test_block(const SchemeParams& params, const as2u::Family& family, const VerificationKeyShare& share,
                unsigned j, const BitString& m, const Signature& sigma, unsigned l);

// Largest l with more than omega + l*omega passing blocks, or -1.
int verification_level(const SchemeParams& params, std::span<const std::uint64_t> mismatches);

enum class Outcome { kAccepted, kRejected, kIgnoredBlocked, kIgnoredDuplicate, kInconclusive };
const char* to_string(Outcome outcome);

struct Verdict {
  Outcome outcome = Outcome::kRejected;
  int level = -1;            // l_ver, or l_ver^ext for external recipients
  bool may_forward = false;  // forwarded copies carry `level` as l_rec
  std::string note;
};

enum class MvResult { kAccepted, kRejected };
enum class MvAnswer { kAccepted, kRejected, kNone };
const char* to_string(MvAnswer answer);

// Byte-exact identity of (m, sigma); used as the MV store key.
std::string pair_key(const BitString& m, const Signature& sigma);

class InternalRecipient {
 public:
  InternalRecipient(const SchemeParams& params, unsigned index);

  unsigned index() const { return index_; }
  NodeId id() const { return NodeId::internal(index_); }
  const SchemeParams& params() const { return params_; }

  void set_share(VerificationKeyShare share);
  const VerificationKeyShare& share() const { return share_; }

  // l_ver of a pair without touching any state.
  int level(const BitString& m, const Signature& sigma) const;

  // Internal verification of a package received from `sender`.
  Verdict receive(const Package& package, NodeId sender);

  // Answer to a delegated verification request from external recipient
  // `external`; nullopt when the request is ignored. A repeated identical
  // request is answered again but counted only once.
  std::optional<int> respond(const Package& package, unsigned external);

  const std::set<NodeId>& block_list() const { return block_list_; }
  unsigned counter(unsigned external) const;

  void record_mv(const BitString& m, const Signature& sigma, MvResult result);
  MvAnswer mv_answer(const BitString& m, const Signature& sigma) const;

 private:
  void block(NodeId node);

  SchemeParams params_;
  as2u::Family family_;
  unsigned index_;
  VerificationKeyShare share_;
  std::set<NodeId> block_list_;
  std::vector<unsigned> counters_;  // by external index, slot 0 unused
  std::set<std::string> seen_packages_;
  std::map<std::string, int> seen_requests_;
  std::map<std::string, MvResult> mv_results_;
};

// max{l' : at least omega+1 responses are >= l'}, or -1.
int external_level(std::span<const int> responses, unsigned omega, unsigned l_max);

class ExternalRecipient {
 public:
  ExternalRecipient(const SchemeParams& params, unsigned index, std::vector<unsigned> connected);

  unsigned index() const { return index_; }
  NodeId id() const { return NodeId::external(index_); }
  const std::vector<unsigned>& connected() const { return connected_; }

  // Order in which connected internal recipients are drawn into a quorum.
  // Defaults to ascending index; entries must be connected nodes.
  void set_preference(std::vector<unsigned> order);

  struct Request {
    Package package;
    NodeId sender;
    std::vector<unsigned> quorum;  // internal recipients asked
  };

  // First half of delegated verification: either a request to send to
  // `quorum`, or an immediate verdict (blocked sender, duplicate). Throws
  // ConfigError if too few internal recipients are reachable.
  std::variant<Request, Verdict> begin(const Package& package, NodeId sender);
  // `responses` is aligned with request.quorum; nullopt means ignored.
  Verdict finish(const Request& request, std::span<const std::optional<int>> responses);

  // The 2 omega + 1 internal recipients queried for a majority-vote outcome.
  std::vector<unsigned> mv_quorum() const;

  const std::set<NodeId>& block_list() const { return block_list_; }

 private:
  std::vector<unsigned> candidates(std::optional<unsigned> exclude, std::size_t count) const;

  SchemeParams params_;
  unsigned index_;
  std::vector<unsigned> connected_;
  std::vector<unsigned> preference_;
  std::set<NodeId> block_list_;
  std::set<std::string> seen_packages_;
};

// Full delegated verification with an in-process responder callback.
using Responder = std::function<std::optional<int>(unsigned internal, const Package& package, unsigned external)>;
Verdict delegated_verify(ExternalRecipient& recipient, const Package& package, NodeId sender, const Responder& ask);

struct MvTally {
  MvResult result = MvResult::kRejected;
  bool initiator_dishonest = false;
};

// votes[j-1] is P_j's vote; the initiator's entry is replaced by 0.
MvTally tally_votes(std::span<const int> votes, unsigned initiator, unsigned omega);

MvAnswer mv_verify_external(std::span<const MvAnswer> answers, unsigned omega);

struct SignedMessage {
  BitString m;
  Signature sigma;

  friend bool operator==(const SignedMessage&, const SignedMessage&) = default;
};

// Misbehaviour of faulty internal recipients (1-based) during a vote. Both
// hooks receive the honest value and may substitute or drop it; unset hooks
// leave faulty nodes behaving honestly.
struct VoteAdversary {
  std::set<unsigned> faulty;
  std::function<std::optional<SignedMessage>(const broadcast::Path&, unsigned from, unsigned to,
                                              const SignedMessage& honest)>
      pair;
  std::function<std::optional<int>(const broadcast::Path&, unsigned from, unsigned to, int honest)> vote;
};

struct MajorityVoteReport {
  std::vector<std::optional<MvTally>> tally;  // per P_j; empty for faulty nodes
  std::uint64_t messages = 0;
  unsigned rounds = 0;
};

// Runs the vote among `nodes` (nodes[j-1] is P_j) and records the outcome at
// every honest node. Throws PreconditionError if an honest initiator does not
// hold the pair at level 0. The observer sees 1-based node indices, with
// vote-phase rounds numbered after the omega + 1 rounds of the pair phase.
MajorityVoteReport majority_vote(std::vector<InternalRecipient>& nodes, unsigned initiator, const BitString& m,
                                 const Signature& sigma, const VoteAdversary& adversary = {},
                                 const broadcast::MessageObserver& observer = {});

}  // namespace uss::protocol
