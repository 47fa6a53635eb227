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
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "uss/bits.hpp"
#include "uss/bounds.hpp"
#include "uss/protocol.hpp"

// Deterministic discrete-event model of the QKD network running one signing
// round: topology and key pools, one-time-pad and authentication key
// accounting, an event queue ordered by (tick, insertion order), and per-node
// behaviour that is honest or follows a named adversarial strategy.
namespace uss::netsim {

using protocol::NodeId;

enum class Purpose { kOtp, kAuth };

struct Link {
  NodeId a;  // a < b
  NodeId b;
  double distance_km = 0.0;
  std::uint64_t credited = 0;
  std::uint64_t otp_debit = 0;
  std::uint64_t auth_debit = 0;
  double carry = 0.0;  // fractional refill not yet credited

  std::uint64_t balance() const { return credited - otp_debit - auth_debit; }
  // Both endpoints belong to the internal subnetwork (signer and P_i).
  bool internal() const { return !a.is_external() && !b.is_external(); }
};

struct TopologySpec {
  unsigned N = 4;
  unsigned M = 0;
  unsigned omega = 1;
  unsigned l_max = 1;
  // Internal recipients each external node is linked to; an external node
  // without an entry is linked to every internal recipient.
  std::map<unsigned, std::vector<unsigned>> external_links;
  // Extra external-to-external links, used for forwarding between them.
  std::vector<std::pair<unsigned, unsigned>> external_pairs;
  double distance_km = 10.0;
  std::map<std::pair<NodeId, NodeId>, double> distances;
  std::uint64_t pool_bits = std::uint64_t{1} << 40;
  std::map<std::pair<NodeId, NodeId>, std::uint64_t> pools;
};

class Topology {
 public:
  // Throws ConfigError on connectivity violations or when omega does not
  // satisfy omega < N / (2 + l_max).
  static Topology build(const TopologySpec& spec);

  const TopologySpec& spec() const { return spec_; }
  std::vector<NodeId> nodes() const;
  bool linked(NodeId x, NodeId y) const;
  Link& link(NodeId x, NodeId y);
  const Link& link(NodeId x, NodeId y) const;
  std::size_t link_index(NodeId x, NodeId y) const;
  std::vector<Link>& links() { return links_; }
  const std::vector<Link>& links() const { return links_; }
  std::vector<unsigned> internal_neighbours(unsigned external) const;

  // Removes `bits` from the pool of link (x, y). Throws PoolExhausted, and
  // ConfigError for one-time-pad use on a link leaving the internal subnetwork.
  void debit(NodeId x, NodeId y, std::uint64_t bits, Purpose purpose);

 private:
  TopologySpec spec_;
  std::vector<Link> links_;
  std::map<std::pair<NodeId, NodeId>, std::size_t> index_;
};

// Credits every link with rate0 * exp(-gamma * distance) * duration bits.
void refill(Topology& topology, double rate0, double gamma, double duration_s);

enum class Behavior {
  kHonest,
  kRubbishKeys,       // internal: rubbish keys to `targets` in the second distribution step
  kCorruptSignature,  // signer: flips a `fraction` of the tags (in `targets` slices if given)
  kLieVerify,         // internal: answers every delegated verification with -1
  kLieMv,             // internal: votes -1 and inverts majority-vote answers
  kEquivocate,        // internal: sends conflicting values during broadcasts
  kSilent,            // internal: sends nothing after receiving its slice
};

const char* to_string(Behavior b);
Behavior parse_behavior(const std::string& name);

struct BehaviorSpec {
  Behavior kind = Behavior::kHonest;
  std::vector<unsigned> targets;
  double fraction = 0.0;
};

struct Step {
  enum class Op { kSend, kForward, kVote, kMvQuery };
  Op op = Op::kSend;
  NodeId from;  // sender, forwarder, vote initiator or querying external node
  NodeId to;
  std::optional<int> l_rec;  // send only; defaults to l_max
  std::uint64_t corrupt = 0;  // send only: tags flipped before sending
};

struct Scenario {
  std::string name;
  protocol::SchemeParams params;
  TopologySpec topology;
  std::map<NodeId, BehaviorSpec> behaviors;
  std::map<unsigned, std::vector<unsigned>> preferences;  // external -> responder order
  BitString message;         // exactly as signed
  std::vector<Step> steps;   // empty: send to every internal, forward to every external
  bool auth_accounting = false;
  double eps_auth = 1e-14;
  std::uint64_t seed = 1;
};

struct VerdictRecord {
  std::uint64_t tick = 0;
  NodeId node;
  NodeId sender;
  protocol::Outcome outcome = protocol::Outcome::kRejected;
  int level = -1;
};

struct MvQueryRecord {
  std::uint64_t tick = 0;
  NodeId node;
  protocol::MvAnswer answer = protocol::MvAnswer::kNone;
};

struct VoteRecord {
  std::uint64_t tick = 0;
  unsigned initiator = 0;
  bool refused = false;
  std::map<unsigned, protocol::MvTally> tallies;  // honest internal node -> outcome
};

struct LinkLedger {
  NodeId a;
  NodeId b;
  bool internal = false;
  std::uint64_t credited = 0;
  std::uint64_t otp = 0;
  std::uint64_t auth = 0;
  std::uint64_t balance = 0;
};

struct RunResult {
  bool aborted = false;
  std::string abort_reason;
  std::vector<std::string> trace;  // one JSON record per line
  std::vector<VerdictRecord> verdicts;
  std::vector<MvQueryRecord> mv_queries;
  std::vector<VoteRecord> votes;
  std::vector<LinkLedger> ledger;
  std::map<NodeId, std::vector<NodeId>> block_lists;      // non-empty lists only
  std::map<std::pair<unsigned, unsigned>, unsigned> counters;  // (P_i, E_j) -> cnt, non-zero only
  bounds::KeyConsumption expected;
  unsigned auth_bits_per_message = 0;  // 0 when accounting is off
  // OTP debits equal L_sr on every signer link and L_rr on every
  // recipient-recipient link.
  bool ledger_matches = false;

  std::string trace_text() const;
};

// Runs the scenario on `topology` (taken by value; the result carries the
// final ledger). The outcome is a pure function of the arguments.
RunResult run(Topology topology, const Scenario& scenario);

struct ThroughputReport {
  double duration_s = 0.0;
  std::uint64_t completed = 0;  // full signing-key sets distributed
  double simulated_rate = 0.0;  // completions per second
  double model_rate = 0.0;      // bounds::uss_rate
};

// Refills pools in `step_s` increments and distributes a signing-key set
// whenever every signer link holds L_sr and every recipient link L_rr bits.
ThroughputReport throughput(const bounds::SchemeConfig& cfg, const bounds::LinkModel& links, double duration_s,
                            double step_s);

}  // namespace uss::netsim
