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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "uss/as2u.hpp"
#include "uss/error.hpp"
#include "uss/netsim.hpp"
#include "uss/scenario.hpp"

namespace uss::netsim {
namespace {

using protocol::MvAnswer;
using protocol::Outcome;

Scenario small(unsigned N = 4, unsigned M = 1, unsigned omega = 1, unsigned l_max = 1) {
  Scenario sc;
  sc.name = "small";
  const std::string text = "hello";
  sc.message = as2u::with_length_prefix(
      BitString::from_bytes(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size())));
  bounds::SchemeConfig cfg{N, M, omega, l_max, sc.message.size(), 1e-10, 24, 4, 0.3};
  sc.params = protocol::make_scheme(cfg);
  sc.topology.N = N;
  sc.topology.M = M;
  sc.topology.omega = omega;
  sc.topology.l_max = l_max;
  sc.seed = 7;
  return sc;
}

RunResult go(const Scenario& sc) { return run(Topology::build(sc.topology), sc); }

std::vector<VerdictRecord> verdicts_of(const RunResult& r, NodeId node) {
  std::vector<VerdictRecord> out;
  for (const auto& v : r.verdicts) {
    if (v.node == node) out.push_back(v);
  }
  return out;
}

TEST(Topology, LinksInternalNetworkAllToAll) {
  TopologySpec spec;
  spec.N = 4;
  spec.M = 2;
  spec.omega = 1;
  spec.external_links[2] = {1, 2, 4};
  spec.external_pairs = {{1, 2}};
  const auto t = Topology::build(spec);
  EXPECT_EQ(t.links().size(), 10u + 4u + 3u + 1u);
  EXPECT_TRUE(t.linked(NodeId::signer(), NodeId::internal(3)));
  EXPECT_FALSE(t.linked(NodeId::signer(), NodeId::external(1)));
  EXPECT_FALSE(t.linked(NodeId::external(2), NodeId::internal(3)));
  EXPECT_EQ(t.internal_neighbours(2), (std::vector<unsigned>{1, 2, 4}));
  EXPECT_EQ(t.nodes().size(), 7u);
}

TEST(Topology, RejectsUnderConnectedExternal) {
  TopologySpec spec;
  spec.N = 4;
  spec.M = 1;
  spec.omega = 1;
  spec.external_links[1] = {1, 2};
  EXPECT_THROW(Topology::build(spec), ConfigError);
}

TEST(Topology, RejectsOmegaBeyondAcceptability) {
  TopologySpec spec;
  spec.N = 6;
  spec.omega = 2;
  spec.l_max = 1;
  EXPECT_THROW(Topology::build(spec), ConfigError);
  spec.N = 7;
  EXPECT_NO_THROW(Topology::build(spec));
}

TEST(Topology, DebitEnforcesPoolAndOtpConfinement) {
  TopologySpec spec;
  spec.N = 4;
  spec.M = 1;
  spec.omega = 1;
  spec.pool_bits = 100;
  auto t = Topology::build(spec);
  t.debit(NodeId::internal(1), NodeId::internal(2), 60, Purpose::kOtp);
  t.debit(NodeId::internal(2), NodeId::internal(1), 40, Purpose::kAuth);
  EXPECT_EQ(t.link(NodeId::internal(1), NodeId::internal(2)).balance(), 0u);
  EXPECT_THROW(t.debit(NodeId::internal(1), NodeId::internal(2), 1, Purpose::kAuth), PoolExhausted);
  EXPECT_THROW(t.debit(NodeId::external(1), NodeId::internal(1), 8, Purpose::kOtp), ConfigError);
  EXPECT_NO_THROW(t.debit(NodeId::external(1), NodeId::internal(1), 8, Purpose::kAuth));
}

TEST(Refill, CreditsRateTimesAttenuationWithCarry) {
  TopologySpec spec;
  spec.N = 1;
  spec.omega = 0;
  spec.pool_bits = 0;
  spec.distance_km = 0.0;
  auto t = Topology::build(spec);
  refill(t, 1000.0, 0.0, 1.5);
  EXPECT_EQ(t.links()[0].credited, 1500u);

  auto u = Topology::build(spec);
  for (int i = 0; i < 3; ++i) refill(u, 1.0, 0.0, 0.4);
  EXPECT_EQ(u.links()[0].credited, 1u);  // 0.4 + 0.4 + 0.4

  spec.distance_km = 50.0;
  auto v = Topology::build(spec);
  refill(v, 1e6, 0.046, 1.0);
  EXPECT_EQ(v.links()[0].credited, static_cast<std::uint64_t>(std::floor(1e6 * std::exp(-0.046 * 50.0))));
}

TEST(Run, HonestRunAcceptsEverywhereAtTopLevel) {
  const auto sc = small();
  const auto r = go(sc);
  ASSERT_FALSE(r.aborted) << r.abort_reason;
  ASSERT_EQ(r.verdicts.size(), 5u);
  for (const auto& v : r.verdicts) {
    EXPECT_EQ(v.outcome, Outcome::kAccepted) << v.node.str();
    EXPECT_EQ(v.level, 1) << v.node.str();
  }
  EXPECT_TRUE(r.block_lists.empty());
  EXPECT_TRUE(r.ledger_matches);
}

TEST(Run, LedgerMatchesKeyConsumption) {
  const auto sc = small(5, 0, 1, 2);
  const auto r = go(sc);
  const auto kc = bounds::key_consumption(5, sc.params.k, sc.params.family.y, sc.params.family.b);
  for (const auto& l : r.ledger) {
    EXPECT_EQ(l.otp, l.a.is_signer() ? kc.L_sr : kc.L_rr) << l.a.str() << "-" << l.b.str();
    EXPECT_EQ(l.auth, 0u);
  }
  EXPECT_TRUE(r.ledger_matches);
}

TEST(Run, TraceIsDeterministicPerSeed) {
  auto sc = small();
  const auto a = go(sc).trace_text();
  EXPECT_EQ(a, go(sc).trace_text());
  sc.seed = 8;
  EXPECT_NE(a, go(sc).trace_text());
}

TEST(Run, AuthAccountingDebitsEveryMessage) {
  auto sc = small(4, 0);
  sc.auth_accounting = true;
  const auto r = go(sc);
  EXPECT_EQ(r.auth_bits_per_message, 47u);
  for (const auto& l : r.ledger) {
    // S-P_i: slice and package; P_i-P_j: one chunk each way.
    EXPECT_EQ(l.auth, 2u * 47u) << l.a.str() << "-" << l.b.str();
  }
}

TEST(Run, PoolExhaustionAborts) {
  auto sc = small();
  sc.topology.pools[{NodeId::internal(1), NodeId::internal(2)}] = 10;
  const auto r = go(sc);
  EXPECT_TRUE(r.aborted);
  EXPECT_NE(r.abort_reason.find("P1-P2"), std::string::npos);
  EXPECT_FALSE(r.ledger_matches);
}

TEST(Run, RubbishKeysFromOneNodeAreTolerated) {
  auto sc = small();
  sc.behaviors[NodeId::internal(2)] = {Behavior::kRubbishKeys, {}, 0.0};
  const auto r = go(sc);
  for (unsigned i : {1u, 3u, 4u}) {
    const auto v = verdicts_of(r, NodeId::internal(i));
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].outcome, Outcome::kAccepted);
  }
}

TEST(Run, FullyCorruptSignatureIsRejectedAndSignerBlocked) {
  auto sc = small(4, 0);
  sc.behaviors[NodeId::signer()] = {Behavior::kCorruptSignature, {}, 1.0};
  const auto r = go(sc);
  for (const auto& v : r.verdicts) EXPECT_EQ(v.outcome, Outcome::kRejected);
  ASSERT_EQ(r.block_lists.size(), 4u);
  for (const auto& [node, blocked] : r.block_lists) EXPECT_EQ(blocked, std::vector<NodeId>{NodeId::signer()});
}

// Corrupting the tags of two of four slices leaves every internal node with
// exactly two passing blocks, i.e. level 0.
Scenario disputed() {
  auto sc = small();
  sc.behaviors[NodeId::signer()] = {Behavior::kCorruptSignature, {1, 2}, 1.0};
  Step send;
  send.op = Step::Op::kSend;
  send.from = NodeId::signer();
  send.to = NodeId::internal(1);
  sc.steps.push_back(send);
  Step vote;
  vote.op = Step::Op::kVote;
  vote.from = NodeId::internal(1);
  sc.steps.push_back(vote);
  Step inject;
  inject.op = Step::Op::kSend;
  inject.from = NodeId::internal(1);
  inject.to = NodeId::external(1);
  inject.l_rec = 0;
  sc.steps.push_back(inject);
  Step query;
  query.op = Step::Op::kMvQuery;
  query.from = NodeId::external(1);
  sc.steps.push_back(query);
  return sc;
}

TEST(Run, MajorityVoteAndExternalQuery) {
  const auto r = go(disputed());
  ASSERT_FALSE(r.aborted) << r.abort_reason;
  const auto p1 = verdicts_of(r, NodeId::internal(1));
  ASSERT_EQ(p1.size(), 1u);
  EXPECT_EQ(p1[0].outcome, Outcome::kAccepted);
  EXPECT_EQ(p1[0].level, 0);
  ASSERT_EQ(r.votes.size(), 1u);
  EXPECT_FALSE(r.votes[0].refused);
  EXPECT_EQ(r.votes[0].tallies.size(), 4u);
  for (const auto& [j, t] : r.votes[0].tallies) {
    EXPECT_EQ(t.result, protocol::MvResult::kAccepted) << j;
    EXPECT_FALSE(t.initiator_dishonest);
  }
  ASSERT_EQ(r.mv_queries.size(), 1u);
  EXPECT_EQ(r.mv_queries[0].answer, MvAnswer::kAccepted);
}

TEST(Run, VoteRefusedAboveLevelZero) {
  auto sc = small(4, 0);
  Step vote;
  vote.op = Step::Op::kVote;
  vote.from = NodeId::internal(2);
  sc.steps = {};
  for (unsigned i = 1; i <= 4; ++i) {
    Step s;
    s.to = NodeId::internal(i);
    sc.steps.push_back(s);
  }
  sc.steps.push_back(vote);
  const auto r = go(sc);
  ASSERT_EQ(r.votes.size(), 1u);
  EXPECT_TRUE(r.votes[0].refused);
}

TEST(Run, LyingMajorityVoterCannotFlipTheResult) {
  auto sc = disputed();
  sc.behaviors[NodeId::internal(3)] = {Behavior::kLieMv, {}, 0.0};
  const auto r = go(sc);
  ASSERT_EQ(r.votes.size(), 1u);
  EXPECT_EQ(r.votes[0].tallies.count(3), 0u);
  for (const auto& [j, t] : r.votes[0].tallies) EXPECT_EQ(t.result, protocol::MvResult::kAccepted) << j;
  ASSERT_EQ(r.mv_queries.size(), 1u);
  EXPECT_EQ(r.mv_queries[0].answer, MvAnswer::kAccepted);
}

TEST(Run, LyingVerifierCannotStopAnExternalAcceptance) {
  auto sc = small();
  sc.behaviors[NodeId::internal(2)] = {Behavior::kLieVerify, {}, 0.0};
  const auto r = go(sc);
  const auto e1 = verdicts_of(r, NodeId::external(1));
  ASSERT_EQ(e1.size(), 1u);
  EXPECT_EQ(e1[0].outcome, Outcome::kAccepted);
}

TEST(Run, SilentResponderMakesDelegationInconclusive) {
  // With a quorum of exactly 2 omega + 1 responses required, a silent
  // quorum member leaves too few answers.
  auto sc = small();
  sc.behaviors[NodeId::internal(2)] = {Behavior::kSilent, {}, 0.0};
  sc.preferences[1] = {2, 3, 4};
  const auto r = go(sc);
  const auto e1 = verdicts_of(r, NodeId::external(1));
  ASSERT_EQ(e1.size(), 1u);
  EXPECT_EQ(e1[0].outcome, Outcome::kInconclusive);
  EXPECT_TRUE(r.block_lists.count(NodeId::external(1)) == 0);
}

TEST(Run, ForwardOnlyFromANodeThatMayForward) {
  auto sc = small();
  Step fwd;
  fwd.op = Step::Op::kForward;
  fwd.from = NodeId::internal(1);
  fwd.to = NodeId::external(1);
  sc.steps = {fwd};
  const auto r = go(sc);
  EXPECT_TRUE(r.verdicts.empty());
  EXPECT_NE(r.trace_text().find("forward_skipped"), std::string::npos);
}

TEST(Throughput, MatchesRateModel) {
  bounds::SchemeConfig cfg{4, 0, 1, 1, 1024, 1e-10, 200, 6, 0.5};
  bounds::LinkModel links;
  links.rate0 = 1e6;
  links.gamma = 0.046;
  links.distances.assign(5, std::vector<double>(5, 0.0));
  for (unsigned i = 0; i < 5; ++i) {
    for (unsigned j = 0; j < 5; ++j) links.distances[i][j] = i == j ? 0.0 : 10.0 + 5.0 * (i + j);
  }
  const auto rep = throughput(cfg, links, 200.0, 0.05);
  ASSERT_GT(rep.model_rate, 0.0);
  EXPECT_NEAR(rep.simulated_rate, rep.model_rate, 0.02 * rep.model_rate + 1.0 / rep.duration_s);
}

TEST(Scenario, ParsesAndOptimizesWhenSchemeIsOpen) {
  const auto doc = nlohmann::json::parse(R"({
    "name": "demo", "seed": 3, "message": "hi",
    "scheme": {"N": 4, "M": 1, "omega": 1, "l_max": 1},
    "topology": {"external_links": {"E1": ["P1", 2, "P3"]}, "pools": [{"link": ["S", "P1"], "bits": 5}]},
    "behaviors": {"P2": "rubbish_keys", "S": {"kind": "corrupt_signature", "fraction": 0.25}},
    "preferences": {"E1": [3, 1, 2]},
    "steps": [{"op": "send", "to": "P1"}, {"op": "forward", "from": "P1", "to": "E1"},
              {"op": "vote", "initiator": "P1"}, {"op": "mv_query", "node": "E1"}],
    "auth": {"enabled": true}
  })");
  const auto sc = parse_scenario(doc);
  EXPECT_EQ(sc.name, "demo");
  EXPECT_EQ(sc.message.size(), 64u + 16u);
  EXPECT_EQ(sc.params.family.a, 80u);
  EXPECT_GE(sc.params.k, 1u);
  EXPECT_EQ(sc.topology.external_links.at(1), (std::vector<unsigned>{1, 2, 3}));
  EXPECT_EQ(sc.behaviors.at(NodeId::internal(2)).kind, Behavior::kRubbishKeys);
  EXPECT_DOUBLE_EQ(sc.behaviors.at(NodeId::signer()).fraction, 0.25);
  EXPECT_EQ(sc.steps.size(), 4u);
  EXPECT_EQ(sc.steps[2].op, Step::Op::kVote);
  EXPECT_TRUE(sc.auth_accounting);
  const auto d = describe(sc);
  EXPECT_EQ(d["scheme"]["N"], 4);
  EXPECT_EQ(d["auth"]["bits"], 47);
}

TEST(Scenario, RejectsBadInput) {
  using nlohmann::json;
  EXPECT_THROW(parse_scenario(json::parse(R"({"scheme": {"N": 4, "omega": 1}, "bogus": 1})")), ConfigError);
  EXPECT_THROW(parse_scenario(json::parse(R"({"scheme": {"N": 4, "omega": 1, "k": 5}})")), ConfigError);
  EXPECT_THROW(parse_scenario(json::parse(R"({"scheme": {"N": 4, "omega": 1, "a": 8}})")), ConfigError);
  EXPECT_THROW(parse_scenario(json::parse(R"({"scheme": {"N": 4, "omega": 1}, "behaviors": {"P1": "lazy"}})")),
               ConfigError);
  EXPECT_THROW(parse_scenario(json::parse(R"({"scheme": {"N": 4, "omega": 1}, "steps": [{"op": "jump"}]})")),
               ConfigError);
  EXPECT_THROW(parse_scenario(json::parse(R"({"scheme": {"N": 4, "omega": 1}, "message_hex": "0g"})")), ConfigError);
}

TEST(Scenario, OverridesEditNestedFields) {
  auto doc = nlohmann::json::parse(R"({"scheme": {"N": 4, "omega": 1}, "steps": [{"op": "send", "to": "P1"}]})");
  apply_override(doc, "scheme.N=7");
  apply_override(doc, "steps.0.to=P2");
  apply_override(doc, "name=renamed");
  apply_override(doc, "auth.eps_auth=1e-20");
  EXPECT_EQ(doc["scheme"]["N"], 7);
  EXPECT_EQ(doc["steps"][0]["to"], "P2");
  EXPECT_EQ(doc["name"], "renamed");
  EXPECT_DOUBLE_EQ(doc["auth"]["eps_auth"].get<double>(), 1e-20);
  EXPECT_THROW(apply_override(doc, "scheme.Q=1"), ConfigError);
  EXPECT_THROW(apply_override(doc, "nothing=1"), ConfigError);
  EXPECT_THROW(apply_override(doc, "steps.4.to=P1"), ConfigError);
  EXPECT_THROW(apply_override(doc, "scheme.N"), ConfigError);
}

TEST(Scenario, HexMessageAndRunFromDocument) {
  auto doc = nlohmann::json::parse(R"({"seed": 11, "message_hex": "00ff10",
    "scheme": {"N": 4, "M": 0, "omega": 1, "l_max": 1, "k": 16, "b": 4, "s0": 0.3}})");
  const auto sc = parse_scenario(doc);
  EXPECT_EQ(sc.message.size(), 64u + 24u);
  const auto r = go(sc);
  EXPECT_EQ(r.verdicts.size(), 4u);
  for (const auto& v : r.verdicts) EXPECT_EQ(v.outcome, Outcome::kAccepted);
  EXPECT_TRUE(r.ledger_matches);
}

}  // namespace
}  // namespace uss::netsim
