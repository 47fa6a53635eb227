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

#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "uss/error.hpp"
#include "uss/protocol.hpp"

namespace {

using namespace uss::protocol;
using uss::BitString;
using uss::CounterRng;

SchemeParams small_params(unsigned N = 4, unsigned M = 2, unsigned omega = 1, unsigned l_max = 1,
                          std::uint64_t k = 8, double s0 = 0.5) {
  SchemeParams p;
  p.N = N;
  p.M = M;
  p.omega = omega;
  p.l_max = l_max;
  p.k = k;
  p.s0 = s0;
  p.family = uss::as2u::make_params(64, 4);
  return p;
}

BitString message(std::uint64_t v) {
  BitString m;
  m.append_uint(v, 64);
  return m;
}

struct Network {
  SchemeParams params;
  Deployment deployment;
  std::vector<InternalRecipient> internals;
  uss::as2u::Family family;

  explicit Network(const SchemeParams& p, std::uint64_t seed = 1, const ChunkTamper& tamper = {})
      : params(p), deployment(deploy(p, CounterRng(seed, 0), tamper)), family(p.family) {
    for (unsigned i = 1; i <= p.N; ++i) {
      internals.emplace_back(p, i);
      internals.back().set_share(deployment.shares[i - 1]);
    }
  }

  Signature sign_message(const BitString& m) const { return sign(family, deployment.signing_key, m); }
};

void corrupt(Signature& sigma, std::uint64_t index) { sigma.tags[index] ^= 1; }

TEST(NodeIdTest, NamesRoundTrip) {
  for (auto id : {NodeId::signer(), NodeId::internal(3), NodeId::external(12)}) EXPECT_EQ(NodeId::parse(id.str()), id);
  EXPECT_EQ(NodeId::parse("P0"), NodeId::signer());
  EXPECT_THROW(NodeId::parse("Q1"), uss::ConfigError);
  EXPECT_THROW(NodeId::parse("P"), uss::ConfigError);
  EXPECT_THROW(NodeId::parse("E0"), uss::ConfigError);
  EXPECT_THROW(NodeId::parse("P1x"), uss::ConfigError);
}

TEST(Distribution, Step1SlicesPartitionTheSigningKey) {
  SchemeParams p = small_params(4, 0, 1, 1, 1);
  p.family = uss::as2u::make_params(9, 2);
  ASSERT_EQ(p.family.y, 8u);
  CounterRng rng(5, 0);
  const auto out = distribute_step1(p, rng);
  ASSERT_EQ(out.signing_key.keys.size(), 16u);
  std::vector<uss::as2u::AuthKey> joined;
  for (unsigned i = 1; i <= 4; ++i) {
    const auto& slice = out.slices[i - 1];
    EXPECT_EQ(slice.recipient, i);
    EXPECT_EQ(slice.keys.size(), 4u);
    EXPECT_EQ(slice.first, (i - 1) * 4u);
    joined.insert(joined.end(), slice.keys.begin(), slice.keys.end());
  }
  EXPECT_EQ(joined, out.signing_key.keys);
}

TEST(Distribution, Step2IsAPartitionIntoKSubsets) {
  const auto p = small_params(5, 0, 1, 2, 6);
  CounterRng rng(9, 0);
  const auto step1 = distribute_step1(p, rng);
  CounterRng node(9, 3);
  const auto chunks = distribute_step2(p, step1.slices[2], node);
  ASSERT_EQ(chunks.size(), 5u);
  std::set<std::uint64_t> seen;
  for (unsigned j = 1; j <= 5; ++j) {
    const auto& c = chunks[j - 1];
    EXPECT_EQ(c.source, 3u);
    EXPECT_EQ(c.dest, j);
    ASSERT_EQ(c.indices.size(), 6u);
    for (std::size_t r = 0; r < c.indices.size(); ++r) {
      EXPECT_GE(c.indices[r], 60u);
      EXPECT_LT(c.indices[r], 90u);
      EXPECT_EQ(c.keys[r], step1.signing_key.keys[c.indices[r]]);
      EXPECT_TRUE(seen.insert(c.indices[r]).second);
    }
  }
  EXPECT_EQ(seen.size(), 30u);
}

TEST(Distribution, Step2SingletonsAreUniformOverOrderings) {
  auto p = small_params(4, 0, 1, 1, 1);
  CounterRng rng(1, 0);
  const auto step1 = distribute_step1(p, rng);
  std::map<std::vector<std::uint64_t>, int> counts;
  const int draws = 24000;
  for (int t = 0; t < draws; ++t) {
    CounterRng node(77, static_cast<std::uint64_t>(t));
    std::vector<std::uint64_t> order;
    for (const auto& c : distribute_step2(p, step1.slices[0], node)) order.push_back(c.indices[0]);
    ++counts[order];
  }
  ASSERT_EQ(counts.size(), 24u);
  // Pearson chi-square with 23 degrees of freedom; 49.7 is the 0.999 quantile.
  double chi2 = 0;
  for (const auto& [order, c] : counts) chi2 += (c - 1000.0) * (c - 1000.0) / 1000.0;
  EXPECT_LT(chi2, 49.7);
}

TEST(Distribution, SharesAreConsistentWithTheSigningKey) {
  const Network net(small_params(6, 0, 1, 2, 5));
  for (unsigned j = 1; j <= 6; ++j) {
    const auto& share = net.deployment.shares[j - 1];
    EXPECT_TRUE(share.complete(net.params));
    for (unsigned src = 1; src <= 6; ++src) {
      const auto& block = share.blocks[src - 1];
      EXPECT_EQ(block.source, src);
      for (std::size_t r = 0; r < block.indices.size(); ++r) {
        EXPECT_EQ(block.keys[r], net.deployment.signing_key.keys[block.indices[r]]);
      }
    }
  }
}

TEST(Distribution, RubbishIsStoredUnchanged) {
  const auto tamper = [](KeyChunk& c) {
    if (c.source == 2 && c.dest == 3) {
      for (auto& k : c.keys) k.offset ^= 1;
    }
  };
  const Network net(small_params(), 4, tamper);
  const auto& block = net.deployment.shares[2].blocks[1];
  for (std::size_t r = 0; r < block.keys.size(); ++r) {
    auto original = net.deployment.signing_key.keys[block.indices[r]];
    original.offset ^= 1;
    EXPECT_EQ(block.keys[r], original);
  }
}

TEST(Distribution, AssembleRejectsMisaddressedChunks) {
  const auto p = small_params();
  KeyChunk c{1, 2, {0}, {{}}};
  EXPECT_THROW(assemble_share(p, 3, {c}), uss::ConfigError);
  EXPECT_THROW(assemble_share(p, 2, {c, c}), uss::ConfigError);
}

TEST(Signing, DeterministicAndMatchesDirectEvaluation) {
  auto p = small_params(2, 0, 0, 1, 1);
  const Network net(p);
  const auto m = message(0xfeed);
  const auto s1 = net.sign_message(m);
  EXPECT_EQ(s1, net.sign_message(m));
  ASSERT_EQ(s1.tags.size(), 4u);
  for (std::size_t g = 0; g < 4; ++g) {
    EXPECT_EQ(s1.tags[g], uss::as2u::eval(p.family, net.deployment.signing_key.keys[g], m));
  }
  EXPECT_THROW(net.sign_message(BitString(65)), uss::LengthError);
}

TEST(Verification, TestThresholds) {
  SchemeParams p = small_params(4, 0, 1, 1, 10, 0.5);
  EXPECT_TRUE(test_passes(p, 4, 0));
  EXPECT_FALSE(test_passes(p, 5, 0));
  EXPECT_TRUE(test_passes(p, 0, 1));
  EXPECT_FALSE(test_passes(p, 1, 1));
  p.l_max = 4;
  p.s0 = 0.8;
  // Non-increasing in l for every mismatch count.
  for (std::uint64_t g = 0; g <= 10; ++g) {
    for (unsigned l = 1; l <= 4; ++l) EXPECT_LE(test_passes(p, g, l), test_passes(p, g, l - 1));
  }
}

TEST(Verification, LevelsFromMismatchCounts) {
  const auto p = small_params(4, 0, 1, 1, 10, 0.5);
  const std::vector<std::uint64_t> perfect{0, 0, 0, 0};
  EXPECT_EQ(verification_level(p, perfect), 1);
  const std::vector<std::uint64_t> one_rubbish{0, 0, 0, 10};
  EXPECT_EQ(verification_level(p, one_rubbish), 1);
  const std::vector<std::uint64_t> two_rubbish{0, 0, 10, 10};
  EXPECT_EQ(verification_level(p, two_rubbish), 0);
  const std::vector<std::uint64_t> all_bad{10, 10, 10, 10};
  EXPECT_EQ(verification_level(p, all_bad), -1);
  const std::vector<std::uint64_t> partial{1, 2, 3, 0};
  EXPECT_EQ(verification_level(p, partial), 0);
}

TEST(Verification, HonestPipelineReachesMaximalLevel) {
  for (unsigned l_max : {1u, 2u}) {
    const Network net(small_params(l_max == 1 ? 4 : 5, 0, 1, l_max, 8, 0.5));
    const auto m = message(7);
    const auto sigma = net.sign_message(m);
    for (const auto& node : net.internals) {
      for (auto g : block_mismatches(net.params, net.family, node.share(), m, sigma)) EXPECT_EQ(g, 0u);
      EXPECT_EQ(node.level(m, sigma), static_cast<int>(l_max));
      for (unsigned j = 1; j <= net.params.N; ++j) {
        EXPECT_TRUE(test_block(net.params, net.family, node.share(), j, m, sigma, l_max));
      }
    }
  }
}

TEST(Verification, RubbishFromOmegaRecipientsStillGivesMaximalLevel) {
  // N - omega > omega + l_max * omega: 6 - 1 > 1 + 3.
  const auto tamper = [](KeyChunk& c) {
    if (c.source == 4) {
      for (auto& k : c.keys) k.offset ^= 1;
    }
  };
  const Network net(small_params(6, 0, 1, 3, 8, 0.6), 3, tamper);
  const auto m = message(99);
  const auto sigma = net.sign_message(m);
  for (unsigned j = 1; j <= 6; ++j) {
    if (j != 4) {
      EXPECT_EQ(net.internals[j - 1].level(m, sigma), 3);
    }
  }
}

TEST(Verification, ReceiveAcceptsRejectsAndBlocks) {
  Network net(small_params());
  const auto m = message(1);
  const auto sigma = net.sign_message(m);
  auto& p1 = net.internals[0];
  auto v = p1.receive({m, sigma, 1}, NodeId::signer());
  EXPECT_EQ(v.outcome, Outcome::kAccepted);
  EXPECT_EQ(v.level, 1);
  EXPECT_TRUE(v.may_forward);
  EXPECT_EQ(p1.receive({m, sigma, 1}, NodeId::signer()).outcome, Outcome::kIgnoredDuplicate);

  Signature garbage = sigma;
  for (auto& t : garbage.tags) t ^= 1;
  v = p1.receive({m, garbage, 1}, NodeId::internal(2));
  EXPECT_EQ(v.outcome, Outcome::kRejected);
  EXPECT_EQ(v.level, -1);
  EXPECT_TRUE(p1.block_list().count(NodeId::internal(2)));
  EXPECT_EQ(p1.receive({m, sigma, 1}, NodeId::internal(2)).outcome, Outcome::kIgnoredBlocked);
  // A level-0 verdict satisfies l_rec = 1 but not l_rec = 2.
  EXPECT_FALSE(p1.block_list().count(NodeId::internal(3)));
}

TEST(Verification, AcceptanceIsMonotoneInReceivedLevel) {
  Network net(small_params(7, 0, 1, 4, 10, 0.8), 12);
  const auto m = message(5);
  auto sigma = net.sign_message(m);
  CounterRng rng(8, 8);
  for (int trial = 0; trial < 30; ++trial) {
    auto s = sigma;
    for (int c = 0; c < 25; ++c) corrupt(s, rng.below(s.tags.size()));
    for (auto& node : net.internals) {
      const int l = node.level(m, s);
      for (int l_rec = 1; l_rec <= l + 1; ++l_rec) {
        InternalRecipient fresh(net.params, node.index());
        fresh.set_share(node.share());
        EXPECT_EQ(fresh.receive({m, s, l_rec}, NodeId::signer()).outcome, Outcome::kAccepted);
      }
    }
  }
}

TEST(Verification, ChainTransferabilityWithBoundedCorruption) {
  Network net(small_params(7, 0, 1, 4, 20, 0.8), 21);
  const auto m = message(31337);
  const auto clean = net.sign_message(m);
  CounterRng rng(99, 1);
  for (int trial = 0; trial < 40; ++trial) {
    auto s = clean;
    const auto corruptions = rng.below(4);
    for (std::uint64_t c = 0; c < corruptions; ++c) corrupt(s, rng.below(s.tags.size()));
    std::vector<InternalRecipient> nodes;
    for (unsigned i = 1; i <= 7; ++i) {
      nodes.emplace_back(net.params, i);
      nodes.back().set_share(net.deployment.shares[i - 1]);
    }
    Package pkg{m, s, 4};
    NodeId sender = NodeId::signer();
    int previous = 4;
    for (auto& node : nodes) {
      const auto v = node.receive(pkg, sender);
      ASSERT_EQ(v.outcome, Outcome::kAccepted);
      EXPECT_GE(v.level, previous - 1);
      if (!v.may_forward) break;
      pkg.l_rec = v.level;
      previous = v.level;
      sender = node.id();
    }
  }
}

Responder honest_responder(std::vector<InternalRecipient>& nodes) {
  return [&nodes](unsigned q, const Package& pkg, unsigned ext) { return nodes[q - 1].respond(pkg, ext); };
}

TEST(Delegated, ExternalLevelRule) {
  const std::vector<int> same{1, 1, 1};
  EXPECT_EQ(external_level(same, 1, 1), 1);
  const std::vector<int> mixed{2, 2, -1};
  EXPECT_EQ(external_level(mixed, 1, 2), 2);
  const std::vector<int> split{2, 0, -1};
  EXPECT_EQ(external_level(split, 1, 2), 0);
  const std::vector<int> none{-1, -1, 2};
  EXPECT_EQ(external_level(none, 1, 2), -1);
}

TEST(Delegated, HonestPipelineAcceptsAtMaximalLevel) {
  Network net(small_params(4, 2, 1, 1));
  const auto m = message(3);
  const auto sigma = net.sign_message(m);
  ExternalRecipient ext(net.params, 1, {1, 2, 3, 4});
  const auto v = delegated_verify(ext, {m, sigma, 1}, NodeId::internal(2), honest_responder(net.internals));
  EXPECT_EQ(v.outcome, Outcome::kAccepted);
  EXPECT_EQ(v.level, 1);
  for (const auto& node : net.internals) {
    EXPECT_TRUE(node.block_list().empty());
    EXPECT_EQ(node.counter(1), 0u);
  }
}

TEST(Delegated, QuorumSelection) {
  const auto p = small_params(7, 2, 2, 1);
  ExternalRecipient ext(p, 1, {7, 6, 5, 4, 3, 2, 1});
  const Package pkg{message(1), Signature{}, 1};
  auto step = ext.begin(pkg, NodeId::internal(2));
  auto& req = std::get<ExternalRecipient::Request>(step);
  EXPECT_EQ(req.quorum, (std::vector<unsigned>{1, 3, 4, 5}));
  step = ext.begin(pkg, NodeId::external(2));
  EXPECT_EQ(std::get<ExternalRecipient::Request>(step).quorum, (std::vector<unsigned>{1, 2, 3, 4, 5}));
  ext.set_preference({7, 2});
  step = ext.begin({message(2), Signature{}, 1}, NodeId::external(2));
  EXPECT_EQ(std::get<ExternalRecipient::Request>(step).quorum, (std::vector<unsigned>{7, 2, 1, 3, 4}));
  EXPECT_EQ(ext.mv_quorum(), (std::vector<unsigned>{7, 2, 1, 3, 4}));
  EXPECT_THROW(ext.set_preference({9}), uss::ConfigError);
}

TEST(Delegated, InsufficientConnectivityIsAConfigError) {
  const auto p = small_params(4, 1, 1, 1);
  ExternalRecipient ext(p, 1, {1, 2});
  EXPECT_THROW(ext.begin({message(1), Signature{}, 1}, NodeId::external(1)), uss::ConfigError);
  EXPECT_THROW(ext.mv_quorum(), uss::ConfigError);
}

TEST(Delegated, SenderResponseCountsForInternalSenders) {
  const auto p = small_params(4, 1, 1, 1);
  ExternalRecipient ext(p, 1, {1, 2, 3});
  const Package pkg{message(1), Signature{}, 1};
  auto req = std::get<ExternalRecipient::Request>(ext.begin(pkg, NodeId::internal(1)));
  ASSERT_EQ(req.quorum.size(), 2u);
  const std::vector<std::optional<int>> responses{1, -1};
  const auto v = ext.finish(req, responses);
  EXPECT_EQ(v.outcome, Outcome::kAccepted);
  EXPECT_EQ(v.level, 1);
}

TEST(Delegated, TooFewRespondersBlocksNobody) {
  const auto p = small_params(4, 1, 1, 1);
  ExternalRecipient ext(p, 1, {1, 2, 3});
  const Package pkg{message(1), Signature{}, 2};
  auto req = std::get<ExternalRecipient::Request>(ext.begin(pkg, NodeId::external(1)));
  const std::vector<std::optional<int>> responses{-1, std::nullopt, -1};
  const auto v = ext.finish(req, responses);
  EXPECT_EQ(v.outcome, Outcome::kInconclusive);
  EXPECT_TRUE(ext.block_list().empty());
}

TEST(Delegated, RejectionBlocksTheSender) {
  const auto p = small_params(4, 2, 1, 1);
  ExternalRecipient ext(p, 1, {1, 2, 3});
  const Package pkg{message(1), Signature{}, 1};
  auto req = std::get<ExternalRecipient::Request>(ext.begin(pkg, NodeId::external(2)));
  const std::vector<std::optional<int>> responses{-1, -1, 1};
  EXPECT_EQ(ext.finish(req, responses).outcome, Outcome::kRejected);
  EXPECT_TRUE(ext.block_list().count(NodeId::external(2)));
  EXPECT_EQ(std::get<Verdict>(ext.begin({message(9), Signature{}, 1}, NodeId::external(2))).outcome,
            Outcome::kIgnoredBlocked);
}

TEST(Delegated, CounterIncrementsAndBlocksAtThreshold) {
  // M + omega = 3 low-level requests exhaust the counter.
  Network net(small_params(5, 2, 1, 3, 8, 0.6));
  auto& responder = net.internals[0];
  const auto m = message(44);
  const auto sigma = net.sign_message(m);
  Signature bad = sigma;
  for (auto& t : bad.tags) t ^= 1;
  EXPECT_EQ(responder.respond({m, bad, 1}, 1), -1);  // -1 < 1 - 2 is false
  EXPECT_EQ(responder.counter(1), 0u);
  EXPECT_EQ(responder.respond({m, bad, 2}, 1), -1);
  EXPECT_EQ(responder.counter(1), 1u);
  EXPECT_EQ(responder.respond({m, bad, 2}, 1), -1);  // identical replay
  EXPECT_EQ(responder.counter(1), 1u);
  EXPECT_EQ(responder.respond({message(45), bad, 3}, 1), -1);
  EXPECT_EQ(responder.counter(1), 2u);
  EXPECT_FALSE(responder.block_list().count(NodeId::external(1)));
  EXPECT_EQ(responder.respond({message(46), bad, 3}, 1), -1);
  EXPECT_EQ(responder.counter(1), 3u);
  EXPECT_TRUE(responder.block_list().count(NodeId::external(1)));
  EXPECT_FALSE(responder.respond({m, sigma, 1}, 1).has_value());
  EXPECT_EQ(responder.respond({m, sigma, 3}, 2), 3);
  EXPECT_EQ(responder.counter(2), 0u);
}

TEST(MajorityVote, TallyRules) {
  const std::vector<int> honest{0, 1, 1, 0};
  EXPECT_EQ(tally_votes(honest, 1, 1).result, MvResult::kAccepted);
  const std::vector<int> rejected{5, -1, -1, -1};
  const auto t = tally_votes(rejected, 1, 1);
  EXPECT_EQ(t.result, MvResult::kRejected);
  EXPECT_FALSE(t.initiator_dishonest);
  const std::vector<int> flagged{0, 2, 2, -1};
  const auto f = tally_votes(flagged, 1, 1);
  EXPECT_EQ(f.result, MvResult::kAccepted);
  EXPECT_TRUE(f.initiator_dishonest);
  EXPECT_THROW(tally_votes(flagged, 5, 1), uss::ParameterError);
}

TEST(MajorityVote, ExternalAnswerRule) {
  using A = MvAnswer;
  const std::vector<A> none{A::kNone, A::kNone, A::kNone};
  EXPECT_EQ(mv_verify_external(none, 1), A::kNone);
  const std::vector<A> yes{A::kAccepted, A::kRejected, A::kAccepted};
  EXPECT_EQ(mv_verify_external(yes, 1), A::kAccepted);
  const std::vector<A> split{A::kAccepted, A::kRejected, A::kNone};
  EXPECT_EQ(mv_verify_external(split, 1), A::kNone);
  const std::vector<A> no{A::kRejected, A::kRejected, A::kNone};
  EXPECT_EQ(mv_verify_external(no, 1), A::kRejected);
}

// Corrupts tags that only P1 checks, in two of its blocks, so P1 lands at
// level 0 while everyone else stays at l_max.
Signature level_zero_for_p1(const Network& net, const BitString& m) {
  auto sigma = net.sign_message(m);
  const auto& share = net.deployment.shares[0];
  corrupt(sigma, share.blocks[0].indices[0]);
  corrupt(sigma, share.blocks[1].indices[0]);
  return sigma;
}

TEST(MajorityVote, HonestRunAcceptsAndIsQueryable) {
  Network net(small_params(4, 1, 1, 1));
  const auto m = message(8);
  const auto sigma = level_zero_for_p1(net, m);
  ASSERT_EQ(net.internals[0].level(m, sigma), 0);
  ASSERT_EQ(net.internals[1].level(m, sigma), 1);
  std::map<unsigned, unsigned> rounds;
  const auto report =
      majority_vote(net.internals, 1, m, sigma, {}, [&](unsigned r, unsigned, unsigned) { ++rounds[r]; });
  EXPECT_EQ(report.rounds, 4u);
  EXPECT_EQ(rounds.size(), 4u);
  for (const auto& t : report.tally) {
    ASSERT_TRUE(t);
    EXPECT_EQ(t->result, MvResult::kAccepted);
    EXPECT_FALSE(t->initiator_dishonest);
  }
  std::vector<MvAnswer> answers;
  for (unsigned q : {1u, 2u, 3u}) answers.push_back(net.internals[q - 1].mv_answer(m, sigma));
  EXPECT_EQ(mv_verify_external(answers, 1), MvAnswer::kAccepted);
  EXPECT_EQ(net.internals[0].mv_answer(m, net.sign_message(m)), MvAnswer::kNone);
}

TEST(MajorityVote, HonestInitiatorNeedsLevelZero) {
  Network net(small_params(4, 0, 1, 1));
  const auto m = message(8);
  EXPECT_THROW(majority_vote(net.internals, 1, m, net.sign_message(m)), uss::PreconditionError);
}

TEST(MajorityVote, LyingVoterCannotBreakAgreement) {
  Network net(small_params(4, 0, 1, 1));
  const auto m = message(8);
  const auto sigma = level_zero_for_p1(net, m);
  VoteAdversary adv;
  adv.faulty = {3};
  adv.vote = [](const uss::broadcast::Path&, unsigned, unsigned to, int) { return std::optional<int>(to % 2 ? -1 : 5); };
  const auto report = majority_vote(net.internals, 1, m, sigma, adv);
  EXPECT_FALSE(report.tally[2].has_value());
  std::set<int> results;
  for (unsigned j : {0u, 1u, 3u}) results.insert(static_cast<int>(report.tally[j]->result));
  EXPECT_EQ(results.size(), 1u);
}

TEST(MajorityVote, EquivocatingInitiatorStillYieldsAgreement) {
  Network net(small_params(4, 0, 1, 1));
  const auto m = message(8);
  const auto sigma = net.sign_message(m);
  VoteAdversary adv;
  adv.faulty = {2};
  adv.pair = [&](const uss::broadcast::Path&, unsigned, unsigned to, const SignedMessage& honest) {
    SignedMessage out = honest;
    if (to == 3) out.m = message(9);
    return std::optional<SignedMessage>(out);
  };
  const auto report = majority_vote(net.internals, 2, m, sigma, adv);
  std::set<int> results;
  for (unsigned j : {0u, 2u, 3u}) results.insert(static_cast<int>(report.tally[j]->result));
  EXPECT_EQ(results.size(), 1u);
}

}  // namespace
