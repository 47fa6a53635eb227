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

#include "uss/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <set>
#include <sstream>

#include <json.hpp>

#include "uss/error.hpp"
#include "uss/rng.hpp"
#include "uss/wire.hpp"

namespace uss::netsim {
namespace {

using nlohmann::json;
using protocol::Outcome;

std::pair<NodeId, NodeId> ordered(NodeId x, NodeId y) { return x < y ? std::pair{x, y} : std::pair{y, x}; }

std::string link_name(NodeId x, NodeId y) {
  const auto [a, b] = ordered(x, y);
  return a.str() + "-" + b.str();
}

// Stream ids: the signer and P_i match protocol::deploy; externals and link
// pads live in disjoint ranges.
std::uint64_t node_stream(NodeId id) {
  switch (id.role) {
    case protocol::Role::kSigner:
      return 0;
    case protocol::Role::kInternal:
      return id.index;
    case protocol::Role::kExternal:
      return (std::uint64_t{1} << 32) | id.index;
  }
  return 0;
}

constexpr std::uint64_t kPadStreamBase = std::uint64_t{2} << 32;
constexpr std::uint64_t kAdversarySalt = 0xad7e5a1;

std::uint64_t digest(const BitString& bits) {
  std::uint64_t h = mix64(bits.size());
  for (auto byte : bits.bytes()) h = mix64(h ^ byte);
  return h;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << v;
  return out.str();
}

}  // namespace

// ---------------------------------------------------------------- topology

Topology Topology::build(const TopologySpec& spec) {
  if (spec.N < 1) throw ConfigError("at least one internal recipient is required");
  if (spec.l_max < 1) throw ConfigError("l_max must be at least 1");
  if (!bounds::acceptability_holds(spec.N, spec.l_max, spec.omega)) {
    throw ConfigError("omega=" + std::to_string(spec.omega) + " violates omega < N/(2+l_max) with N=" +
                      std::to_string(spec.N) + ", l_max=" + std::to_string(spec.l_max));
  }
  Topology t;
  t.spec_ = spec;
  auto add = [&](NodeId x, NodeId y) {
    const auto key = ordered(x, y);
    if (t.index_.count(key) != 0) throw ConfigError("duplicate link " + link_name(x, y));
    Link l;
    l.a = key.first;
    l.b = key.second;
    l.distance_km = spec.distance_km;
    l.credited = spec.pool_bits;
    t.index_[key] = t.links_.size();
    t.links_.push_back(l);
  };
  std::vector<NodeId> internal_side{NodeId::signer()};
  for (unsigned i = 1; i <= spec.N; ++i) internal_side.push_back(NodeId::internal(i));
  for (std::size_t x = 0; x < internal_side.size(); ++x) {
    for (std::size_t y = x + 1; y < internal_side.size(); ++y) add(internal_side[x], internal_side[y]);
  }
  for (const auto& [e, _] : spec.external_links) {
    if (e < 1 || e > spec.M) throw ConfigError("links given for unknown external node E" + std::to_string(e));
  }
  for (unsigned e = 1; e <= spec.M; ++e) {
    std::vector<unsigned> peers;
    if (auto it = spec.external_links.find(e); it != spec.external_links.end()) {
      peers = it->second;
    } else {
      for (unsigned i = 1; i <= spec.N; ++i) peers.push_back(i);
    }
    std::sort(peers.begin(), peers.end());
    if (std::adjacent_find(peers.begin(), peers.end()) != peers.end()) {
      throw ConfigError("E" + std::to_string(e) + " lists an internal recipient twice");
    }
    for (unsigned p : peers) {
      if (p < 1 || p > spec.N) throw ConfigError("E" + std::to_string(e) + " linked to unknown node P" + std::to_string(p));
      add(NodeId::external(e), NodeId::internal(p));
    }
    if (peers.size() < 2 * std::size_t{spec.omega} + 1) {
      throw ConfigError("E" + std::to_string(e) + " is linked to " + std::to_string(peers.size()) +
                        " internal recipients; at least " + std::to_string(2 * spec.omega + 1) + " are required");
    }
  }
  for (const auto& [x, y] : spec.external_pairs) {
    if (x < 1 || x > spec.M || y < 1 || y > spec.M || x == y) throw ConfigError("invalid external-to-external link");
    add(NodeId::external(x), NodeId::external(y));
  }
  for (const auto& [pair, d] : spec.distances) {
    if (!t.linked(pair.first, pair.second)) throw ConfigError("distance given for missing link " + link_name(pair.first, pair.second));
    if (!(d >= 0.0)) throw ConfigError("negative distance on link " + link_name(pair.first, pair.second));
    t.link(pair.first, pair.second).distance_km = d;
  }
  for (const auto& [pair, bits] : spec.pools) {
    if (!t.linked(pair.first, pair.second)) throw ConfigError("pool given for missing link " + link_name(pair.first, pair.second));
    t.link(pair.first, pair.second).credited = bits;
  }
  return t;
}

std::vector<NodeId> Topology::nodes() const {
  std::vector<NodeId> out{NodeId::signer()};
  for (unsigned i = 1; i <= spec_.N; ++i) out.push_back(NodeId::internal(i));
  for (unsigned e = 1; e <= spec_.M; ++e) out.push_back(NodeId::external(e));
  return out;
}

bool Topology::linked(NodeId x, NodeId y) const { return index_.count(ordered(x, y)) != 0; }

std::size_t Topology::link_index(NodeId x, NodeId y) const {
  auto it = index_.find(ordered(x, y));
  if (it == index_.end()) throw ConfigError("no link between " + x.str() + " and " + y.str());
  return it->second;
}

Link& Topology::link(NodeId x, NodeId y) { return links_[link_index(x, y)]; }
const Link& Topology::link(NodeId x, NodeId y) const { return links_[link_index(x, y)]; }

std::vector<unsigned> Topology::internal_neighbours(unsigned external) const {
  std::vector<unsigned> out;
  for (unsigned i = 1; i <= spec_.N; ++i) {
    if (linked(NodeId::external(external), NodeId::internal(i))) out.push_back(i);
  }
  return out;
}

void Topology::debit(NodeId x, NodeId y, std::uint64_t bits, Purpose purpose) {
  Link& l = link(x, y);
  if (purpose == Purpose::kOtp && !l.internal()) {
    throw ConfigError("one-time-pad traffic is confined to the internal subnetwork (" + link_name(x, y) + ")");
  }
  if (l.balance() < bits) {
    throw PoolExhausted("link " + link_name(x, y) + " holds " + std::to_string(l.balance()) + " bits, " +
                        std::to_string(bits) + " needed");
  }
  (purpose == Purpose::kOtp ? l.otp_debit : l.auth_debit) += bits;
}

void refill(Topology& topology, double rate0, double gamma, double duration_s) {
  if (rate0 < 0.0 || gamma < 0.0 || duration_s < 0.0) throw ParameterError("refill needs non-negative inputs");
  for (auto& l : topology.links()) {
    const double amount = rate0 * std::exp(-gamma * l.distance_km) * duration_s + l.carry;
    const double whole = std::floor(amount);
    l.carry = amount - whole;
    l.credited += static_cast<std::uint64_t>(whole);
  }
}

const char* to_string(Behavior b) {
  switch (b) {
    case Behavior::kHonest:
      return "honest";
    case Behavior::kRubbishKeys:
      return "rubbish_keys";
    case Behavior::kCorruptSignature:
      return "corrupt_signature";
    case Behavior::kLieVerify:
      return "lie_verify";
    case Behavior::kLieMv:
      return "lie_mv";
    case Behavior::kEquivocate:
      return "equivocate";
    case Behavior::kSilent:
      return "silent";
  }
  return "?";
}

Behavior parse_behavior(const std::string& name) {
  for (auto b : {Behavior::kHonest, Behavior::kRubbishKeys, Behavior::kCorruptSignature, Behavior::kLieVerify,
                 Behavior::kLieMv, Behavior::kEquivocate, Behavior::kSilent}) {
    if (name == to_string(b)) return b;
  }
  throw ConfigError("unknown behavior '" + name + "'");
}

std::string RunResult::trace_text() const {
  std::string out;
  for (const auto& line : trace) {
    out += line;
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------- simulation

namespace {

class Simulation {
 public:
  Simulation(Topology& topology, const Scenario& sc)
      : topo_(topology), sc_(sc), params_(sc.params), family_(sc.params.family), root_(sc.seed, 0) {
    protocol::validate(params_);
    const auto& ts = topology.spec();
    if (ts.N != params_.N || ts.M != params_.M || ts.omega != params_.omega || ts.l_max != params_.l_max) {
      throw ConfigError("topology and scheme parameters disagree on N, M, omega or l_max");
    }
    for (const auto& [node, spec] : sc.behaviors) {
      const bool ok = node.is_signer() ? (spec.kind == Behavior::kHonest || spec.kind == Behavior::kCorruptSignature)
                                       : node.is_internal() && node.index <= params_.N &&
                                             spec.kind != Behavior::kCorruptSignature;
      if (!ok) throw ConfigError("behavior " + std::string(to_string(spec.kind)) + " not available for " + node.str());
    }
    for (unsigned i = 1; i <= params_.N; ++i) internals_.emplace_back(params_, i);
    for (unsigned e = 1; e <= params_.M; ++e) {
      externals_.emplace_back(params_, e, topo_.internal_neighbours(e));
      if (auto it = sc.preferences.find(e); it != sc.preferences.end()) externals_.back().set_preference(it->second);
    }
    if (sc.auth_accounting) auth_bits_ = bounds::auth_key_cost(sc.eps_auth);
  }

  RunResult execute() {
    result_.auth_bits_per_message = auth_bits_;
    result_.expected = bounds::key_consumption(params_.N, params_.k, params_.family.y, params_.family.b);
    record({{"event", "start"},
            {"scenario", sc_.name},
            {"seed", sc_.seed},
            {"N", params_.N},
            {"M", params_.M},
            {"omega", params_.omega},
            {"l_max", params_.l_max},
            {"k", params_.k},
            {"b", params_.family.b},
            {"s", params_.family.s},
            {"y", params_.family.y},
            {"s0", params_.s0},
            {"a", params_.family.a}});
    try {
      distribute();
      sign();
      const auto steps = sc_.steps.empty() ? default_steps() : sc_.steps;
      for (const auto& step : steps) perform(step);
    } catch (const PoolExhausted& e) {
      result_.aborted = true;
      result_.abort_reason = e.what();
      record({{"event", "abort"}, {"reason", e.what()}});
    }
    finish();
    return std::move(result_);
  }

 private:
  struct Event {
    std::uint64_t tick = 0;
    std::uint64_t seq = 0;
    std::optional<wire::Kind> kind;  // empty for timers
    NodeId from;
    NodeId to;
    BitString cipher;
    std::uint64_t pad_offset = 0;
    bool otp = false;
    std::uint64_t auth = 0;
    std::function<void(const BitString&)> handler;
  };
  struct Later {
    bool operator()(const Event& x, const Event& y) const {
      return x.tick != y.tick ? x.tick > y.tick : x.seq > y.seq;
    }
  };
  struct Held {
    protocol::Package package;
    bool forwardable = false;
    int level = -1;
  };
  struct PendingRequest {
    unsigned external = 0;
    protocol::ExternalRecipient::Request request;
    std::vector<std::optional<int>> responses;
  };
  struct PendingQuery {
    unsigned external = 0;
    std::vector<protocol::MvAnswer> answers;
  };

  const BehaviorSpec& behavior(NodeId id) const {
    static const BehaviorSpec honest;
    auto it = sc_.behaviors.find(id);
    return it == sc_.behaviors.end() ? honest : it->second;
  }
  bool is(NodeId id, Behavior b) const { return behavior(id).kind == b; }

  CounterRng node_rng(NodeId id) const { return root_.fork(node_stream(id)); }
  CounterRng adversary_rng(NodeId id) const { return node_rng(id).fork(kAdversarySalt); }

  void record(json j) {
    if (!j.contains("tick")) j["tick"] = tick_;
    result_.trace.push_back(j.dump());
  }

  BitString pad(std::size_t link, std::uint64_t offset, std::uint64_t len) const {
    CounterRng stream(sc_.seed, kPadStreamBase + link);
    const std::uint64_t first_word = offset / 64;
    const std::uint64_t last_word = (offset + len + 63) / 64;
    stream.seek(first_word);
    BitString words;
    for (std::uint64_t w = first_word; w < last_word; ++w) words.append_uint(stream(), 64);
    return words.slice(offset % 64, len);
  }

  void send(NodeId from, NodeId to, wire::Kind kind, const BitString& body, bool otp,
            std::function<void(const BitString&)> handler) {
    const std::size_t idx = topo_.link_index(from, to);
    Event ev;
    ev.tick = tick_ + 1;
    ev.seq = seq_++;
    ev.kind = kind;
    ev.from = from;
    ev.to = to;
    ev.otp = otp;
    ev.handler = std::move(handler);
    if (otp) {
      ev.pad_offset = topo_.links()[idx].otp_debit;
      topo_.debit(from, to, body.size(), Purpose::kOtp);
      ev.cipher = body ^ pad(idx, ev.pad_offset, body.size());
    } else {
      ev.cipher = body;
    }
    if (auth_bits_ != 0) {
      topo_.debit(from, to, auth_bits_, Purpose::kAuth);
      ev.auth = auth_bits_;
    }
    queue_.push(std::move(ev));
  }

  void after(std::uint64_t delay, std::function<void()> fn) {
    Event ev;
    ev.tick = tick_ + delay;
    ev.seq = seq_++;
    ev.handler = [fn = std::move(fn)](const BitString&) { fn(); };
    queue_.push(std::move(ev));
  }

  void drain() {
    while (!queue_.empty()) {
      Event ev = queue_.top();
      queue_.pop();
      tick_ = ev.tick;
      if (!ev.kind) {
        ev.handler({});
        continue;
      }
      const BitString body =
          ev.otp ? ev.cipher ^ pad(topo_.link_index(ev.from, ev.to), ev.pad_offset, ev.cipher.size()) : ev.cipher;
      record({{"event", "deliver"},
              {"seq", ev.seq},
              {"kind", wire::to_string(*ev.kind)},
              {"from", ev.from.str()},
              {"to", ev.to.str()},
              {"bits", ev.cipher.size() + wire::kHeaderBits},
              {"otp_bits", ev.otp ? ev.cipher.size() : 0},
              {"auth_bits", ev.auth},
              {"digest", hex64(digest(wire::frame(*ev.kind, ev.cipher)))}});
      ev.handler(body);
    }
  }

  // --- distribution

  void distribute() {
    auto signer_rng = node_rng(NodeId::signer());
    auto step1 = protocol::distribute_step1(params_, signer_rng);
    signing_key_ = std::move(step1.signing_key);
    std::vector<std::optional<protocol::KeySlice>> slices(params_.N + 1);
    for (unsigned i = 1; i <= params_.N; ++i) {
      send(NodeId::signer(), NodeId::internal(i), wire::Kind::kKeySlice,
           wire::encode_key_slice(params_, step1.slices[i - 1]), true,
           [&, i](const BitString& body) { slices[i] = wire::decode_key_slice(params_, i, body); });
    }
    drain();

    std::vector<std::vector<protocol::KeyChunk>> inbox(params_.N + 1);
    for (unsigned i = 1; i <= params_.N; ++i) {
      const NodeId me = NodeId::internal(i);
      if (!slices[i] || is(me, Behavior::kSilent)) continue;
      auto rng = node_rng(me);
      auto chunks = protocol::distribute_step2(params_, *slices[i], rng);
      const auto& spec = behavior(me);
      for (auto& c : chunks) {
        if (c.dest == i) {
          inbox[i].push_back(c);
          continue;
        }
        const bool targeted = spec.targets.empty() ||
                              std::find(spec.targets.begin(), spec.targets.end(), c.dest) != spec.targets.end();
        if (spec.kind == Behavior::kRubbishKeys && targeted) {
          for (auto& key : c.keys) key.offset ^= 1;
        }
        const unsigned dest = c.dest;
        send(me, NodeId::internal(dest), wire::Kind::kKeyChunk, wire::encode_key_chunk(params_, c), true,
             [&, i, dest](const BitString& body) {
               inbox[dest].push_back(wire::decode_key_chunk(params_, i, dest, body));
             });
      }
    }
    drain();
    for (unsigned j = 1; j <= params_.N; ++j) {
      internals_[j - 1].set_share(protocol::assemble_share(params_, j, std::move(inbox[j])));
      if (!internals_[j - 1].share().complete(params_)) {
        record({{"event", "share_incomplete"}, {"node", NodeId::internal(j).str()}});
      }
    }
    record({{"event", "distribution_complete"}});
  }

  void sign() {
    sigma_ = protocol::sign(family_, signing_key_, sc_.message);
    const auto& spec = behavior(NodeId::signer());
    if (spec.kind != Behavior::kCorruptSignature) return;
    std::vector<std::uint64_t> candidates;
    for (std::uint64_t g = 0; g < sigma_.tags.size(); ++g) {
      const unsigned owner = static_cast<unsigned>(g / params_.slice_length()) + 1;
      if (spec.targets.empty() || std::find(spec.targets.begin(), spec.targets.end(), owner) != spec.targets.end()) {
        candidates.push_back(g);
      }
    }
    auto rng = adversary_rng(NodeId::signer());
    shuffle(candidates, rng);
    const auto count = std::min<std::uint64_t>(
        candidates.size(), static_cast<std::uint64_t>(std::llround(spec.fraction * double(candidates.size()))));
    for (std::uint64_t c = 0; c < count; ++c) sigma_.tags[candidates[c]] ^= 1;
    record({{"event", "signature_corrupted"}, {"tags", count}});
  }

  std::vector<Step> default_steps() const {
    std::vector<Step> steps;
    for (unsigned i = 1; i <= params_.N; ++i) {
      Step s;
      s.op = Step::Op::kSend;
      s.from = NodeId::signer();
      s.to = NodeId::internal(i);
      steps.push_back(s);
    }
    for (unsigned e = 1; e <= params_.M; ++e) {
      Step s;
      s.op = Step::Op::kForward;
      s.from = NodeId::internal(topo_.internal_neighbours(e).front());
      s.to = NodeId::external(e);
      steps.push_back(s);
    }
    return steps;
  }

  // --- steps

  void perform(const Step& step) {
    switch (step.op) {
      case Step::Op::kSend: {
        protocol::Package pkg{sc_.message, sigma_, step.l_rec.value_or(static_cast<int>(params_.l_max))};
        if (step.corrupt > 0) {
          auto rng = adversary_rng(step.from).fork(seq_);
          for (std::uint64_t c = 0; c < step.corrupt; ++c) pkg.sigma.tags[rng.below(pkg.sigma.tags.size())] ^= 1;
        }
        deliver_package(step.from, step.to, pkg);
        break;
      }
      case Step::Op::kForward: {
        auto it = held_.find(step.from);
        if (it == held_.end() || !it->second.forwardable) {
          record({{"event", "forward_skipped"}, {"node", step.from.str()}, {"to", step.to.str()}});
          return;
        }
        protocol::Package pkg = it->second.package;
        pkg.l_rec = it->second.level;
        deliver_package(step.from, step.to, pkg);
        break;
      }
      case Step::Op::kVote:
        vote(step.from);
        break;
      case Step::Op::kMvQuery:
        query(step.from);
        break;
    }
    drain();
  }

  void deliver_package(NodeId from, NodeId to, const protocol::Package& pkg) {
    send(from, to, wire::Kind::kPackage, wire::encode_package(params_, pkg), false,
         [this, from, to](const BitString& body) { on_package(to, from, wire::decode_package(params_, body)); });
  }

  void note_verdict(NodeId node, NodeId sender, const protocol::Package& pkg, const protocol::Verdict& v) {
    result_.verdicts.push_back({tick_, node, sender, v.outcome, v.level});
    json j{{"event", "verdict"},
           {"node", node.str()},
           {"sender", sender.str()},
           {"l_rec", pkg.l_rec},
           {"outcome", protocol::to_string(v.outcome)},
           {"level", v.level}};
    if (!v.note.empty()) j["note"] = v.note;
    record(j);
    if (v.outcome == Outcome::kRejected) {
      record({{"event", "block"}, {"node", node.str()}, {"blocked", sender.str()}});
    }
    if (v.outcome == Outcome::kAccepted || v.outcome == Outcome::kRejected) {
      held_[node] = Held{pkg, v.outcome == Outcome::kAccepted && v.may_forward, v.level};
    }
  }

  void on_package(NodeId node, NodeId sender, const protocol::Package& pkg) {
    if (node.is_internal()) {
      note_verdict(node, sender, pkg, internals_[node.index - 1].receive(pkg, sender));
      return;
    }
    if (!node.is_external()) return;
    auto& ext = externals_[node.index - 1];
    auto step = ext.begin(pkg, sender);
    if (auto* v = std::get_if<protocol::Verdict>(&step)) {
      note_verdict(node, sender, pkg, *v);
      return;
    }
    const std::uint64_t id = next_request_++;
    auto& pending = requests_[id];
    pending.external = node.index;
    pending.request = std::get<protocol::ExternalRecipient::Request>(step);
    pending.responses.assign(pending.request.quorum.size(), std::nullopt);
    for (std::size_t pos = 0; pos < pending.request.quorum.size(); ++pos) {
      const NodeId responder = NodeId::internal(pending.request.quorum[pos]);
      send(node, responder, wire::Kind::kVerifyRequest, wire::encode_verify_request(params_, pkg, sender), false,
           [this, id, pos, responder, node](const BitString& body) { on_verify_request(id, pos, responder, node, body); });
    }
    after(3, [this, id, node] {
      auto& p = requests_.at(id);
      const auto v = externals_[node.index - 1].finish(p.request, p.responses);
      note_verdict(node, p.request.sender, p.request.package, v);
      requests_.erase(id);
    });
  }

  void on_verify_request(std::uint64_t id, std::size_t pos, NodeId responder, NodeId requester, const BitString& body) {
    const auto [pkg, sender] = wire::decode_verify_request(params_, body);
    (void)sender;
    auto& node = internals_[responder.index - 1];
    std::optional<int> answer;
    if (is(responder, Behavior::kSilent)) return;
    if (is(responder, Behavior::kLieVerify)) {
      answer = -1;
    } else {
      const unsigned before = node.counter(requester.index);
      answer = node.respond(pkg, requester.index);
      if (node.counter(requester.index) != before) {
        record({{"event", "counter"},
                {"node", responder.str()},
                {"external", requester.str()},
                {"value", node.counter(requester.index)}});
        if (node.block_list().count(requester) != 0) {
          record({{"event", "block"}, {"node", responder.str()}, {"blocked", requester.str()}});
        }
      }
    }
    if (!answer) {
      record({{"event", "request_ignored"}, {"node", responder.str()}, {"requester", requester.str()}});
      return;
    }
    send(responder, requester, wire::Kind::kVerifyResponse, wire::encode_verify_response(*answer), false,
         [this, id, pos](const BitString& reply) {
           if (auto it = requests_.find(id); it != requests_.end()) {
             it->second.responses[pos] = wire::decode_verify_response(reply);
           }
         });
  }

  void vote(NodeId initiator) {
    VoteRecord rec;
    rec.tick = tick_;
    rec.initiator = initiator.index;
    auto it = held_.find(initiator);
    if (!initiator.is_internal() || it == held_.end()) {
      rec.refused = true;
      result_.votes.push_back(rec);
      record({{"event", "vote_refused"}, {"initiator", initiator.str()}, {"reason", "no pair held"}});
      return;
    }
    const auto& pkg = it->second.package;
    protocol::VoteAdversary adv;
    for (const auto& [node, spec] : sc_.behaviors) {
      if (node.is_internal() && (spec.kind == Behavior::kLieMv || spec.kind == Behavior::kEquivocate ||
                                 spec.kind == Behavior::kSilent)) {
        adv.faulty.insert(node.index);
      }
    }
    const int l_max = static_cast<int>(params_.l_max);
    adv.pair = [this](const broadcast::Path&, unsigned from, unsigned to,
                      const protocol::SignedMessage& honest) -> std::optional<protocol::SignedMessage> {
      const auto kind = behavior(NodeId::internal(from)).kind;
      if (kind == Behavior::kSilent) return std::nullopt;
      if (kind == Behavior::kEquivocate && to % 2 == 1) {
        auto out = honest;
        if (!out.sigma.tags.empty()) out.sigma.tags[0] ^= 1;
        return out;
      }
      return honest;
    };
    adv.vote = [this, l_max](const broadcast::Path&, unsigned from, unsigned to, int honest) -> std::optional<int> {
      const auto kind = behavior(NodeId::internal(from)).kind;
      if (kind == Behavior::kSilent) return std::nullopt;
      if (kind == Behavior::kLieMv) return -1;
      if (kind == Behavior::kEquivocate) return to % 2 == 1 ? -1 : l_max;
      return honest;
    };
    std::map<std::tuple<unsigned, unsigned, unsigned>, std::uint64_t> frames;
    const auto observer = [&](unsigned round, unsigned from, unsigned to) { ++frames[{round, from, to}]; };
    protocol::MajorityVoteReport report;
    try {
      report = protocol::majority_vote(internals_, initiator.index, pkg.m, pkg.sigma, adv, observer);
    } catch (const PreconditionError& e) {
      rec.refused = true;
      result_.votes.push_back(rec);
      record({{"event", "vote_refused"}, {"initiator", initiator.str()}, {"reason", e.what()}});
      return;
    }
    // Messages of one round between one ordered pair travel as one
    // authenticated frame.
    const std::uint64_t start = tick_;
    for (const auto& [key, count] : frames) {
      const auto [round, from, to] = key;
      tick_ = start + round;
      if (auth_bits_ != 0) topo_.debit(NodeId::internal(from), NodeId::internal(to), auth_bits_, Purpose::kAuth);
      record({{"event", "broadcast_frame"},
              {"round", round},
              {"from", NodeId::internal(from).str()},
              {"to", NodeId::internal(to).str()},
              {"messages", count},
              {"auth_bits", auth_bits_}});
    }
    tick_ = start + report.rounds;
    for (unsigned j = 1; j <= params_.N; ++j) {
      if (!report.tally[j - 1]) continue;
      rec.tallies[j] = *report.tally[j - 1];
      record({{"event", "mv_result"},
              {"node", NodeId::internal(j).str()},
              {"initiator", initiator.str()},
              {"result", report.tally[j - 1]->result == protocol::MvResult::kAccepted ? "accepted" : "rejected"},
              {"initiator_dishonest", report.tally[j - 1]->initiator_dishonest}});
    }
    result_.votes.push_back(rec);
  }

  void query(NodeId external) {
    auto it = held_.find(external);
    if (!external.is_external() || it == held_.end()) {
      record({{"event", "mv_query_skipped"}, {"node", external.str()}});
      return;
    }
    const protocol::SignedMessage pair{it->second.package.m, it->second.package.sigma};
    const auto quorum = externals_[external.index - 1].mv_quorum();
    const std::uint64_t id = next_request_++;
    queries_[id] = PendingQuery{external.index, std::vector<protocol::MvAnswer>(quorum.size(), protocol::MvAnswer::kNone)};
    for (std::size_t pos = 0; pos < quorum.size(); ++pos) {
      const NodeId responder = NodeId::internal(quorum[pos]);
      send(external, responder, wire::Kind::kMvRequest, wire::encode_mv_request(params_, pair), false,
           [this, id, pos, responder, external](const BitString& body) {
             const auto asked = wire::decode_mv_request(params_, body);
             if (is(responder, Behavior::kSilent)) return;
             auto answer = internals_[responder.index - 1].mv_answer(asked.m, asked.sigma);
             if (is(responder, Behavior::kLieMv)) {
               answer = answer == protocol::MvAnswer::kAccepted ? protocol::MvAnswer::kRejected
                                                                : protocol::MvAnswer::kAccepted;
             }
             send(responder, external, wire::Kind::kMvResponse, wire::encode_mv_response(answer), false,
                  [this, id, pos](const BitString& reply) {
                    queries_.at(id).answers[pos] = wire::decode_mv_response(reply);
                  });
           });
    }
    after(3, [this, id, external] {
      const auto answer = protocol::mv_verify_external(queries_.at(id).answers, params_.omega);
      result_.mv_queries.push_back({tick_, external, answer});
      record({{"event", "mv_query"}, {"node", external.str()}, {"answer", protocol::to_string(answer)}});
      queries_.erase(id);
    });
  }

  void finish() {
    bool matches = true;
    for (const auto& l : topo_.links()) {
      result_.ledger.push_back({l.a, l.b, l.internal(), l.credited, l.otp_debit, l.auth_debit, l.balance()});
      if (l.internal()) {
        const auto want = l.a.is_signer() ? result_.expected.L_sr : result_.expected.L_rr;
        if (l.otp_debit != want) matches = false;
      } else if (l.otp_debit != 0) {
        matches = false;
      }
      record({{"event", "ledger"},
              {"link", link_name(l.a, l.b)},
              {"credited", l.credited},
              {"otp", l.otp_debit},
              {"auth", l.auth_debit},
              {"balance", l.balance()}});
    }
    result_.ledger_matches = matches && !result_.aborted;
    for (const auto& node : internals_) {
      if (!node.block_list().empty()) {
        result_.block_lists[node.id()] = {node.block_list().begin(), node.block_list().end()};
      }
      for (unsigned e = 1; e <= params_.M; ++e) {
        if (node.counter(e) != 0) result_.counters[{node.index(), e}] = node.counter(e);
      }
    }
    for (const auto& ext : externals_) {
      if (!ext.block_list().empty()) result_.block_lists[ext.id()] = {ext.block_list().begin(), ext.block_list().end()};
    }
    record({{"event", "summary"},
            {"aborted", result_.aborted},
            {"L_sr", result_.expected.L_sr},
            {"L_rr", result_.expected.L_rr},
            {"ledger_matches", result_.ledger_matches},
            {"verdicts", result_.verdicts.size()}});
  }

  Topology& topo_;
  const Scenario& sc_;
  protocol::SchemeParams params_;
  as2u::Family family_;
  CounterRng root_;
  unsigned auth_bits_ = 0;
  std::uint64_t tick_ = 0;
  std::uint64_t seq_ = 0;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  protocol::SigningKey signing_key_;
  protocol::Signature sigma_;
  std::vector<protocol::InternalRecipient> internals_;
  std::vector<protocol::ExternalRecipient> externals_;
  std::map<NodeId, Held> held_;
  std::uint64_t next_request_ = 0;
  std::map<std::uint64_t, PendingRequest> requests_;
  std::map<std::uint64_t, PendingQuery> queries_;
  RunResult result_;
};

}  // namespace

RunResult run(Topology topology, const Scenario& scenario) {
  Simulation sim(topology, scenario);
  return sim.execute();
}

ThroughputReport throughput(const bounds::SchemeConfig& cfg, const bounds::LinkModel& links, double duration_s,
                            double step_s) {
  if (!(duration_s > 0.0) || !(step_s > 0.0)) throw ParameterError("duration and step must be positive");
  TopologySpec spec;
  spec.N = cfg.N;
  spec.M = 0;
  spec.omega = 0;
  spec.l_max = cfg.l_max;
  spec.pool_bits = 0;
  for (unsigned i = 0; i <= cfg.N; ++i) {
    for (unsigned j = i + 1; j <= cfg.N; ++j) {
      const NodeId x = i == 0 ? NodeId::signer() : NodeId::internal(i);
      spec.distances[{x, NodeId::internal(j)}] = links.distances.at(i).at(j);
    }
  }
  auto topo = Topology::build(spec);
  const auto need = bounds::key_consumption(cfg);
  ThroughputReport report;
  report.duration_s = duration_s;
  const auto steps = static_cast<std::uint64_t>(std::llround(duration_s / step_s));
  for (std::uint64_t t = 0; t < steps; ++t) {
    refill(topo, links.rate0, links.gamma, step_s);
    for (;;) {
      const bool ready = std::all_of(topo.links().begin(), topo.links().end(), [&](const Link& l) {
        return l.balance() >= (l.a.is_signer() ? need.L_sr : need.L_rr);
      });
      if (!ready) break;
      for (const auto& l : topo.links()) topo.debit(l.a, l.b, l.a.is_signer() ? need.L_sr : need.L_rr, Purpose::kOtp);
      ++report.completed;
    }
  }
  report.simulated_rate = double(report.completed) / duration_s;
  report.model_rate = bounds::uss_rate(cfg, links);
  return report;
}

}  // namespace uss::netsim
