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
#include <functional>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "uss/error.hpp"

// Unconditionally secure broadcast over pairwise authenticated channels: the
// recursive oral-messages algorithm OM(omega). It tolerates omega faulty
// participants when omega < n/3 and takes omega + 1 communication rounds.
//
// Participants are numbered 0..n-1. A message is identified by the chain of
// relays it has travelled through (`path`, root commander first) plus its
// sender and receiver, which is exactly the information an adversary needs to
// equivocate at any point of the recursion.
namespace uss::broadcast {

using Path = std::vector<unsigned>;

template <typename V>
struct Faults {
  std::set<unsigned> faulty;
  // What a faulty `from` sends to `to` at this point, given the value an
  // honest participant would have sent. nullopt models a dropped message.
  std::function<std::optional<V>(const Path& path, unsigned from, unsigned to, const V& honest)> send;
};

// Invoked once per point-to-point message; round is 1-based.
using MessageObserver = std::function<void(unsigned round, unsigned from, unsigned to)>;

template <typename V>
struct Result {
  // Value delivered at each participant; the commander delivers its own input.
  std::vector<V> delivered;
  unsigned rounds = 0;
  std::uint64_t messages = 0;
};

namespace detail {

template <typename V>
V majority(const std::vector<V>& values, const V& fallback) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::size_t count = 0;
    for (const auto& v : values) count += (v == values[i]) ? 1 : 0;
    if (2 * count > values.size()) return values[i];
  }
  return fallback;
}

template <typename V>
class OralMessages {
 public:
  OralMessages(const Faults<V>& faults, const V& fallback, const MessageObserver& observer)
      : faults_(faults), fallback_(fallback), observer_(observer) {}

  // Returns the value each lieutenant (every participant but `commander`)
  // decides, indexed by participant id.
  std::vector<std::optional<V>> run(unsigned depth, unsigned commander, const V& value,
                                    const std::vector<unsigned>& participants, Path& path, unsigned n) {
    std::vector<unsigned> lieutenants;
    for (unsigned p : participants) {
      if (p != commander) lieutenants.push_back(p);
    }
    path.push_back(commander);
    const unsigned round = static_cast<unsigned>(path.size());
    std::vector<V> received(n, fallback_);
    for (unsigned l : lieutenants) received[l] = transmit(path, round, commander, l, value);

    std::vector<std::optional<V>> decided(n);
    if (depth == 0) {
      for (unsigned l : lieutenants) decided[l] = received[l];
      path.pop_back();
      return decided;
    }
    // relayed[j][i]: what lieutenant i concluded lieutenant j had received.
    std::vector<std::vector<std::optional<V>>> relayed(n);
    for (unsigned j : lieutenants) relayed[j] = run(depth - 1, j, received[j], lieutenants, path, n);
    for (unsigned i : lieutenants) {
      std::vector<V> votes;
      votes.reserve(lieutenants.size());
      for (unsigned j : lieutenants) votes.push_back(j == i ? received[i] : relayed[j][i].value_or(fallback_));
      decided[i] = majority(votes, fallback_);
    }
    path.pop_back();
    return decided;
  }

  std::uint64_t messages() const { return messages_; }

 private:
  V transmit(const Path& path, unsigned round, unsigned from, unsigned to, const V& honest) {
    ++messages_;
    if (observer_) observer_(round, from, to);
    if (faults_.faulty.count(from) != 0 && faults_.send) {
      auto sent = faults_.send(path, from, to, honest);
      return sent ? *sent : fallback_;
    }
    return honest;
  }

  const Faults<V>& faults_;
  const V& fallback_;
  const MessageObserver& observer_;
  std::uint64_t messages_ = 0;
};

}  // namespace detail

// Broadcasts `value` from `commander` to all n participants. Throws
// ConfigError unless omega < n/3; the agreement guarantee is only meaningful
// when at most omega participants are listed as faulty.
template <typename V>
Result<V> broadcast(unsigned n, unsigned commander, const V& value, unsigned omega, const Faults<V>& faults,
                    const V& fallback, const MessageObserver& observer = {}) {
  if (commander >= n) throw ConfigError("broadcast: commander out of range");
  if (3 * omega >= n) throw ConfigError("broadcast requires omega < n/3");
  std::vector<unsigned> everyone(n);
  for (unsigned i = 0; i < n; ++i) everyone[i] = i;
  detail::OralMessages<V> om(faults, fallback, observer);
  Path path;
  auto decided = om.run(omega, commander, value, everyone, path, n);
  Result<V> out;
  out.delivered.assign(n, fallback);
  for (unsigned i = 0; i < n; ++i) {
    out.delivered[i] = (i == commander) ? value : decided[i].value_or(fallback);
  }
  out.rounds = omega + 1;
  out.messages = om.messages();
  return out;
}

}  // namespace uss::broadcast
