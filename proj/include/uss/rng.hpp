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
#include <limits>
#include <span>
#include <vector>

namespace uss {

// Counter-based generator: output n of stream (seed, stream) is a pure
// function of (seed, stream, n). Streams are forked by id so that independent
// consumers (nodes, trials, links) never perturb each other.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  // Child stream keyed by `id`; deterministic in (seed, stream, id).
  CounterRng fork(std::uint64_t id) const;

  // Uniform integer in [0, bound), bound > 0. Unbiased (rejection sampling),
  // and identical on every platform unlike std::uniform_int_distribution.
  std::uint64_t below(std::uint64_t bound);

  // `width` (<= 64) uniformly random bits in the low end of the result.
  std::uint64_t bits(unsigned width);

  // Uniform double in [0, 1).
  double unit();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  std::uint64_t counter() const { return counter_; }
  // Repositions the stream so the next output is output number `counter`.
  void seek(std::uint64_t counter) { counter_ = counter; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

// Stateless 64-bit mixer used by CounterRng (SplitMix64 finalizer).
std::uint64_t mix64(std::uint64_t x);

// Fisher-Yates shuffle driven by CounterRng::below.
template <typename T>
void shuffle(std::span<T> items, CounterRng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(items[i - 1], items[j]);
  }
}

template <typename T>
void shuffle(std::vector<T>& items, CounterRng& rng) {
  shuffle(std::span<T>(items), rng);
}

}  // namespace uss
