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

#include "uss/rng.hpp"

#include <stdexcept>

namespace uss {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

CounterRng::result_type CounterRng::operator()() {
  std::uint64_t key = mix64(seed_ ^ mix64(stream_ + 0x632be59bd9b4e019ULL));
  return mix64(key + mix64(counter_++));
}

CounterRng CounterRng::fork(std::uint64_t id) const {
  return CounterRng(seed_, mix64(stream_ * 0xd1342543de82ef95ULL + id + 1));
}

std::uint64_t CounterRng::below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("CounterRng::below: zero bound");
  // Largest multiple of bound representable; values above it are rejected.
  std::uint64_t limit = max() - (max() % bound + 1) % bound;
  for (;;) {
    std::uint64_t v = (*this)();
    if (v <= limit) return v % bound;
  }
}

std::uint64_t CounterRng::bits(unsigned width) {
  if (width == 0) return 0;
  std::uint64_t v = (*this)();
  return width >= 64 ? v : (v & ((std::uint64_t{1} << width) - 1));
}

double CounterRng::unit() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

}  // namespace uss
