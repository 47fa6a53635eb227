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
#include <utility>

#include "uss/bits.hpp"
#include "uss/broadcast.hpp"
#include "uss/protocol.hpp"

// Bit-exact encodings of every simulated message. A frame is an 8-bit kind
// header sent in the clear followed by the body; one-time-pad encryption and
// key accounting apply to the body only. See docs/wire_format.md.
namespace uss::wire {

enum class Kind : std::uint8_t {
  kKeySlice = 1,
  kKeyChunk = 2,
  kPackage = 3,
  kVerifyRequest = 4,
  kVerifyResponse = 5,
  kMvRequest = 6,
  kMvResponse = 7,
  kBroadcastRound = 8,
};

const char* to_string(Kind kind);

inline constexpr unsigned kHeaderBits = 8;
inline constexpr unsigned kLengthBits = 64;

// N k y bits: the keys in global-index order.
BitString encode_key_slice(const protocol::SchemeParams& params, const protocol::KeySlice& slice);
protocol::KeySlice decode_key_slice(const protocol::SchemeParams& params, unsigned recipient, const BitString& body);

// k (ceil(log2 Nk) + y) bits: each index relative to the source's slice,
// followed by its key.
BitString encode_key_chunk(const protocol::SchemeParams& params, const protocol::KeyChunk& chunk);
protocol::KeyChunk decode_key_chunk(const protocol::SchemeParams& params, unsigned source, unsigned dest,
                                    const BitString& body);

// |m| (64) | m | l_rec (8) | N^2 k tags of b bits
BitString encode_package(const protocol::SchemeParams& params, const protocol::Package& package);
protocol::Package decode_package(const protocol::SchemeParams& params, const BitString& body);

// role (2) | index (32) | package
BitString encode_verify_request(const protocol::SchemeParams& params, const protocol::Package& package,
                                protocol::NodeId sender);
std::pair<protocol::Package, protocol::NodeId> decode_verify_request(const protocol::SchemeParams& params,
                                                                     const BitString& body);

// l_ver as an 8-bit two's complement integer
BitString encode_verify_response(int level);
int decode_verify_response(const BitString& body);

// |m| (64) | m | N^2 k tags of b bits
BitString encode_mv_request(const protocol::SchemeParams& params, const protocol::SignedMessage& pair);
protocol::SignedMessage decode_mv_request(const protocol::SchemeParams& params, const BitString& body);

// 0 none, 1 accepted, 2 rejected (2 bits)
BitString encode_mv_response(protocol::MvAnswer answer);
protocol::MvAnswer decode_mv_response(const BitString& body);

// round (8) | relay count (8) | one byte per relay | payload
BitString encode_broadcast_round(unsigned round, const broadcast::Path& path, const BitString& payload);

BitString frame(Kind kind, const BitString& body);
std::pair<Kind, BitString> unframe(const BitString& framed);

}  // namespace uss::wire
