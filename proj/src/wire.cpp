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

#include "uss/wire.hpp"

#include "uss/error.hpp"

namespace uss::wire {

namespace {

class Reader {
 public:
  explicit Reader(const BitString& bits) : bits_(bits) {}

  std::uint64_t take(unsigned width) {
    need(width);
    const auto v = bits_.read_uint(pos_, width);
    pos_ += width;
    return v;
  }

  BitString take_bits(std::uint64_t len) {
    need(len);
    auto out = bits_.slice(pos_, len);
    pos_ += len;
    return out;
  }

  as2u::AuthKey take_key(const as2u::FamilyParams& params) {
    need(params.y);
    auto key = as2u::read_key(bits_, pos_, params);
    pos_ += params.y;
    return key;
  }

  void finish() const {
    if (pos_ != bits_.size()) throw LengthError("trailing bits in message body");
  }

 private:
  void need(std::uint64_t len) const {
    if (len > bits_.size() - pos_) throw LengthError("truncated message body");
  }

  const BitString& bits_;
  std::size_t pos_ = 0;
};

void append_tags(BitString& out, const protocol::SchemeParams& params, const protocol::Signature& sigma) {
  if (sigma.tags.size() != params.signature_length()) throw LengthError("signature has the wrong number of tags");
  for (auto t : sigma.tags) out.append_uint(t, params.family.b);
}

protocol::Signature take_tags(Reader& in, const protocol::SchemeParams& params) {
  protocol::Signature sigma;
  sigma.tags.resize(params.signature_length());
  for (auto& t : sigma.tags) t = in.take(params.family.b);
  return sigma;
}

void append_message(BitString& out, const BitString& m) {
  out.append_uint(m.size(), kLengthBits);
  out.append(m);
}

}  // namespace

const char* to_string(Kind kind) {
  switch (kind) {
    case Kind::kKeySlice:
      return "KeySlice";
    case Kind::kKeyChunk:
      return "KeyChunk";
    case Kind::kPackage:
      return "Package";
    case Kind::kVerifyRequest:
      return "VerifyRequest";
    case Kind::kVerifyResponse:
      return "VerifyResponse";
    case Kind::kMvRequest:
      return "MvRequest";
    case Kind::kMvResponse:
      return "MvResponse";
    case Kind::kBroadcastRound:
      return "BroadcastRound";
  }
  return "?";
}

BitString encode_key_slice(const protocol::SchemeParams& params, const protocol::KeySlice& slice) {
  if (slice.keys.size() != params.slice_length()) throw LengthError("key slice has the wrong size");
  BitString out;
  for (const auto& key : slice.keys) as2u::append_key(out, params.family, key);
  return out;
}

protocol::KeySlice decode_key_slice(const protocol::SchemeParams& params, unsigned recipient, const BitString& body) {
  Reader in(body);
  protocol::KeySlice slice{recipient, (recipient - 1) * params.slice_length(), {}};
  for (std::uint64_t r = 0; r < params.slice_length(); ++r) slice.keys.push_back(in.take_key(params.family));
  in.finish();
  return slice;
}

BitString encode_key_chunk(const protocol::SchemeParams& params, const protocol::KeyChunk& chunk) {
  if (chunk.indices.size() != params.k || chunk.keys.size() != params.k) {
    throw LengthError("key chunk has the wrong size");
  }
  const std::uint64_t first = (chunk.source - 1) * params.slice_length();
  const unsigned w = params.index_width();
  BitString out;
  for (std::uint64_t r = 0; r < params.k; ++r) {
    const std::uint64_t g = chunk.indices[r];
    if (g < first || g >= first + params.slice_length()) throw LengthError("key index outside the source slice");
    out.append_uint(g - first, w);
    as2u::append_key(out, params.family, chunk.keys[r]);
  }
  return out;
}

protocol::KeyChunk decode_key_chunk(const protocol::SchemeParams& params, unsigned source, unsigned dest,
                                    const BitString& body) {
  Reader in(body);
  protocol::KeyChunk chunk{source, dest, {}, {}};
  const std::uint64_t first = (source - 1) * params.slice_length();
  const unsigned w = params.index_width();
  for (std::uint64_t r = 0; r < params.k; ++r) {
    const std::uint64_t local = in.take(w);
    if (local >= params.slice_length()) throw LengthError("key index outside the source slice");
    chunk.indices.push_back(first + local);
    chunk.keys.push_back(in.take_key(params.family));
  }
  in.finish();
  return chunk;
}

BitString encode_package(const protocol::SchemeParams& params, const protocol::Package& package) {
  if (package.l_rec < 0 || package.l_rec > 255) throw LengthError("l_rec does not fit 8 bits");
  BitString out;
  append_message(out, package.m);
  out.append_uint(static_cast<std::uint64_t>(package.l_rec), 8);
  append_tags(out, params, package.sigma);
  return out;
}

protocol::Package decode_package(const protocol::SchemeParams& params, const BitString& body) {
  Reader in(body);
  protocol::Package p;
  p.m = in.take_bits(in.take(kLengthBits));
  p.l_rec = static_cast<int>(in.take(8));
  p.sigma = take_tags(in, params);
  in.finish();
  return p;
}

BitString encode_verify_request(const protocol::SchemeParams& params, const protocol::Package& package,
                                protocol::NodeId sender) {
  BitString out;
  out.append_uint(static_cast<std::uint64_t>(sender.role), 2);
  out.append_uint(sender.index, 32);
  out.append(encode_package(params, package));
  return out;
}

std::pair<protocol::Package, protocol::NodeId> decode_verify_request(const protocol::SchemeParams& params,
                                                                     const BitString& body) {
  Reader in(body);
  const auto role = in.take(2);
  if (role > 2) throw LengthError("unknown node role");
  protocol::NodeId sender{static_cast<protocol::Role>(role), static_cast<unsigned>(in.take(32))};
  auto rest = in.take_bits(body.size() - 34);
  return {decode_package(params, rest), sender};
}

BitString encode_verify_response(int level) {
  if (level < -128 || level > 127) throw LengthError("level does not fit 8 bits");
  BitString out;
  out.append_uint(static_cast<std::uint8_t>(static_cast<std::int8_t>(level)), 8);
  return out;
}

int decode_verify_response(const BitString& body) {
  Reader in(body);
  const auto raw = static_cast<std::uint8_t>(in.take(8));
  in.finish();
  return static_cast<std::int8_t>(raw);
}

BitString encode_mv_request(const protocol::SchemeParams& params, const protocol::SignedMessage& pair) {
  BitString out;
  append_message(out, pair.m);
  append_tags(out, params, pair.sigma);
  return out;
}

protocol::SignedMessage decode_mv_request(const protocol::SchemeParams& params, const BitString& body) {
  Reader in(body);
  protocol::SignedMessage pair;
  pair.m = in.take_bits(in.take(kLengthBits));
  pair.sigma = take_tags(in, params);
  in.finish();
  return pair;
}

BitString encode_mv_response(protocol::MvAnswer answer) {
  BitString out;
  switch (answer) {
    case protocol::MvAnswer::kNone:
      out.append_uint(0, 2);
      break;
    case protocol::MvAnswer::kAccepted:
      out.append_uint(1, 2);
      break;
    case protocol::MvAnswer::kRejected:
      out.append_uint(2, 2);
      break;
  }
  return out;
}

protocol::MvAnswer decode_mv_response(const BitString& body) {
  Reader in(body);
  const auto v = in.take(2);
  in.finish();
  if (v == 1) return protocol::MvAnswer::kAccepted;
  if (v == 2) return protocol::MvAnswer::kRejected;
  if (v == 0) return protocol::MvAnswer::kNone;
  throw LengthError("unknown majority-vote answer");
}

BitString encode_broadcast_round(unsigned round, const broadcast::Path& path, const BitString& payload) {
  if (round > 255 || path.size() > 255) throw LengthError("broadcast round header overflow");
  BitString out;
  out.append_uint(round, 8);
  out.append_uint(path.size(), 8);
  for (unsigned hop : path) {
    if (hop > 255) throw LengthError("relay id does not fit 8 bits");
    out.append_uint(hop, 8);
  }
  out.append(payload);
  return out;
}

BitString frame(Kind kind, const BitString& body) {
  BitString out;
  out.append_uint(static_cast<std::uint8_t>(kind), kHeaderBits);
  out.append(body);
  return out;
}

std::pair<Kind, BitString> unframe(const BitString& framed) {
  if (framed.size() < kHeaderBits) throw LengthError("frame shorter than its header");
  const auto raw = framed.read_uint(0, kHeaderBits);
  if (raw < 1 || raw > 8) throw LengthError("unknown frame kind");
  return {static_cast<Kind>(raw), framed.slice(kHeaderBits, framed.size() - kHeaderBits)};
}

}  // namespace uss::wire
