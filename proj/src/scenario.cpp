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

#include "uss/scenario.hpp"

#include <fstream>
#include <set>

#include "uss/as2u.hpp"
#include "uss/error.hpp"

namespace uss::netsim {
namespace {

using nlohmann::json;

const std::set<std::string> kTopKeys{"name",  "seed",    "scheme",      "topology", "behaviors", "preferences",
                                     "message", "message_hex", "steps", "auth"};
const std::set<std::string> kSchemeKeys{"N", "M", "omega", "l_max", "a", "eps_tot", "k", "b", "s0"};
const std::set<std::string> kTopologyKeys{"distance_km", "pool_bits", "external_links", "external_pairs", "distances",
                                          "pools"};
const std::set<std::string> kAuthKeys{"enabled", "eps_auth"};
const std::set<std::string> kStepKeys{"op", "from", "to", "l_rec", "corrupt", "initiator", "node"};
const std::set<std::string> kBehaviorKeys{"kind", "targets", "fraction"};

void only(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (allowed.count(key) == 0) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
T get(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError("missing '" + key + "' in " + where);
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("invalid value for '" + key + "' in " + where);
  }
}

template <typename T>
T get_or(const json& obj, const std::string& key, T fallback, const std::string& where) {
  return obj.contains(key) ? get<T>(obj, key, where) : fallback;
}

NodeId node(const json& value, const std::string& where) {
  if (!value.is_string()) throw ConfigError(where + ": node names are strings such as \"P1\"");
  try {
    return NodeId::parse(value.get<std::string>());
  } catch (const Error&) {
    throw ConfigError(where + ": unknown node '" + value.get<std::string>() + "'");
  }
}

// "E2" or "2" both name external node 2.
unsigned external_index(const std::string& key, const std::string& where) {
  try {
    if (!key.empty() && key[0] == 'E') {
      const auto id = NodeId::parse(key);
      return id.index;
    }
    std::size_t used = 0;
    const auto v = std::stoul(key, &used);
    if (used == key.size()) return static_cast<unsigned>(v);
  } catch (const std::exception&) {
  }
  throw ConfigError(where + ": '" + key + "' does not name an external node");
}

// Lists of internal recipients may use either "P3" or 3.
std::vector<unsigned> internal_list(const json& value, const std::string& where) {
  if (!value.is_array()) throw ConfigError(where + " must be an array");
  std::vector<unsigned> out;
  for (const auto& v : value) {
    if (v.is_number_unsigned()) {
      out.push_back(v.get<unsigned>());
    } else {
      const auto id = node(v, where);
      if (!id.is_internal()) throw ConfigError(where + ": " + id.str() + " is not an internal recipient");
      out.push_back(id.index);
    }
  }
  return out;
}

std::pair<NodeId, NodeId> link_of(const json& value, const std::string& where) {
  if (!value.is_array() || value.size() != 2) throw ConfigError(where + ": a link is a pair of node names");
  return {node(value[0], where), node(value[1], where)};
}

BitString decode_hex(const std::string& hex) {
  if (hex.size() % 2 != 0) throw ConfigError("message_hex needs an even number of digits");
  std::vector<std::uint8_t> bytes;
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    std::size_t used = 0;
    unsigned v = 0;
    try {
      v = static_cast<unsigned>(std::stoul(hex.substr(i, 2), &used, 16));
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != 2) throw ConfigError("message_hex contains a non-hex digit");
    bytes.push_back(static_cast<std::uint8_t>(v));
  }
  return BitString::from_bytes(bytes);
}

Step parse_step(const json& j, std::size_t n) {
  const std::string where = "steps[" + std::to_string(n) + "]";
  only(j, kStepKeys, where);
  const auto op = get<std::string>(j, "op", where);
  Step s;
  if (op == "send") {
    s.op = Step::Op::kSend;
    s.from = j.contains("from") ? node(j["from"], where) : NodeId::signer();
    s.to = node(j.at("to"), where);
    if (j.contains("l_rec")) s.l_rec = get<int>(j, "l_rec", where);
    s.corrupt = get_or<std::uint64_t>(j, "corrupt", 0, where);
  } else if (op == "forward") {
    s.op = Step::Op::kForward;
    if (!j.contains("from") || !j.contains("to")) throw ConfigError(where + ": forward needs 'from' and 'to'");
    s.from = node(j["from"], where);
    s.to = node(j["to"], where);
  } else if (op == "vote") {
    s.op = Step::Op::kVote;
    if (!j.contains("initiator")) throw ConfigError(where + ": vote needs 'initiator'");
    s.from = node(j["initiator"], where);
    if (!s.from.is_internal()) throw ConfigError(where + ": the vote initiator must be an internal recipient");
  } else if (op == "mv_query") {
    s.op = Step::Op::kMvQuery;
    if (!j.contains("node")) throw ConfigError(where + ": mv_query needs 'node'");
    s.from = node(j["node"], where);
    if (!s.from.is_external()) throw ConfigError(where + ": mv_query is issued by an external node");
  } else {
    throw ConfigError(where + ": unknown op '" + op + "'");
  }
  return s;
}

}  // namespace

protocol::SchemeParams parse_scheme(const json& s, std::uint64_t min_a) {
  only(s, kSchemeKeys, "scheme");
  bounds::SchemeConfig cfg;
  cfg.N = get<unsigned>(s, "N", "scheme");
  cfg.M = get_or<unsigned>(s, "M", 0, "scheme");
  cfg.omega = get<unsigned>(s, "omega", "scheme");
  cfg.l_max = get_or<unsigned>(s, "l_max", 1, "scheme");
  cfg.a = get_or<std::uint64_t>(s, "a", min_a, "scheme");
  cfg.eps_tot = get_or<double>(s, "eps_tot", 1e-10, "scheme");
  if (cfg.a < min_a) {
    throw ConfigError("scheme.a=" + std::to_string(cfg.a) + " is shorter than the length-prefixed message (" +
                      std::to_string(min_a) + " bits)");
  }
  const int given = int(s.contains("k")) + int(s.contains("b")) + int(s.contains("s0"));
  if (given == 3) {
    cfg.k = get<std::uint64_t>(s, "k", "scheme");
    cfg.b = get<unsigned>(s, "b", "scheme");
    cfg.s0 = get<double>(s, "s0", "scheme");
  } else if (given == 0) {
    const auto best = bounds::optimize({cfg.N, cfg.M, cfg.omega, cfg.l_max, cfg.a, cfg.eps_tot});
    cfg.k = best.k;
    cfg.b = best.b;
    cfg.s0 = best.s0;
  } else {
    throw ConfigError("scheme: give all of k, b and s0, or none to run the optimizer");
  }
  try {
    return protocol::make_scheme(cfg);
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("scheme: ") + e.what());
  }
}

Scenario parse_scenario(const json& doc) {
  only(doc, kTopKeys, "scenario");
  Scenario sc;
  sc.name = get_or<std::string>(doc, "name", "scenario", "scenario");
  sc.seed = get_or<std::uint64_t>(doc, "seed", 1, "scenario");

  if (doc.contains("message") && doc.contains("message_hex")) throw ConfigError("give either message or message_hex");
  BitString payload;
  if (doc.contains("message_hex")) {
    payload = decode_hex(get<std::string>(doc, "message_hex", "scenario"));
  } else {
    const auto text = get_or<std::string>(doc, "message", "hello", "scenario");
    payload = BitString::from_bytes(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  }
  sc.message = as2u::with_length_prefix(payload);

  if (!doc.contains("scheme")) throw ConfigError("missing 'scheme'");
  sc.params = parse_scheme(doc["scheme"], sc.message.size());

  auto& t = sc.topology;
  t.N = sc.params.N;
  t.M = sc.params.M;
  t.omega = sc.params.omega;
  t.l_max = sc.params.l_max;
  if (doc.contains("topology")) {
    const auto& tj = doc["topology"];
    only(tj, kTopologyKeys, "topology");
    t.distance_km = get_or<double>(tj, "distance_km", t.distance_km, "topology");
    t.pool_bits = get_or<std::uint64_t>(tj, "pool_bits", t.pool_bits, "topology");
    if (tj.contains("external_links")) {
      if (!tj["external_links"].is_object()) throw ConfigError("topology.external_links must be an object");
      for (const auto& [key, value] : tj["external_links"].items()) {
        t.external_links[external_index(key, "topology.external_links")] =
            internal_list(value, "topology.external_links." + key);
      }
    }
    if (tj.contains("external_pairs")) {
      for (const auto& pair : tj["external_pairs"]) {
        const auto [x, y] = link_of(pair, "topology.external_pairs");
        if (!x.is_external() || !y.is_external()) throw ConfigError("topology.external_pairs links external nodes only");
        t.external_pairs.emplace_back(x.index, y.index);
      }
    }
    for (const char* key : {"distances", "pools"}) {
      if (!tj.contains(key)) continue;
      const std::string where = std::string("topology.") + key;
      if (!tj[key].is_array()) throw ConfigError(where + " must be an array");
      for (const auto& entry : tj[key]) {
        only(entry, {"link", std::string(key) == "pools" ? "bits" : "km"}, where);
        const auto pair = link_of(entry.at("link"), where);
        if (std::string(key) == "pools") {
          t.pools[pair] = get<std::uint64_t>(entry, "bits", where);
        } else {
          t.distances[pair] = get<double>(entry, "km", where);
        }
      }
    }
  }

  if (doc.contains("behaviors")) {
    if (!doc["behaviors"].is_object()) throw ConfigError("behaviors must be an object");
    for (const auto& [key, value] : doc["behaviors"].items()) {
      const std::string where = "behaviors." + key;
      const auto id = node(json(key), where);
      BehaviorSpec b;
      if (value.is_string()) {
        b.kind = parse_behavior(value.get<std::string>());
      } else {
        only(value, kBehaviorKeys, where);
        b.kind = parse_behavior(get<std::string>(value, "kind", where));
        if (value.contains("targets")) b.targets = internal_list(value["targets"], where + ".targets");
        b.fraction = get_or<double>(value, "fraction", 0.0, where);
        if (b.fraction < 0.0 || b.fraction > 1.0) throw ConfigError(where + ".fraction must lie in [0, 1]");
      }
      sc.behaviors[id] = b;
    }
  }

  if (doc.contains("preferences")) {
    if (!doc["preferences"].is_object()) throw ConfigError("preferences must be an object");
    for (const auto& [key, value] : doc["preferences"].items()) {
      sc.preferences[external_index(key, "preferences")] = internal_list(value, "preferences." + key);
    }
  }

  if (doc.contains("steps")) {
    if (!doc["steps"].is_array()) throw ConfigError("steps must be an array");
    for (std::size_t n = 0; n < doc["steps"].size(); ++n) sc.steps.push_back(parse_step(doc["steps"][n], n));
  }

  if (doc.contains("auth")) {
    const auto& aj = doc["auth"];
    only(aj, kAuthKeys, "auth");
    sc.auth_accounting = get_or<bool>(aj, "enabled", true, "auth");
    sc.eps_auth = get_or<double>(aj, "eps_auth", sc.eps_auth, "auth");
    if (!(sc.eps_auth > 0.0 && sc.eps_auth < 1.0)) throw ConfigError("auth.eps_auth must lie in (0, 1)");
  }
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_scenario(doc);
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not of the form path=value");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  std::vector<std::string> parts;
  for (std::size_t pos = 0;;) {
    const auto dot = path.find('.', pos);
    parts.push_back(path.substr(pos, dot - pos));
    if (dot == std::string::npos) break;
    pos = dot + 1;
  }
  if (kTopKeys.count(parts[0]) == 0) throw ConfigError("override names unknown field '" + parts[0] + "'");
  const std::map<std::string, const std::set<std::string>*> sections{
      {"scheme", &kSchemeKeys}, {"topology", &kTopologyKeys}, {"auth", &kAuthKeys}};
  if (auto it = sections.find(parts[0]); it != sections.end() && parts.size() > 1 && it->second->count(parts[1]) == 0) {
    throw ConfigError("override names unknown field '" + parts[0] + "." + parts[1] + "'");
  }
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  json* cur = &doc;
  for (std::size_t n = 0; n < parts.size(); ++n) {
    const auto& p = parts[n];
    const bool last = n + 1 == parts.size();
    if (cur->is_array()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(p);
      } catch (const std::exception&) {
        throw ConfigError("override path '" + path + "' indexes an array with '" + p + "'");
      }
      if (idx >= cur->size()) throw ConfigError("override path '" + path + "' is out of range");
      cur = &(*cur)[idx];
    } else {
      if (cur->is_null()) *cur = json::object();
      if (!cur->is_object()) throw ConfigError("override path '" + path + "' descends into a scalar");
      cur = &(*cur)[p];
    }
    if (last) *cur = value;
  }
}

json describe(const Scenario& sc) {
  const auto& p = sc.params;
  const auto kc = bounds::key_consumption(p.N, p.k, p.family.y, p.family.b);
  json behaviors = json::object();
  for (const auto& [id, b] : sc.behaviors) behaviors[id.str()] = to_string(b.kind);
  return {{"name", sc.name},
          {"seed", sc.seed},
          {"scheme",
           {{"N", p.N},
            {"M", p.M},
            {"omega", p.omega},
            {"l_max", p.l_max},
            {"a", p.family.a},
            {"b", p.family.b},
            {"s", p.family.s},
            {"y", p.family.y},
            {"k", p.k},
            {"s0", p.s0},
            {"signature_tags", p.signature_length()}}},
          {"message_bits", sc.message.size()},
          {"key_consumption", {{"L_sr", kc.L_sr}, {"L_rr", kc.L_rr}, {"L_tot", kc.L_tot}}},
          {"auth", {{"enabled", sc.auth_accounting}, {"eps_auth", sc.eps_auth}, {"bits", bounds::auth_key_cost(sc.eps_auth)}}},
          {"behaviors", behaviors},
          {"steps", sc.steps.empty() ? json("default") : json(sc.steps.size())}};
}

}  // namespace uss::netsim
