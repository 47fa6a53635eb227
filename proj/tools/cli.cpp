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

#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "uss/as2u.hpp"
#include "uss/attacks.hpp"
#include "uss/bounds.hpp"
#include "uss/error.hpp"
#include "uss/gf2m.hpp"
#include "uss/netsim.hpp"
#include "uss/scenario.hpp"

namespace uss::cli {
namespace {

using nlohmann::json;

enum class Format { kTable, kCsv };

struct Common {
  std::string input;
  std::uint64_t seed = 1;
  bool seed_set = false;
  std::string out_dir;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> trials;
  Format format = Format::kTable;
};

// ------------------------------------------------------------------ output

std::size_t display_width(const std::string& s) {
  std::size_t n = 0;
  for (unsigned char ch : s) n += (ch & 0xC0) != 0x80 ? 1 : 0;
  return n;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

struct Table {
  std::string title;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void print(std::ostream& out, Format f) const {
    if (f == Format::kCsv) {
      out << "# " << title << '\n';
      write_csv(out);
      return;
    }
    std::vector<std::size_t> width(header.size(), 0);
    for (std::size_t c = 0; c < header.size(); ++c) width[c] = display_width(header[c]);
    for (const auto& r : rows) {
      for (std::size_t c = 0; c < r.size() && c < width.size(); ++c) width[c] = std::max(width[c], display_width(r[c]));
    }
    auto line = [&](const std::vector<std::string>& cells) {
      std::string s;
      for (std::size_t c = 0; c < cells.size(); ++c) {
        if (c) s += "  ";
        s += cells[c];
        if (c + 1 < cells.size()) s.append(width[c] - display_width(cells[c]), ' ');
      }
      s.erase(s.find_last_not_of(' ') + 1);
      out << s << '\n';
    };
    out << "== " << title << '\n';
    line(header);
    std::vector<std::string> rule;
    for (auto w : width) rule.push_back(std::string(w, '-'));
    line(rule);
    for (const auto& r : rows) line(r);
    out << '\n';
  }

  void write_csv(std::ostream& out) const {
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t c = 0; c < cells.size(); ++c) out << (c ? "," : "") << csv_field(cells[c]);
      out << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
  }
};

std::string sig3(double v) {
  if (v == 0.0) return "0";
  int digits = 2 - static_cast<int>(std::floor(std::log10(std::fabs(v))));
  digits = std::max(digits, 0);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string fixed(double v, int places) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", places, v);
  return buf;
}

std::string prob(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string bits_cell(std::uint64_t bits, Format f) { return f == Format::kCsv ? std::to_string(bits) : format_bits(bits); }

void write_file(const Common& c, const std::string& name, const std::function<void(std::ostream&)>& body,
                std::ostream& out) {
  if (c.out_dir.empty()) return;
  std::filesystem::create_directories(c.out_dir);
  const auto path = std::filesystem::path(c.out_dir) / name;
  std::ofstream file(path);
  if (!file) throw ConfigError("cannot write " + path.string());
  body(file);
  out << "wrote " << path.string() << '\n';
}

// ------------------------------------------------------------------ config

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

// Overrides for optimizer and attack configs may only replace values that
// are already present.
void override_existing(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not of the form path=value");
  const std::string path = assignment.substr(0, eq);
  json value;
  try {
    value = json::parse(assignment.substr(eq + 1));
  } catch (const json::parse_error&) {
    value = assignment.substr(eq + 1);
  }
  json* cur = &doc;
  std::size_t pos = 0;
  for (;;) {
    const auto dot = path.find('.', pos);
    const std::string part = path.substr(pos, dot - pos);
    if (cur->is_array()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(part);
      } catch (const std::exception&) {
        throw ConfigError("override path '" + path + "' indexes an array with '" + part + "'");
      }
      if (idx >= cur->size()) throw ConfigError("override path '" + path + "' is out of range");
      cur = &(*cur)[idx];
    } else if (cur->is_object() && cur->contains(part)) {
      cur = &(*cur)[part];
    } else {
      throw ConfigError("override names unknown parameter '" + path + "'");
    }
    if (dot == std::string::npos) break;
    pos = dot + 1;
  }
  *cur = value;
}

template <typename T>
T field(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) throw ConfigError("missing '" + key + "' in " + where);
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("invalid '" + key + "' in " + where);
  }
}

template <typename T>
T field_or(const json& obj, const std::string& key, T fallback, const std::string& where) {
  return obj.contains(key) ? field<T>(obj, key, where) : fallback;
}

void only_keys(const json& obj, std::initializer_list<const char*> keys, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [k, _] : obj.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* x) { return k == x; })) {
      throw ConfigError("unknown key '" + k + "' in " + where);
    }
  }
}

bounds::OptimizeInput optimize_input(const json& j, const std::string& where) {
  only_keys(j, {"N", "M", "omega", "l_max", "a", "eps_tot"}, where);
  return {field<unsigned>(j, "N", where),     field_or<unsigned>(j, "M", 0, where),
          field<unsigned>(j, "omega", where), field_or<unsigned>(j, "l_max", 1, where),
          field<std::uint64_t>(j, "a", where), field_or<double>(j, "eps_tot", 1e-10, where)};
}

bounds::SchemeConfig scheme_config(const json& j, const std::string& where) {
  only_keys(j, {"N", "M", "omega", "l_max", "a", "eps_tot", "k", "b", "s0"}, where);
  bounds::SchemeConfig c;
  c.N = field<unsigned>(j, "N", where);
  c.M = field_or<unsigned>(j, "M", 0, where);
  c.omega = field<unsigned>(j, "omega", where);
  c.l_max = field_or<unsigned>(j, "l_max", 1, where);
  c.a = field<std::uint64_t>(j, "a", where);
  c.eps_tot = field_or<double>(j, "eps_tot", 1e-10, where);
  c.k = field<std::uint64_t>(j, "k", where);
  c.b = field<unsigned>(j, "b", where);
  c.s0 = field<double>(j, "s0", where);
  return c;
}

std::string describe_config(const bounds::SchemeConfig& c) {
  std::ostringstream s;
  s << "N=" << c.N << " M=" << c.M << " ω=" << c.omega << " l_max=" << c.l_max << " a=" << c.a << " k=" << c.k
    << " b=" << c.b << " s0=" << c.s0;
  return s.str();
}

constexpr std::uint64_t kEightMbit = std::uint64_t{8} << 20;

json default_optimize_config() {
  json rows = json::array();
  auto row = [&](unsigned N, unsigned M, unsigned omega, unsigned l_max, std::uint64_t a, double eps) {
    rows.push_back({{"N", N}, {"M", M}, {"omega", omega}, {"l_max", l_max}, {"a", a}, {"eps_tot", eps}});
  };
  row(4, 0, 1, 1, kEightMbit, 1e-10);
  row(4, 10, 1, 1, kEightMbit, 1e-10);
  row(10, 10, 1, 7, kEightMbit, 1e-10);
  row(10, 10, 3, 1, kEightMbit, 1e-10);
  row(10, 10, 2, 2, kEightMbit, 1e-10);
  row(10, 10, 2, 2, 4 * kEightMbit, 1e-10);
  row(10, 10, 2, 2, kEightMbit, 1e-12);
  row(10, 100, 2, 2, kEightMbit, 1e-10);
  return {{"rows", rows},
          {"curve", {{"row", 0}, {"b_min", 2}, {"b_max", 14}}},
          {"regimes", {{"N_min", 4}, {"N_max", 12}, {"M", 5}, {"a", kEightMbit}, {"eps_tot", 1e-10}}}};
}

json default_attack_suite() {
  const json forgery_scheme{{"N", 4}, {"M", 0}, {"omega", 1}, {"l_max", 1}, {"a", 25}, {"k", 20}, {"b", 3}, {"s0", 0.3}};
  const json nt_scheme{{"N", 4}, {"M", 0}, {"omega", 1}, {"l_max", 1}, {"a", 25}, {"k", 30}, {"b", 3}, {"s0", 0.6}};
  const json counter_scheme{{"N", 5}, {"M", 3}, {"omega", 1}, {"l_max", 2}, {"a", 25}, {"k", 10}, {"b", 3}, {"s0", 0.4}};
  return {{"suite",
           {{{"strategy", "forgery"}, {"scheme", forgery_scheme}, {"trials", 100000}},
            {{"strategy", "forgery_omniscient"}, {"scheme", forgery_scheme}, {"trials", 1000}},
            {{"strategy", "single_guess"}, {"a", 9}, {"b", 2}, {"messages", 64}},
            {{"strategy", "nontransfer"}, {"coalition", "signer"}, {"scheme", nt_scheme}, {"trials", 100000}},
            {{"strategy", "nontransfer"}, {"coalition", "signerless"}, {"scheme", nt_scheme}, {"trials", 100000}},
            {{"strategy", "counter_exhaustion"}, {"scheme", counter_scheme}},
            {{"strategy", "acceptability"}, {"N_min", 4}, {"N_max", 7}},
            {{"strategy", "broadcast"}, {"n", 4}, {"omega", 1}, {"random_n", 7}, {"random_omega", 2},
             {"trials", 10000}}}}};
}

// ------------------------------------------------------------------ optimize

int cmd_optimize(const Common& c, std::ostream& out) {
  json doc = c.input.empty() ? default_optimize_config() : read_json(c.input);
  for (const auto& o : c.overrides) override_existing(doc, o);
  only_keys(doc, {"rows", "curve", "regimes"}, "optimize config");
  const auto& rows = doc.at("rows");
  if (!rows.is_array() || rows.empty()) throw ConfigError("optimize config needs a non-empty 'rows' array");

  Table main{c.format == Format::kCsv ? "optimized parameters (bits)" : "optimized parameters",
             {"row", "N", "M", "ω", "l_max", "a", "ε_tot", "b", "k", "s0", "L_sr", "L_rr", "L_tot", "sig_len",
              "k(b=2)", "s0(b=2)", "L_sr(b=2)", "L_rr(b=2)", "L_tot(b=2)", "sig_len(b=2)"},
             {}};
  std::vector<bounds::OptimizeInput> inputs;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto in = optimize_input(rows[i], "rows[" + std::to_string(i) + "]");
    inputs.push_back(in);
    std::vector<std::string> r{std::to_string(i + 1), std::to_string(in.N), std::to_string(in.M),
                               std::to_string(in.omega), std::to_string(in.l_max), std::to_string(in.a),
                               prob(in.eps_tot)};
    try {
      const auto best = bounds::optimize(in);
      r.insert(r.end(), {std::to_string(best.b), std::to_string(best.k), fixed(best.s0, 3),
                         bits_cell(best.consumption.L_sr, c.format), bits_cell(best.consumption.L_rr, c.format),
                         bits_cell(best.consumption.L_tot, c.format), bits_cell(best.consumption.sig_len, c.format)});
    } catch (const Error& e) {
      r.insert(r.end(), {"infeasible: " + std::string(e.what()), "", "", "", "", "", ""});
    }
    try {
      const auto two = bounds::optimize_for_b(in, 2);
      if (two.result) {
        const auto& t = *two.result;
        r.insert(r.end(), {std::to_string(t.k), fixed(t.s0, 3), bits_cell(t.consumption.L_sr, c.format),
                           bits_cell(t.consumption.L_rr, c.format), bits_cell(t.consumption.L_tot, c.format),
                           bits_cell(t.consumption.sig_len, c.format)});
      } else {
        r.insert(r.end(), {"infeasible: " + two.diagnostic, "", "", "", "", ""});
      }
    } catch (const Error& e) {
      r.insert(r.end(), {"infeasible: " + std::string(e.what()), "", "", "", "", ""});
    }
    main.rows.push_back(std::move(r));
  }
  main.print(out, c.format);

  const json curve = doc.value("curve", json{{"row", 0}, {"b_min", 2}, {"b_max", 14}});
  only_keys(curve, {"row", "b_min", "b_max"}, "curve");
  const auto curve_row = field_or<std::size_t>(curve, "row", 0, "curve");
  if (curve_row >= inputs.size()) throw ConfigError("curve.row is out of range");
  const auto& cin = inputs[curve_row];
  std::ostringstream ctitle;
  ctitle << "L_tot versus b for row " << curve_row + 1 << " (N=" << cin.N << " M=" << cin.M << " ω=" << cin.omega
         << " l_max=" << cin.l_max << " a=" << cin.a << " ε_tot=" << prob(cin.eps_tot) << ")";
  Table curve_t{ctitle.str(), {"b", "k", "s0", "L_tot", "status"}, {}};
  for (unsigned b = field_or<unsigned>(curve, "b_min", 2, "curve"); b <= field_or<unsigned>(curve, "b_max", 14, "curve");
       ++b) {
    try {
      const auto cand = bounds::optimize_for_b(cin, b);
      if (cand.result) {
        curve_t.rows.push_back({std::to_string(b), std::to_string(cand.result->k), fixed(cand.result->s0, 4),
                                bits_cell(cand.result->consumption.L_tot, c.format), "ok"});
      } else {
        curve_t.rows.push_back({std::to_string(b), "", "", "", cand.diagnostic});
      }
    } catch (const Error& e) {
      curve_t.rows.push_back({std::to_string(b), "", "", "", e.what()});
    }
  }
  curve_t.print(out, c.format);

  const json regimes = doc.value("regimes", default_optimize_config()["regimes"]);
  only_keys(regimes, {"N_min", "N_max", "M", "a", "eps_tot"}, "regimes");
  const auto rM = field_or<unsigned>(regimes, "M", 5, "regimes");
  const auto ra = field_or<std::uint64_t>(regimes, "a", kEightMbit, "regimes");
  const auto reps = field_or<double>(regimes, "eps_tot", 1e-10, "regimes");
  std::ostringstream rtitle;
  rtitle << "transferability regimes (M=" << rM << " a=" << ra << " ε_tot=" << prob(reps)
         << "; minimal: ω=ceil(N/3)-1, l_max=1; maximal: ω=1, l_max=N-3)";
  Table regime_t{rtitle.str(), {"N", "regime", "ω", "l_max", "b", "k", "s0", "L_tot"}, {}};
  for (unsigned N = std::max(4u, field_or<unsigned>(regimes, "N_min", 4, "regimes"));
       N <= field_or<unsigned>(regimes, "N_max", 12, "regimes"); ++N) {
    const std::pair<const char*, std::pair<unsigned, unsigned>> cases[] = {{"minimal", {(N + 2) / 3 - 1, 1}},
                                                                           {"maximal", {1, N - 3}}};
    for (const auto& [name, wl] : cases) {
      const bounds::OptimizeInput in{N, rM, wl.first, wl.second, ra, reps};
      std::vector<std::string> r{std::to_string(N), name, std::to_string(wl.first), std::to_string(wl.second)};
      try {
        const auto best = bounds::optimize(in);
        r.insert(r.end(), {std::to_string(best.b), std::to_string(best.k), fixed(best.s0, 3),
                           bits_cell(best.consumption.L_tot, c.format)});
      } catch (const Error& e) {
        r.insert(r.end(), {"infeasible", "", "", e.what()});
      }
      regime_t.rows.push_back(std::move(r));
    }
  }
  regime_t.print(out, c.format);

  if (!c.out_dir.empty()) {
    // CSV files always carry raw bit counts.
    Common csv = c;
    csv.format = Format::kCsv;
    csv.out_dir.clear();
    std::ostringstream captured;
    cmd_optimize(csv, captured);
    std::istringstream lines(captured.str());
    std::string line;
    std::map<std::string, std::string> files;
    const char* names[] = {"optimize_rows.csv", "ltot_vs_b.csv", "regimes.csv"};
    int index = -1;
    while (std::getline(lines, line)) {
      if (line.rfind("# ", 0) == 0) {
        ++index;
        files[names[index]] += line + '\n';
        continue;
      }
      if (index >= 0) files[names[index]] += line + '\n';
    }
    for (const auto& [name, text] : files) write_file(c, name, [&](std::ostream& f) { f << text; }, out);
  }
  return kOk;
}

// ------------------------------------------------------------------ consume

int cmd_consume(const Common& c, std::ostream& out) {
  if (c.input.empty()) throw ConfigError("consume needs a configuration file");
  json doc = read_json(c.input);
  for (const auto& o : c.overrides) override_existing(doc, o);
  only_keys(doc, {"scheme", "auth", "links", "duration_s", "step_s"}, "consume config");
  const auto params = netsim::parse_scheme(doc.at("scheme"), 1);
  const double eps_auth = doc.contains("auth") ? field_or<double>(doc["auth"], "eps_auth", 1e-14, "auth") : 1e-14;
  const auto kc = bounds::key_consumption(params.N, params.k, params.family.y, params.family.b);
  Table t{"key consumption", {"N", "k", "a", "b", "s", "y", "s0", "L_sr", "L_rr", "L_tot", "sig_len", "L_auth"}, {}};
  t.rows.push_back({std::to_string(params.N), std::to_string(params.k), std::to_string(params.family.a),
                    std::to_string(params.family.b), std::to_string(params.family.s), std::to_string(params.family.y),
                    fixed(params.s0, 4), bits_cell(kc.L_sr, c.format), bits_cell(kc.L_rr, c.format),
                    bits_cell(kc.L_tot, c.format), bits_cell(kc.sig_len, c.format),
                    std::to_string(bounds::auth_key_cost(eps_auth))});
  t.print(out, c.format);
  if (doc.contains("links")) {
    const auto& lj = doc["links"];
    only_keys(lj, {"rate0", "gamma", "db_per_km", "distance_km", "distances"}, "links");
    bounds::LinkModel links;
    links.rate0 = field<double>(lj, "rate0", "links");
    links.gamma = lj.contains("db_per_km") ? bounds::gamma_from_db_per_km(field<double>(lj, "db_per_km", "links"))
                                           : field_or<double>(lj, "gamma", 0.0, "links");
    if (lj.contains("distances")) {
      links.distances = field<std::vector<std::vector<double>>>(lj, "distances", "links");
    } else {
      const double d = field_or<double>(lj, "distance_km", 10.0, "links");
      links.distances.assign(params.N + 1, std::vector<double>(params.N + 1, d));
      for (unsigned i = 0; i <= params.N; ++i) links.distances[i][i] = 0.0;
    }
    bounds::SchemeConfig cfg{params.N,          params.M, params.omega, params.l_max, params.family.a, 1e-10,
                             params.k,          params.family.b, params.s0};
    const double duration = field_or<double>(doc, "duration_s", 0.0, "consume config");
    Table r{"signing rate (rate0=" + prob(links.rate0) + " bit/s, gamma=" + prob(links.gamma) + " /km)",
            {"model sets/s", "simulated sets/s", "completed", "duration_s"},
            {}};
    const double model = bounds::uss_rate(cfg, links);
    if (duration > 0.0) {
      const auto rep = netsim::throughput(cfg, links, duration, field_or<double>(doc, "step_s", 0.1, "consume config"));
      r.rows.push_back({prob(model), prob(rep.simulated_rate), std::to_string(rep.completed), prob(duration)});
    } else {
      r.rows.push_back({prob(model), "", "", ""});
    }
    r.print(out, c.format);
  }
  return kOk;
}

// ------------------------------------------------------------------ simulate

int cmd_simulate(const Common& c, std::ostream& out) {
  if (c.input.empty()) throw ConfigError("simulate needs a scenario file");
  json doc = read_json(c.input);
  for (const auto& o : c.overrides) netsim::apply_override(doc, o);
  if (c.seed_set) doc["seed"] = c.seed;
  const auto sc = netsim::parse_scenario(doc);
  const auto result = netsim::run(netsim::Topology::build(sc.topology), sc);
  const auto description = netsim::describe(sc);
  out << "# scenario " << description.dump() << "\n\n";

  Table verdicts{"verdicts", {"tick", "node", "sender", "outcome", "level"}, {}};
  for (const auto& v : result.verdicts) {
    verdicts.rows.push_back({std::to_string(v.tick), v.node.str(), v.sender.str(), protocol::to_string(v.outcome),
                             std::to_string(v.level)});
  }
  verdicts.print(out, c.format);

  if (!result.block_lists.empty()) {
    Table blocks{"block lists", {"node", "blocked"}, {}};
    for (const auto& [node, list] : result.block_lists) {
      std::string names;
      for (const auto& b : list) names += (names.empty() ? "" : " ") + b.str();
      blocks.rows.push_back({node.str(), names});
    }
    blocks.print(out, c.format);
  }
  if (!result.counters.empty()) {
    Table counters{"verification counters", {"internal", "external", "cnt"}, {}};
    for (const auto& [key, value] : result.counters) {
      counters.rows.push_back({"P" + std::to_string(key.first), "E" + std::to_string(key.second), std::to_string(value)});
    }
    counters.print(out, c.format);
  }
  if (!result.votes.empty()) {
    Table votes{"majority votes", {"initiator", "node", "result", "initiator dishonest"}, {}};
    for (const auto& v : result.votes) {
      if (v.refused) {
        votes.rows.push_back({"P" + std::to_string(v.initiator), "-", "refused", "-"});
        continue;
      }
      for (const auto& [j, t] : v.tallies) {
        votes.rows.push_back({"P" + std::to_string(v.initiator), "P" + std::to_string(j),
                              t.result == protocol::MvResult::kAccepted ? "accepted" : "rejected",
                              t.initiator_dishonest ? "yes" : "no"});
      }
    }
    votes.print(out, c.format);
  }
  if (!result.mv_queries.empty()) {
    Table queries{"majority-vote queries", {"tick", "node", "answer"}, {}};
    for (const auto& q : result.mv_queries) {
      queries.rows.push_back({std::to_string(q.tick), q.node.str(), protocol::to_string(q.answer)});
    }
    queries.print(out, c.format);
  }

  Table ledger{"key ledger (bits)", {"link", "credited", "otp", "expected otp", "auth", "balance", "check"}, {}};
  for (const auto& l : result.ledger) {
    const std::uint64_t expected = !l.internal ? 0 : l.a.is_signer() ? result.expected.L_sr : result.expected.L_rr;
    ledger.rows.push_back({l.a.str() + "-" + l.b.str(), std::to_string(l.credited), std::to_string(l.otp),
                           std::to_string(expected), std::to_string(l.auth), std::to_string(l.balance),
                           l.otp == expected ? "ok" : "differs"});
  }
  ledger.print(out, c.format);

  if (result.aborted) {
    out << "aborted: " << result.abort_reason << '\n';
  } else {
    out << "ledger " << (result.ledger_matches ? "matches" : "does not match") << " L_sr=" << result.expected.L_sr
        << " L_rr=" << result.expected.L_rr;
    if (result.auth_bits_per_message) out << "; " << result.auth_bits_per_message << " auth bits per message";
    out << '\n';
  }

  write_file(c, "trace.jsonl", [&](std::ostream& f) { f << result.trace_text(); }, out);
  write_file(
      c, "report.json",
      [&](std::ostream& f) {
        json report{{"scenario", description},
                    {"aborted", result.aborted},
                    {"abort_reason", result.abort_reason},
                    {"ledger_matches", result.ledger_matches},
                    {"L_sr", result.expected.L_sr},
                    {"L_rr", result.expected.L_rr}};
        json vs = json::array();
        for (const auto& v : result.verdicts) {
          vs.push_back({{"tick", v.tick},
                        {"node", v.node.str()},
                        {"sender", v.sender.str()},
                        {"outcome", protocol::to_string(v.outcome)},
                        {"level", v.level}});
        }
        report["verdicts"] = vs;
        f << report.dump(2) << '\n';
      },
      out);

  // A scenario without behaviours or scripted steps is the honest default:
  // anything short of full acceptance there is an invariant failure.
  if (sc.behaviors.empty() && sc.steps.empty() && !result.aborted) {
    const bool all_top = std::all_of(result.verdicts.begin(), result.verdicts.end(), [&](const auto& v) {
      return v.outcome == protocol::Outcome::kAccepted && v.level == static_cast<int>(sc.params.l_max);
    });
    if (!all_top || !result.ledger_matches) {
      out << "invariant failure: honest run did not accept everywhere at l_max with an exact ledger\n";
      return kCheckFailed;
    }
    out << "all verdicts l_max; ledger matches L_sr/L_rr exactly\n";
  }
  return kOk;
}

// ------------------------------------------------------------------ attack

struct AttackRow {
  std::vector<std::string> cells;
  bool failed = false;
};

std::vector<std::string> report_cells(const attacks::TrialReport& r) {
  std::string status = !r.pass ? "FAIL" : r.observable ? "pass" : "pass (unobservable, sanity-only)";
  return {r.name, std::to_string(r.trials), std::to_string(r.successes), prob(r.rate), prob(r.bound), prob(r.lower),
          status};
}

int cmd_attack(const Common& c, std::ostream& out) {
  json doc = c.input.empty() ? default_attack_suite() : read_json(c.input);
  for (const auto& o : c.overrides) override_existing(doc, o);
  only_keys(doc, {"suite"}, "attack config");
  Table t{"attack suite (seed " + std::to_string(c.seed) + ", Wilson 99%)",
          {"strategy", "parameters", "trials", "successes", "rate", "bound", "lower", "status", "detail"},
          {}};
  bool failed = false;
  auto add = [&](const std::string& params, const attacks::TrialReport& r, const std::string& detail) {
    auto cells = report_cells(r);
    cells.insert(cells.begin() + 1, params);
    cells.push_back(detail);
    failed = failed || !r.pass;
    t.rows.push_back(std::move(cells));
  };
  auto add_check = [&](const std::string& name, const std::string& params, bool ok, const std::string& detail) {
    failed = failed || !ok;
    t.rows.push_back({name, params, "", "", "", "", "", ok ? "pass" : "FAIL", detail});
  };

  const auto& suite = doc.at("suite");
  for (std::size_t i = 0; i < suite.size(); ++i) {
    const auto& s = suite[i];
    const std::string where = "suite[" + std::to_string(i) + "]";
    const auto strategy = field<std::string>(s, "strategy", where);
    const std::uint64_t seed = field_or<std::uint64_t>(s, "seed", c.seed, where);
    const std::uint64_t trials = c.trials.value_or(field_or<std::uint64_t>(s, "trials", 10000, where));
    if (strategy == "forgery" || strategy == "forgery_omniscient") {
      const auto cfg = scheme_config(s.at("scheme"), where + ".scheme");
      attacks::ForgeryOptions opts;
      opts.omniscient = strategy == "forgery_omniscient";
      const auto r = attacks::attack_forgery(cfg, trials, seed, opts);
      if (opts.omniscient) {
        add_check(r.name, describe_config(cfg), r.successes == r.trials,
                  std::to_string(r.successes) + "/" + std::to_string(r.trials) + " forged with every key known");
      } else {
        add(describe_config(cfg), r, "");
      }
    } else if (strategy == "single_guess") {
      const auto a = field<std::uint64_t>(s, "a", where);
      const auto b = field<unsigned>(s, "b", where);
      const auto g = attacks::single_guess_exhaustive(a, b, field_or<std::uint64_t>(s, "messages", 64, where), seed);
      add_check("single guess (exhaustive)", "a=" + std::to_string(a) + " b=" + std::to_string(b), g.holds(),
                "worst " + prob(g.worst) + " <= 2^(1-b) = " + prob(g.limit) + " over " + std::to_string(g.pairs) +
                    " pairs");
    } else if (strategy == "nontransfer" || strategy == "repudiation") {
      const auto cfg = scheme_config(s.at("scheme"), where + ".scheme");
      attacks::NontransferOptions opts;
      const auto coalition = field_or<std::string>(s, "coalition", "signer", where);
      if (coalition == "signer") {
        opts.coalition = attacks::Coalition::kWithSigner;
      } else if (coalition == "signerless") {
        opts.coalition = attacks::Coalition::kSignerless;
      } else {
        throw ConfigError(where + ": coalition is 'signer' or 'signerless'");
      }
      if (s.contains("corrupt_per_slice")) opts.corrupt_per_slice = field<std::uint64_t>(s, "corrupt_per_slice", where);
      const auto study = attacks::nontransfer_study(cfg, trials, seed, opts);
      const std::string detail = std::to_string(study.votes) + " votes run; " +
                                 std::to_string(study.subset_violations) + " repudiations without non-transferability";
      if (strategy == "nontransfer") add(describe_config(cfg), study.nontransfer, "");
      add(describe_config(cfg), study.repudiation, detail);
      if (study.subset_violations != 0) failed = true;
    } else if (strategy == "counter_exhaustion") {
      const auto cfg = scheme_config(s.at("scheme"), where + ".scheme");
      const auto r = attacks::attack_counter_exhaustion(cfg, seed);
      add_check("counter exhaustion", describe_config(cfg), r.pass(),
                "max cnt " + std::to_string(r.max_honest_counter) + " < " + std::to_string(r.limit) + " after " +
                    std::to_string(r.senders_burned) + " burned senders" +
                    (r.replay_unchanged ? "; replays free" : "; replay changed counters"));
    } else if (strategy == "acceptability") {
      const auto lo = field_or<unsigned>(s, "N_min", 4, where);
      const auto hi = field_or<unsigned>(s, "N_max", 7, where);
      for (unsigned N = lo; N <= hi; ++N) {
        for (unsigned l = 1; l + 3 <= N; ++l) {
          const auto r = attacks::attack_acceptability(N, l, seed);
          add_check("acceptability", "N=" + std::to_string(N) + " l_max=" + std::to_string(l), r.pass(),
                    std::to_string(r.patterns) + " patterns at ω<=" + std::to_string(r.omega_max) + ", " +
                        std::to_string(r.failures) + " below l_max; ω=" + std::to_string(r.omega_max + 1) + ": " +
                        (r.counterexample ? r.example : std::string("no counterexample")));
        }
      }
    } else if (strategy == "broadcast") {
      const auto n = field_or<unsigned>(s, "n", 4, where);
      const auto w = field_or<unsigned>(s, "omega", 1, where);
      const auto ex = attacks::broadcast_exhaustive(n, w);
      add_check("broadcast (exhaustive)", "n=" + std::to_string(n) + " ω=" + std::to_string(w), ex.pass(),
                std::to_string(ex.cases) + " cases, " + std::to_string(ex.agreement_violations) + " agreement / " +
                    std::to_string(ex.validity_violations) + " validity violations");
      const auto rn = field_or<unsigned>(s, "random_n", 7, where);
      const auto rw = field_or<unsigned>(s, "random_omega", 2, where);
      const auto rr = attacks::broadcast_randomized(rn, rw, trials, seed);
      add_check("broadcast (randomized)", "n=" + std::to_string(rn) + " ω=" + std::to_string(rw), rr.pass(),
                std::to_string(rr.cases) + " cases, " + std::to_string(rr.agreement_violations) + " agreement / " +
                    std::to_string(rr.validity_violations) + " validity violations");
    } else {
      throw ConfigError(where + ": unknown strategy '" + strategy + "'");
    }
  }
  t.print(out, c.format);
  write_file(c, "attacks.csv", [&](std::ostream& f) { t.write_csv(f); }, out);
  return failed ? kCheckFailed : kOk;
}

// ------------------------------------------------------------------ selftest

bool field_axioms(unsigned m) {
  const auto& f = gf2m::standard_field(m);
  const std::uint64_t q = std::uint64_t{1} << m;
  for (std::uint64_t x = 0; x < q; ++x) {
    bool has_inverse = x == 0;
    for (std::uint64_t y = 0; y < q; ++y) {
      const auto xy = gf2m::mul_raw(f, x, y);
      if (xy != gf2m::mul_raw(f, y, x)) return false;
      if (xy == 1) has_inverse = true;
      for (std::uint64_t z = 0; z < q; ++z) {
        if (gf2m::mul_raw(f, xy, z) != gf2m::mul_raw(f, x, gf2m::mul_raw(f, y, z))) return false;
        if (gf2m::mul_raw(f, x, y ^ z) != (xy ^ gf2m::mul_raw(f, x, z))) return false;
      }
    }
    if (gf2m::mul_raw(f, x, 1) != x || !has_inverse) return false;
  }
  return true;
}

int cmd_selftest(const Common& c, std::ostream& out) {
  Table t{"self-test", {"check", "status", "detail"}, {}};
  bool ok = true;
  auto record = [&](const std::string& name, bool pass, const std::string& detail) {
    ok = ok && pass;
    t.rows.push_back({name, pass ? "pass" : "FAIL", detail});
  };

  {
    const auto p = as2u::make_params(9, 2);
    std::vector<std::pair<BitString, BitString>> pairs;
    for (std::uint64_t x = 0; x < 512; ++x) {
      for (std::uint64_t y = x + 1; y < 512; ++y) {
        BitString a, b;
        a.append_uint(x, 9);
        b.append_uint(y, 9);
        pairs.emplace_back(std::move(a), std::move(b));
      }
    }
    const auto r = as2u::exhaustive_check(p, pairs);
    record("AS2U exhaustive a=9 b=2", r.holds(),
           std::to_string(r.keys) + " keys, " + std::to_string(r.pairs) + " pairs, worst ratio " + prob(r.worst_ratio));
  }
  {
    const auto p = as2u::make_params(12, 3);
    CounterRng rng(c.seed, 0x5e1f);
    std::vector<std::pair<BitString, BitString>> pairs;
    std::set<std::pair<std::uint64_t, std::uint64_t>> seen;
    while (pairs.size() < 200) {
      const auto x = rng.bits(12), y = rng.bits(12);
      if (x == y || !seen.insert({std::min(x, y), std::max(x, y)}).second) continue;
      BitString a, b;
      a.append_uint(x, 12);
      b.append_uint(y, 12);
      pairs.emplace_back(std::move(a), std::move(b));
    }
    const auto r = as2u::exhaustive_check(p, pairs);
    record("AS2U exhaustive a=12 b=3", r.holds(),
           std::to_string(r.keys) + " keys, " + std::to_string(r.pairs) + " random pairs, worst ratio " +
               prob(r.worst_ratio));
  }
  for (unsigned m = 2; m <= 4; ++m) record("field axioms GF(2^" + std::to_string(m) + ")", field_axioms(m), "exhaustive");
  {
    const auto s = attacks::broadcast_exhaustive(4, 1);
    record("broadcast N=4 ω=1", s.pass(), std::to_string(s.cases) + " adversary strategies");
  }
  {
    json doc{{"seed", c.seed},
             {"scheme", {{"N", 4}, {"M", 1}, {"omega", 1}, {"l_max", 1}, {"k", 16}, {"b", 4}, {"s0", 0.3}}},
             {"auth", {{"enabled", true}}}};
    const auto sc = netsim::parse_scenario(doc);
    const auto r = netsim::run(netsim::Topology::build(sc.topology), sc);
    record("honest simulation ledger", r.ledger_matches && r.auth_bits_per_message == 47,
           "L_sr=" + std::to_string(r.expected.L_sr) + " L_rr=" + std::to_string(r.expected.L_rr));
  }
  t.print(out, c.format);
  return ok ? kOk : kCheckFailed;
}

}  // namespace

std::string format_bits(std::uint64_t bits) {
  const double v = double(bits);
  if (v >= 1e6) return sig3(v / 1e6) + " Mbits";
  return sig3(v / 1e3) + " kbits";
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Signature scheme optimizer, simulator and attack harness"};
  app.require_subcommand(1);
  Common c;
  std::string format = "table";
  std::uint64_t trials = 0;
  std::vector<CLI::Option*> seed_opts, trial_opts;

  auto common = [&](CLI::App* sub, bool needs_input) {
    auto* in = sub->add_option("input", c.input, "configuration or scenario file (JSON)");
    if (needs_input) in->required();
    seed_opts.push_back(sub->add_option("--seed", c.seed, "base seed (default 1)"));
    sub->add_option("--out", c.out_dir, "directory for CSV, trace and report files");
    sub->add_option("--override", c.overrides, "path=value edit of the input, repeatable")->allow_extra_args(false);
    trial_opts.push_back(sub->add_option("--trials", trials, "Monte Carlo trials per strategy"));
    sub->add_option("--format", format, "table or csv")->check(CLI::IsMember({"table", "csv"}));
  };
  auto* optimize = app.add_subcommand("optimize", "optimize (k, b, s0) per configuration row");
  common(optimize, false);
  auto* consume = app.add_subcommand("consume", "key consumption and signing rate of a scheme");
  common(consume, true);
  auto* simulate = app.add_subcommand("simulate", "run a network scenario");
  common(simulate, true);
  auto* attack = app.add_subcommand("attack", "run attack strategies against the bounds");
  common(attack, false);
  auto* selftest = app.add_subcommand("selftest", "exhaustive hash, field and broadcast checks");
  common(selftest, false);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }
  c.format = format == "csv" ? Format::kCsv : Format::kTable;
  c.seed_set = std::any_of(seed_opts.begin(), seed_opts.end(), [](CLI::Option* o) { return o->count() > 0; });
  if (std::any_of(trial_opts.begin(), trial_opts.end(), [](CLI::Option* o) { return o->count() > 0; })) {
    if (trials == 0) {
      err << "error: --trials must be positive\n";
      return kConfigError;
    }
    c.trials = trials;
  }

  try {
    if (app.got_subcommand(optimize)) return cmd_optimize(c, out);
    if (app.got_subcommand(consume)) return cmd_consume(c, out);
    if (app.got_subcommand(simulate)) return cmd_simulate(c, out);
    if (app.got_subcommand(attack)) return cmd_attack(c, out);
    return cmd_selftest(c, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
}

}  // namespace uss::cli
