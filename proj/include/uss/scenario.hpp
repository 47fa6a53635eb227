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

#include <string>

#include <json.hpp>

#include "uss/netsim.hpp"

// Declarative scenario files (JSON). The schema is documented in
// docs/scenario_format.md.
namespace uss::netsim {

// Scheme block {N, M, omega, l_max, a, eps_tot, k, b, s0}. Without k, b and
// s0 the optimizer supplies them; a defaults to min_a and may not be smaller.
protocol::SchemeParams parse_scheme(const nlohmann::json& scheme, std::uint64_t min_a);

// Throws ConfigError on unknown keys, missing fields or invalid values.
Scenario parse_scenario(const nlohmann::json& doc);
Scenario load_scenario(const std::string& path);

// Applies "dotted.path=value" overrides; values parse as JSON when possible
// and fall back to strings. Throws ConfigError if a path names no known field.
void apply_override(nlohmann::json& doc, const std::string& assignment);

// Self-describing summary of the resolved parameters of a scenario.
nlohmann::json describe(const Scenario& scenario);

}  // namespace uss::netsim
