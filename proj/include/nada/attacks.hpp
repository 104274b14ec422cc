// Copyright (c) 2026 The nadasim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NADA_ATTACKS_HPP
#define NADA_ATTACKS_HPP

#include <string>
#include <vector>

#include "nada/simnet.hpp"

namespace nada::sim {

class World;
struct ScenarioConfig;
struct AttackOutcome;

namespace attacks {

// One attack of the standard suite: a pipeline action (tamper/replay/
// eavesdrop/drop), an injection routine (spoof/elevate probes run after the
// script), or a post-hoc target (chain or store tampering).
struct SuiteEntry {
  AdversaryAction action;
  std::string injection;  // "", "spoof", "elevate", "chain:<which>", "store"
  std::string label;
};

// Derives the sweep from the message types observed crossing boundaries in a
// base (adversary-free) run: 6 STRIDE kinds x every boundary-crossing type.
std::vector<SuiteEntry> standard_suite(const ScenarioConfig& base);

// Runs one entry on a fresh world built from `base`.
AttackOutcome run_entry(const ScenarioConfig& base, const SuiteEntry& entry);

std::vector<AttackOutcome> run_standard_suite(const ScenarioConfig& base);

// Evaluates an inline action against an already-run world (scenario files
// may carry explicit adversary actions).
AttackOutcome evaluate_action(World& w, const AdversaryAction& action);

}  // namespace attacks
}  // namespace nada::sim

#endif  // NADA_ATTACKS_HPP
