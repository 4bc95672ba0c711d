// Copyright 2026 The oilbid Authors
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

#ifndef OILBID_VERIFY_HPP_
#define OILBID_VERIFY_HPP_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "oilbid/domain.hpp"
#include "oilbid/oracle.hpp"

namespace oilbid {

struct PropertyTally {
  std::string name;
  std::int64_t checked = 0;
  std::int64_t failed = 0;
};

struct Counterexample {
  std::string property;
  std::string detail;
  std::uint64_t instance = 0;
  CampaignSpec campaign;  // shrunk while the property keeps failing
  double budget = 0.0;
  double target_cpa = 0.0;
};

struct VerifyReport {
  std::vector<PropertyTally> tallies;
  std::vector<Counterexample> failures;  // first failure of each property
  std::int64_t skipped = 0;              // degenerate instances (exact ties)

  bool ok() const;
  void record(const std::string& property, bool passed);
  void merge(const VerifyReport& other);
  std::int64_t checked(const std::string& property) const;
  std::int64_t failed(const std::string& property) const;
};

// A random D-slot IO with strictly decreasing exposure and cost factors:
// k_d = k_1 * delta_d, 1 = delta_1 > delta_2 > ..., h_1 > h_2 > ... > 0.
struct RandomSpio {
  ImpressionOpportunity io;
  std::vector<double> exposure_probs;
};

RandomSpio random_spio(std::mt19937_64& rng, int slots);

// 1 to `max_ios` IOs over up to 3 steps with 1 to `max_slots` slots.
CampaignSpec random_small_campaign(std::mt19937_64& rng, int max_ios, int max_slots,
                                   int min_slots = 1);

// Slot efficiencies increase with the slot index, the last slot beats every
// upgrade, upgrade efficiencies compose as a weighted harmonic mean, and
// merged upgrade chains are non-increasing.
VerifyReport verify_spio_properties(std::int64_t count, int min_slots, int max_slots,
                                std::uint64_t seed);

// Bidding the slot-mode coefficient times mu wins exactly the held slots.
VerifyReport verify_coefficient_roundtrip(int campaigns, int max_ios, std::uint64_t seed,
                                          EfficiencyFn efficiency = nullptr);

// Greedy against exhaustive search: feasibility, objective agreement, the
// optimality-gap bound, exact consumption, budget monotonicity and replanning.
// Half of the instances set the budget to the exact cost of a ranking prefix.
VerifyReport verify_against_exact(int instances, int max_ios, int max_slots, std::uint64_t seed,
                                  EfficiencyFn efficiency = nullptr);

// Decisions on the two-IO examples.
VerifyReport verify_fixtures(EfficiencyFn efficiency = nullptr);

struct VerifyConfig {
  int instances = 1000;
  int max_ios = 8;
  int max_slots = 3;
  std::uint64_t seed = 0;
  EfficiencyFn efficiency = nullptr;  // overrides the ranking key (sensitivity checks)
};

VerifyReport run_verify(const VerifyConfig& config);

std::string format_verify_report(const VerifyReport& report);

}  // namespace oilbid

#endif  // OILBID_VERIFY_HPP_
