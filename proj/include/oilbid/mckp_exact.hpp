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

#ifndef OILBID_MCKP_EXACT_HPP_
#define OILBID_MCKP_EXACT_HPP_

#include <cstdint>
#include <vector>

#include "oilbid/domain.hpp"

namespace oilbid {

// Choice per IO in campaign order (t, then i): 0 = no slot, else 1..D.
struct Assignment {
  std::vector<int> choice;
};

struct ObjectiveValue {
  double score = 0.0;
  double expected_cost = 0.0;
  double expected_conversions = 0.0;
  double cpa = 0.0;  // +inf when there are no expected conversions
};

// Deterministic objective: expected conversions and cost from h_d mu and
// h_d k_d, scored with the CPA penalty.
ObjectiveValue objective_value(const Assignment& assignment, const CampaignSpec& campaign,
                               double target_cpa);

// min(1, (K conv / cost)^2) * conv; 0 without conversions, conv when cost is 0.
double realized_score(double total_conversions, double total_cost, double target_cpa);

inline constexpr std::uint64_t kBruteForceLimit = 10'000'000;

// Relative slack on the expected-cost budget test, absorbing summation-order
// rounding between this solver and the greedy.
inline constexpr double kBudgetSlack = 1e-12;

struct ExactSolution {
  Assignment assignment;
  ObjectiveValue value;
};

// Enumerates all (D+1)^N assignments. Throws SizeError above kBruteForceLimit.
ExactSolution brute_force_solve(const CampaignSpec& campaign, double budget, double target_cpa);

}  // namespace oilbid

#endif  // OILBID_MCKP_EXACT_HPP_
