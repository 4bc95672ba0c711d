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

#include "oilbid/mckp_exact.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "oilbid/errors.hpp"

namespace oilbid {

namespace {

struct Flat {
  std::vector<const ImpressionOpportunity*> ios;
};

Flat flatten(const CampaignSpec& campaign) {
  Flat flat;
  for (const auto& step : campaign.steps) {
    for (const auto& io : step) flat.ios.push_back(&io);
  }
  return flat;
}

}  // namespace

double realized_score(double total_conversions, double total_cost, double target_cpa) {
  if (!(total_conversions > 0.0)) return 0.0;
  if (!(total_cost > 0.0)) return total_conversions;
  const double cpa = total_cost / total_conversions;
  const double penalty = std::min(1.0, std::pow(target_cpa / cpa, 2));
  return penalty * total_conversions;
}

ObjectiveValue objective_value(const Assignment& assignment, const CampaignSpec& campaign,
                               double target_cpa) {
  const Flat flat = flatten(campaign);
  if (assignment.choice.size() != flat.ios.size()) {
    throw InputError("assignment has " + std::to_string(assignment.choice.size()) +
                     " entries for " + std::to_string(flat.ios.size()) + " IOs");
  }
  ObjectiveValue v;
  for (std::size_t n = 0; n < flat.ios.size(); ++n) {
    const int d = assignment.choice[n];
    if (d == 0) continue;
    if (d < 0 || d > campaign.slot_count) throw InputError("assignment slot out of range");
    const double h = campaign.exposure(d);
    v.expected_conversions += h * flat.ios[n]->mu;
    v.expected_cost += h * flat.ios[n]->slot_cost(d);
  }
  v.cpa = v.expected_conversions > 0.0 ? v.expected_cost / v.expected_conversions
                                       : std::numeric_limits<double>::infinity();
  v.score = realized_score(v.expected_conversions, v.expected_cost, target_cpa);
  return v;
}

ExactSolution brute_force_solve(const CampaignSpec& campaign, double budget, double target_cpa) {
  const Flat flat = flatten(campaign);
  const std::size_t n = flat.ios.size();
  const auto base = static_cast<std::uint64_t>(campaign.slot_count) + 1;
  std::uint64_t total = 1;
  for (std::size_t k = 0; k < n; ++k) {
    if (total > kBruteForceLimit / base) {
      throw SizeError("brute force needs (D+1)^N = " + std::to_string(base) + "^" +
                      std::to_string(n) + " assignments, limit is " +
                      std::to_string(kBruteForceLimit));
    }
    total *= base;
  }

  // Per-IO per-choice contributions, choice 0 contributes nothing.
  std::vector<double> conv(n * base, 0.0), cost(n * base, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    for (int d = 1; d <= campaign.slot_count; ++d) {
      const double h = campaign.exposure(d);
      conv[k * base + static_cast<std::size_t>(d)] = h * flat.ios[k]->mu;
      cost[k * base + static_cast<std::size_t>(d)] = h * flat.ios[k]->slot_cost(d);
    }
  }

  const double limit = budget + kBudgetSlack * std::abs(budget);
  ExactSolution best;
  best.assignment.choice.assign(n, 0);
  best.value = objective_value(best.assignment, campaign, target_cpa);
  std::vector<int> digits(n, 0);
  for (std::uint64_t code = 1; code < total; ++code) {
    // Increment the mixed-radix counter.
    for (std::size_t k = 0; k < n; ++k) {
      if (++digits[k] < static_cast<int>(base)) break;
      digits[k] = 0;
    }
    double m = 0.0, c = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      m += conv[k * base + static_cast<std::size_t>(digits[k])];
      c += cost[k * base + static_cast<std::size_t>(digits[k])];
    }
    if (c > limit) continue;
    const double score = realized_score(m, c, target_cpa);
    if (score > best.value.score) {
      best.assignment.choice = digits;
      best.value.score = score;
      best.value.expected_conversions = m;
      best.value.expected_cost = c;
      best.value.cpa = m > 0.0 ? c / m : std::numeric_limits<double>::infinity();
    }
  }
  return best;
}

}  // namespace oilbid
