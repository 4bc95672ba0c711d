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

#ifndef OILBID_ORACLE_HPP_
#define OILBID_ORACLE_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "oilbid/auction.hpp"
#include "oilbid/domain.hpp"

namespace oilbid {

inline constexpr int kNoSlot = 0;

// One rankable step of the greedy: acquire `slot` (from kNoSlot) or upgrade
// a held `from_slot` to the better `slot` of the same IO.
struct UpgradeItem {
  IoId id;
  int slot = 0;
  int from_slot = kNoSlot;
  int chain_pos = 0;  // order of the item within its IO's chain
  double mu = 0.0;
  double raw_cost = 0.0;    // k of the target slot
  double delta_conv = 0.0;  // expected conversions gained
  double delta_cost = 0.0;  // expected cost added
  double efficiency = 0.0;
};

// mu / k_d; +inf when k_d is zero.
double slot_efficiency(double mu, double slot_cost);

// mu (h_to - h_from) / (k_to h_to - k_from h_from); +inf when the cost
// difference is not positive.
double upgrade_efficiency(double mu, double cost_to, double cost_from, double h_to,
                          double h_from);

// delta_conv / delta_cost with the same +inf convention.
double delta_efficiency(double delta_conv, double delta_cost);

// Slot acquisitions D, D-1, ..., 1 with the incremental deltas that let a
// cumulative sum track "holding the best accepted slot".
std::vector<UpgradeItem> build_slot_chain(const ImpressionOpportunity& io,
                                          std::span<const double> exposure_probs);

// Acquisition of slot D followed by upgrades toward slot 1; adjacent upgrades
// whose efficiency increases are merged until the chain is non-increasing.
std::vector<UpgradeItem> build_upgrade_chain(const ImpressionOpportunity& io,
                                             std::span<const double> exposure_probs);

enum class RankMode { kSlot, kUpgrade };

std::string_view to_string(RankMode mode);

using EfficiencyFn = double (*)(const UpgradeItem&);

double slot_mode_efficiency(const UpgradeItem& item);
double upgrade_mode_efficiency(const UpgradeItem& item);

// All items of a campaign in descending efficiency, ties broken by
// (t, i, chain position).
struct Ranking {
  RankMode mode = RankMode::kSlot;
  std::vector<UpgradeItem> items;
  // Column copies of the fields the prefix scan touches.
  std::vector<int> step;
  std::vector<double> delta_conv;
  std::vector<double> delta_cost;

  std::size_t size() const { return items.size(); }
};

// `efficiency` overrides the ranking key; nullptr selects the mode default.
Ranking rank_items(const CampaignSpec& campaign, RankMode mode, EfficiencyFn efficiency = nullptr);

struct SelectionSet {
  RankMode mode = RankMode::kSlot;
  std::vector<UpgradeItem> items;  // accepted prefix in rank order
  double expected_cost = 0.0;         // includes carried-in cost
  double expected_conversions = 0.0;  // includes carried-in conversions
  double score = 0.0;
  // Efficiency of the first rejected item, if the ranking had one.
  std::optional<double> next_efficiency;
};

// min(1, (K conv / cost)^2) * conv with the zero-conversion and zero-cost
// conventions of the scoring rule.
double penalized_score(double conversions, double cost, double target_cpa);

// Greedy accumulation over the ranking restricted to steps >= from_step,
// starting from the carried totals. Stops at the first item that would
// overshoot the budget and keeps the shortest prefix with the best score.
SelectionSet select_prefix(const Ranking& ranking, double budget, double target_cpa,
                           double carried_cost = 0.0, double carried_conversions = 0.0,
                           int from_step = 0);

struct Holding {
  IoId id;
  int slot = 0;
};

// Final slot per IO after applying the accepted items in order, sorted by IO.
// Throws InputError if an item upgrades a slot that is not currently held.
std::vector<Holding> held_slots(const SelectionSet& selection);

// Slot-mode coefficient: max of 1/efficiency over accepted items, times
// (1 + 1e-12). Empty
// selection gives 0. Throws DegenerateInput when the first rejected item ties
// the least efficient accepted one.
double bid_coefficient_slot(const SelectionSet& selection);

// Bid strictly inside [k_d, k_{d-1}) with k_0 = 2 k_1; 0 for kNoSlot.
double midpoint_bid(const ImpressionOpportunity& io, int slot);

// Midpoint bids for the IOs of one step given the selection's holdings.
std::vector<double> bids_upgrade(const SelectionSet& selection,
                                 std::span<const ImpressionOpportunity> ios);

// Optimality-gap bound eta_R * (B - expected_cost); nullopt when the
// selection's CPA is not below K and the bound does not apply.
std::optional<double> gap_bound(const SelectionSet& selection, double budget, double target_cpa);

struct TwoSlopesParams {
  double alpha0 = 1.0;     // coefficient for low-mu IOs
  double slope = 0.0;      // inverse coefficient = intercept + slope * mu
  double intercept = 1.0;
  double crossing_mu = 0.0;
  bool fallback = false;   // regression was degenerate; constant coefficient
};

// Regresses mu/bid on mu over held IOs and places alpha0 midway between the
// largest coefficient needed by a held IO and the cheapest coefficient that
// would win a rejected IO.
TwoSlopesParams fit_two_slopes(std::span<const double> oracle_bids,
                               std::span<const ImpressionOpportunity> ios,
                               std::span<const int> held);

// Parameters from the three regressed numbers, with the crossing point
// (1/alpha0 - intercept) / slope clamped to be non-negative.
TwoSlopesParams make_two_slopes(double alpha0, double intercept, double slope);

// Coefficient for `mu` times mu: alpha0 * mu up to crossing_mu, the
// regression line above it.
double apply_two_slopes(const TwoSlopesParams& params, double mu);

enum class OracleMode { kSlot, kUpgrade, kTwoSlopes };

std::string_view to_string(OracleMode mode);
OracleMode parse_oracle_mode(std::string_view name);

struct StepPlan {
  std::vector<double> bids;
  std::vector<int> held;  // slot per IO of the current step, kNoSlot if none
  double coefficient = 0.0;  // slot-mode alpha
  std::optional<TwoSlopesParams> two_slopes;
  std::size_t accepted = 0;
  double expected_cost = 0.0;
  double expected_conversions = 0.0;
  double score = 0.0;
};

// Hindsight oracle over one campaign. The ranking is computed once; each
// replan filters it to the remaining steps and re-runs the prefix selection
// from the realized cost and conversions.
class Oracle {
 public:
  Oracle(const CampaignSpec& campaign, OracleMode mode, EfficiencyFn efficiency = nullptr);

  OracleMode mode() const { return mode_; }
  const Ranking& ranking() const { return ranking_; }
  const CampaignSpec& campaign() const { return *campaign_; }

  SelectionSet solve(const AdvertiserBrief& brief) const;

  StepPlan replan(const AdvertiserBrief& brief, const EpisodeState& state) const;

 private:
  const CampaignSpec* campaign_;
  OracleMode mode_;
  Ranking ranking_;
};

}  // namespace oilbid

#endif  // OILBID_ORACLE_HPP_
