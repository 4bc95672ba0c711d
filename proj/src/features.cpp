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

#include "oilbid/features.hpp"

#include <algorithm>
#include <cmath>

namespace oilbid {

// Layout (1-based rows):
//   1 time left (T-t)/T            2 budget remaining       3 total budget
//   4 current CPA                  5 campaign category
//   6-8   mean bid                 all / last step / last 3 steps
//   9-11  mean least winning cost  all / last / last 3
//  12-14  LWC 10th percentile      15-17 LWC 1st percentile
//  18 mean pvalue (all)  19 conversion rate (all)  20 bid success rate (all)
//  21-22 mean pvalue last / last 3
//  23-24 conversion rate last / last 3   25-26 bid success rate last / last 3
//  27-29 mean won slot position    30-32 mean cost per win
//  33-41 mean cost per win in slot 1, 2, 3 (each all / last / last 3)
//  42-44 mean bid / LWC            45-47 mean pvalue / LWC
//  48-50 pvalue/LWC 90th pct       51-53 pvalue/LWC 99th pct
//  54-56 current pvalue mean / 90th / 99th percentile
//  57 current IO count  58 IOs last step  59 IOs last 3 steps  60 total IOs
// The least winning cost of an IO is its (D+1)-th competitor bid. Conversion
// rate is conversions per win; bid success rate is wins per positive bid.

namespace {

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

struct Window {
  double io_count = 0, bids_placed = 0, wins = 0, bid_sum = 0, pvalue_sum = 0, lwc_sum = 0;
  double lwc_positive = 0, bid_over_lwc = 0, pvalue_over_lwc = 0, conversions = 0, cost = 0;
  double position_sum = 0;
  std::array<double, 3> slot_wins{}, slot_cost{};
};

Window accumulate(std::span<const StepRecord> records) {
  Window w;
  for (const auto& r : records) {
    w.io_count += r.io_count;
    w.bids_placed += r.bids_placed;
    w.wins += r.wins;
    w.bid_sum += r.bid_sum;
    w.pvalue_sum += r.pvalue_sum;
    w.lwc_sum += r.lwc_sum;
    w.lwc_positive += r.lwc_positive;
    w.bid_over_lwc += r.bid_over_lwc_sum;
    w.pvalue_over_lwc += r.pvalue_over_lwc_sum;
    w.conversions += r.conversions;
    w.cost += r.cost;
    w.position_sum += r.position_sum;
    for (std::size_t s = 0; s < 3 && s < r.wins_by_slot.size(); ++s) {
      w.slot_wins[s] += r.wins_by_slot[s];
      w.slot_cost[s] += r.cost_by_slot[s];
    }
  }
  return w;
}

std::vector<double> merge_sorted(std::span<const StepRecord> records,
                                 std::vector<double> StepRecord::*field) {
  std::vector<double> out;
  for (const auto& r : records) {
    const auto& v = r.*field;
    const auto mid = static_cast<std::ptrdiff_t>(out.size());
    out.insert(out.end(), v.begin(), v.end());
    std::inplace_merge(out.begin(), out.begin() + mid, out.end());
  }
  return out;
}

}  // namespace

double percentile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) return 0.0;
  const double pos = std::clamp(p, 0.0, 100.0) / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

Observation build_observation(const EpisodeState& state,
                              std::span<const ImpressionOpportunity> current_ios,
                              const AdvertiserBrief& brief, double category) {
  Observation obs{};
  const std::span<const StepRecord> history(state.history);
  const std::size_t n = history.size();
  const auto all = history;
  const auto last = history.subspan(n >= 1 ? n - 1 : 0);
  const auto last3 = history.subspan(n >= 3 ? n - 3 : 0);
  const Window wa = accumulate(all);
  const Window w1 = accumulate(last);
  const Window w3 = accumulate(last3);

  const double horizon = std::max(state.horizon, 1);
  obs[0] = (horizon - state.t) / horizon;
  obs[1] = state.remaining_budget;
  obs[2] = brief.budget;
  obs[3] = ratio(state.cumulative_cost, state.cumulative_conversions);
  obs[4] = category;

  const Window* windows[3] = {&wa, &w1, &w3};
  for (int k = 0; k < 3; ++k) {
    const Window& w = *windows[k];
    obs[5 + k] = ratio(w.bid_sum, w.io_count);
    obs[8 + k] = ratio(w.lwc_sum, w.io_count);
    obs[26 + k] = ratio(w.position_sum, w.wins);
    obs[29 + k] = ratio(w.cost, w.wins);
    for (std::size_t s = 0; s < 3; ++s) {
      obs[32 + 3 * s + static_cast<std::size_t>(k)] = ratio(w.slot_cost[s], w.slot_wins[s]);
    }
    obs[41 + k] = ratio(w.bid_over_lwc, w.lwc_positive);
    obs[44 + k] = ratio(w.pvalue_over_lwc, w.lwc_positive);
  }
  obs[17] = ratio(wa.pvalue_sum, wa.io_count);
  obs[18] = ratio(wa.conversions, wa.wins);
  obs[19] = ratio(wa.wins, wa.bids_placed);
  obs[20] = ratio(w1.pvalue_sum, w1.io_count);
  obs[21] = ratio(w3.pvalue_sum, w3.io_count);
  obs[22] = ratio(w1.conversions, w1.wins);
  obs[23] = ratio(w3.conversions, w3.wins);
  obs[24] = ratio(w1.wins, w1.bids_placed);
  obs[25] = ratio(w3.wins, w3.bids_placed);

  // Percentiles over pooled samples of each window.
  const std::vector<double> lwc3 = merge_sorted(last3, &StepRecord::lwc_sorted);
  const std::vector<double> pol3 = merge_sorted(last3, &StepRecord::pvalue_over_lwc_sorted);
  const std::span<const double> lwc_pools[3] = {
      state.lwc_pool, n ? std::span<const double>(last.front().lwc_sorted) : std::span<const double>(),
      lwc3};
  const std::span<const double> pol_pools[3] = {
      state.pvalue_over_lwc_pool,
      n ? std::span<const double>(last.front().pvalue_over_lwc_sorted) : std::span<const double>(),
      pol3};
  for (int k = 0; k < 3; ++k) {
    obs[11 + k] = percentile_sorted(lwc_pools[k], 10.0);
    obs[14 + k] = percentile_sorted(lwc_pools[k], 1.0);
    obs[47 + k] = percentile_sorted(pol_pools[k], 90.0);
    obs[50 + k] = percentile_sorted(pol_pools[k], 99.0);
  }

  std::vector<double> pvalues;
  pvalues.reserve(current_ios.size());
  double pv_sum = 0.0;
  for (const auto& io : current_ios) {
    pvalues.push_back(io.mu);
    pv_sum += io.mu;
  }
  std::sort(pvalues.begin(), pvalues.end());
  obs[53] = ratio(pv_sum, static_cast<double>(pvalues.size()));
  obs[54] = percentile_sorted(pvalues, 90.0);
  obs[55] = percentile_sorted(pvalues, 99.0);
  obs[56] = static_cast<double>(current_ios.size());
  obs[57] = w1.io_count;
  obs[58] = w3.io_count;
  obs[59] = wa.io_count;
  return obs;
}

}  // namespace oilbid
