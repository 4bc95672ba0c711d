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

#include "oilbid/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "oilbid/errors.hpp"

namespace oilbid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kCoefficientNudge = 1.0 + 1e-12;

struct ChainPoint {
  int slot;
  double cost;
  double conv;
};

UpgradeItem make_item(const ImpressionOpportunity& io, const ChainPoint& from,
                      const ChainPoint& to, int pos) {
  UpgradeItem item;
  item.id = io.id;
  item.slot = to.slot;
  item.from_slot = from.slot;
  item.chain_pos = pos;
  item.mu = io.mu;
  item.raw_cost = io.slot_cost(to.slot);
  item.delta_conv = to.conv - from.conv;
  item.delta_cost = to.cost - from.cost;
  item.efficiency = delta_efficiency(item.delta_conv, item.delta_cost);
  return item;
}

void check_dims(const ImpressionOpportunity& io, std::span<const double> exposure_probs) {
  if (io.competitor_bids.size() != exposure_probs.size() + 1) {
    throw ConfigError("competitor bids do not match D+1 for the exposure vector");
  }
}

// Internal accumulation shared by select_prefix and Oracle::replan.
struct Scan {
  std::size_t end = 0;  // one past the last accepted rank position
  std::size_t accepted = 0;
  double cost = 0.0;
  double conv = 0.0;
  double score = 0.0;
};

Scan scan_prefix(const Ranking& ranking, double budget, double target_cpa, double carried_cost,
                 double carried_conv, int from_step, std::vector<std::size_t>* step_positions) {
  Scan best{0, 0, carried_cost, carried_conv,
            penalized_score(carried_conv, carried_cost, target_cpa)};
  double cost = carried_cost;
  double conv = carried_conv;
  std::size_t count = 0;
  const std::size_t n = ranking.size();
  const int* step = ranking.step.data();
  const double* dc = ranking.delta_cost.data();
  const double* dm = ranking.delta_conv.data();
  for (std::size_t idx = 0; idx < n; ++idx) {
    if (step[idx] < from_step) continue;
    cost += dc[idx];
    conv += dm[idx];
    if (cost > budget) break;
    ++count;
    if (step_positions != nullptr && step[idx] == from_step) step_positions->push_back(idx);
    const double score = penalized_score(conv, cost, target_cpa);
    if (score > best.score) best = {idx + 1, count, cost, conv, score};
  }
  return best;
}

}  // namespace

double slot_efficiency(double mu, double slot_cost) {
  if (!(slot_cost > 0.0)) return kInf;
  return mu / slot_cost;
}

double delta_efficiency(double delta_conv, double delta_cost) {
  if (!(delta_cost > 0.0)) return kInf;
  return delta_conv / delta_cost;
}

double upgrade_efficiency(double mu, double cost_to, double cost_from, double h_to,
                          double h_from) {
  return delta_efficiency(mu * (h_to - h_from), cost_to * h_to - cost_from * h_from);
}

std::vector<UpgradeItem> build_slot_chain(const ImpressionOpportunity& io,
                                          std::span<const double> exposure_probs) {
  check_dims(io, exposure_probs);
  const int slots = static_cast<int>(exposure_probs.size());
  std::vector<UpgradeItem> chain;
  chain.reserve(exposure_probs.size());
  ChainPoint prev{kNoSlot, 0.0, 0.0};
  for (int d = slots; d >= 1; --d) {
    const double h = exposure_probs[static_cast<std::size_t>(d - 1)];
    const ChainPoint next{d, io.slot_cost(d) * h, io.mu * h};
    UpgradeItem item = make_item(io, prev, next, slots - d);
    item.efficiency = slot_efficiency(io.mu, io.slot_cost(d));
    chain.push_back(item);
    prev = next;
  }
  return chain;
}

std::vector<UpgradeItem> build_upgrade_chain(const ImpressionOpportunity& io,
                                             std::span<const double> exposure_probs) {
  check_dims(io, exposure_probs);
  const int slots = static_cast<int>(exposure_probs.size());
  // Vertex stack starting at "hold nothing"; a vertex is dropped whenever the
  // upgrade leaving it is more efficient than the one entering it.
  std::vector<ChainPoint> hull;
  hull.reserve(exposure_probs.size() + 1);
  hull.push_back({kNoSlot, 0.0, 0.0});
  auto eff = [](const ChainPoint& a, const ChainPoint& b) {
    return delta_efficiency(b.conv - a.conv, b.cost - a.cost);
  };
  for (int d = slots; d >= 1; --d) {
    const double h = exposure_probs[static_cast<std::size_t>(d - 1)];
    hull.push_back({d, io.slot_cost(d) * h, io.mu * h});
    while (hull.size() >= 3) {
      const std::size_t n = hull.size();
      if (!(eff(hull[n - 2], hull[n - 1]) > eff(hull[n - 3], hull[n - 2]))) break;
      hull.erase(hull.end() - 2);
    }
  }
  std::vector<UpgradeItem> chain;
  chain.reserve(hull.size() - 1);
  for (std::size_t v = 1; v < hull.size(); ++v) {
    chain.push_back(make_item(io, hull[v - 1], hull[v], static_cast<int>(v - 1)));
  }
  return chain;
}

std::string_view to_string(RankMode mode) {
  return mode == RankMode::kSlot ? "slot" : "upgrade";
}

double slot_mode_efficiency(const UpgradeItem& item) {
  return slot_efficiency(item.mu, item.raw_cost);
}

double upgrade_mode_efficiency(const UpgradeItem& item) {
  return delta_efficiency(item.delta_conv, item.delta_cost);
}

Ranking rank_items(const CampaignSpec& campaign, RankMode mode, EfficiencyFn efficiency) {
  if (efficiency == nullptr) {
    efficiency = mode == RankMode::kSlot ? &slot_mode_efficiency : &upgrade_mode_efficiency;
  }
  Ranking ranking;
  ranking.mode = mode;
  ranking.items.reserve(campaign.io_count() * static_cast<std::size_t>(campaign.slot_count));
  for (const auto& step : campaign.steps) {
    for (const auto& io : step) {
      auto chain = mode == RankMode::kSlot ? build_slot_chain(io, campaign.exposure_probs)
                                           : build_upgrade_chain(io, campaign.exposure_probs);
      for (auto& item : chain) {
        item.efficiency = efficiency(item);
        if (std::isnan(item.efficiency)) item.efficiency = -kInf;
        ranking.items.push_back(item);
      }
    }
  }
  std::sort(ranking.items.begin(), ranking.items.end(),
            [](const UpgradeItem& a, const UpgradeItem& b) {
              if (a.efficiency != b.efficiency) return a.efficiency > b.efficiency;
              if (a.id != b.id) return a.id < b.id;
              return a.chain_pos < b.chain_pos;
            });
  const std::size_t n = ranking.items.size();
  ranking.step.resize(n);
  ranking.delta_conv.resize(n);
  ranking.delta_cost.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    ranking.step[k] = ranking.items[k].id.t;
    ranking.delta_conv[k] = ranking.items[k].delta_conv;
    ranking.delta_cost[k] = ranking.items[k].delta_cost;
  }
  return ranking;
}

double penalized_score(double conversions, double cost, double target_cpa) {
  if (!(conversions > 0.0)) return 0.0;
  if (!(cost > 0.0)) return conversions;
  const double ratio = target_cpa * conversions / cost;  // K / CPA
  return ratio >= 1.0 ? conversions : ratio * ratio * conversions;
}

SelectionSet select_prefix(const Ranking& ranking, double budget, double target_cpa,
                           double carried_cost, double carried_conversions, int from_step) {
  const Scan best = scan_prefix(ranking, budget, target_cpa, carried_cost, carried_conversions,
                                from_step, nullptr);
  SelectionSet sel;
  sel.mode = ranking.mode;
  sel.expected_cost = best.cost;
  sel.expected_conversions = best.conv;
  sel.score = best.score;
  sel.items.reserve(best.accepted);
  for (std::size_t idx = 0; idx < best.end; ++idx) {
    if (ranking.step[idx] >= from_step) sel.items.push_back(ranking.items[idx]);
  }
  for (std::size_t idx = best.end; idx < ranking.size(); ++idx) {
    if (ranking.step[idx] >= from_step) {
      sel.next_efficiency = ranking.items[idx].efficiency;
      break;
    }
  }
  return sel;
}

std::vector<Holding> held_slots(const SelectionSet& selection) {
  std::map<IoId, int> held;
  for (const auto& item : selection.items) {
    auto [it, fresh] = held.try_emplace(item.id, kNoSlot);
    if (it->second != item.from_slot) {
      throw InputError("item (" + std::to_string(item.id.t) + "," + std::to_string(item.id.i) +
                       ") moves from slot " + std::to_string(item.from_slot) +
                       " but the IO holds slot " + std::to_string(it->second));
    }
    it->second = item.slot;
  }
  std::vector<Holding> out;
  out.reserve(held.size());
  for (const auto& [id, slot] : held) out.push_back({id, slot});
  return out;
}

double bid_coefficient_slot(const SelectionSet& selection) {
  if (selection.items.empty()) return 0.0;
  double min_eff = kInf;
  for (const auto& item : selection.items) min_eff = std::min(min_eff, item.efficiency);
  if (selection.next_efficiency && *selection.next_efficiency == min_eff) {
    throw DegenerateInput(
        "first rejected slot has the same efficiency as the least efficient accepted slot");
  }
  return kCoefficientNudge / min_eff;
}

double midpoint_bid(const ImpressionOpportunity& io, int slot) {
  if (slot == kNoSlot) return 0.0;
  const double lower = io.slot_cost(slot);
  const double upper = slot == 1 ? 2.0 * io.slot_cost(1) : io.slot_cost(slot - 1);
  const double bid = 0.5 * (lower + upper);
  return bid > 0.0 ? bid : std::numeric_limits<double>::min();
}

std::vector<double> bids_upgrade(const SelectionSet& selection,
                                 std::span<const ImpressionOpportunity> ios) {
  std::vector<double> bids(ios.size(), 0.0);
  if (ios.empty()) return bids;
  const int t = ios.front().id.t;
  std::vector<int> held(ios.size(), kNoSlot);
  for (const auto& item : selection.items) {
    if (item.id.t != t) continue;
    const auto i = static_cast<std::size_t>(item.id.i);
    if (i < held.size()) held[i] = item.slot;
  }
  for (std::size_t n = 0; n < ios.size(); ++n) bids[n] = midpoint_bid(ios[n], held[n]);
  return bids;
}

std::optional<double> gap_bound(const SelectionSet& selection, double budget, double target_cpa) {
  const double cost = selection.expected_cost;
  const double conv = selection.expected_conversions;
  if (!(conv > 0.0) || !(cost < target_cpa * conv)) return std::nullopt;
  if (!(cost > 0.0)) return 0.0;
  return conv / cost * (budget - cost);
}

std::string_view to_string(OracleMode mode) {
  switch (mode) {
    case OracleMode::kSlot:
      return "slot";
    case OracleMode::kUpgrade:
      return "upgrade";
    case OracleMode::kTwoSlopes:
      return "2s";
  }
  return "?";
}

OracleMode parse_oracle_mode(std::string_view name) {
  if (name == "slot") return OracleMode::kSlot;
  if (name == "upgrade") return OracleMode::kUpgrade;
  if (name == "2s" || name == "upgrade-2s") return OracleMode::kTwoSlopes;
  throw InputError("unknown oracle mode '" + std::string(name) + "' (expected slot|upgrade|2s)");
}

Oracle::Oracle(const CampaignSpec& campaign, OracleMode mode, EfficiencyFn efficiency)
    : campaign_(&campaign),
      mode_(mode),
      ranking_(rank_items(campaign, mode == OracleMode::kSlot ? RankMode::kSlot : RankMode::kUpgrade,
                          efficiency)) {}

SelectionSet Oracle::solve(const AdvertiserBrief& brief) const {
  return select_prefix(ranking_, brief.budget, brief.target_cpa);
}

StepPlan Oracle::replan(const AdvertiserBrief& brief, const EpisodeState& state) const {
  if (state.finished()) throw EpisodeFinished("cannot replan a finished episode");
  const auto& ios = campaign_->steps[static_cast<std::size_t>(state.t)];
  std::vector<std::size_t> positions;
  positions.reserve(ios.size() * static_cast<std::size_t>(campaign_->slot_count));
  const Scan best = scan_prefix(ranking_, state.budget, brief.target_cpa, state.cumulative_cost,
                                state.cumulative_conversions, state.t, &positions);

  StepPlan plan;
  plan.accepted = best.accepted;
  plan.expected_cost = best.cost;
  plan.expected_conversions = best.conv;
  plan.score = best.score;
  plan.held.assign(ios.size(), kNoSlot);
  for (std::size_t idx : positions) {
    if (idx >= best.end) break;
    const auto& item = ranking_.items[idx];
    plan.held[static_cast<std::size_t>(item.id.i)] = item.slot;
  }

  plan.bids.assign(ios.size(), 0.0);
  if (mode_ == OracleMode::kSlot) {
    if (best.accepted > 0) {
      // Ranking is descending, so the last accepted item is the least efficient.
      std::size_t last = best.end - 1;
      while (ranking_.step[last] < state.t) --last;
      plan.coefficient = kCoefficientNudge / ranking_.items[last].efficiency;
      for (std::size_t n = 0; n < ios.size(); ++n) plan.bids[n] = plan.coefficient * ios[n].mu;
    }
    return plan;
  }
  for (std::size_t n = 0; n < ios.size(); ++n) plan.bids[n] = midpoint_bid(ios[n], plan.held[n]);
  if (mode_ == OracleMode::kTwoSlopes) {
    const TwoSlopesParams params = fit_two_slopes(plan.bids, ios, plan.held);
    for (std::size_t n = 0; n < ios.size(); ++n) plan.bids[n] = apply_two_slopes(params, ios[n].mu);
    plan.two_slopes = params;
  }
  return plan;
}

}  // namespace oilbid
