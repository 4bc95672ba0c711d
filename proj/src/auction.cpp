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

#include "oilbid/auction.hpp"

#include <algorithm>
#include <random>
#include <string>

#include "oilbid/errors.hpp"

namespace oilbid {

AuctionResult resolve_bid(double bid, std::span<const double> competitor_bids) {
  if (competitor_bids.size() < 2) throw InputError("need at least D+1 = 2 competitor bids");
  for (std::size_t j = 1; j < competitor_bids.size(); ++j) {
    if (competitor_bids[j] > competitor_bids[j - 1]) {
      throw InputError("competitor bids must be sorted in non-increasing order");
    }
  }
  if (!(bid > 0.0)) return {};
  const std::size_t slots = competitor_bids.size() - 1;
  // Rank among competitors = number of competitor bids strictly above ours.
  std::size_t above = 0;
  while (above < slots && competitor_bids[above] > bid) ++above;
  if (above == slots) return {};
  return {true, static_cast<int>(above) + 1, competitor_bids[above]};
}

bool sample_exposure(double exposure_prob, StreamRng& rng) {
  if (exposure_prob >= 1.0) return true;
  return rng.uniform() < exposure_prob;
}

bool sample_conversion(double mu, double sigma, bool exposed, StreamRng& rng) {
  if (!exposed) return false;
  double beta = mu;
  if (sigma > 0.0) beta = std::normal_distribution<double>(mu, sigma)(rng);
  beta = std::clamp(beta, 0.0, 1.0);
  if (beta >= 1.0) return true;
  return rng.uniform() < beta;
}

AuctionEngine::AuctionEngine(const CampaignSpec& campaign, EngineConfig config)
    : campaign_(&campaign), config_(config) {
  if (campaign.exposure_probs.size() != static_cast<std::size_t>(campaign.slot_count)) {
    throw ConfigError("exposure_probs length differs from slot_count");
  }
}

EpisodeState AuctionEngine::start(const AdvertiserBrief& brief) const {
  validate(brief);
  EpisodeState state;
  state.horizon = campaign_->horizon;
  state.budget = brief.budget;
  state.remaining_budget = brief.budget;
  return state;
}

std::vector<BidOutcome> AuctionEngine::step(EpisodeState& state,
                                            std::span<const double> bids) const {
  if (state.finished()) throw EpisodeFinished("episode already played all " +
                                              std::to_string(state.horizon) + " steps");
  const auto& ios = campaign_->steps[static_cast<std::size_t>(state.t)];
  if (bids.size() != ios.size()) {
    throw InputError("expected " + std::to_string(ios.size()) + " bids, got " +
                     std::to_string(bids.size()));
  }
  const int slots = campaign_->slot_count;

  StepRecord rec;
  rec.io_count = static_cast<int>(ios.size());
  rec.wins_by_slot.assign(static_cast<std::size_t>(slots), 0);
  rec.cost_by_slot.assign(static_cast<std::size_t>(slots), 0.0);
  rec.lwc_sorted.reserve(ios.size());
  rec.pvalue_over_lwc_sorted.reserve(ios.size());

  std::vector<BidOutcome> outcomes(ios.size());
  for (std::size_t n = 0; n < ios.size(); ++n) {
    const auto& io = ios[n];
    const double bid = std::max(bids[n], 0.0);
    BidOutcome& out = outcomes[n];
    out.id = io.id;

    const double lwc = io.least_winning_cost();
    rec.bid_sum += bid;
    rec.pvalue_sum += io.mu;
    rec.lwc_sum += lwc;
    rec.lwc_sorted.push_back(lwc);
    if (lwc > 0.0) {
      ++rec.lwc_positive;
      rec.bid_over_lwc_sum += bid / lwc;
      rec.pvalue_over_lwc_sum += io.mu / lwc;
      rec.pvalue_over_lwc_sorted.push_back(io.mu / lwc);
    }
    if (bid > 0.0) ++rec.bids_placed;

    const AuctionResult res = resolve_bid(bid, io.competitor_bids);
    if (!res.won) continue;
    const double h = campaign_->exposure(res.slot);
    const double charge = config_.mode == OutcomeMode::kExpected ? res.price * h : res.price;
    if (state.cumulative_cost + charge > state.budget) continue;  // voided

    out.won = true;
    out.slot = res.slot;
    if (config_.mode == OutcomeMode::kExpected) {
      out.exposed = true;
      out.price_charged = charge;
      out.conversions = io.mu * h;
    } else {
      StreamRng rng(config_.seed, io.id.t, io.id.i);
      out.exposed = sample_exposure(h, rng);
      out.converted = sample_conversion(io.mu, io.sigma, out.exposed, rng);
      out.price_charged = out.exposed ? res.price : 0.0;
      out.conversions = out.converted ? 1.0 : 0.0;
    }
    state.cumulative_cost += out.price_charged;
    state.cumulative_conversions += out.conversions;

    ++rec.wins;
    rec.position_sum += res.slot;
    rec.conversions += out.conversions;
    rec.cost += out.price_charged;
    rec.wins_by_slot[static_cast<std::size_t>(res.slot - 1)] += 1;
    rec.cost_by_slot[static_cast<std::size_t>(res.slot - 1)] += out.price_charged;
  }
  state.remaining_budget = state.budget - state.cumulative_cost;

  std::sort(rec.lwc_sorted.begin(), rec.lwc_sorted.end());
  std::sort(rec.pvalue_over_lwc_sorted.begin(), rec.pvalue_over_lwc_sorted.end());
  auto merge_into = [](std::vector<double>& pool, const std::vector<double>& fresh) {
    const auto mid = static_cast<std::ptrdiff_t>(pool.size());
    pool.insert(pool.end(), fresh.begin(), fresh.end());
    std::inplace_merge(pool.begin(), pool.begin() + mid, pool.end());
  };
  merge_into(state.lwc_pool, rec.lwc_sorted);
  merge_into(state.pvalue_over_lwc_pool, rec.pvalue_over_lwc_sorted);

  state.history.push_back(std::move(rec));
  ++state.t;
  return outcomes;
}

}  // namespace oilbid
