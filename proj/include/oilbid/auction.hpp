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

#ifndef OILBID_AUCTION_HPP_
#define OILBID_AUCTION_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "oilbid/domain.hpp"
#include "oilbid/rng.hpp"

namespace oilbid {

struct AuctionResult {
  bool won = false;
  int slot = 0;  // 1..D when won, 0 otherwise
  double price = 0.0;
};

// Second-price multi-slot resolution. With c_0 = +inf the bid takes slot d
// when c_d <= bid < c_{d-1}; ties go to the agent. Non-positive bids lose.
// Throws InputError if `competitor_bids` is not non-increasing.
AuctionResult resolve_bid(double bid, std::span<const double> competitor_bids);

bool sample_exposure(double exposure_prob, StreamRng& rng);

// Conversion draw given exposure: beta ~ N(mu, sigma) clamped to [0,1], then
// Bernoulli(beta). Always false when not exposed.
bool sample_conversion(double mu, double sigma, bool exposed, StreamRng& rng);

struct BidOutcome {
  IoId id;
  bool won = false;
  int slot = 0;
  double price_charged = 0.0;
  bool exposed = false;
  bool converted = false;
  // 0/1 in sampled mode; mu*h_d in expected mode.
  double conversions = 0.0;
};

// Per-step aggregates of the agent's own history, enough to rebuild every
// observation feature without rescanning the campaign.
struct StepRecord {
  int io_count = 0;
  int bids_placed = 0;  // IOs with a strictly positive bid
  int wins = 0;         // surviving (non-voided) wins
  double bid_sum = 0.0;
  double pvalue_sum = 0.0;
  double lwc_sum = 0.0;
  int lwc_positive = 0;  // IOs with least winning cost > 0
  double bid_over_lwc_sum = 0.0;
  double pvalue_over_lwc_sum = 0.0;
  double conversions = 0.0;
  double cost = 0.0;
  double position_sum = 0.0;
  std::vector<int> wins_by_slot;
  std::vector<double> cost_by_slot;
  std::vector<double> lwc_sorted;
  std::vector<double> pvalue_over_lwc_sorted;
};

struct EpisodeState {
  int t = 0;  // next step to play, 0-based
  int horizon = 0;
  double budget = 0.0;
  double remaining_budget = 0.0;
  double cumulative_cost = 0.0;
  double cumulative_conversions = 0.0;
  std::vector<StepRecord> history;
  // All-history pools kept sorted for percentile features.
  std::vector<double> lwc_pool;
  std::vector<double> pvalue_over_lwc_pool;

  bool finished() const { return t >= horizon; }
};

enum class OutcomeMode {
  kSampled,   // Bernoulli exposure and conversion
  kExpected,  // charge k_d*h_d and credit mu*h_d deterministically
};

struct EngineConfig {
  std::uint64_t seed = 0;
  OutcomeMode mode = OutcomeMode::kSampled;
};

// Replays one campaign for one advertiser. Holds a reference to the campaign,
// which must outlive the engine. Competitor bids never react to the agent.
class AuctionEngine {
 public:
  AuctionEngine(const CampaignSpec& campaign, EngineConfig config);

  EpisodeState start(const AdvertiserBrief& brief) const;

  // Resolves one bid per IO of step `state.t` in IO order. A win whose price
  // would push cumulative cost above the budget is voided. Sampled mode
  // charges the price only on exposure.
  std::vector<BidOutcome> step(EpisodeState& state, std::span<const double> bids) const;

  const CampaignSpec& campaign() const { return *campaign_; }
  const EngineConfig& config() const { return config_; }

 private:
  const CampaignSpec* campaign_;
  EngineConfig config_;
};

}  // namespace oilbid

#endif  // OILBID_AUCTION_HPP_
