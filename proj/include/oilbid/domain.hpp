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

#ifndef OILBID_DOMAIN_HPP_
#define OILBID_DOMAIN_HPP_

#include <cstdint>
#include <span>
#include <vector>

namespace oilbid {

// Step and IO indices are 0-based. Slot numbers are 1-based positions:
// slot 1 is the top position with the highest exposure probability.
struct IoId {
  int t = 0;
  int i = 0;

  friend bool operator==(const IoId&, const IoId&) = default;
  friend auto operator<=>(const IoId&, const IoId&) = default;
};

struct ImpressionOpportunity {
  IoId id;
  double mu = 0.0;     // mean conversion probability
  double sigma = 0.0;  // std-dev of the conversion probability
  // Top D+1 competitor bids, non-increasing. competitor_bids[d-1] is the
  // second-price cost k_d of slot d; the last entry is the least winning cost.
  std::vector<double> competitor_bids;

  // k_d for 1-based slot d.
  double slot_cost(int slot) const { return competitor_bids[static_cast<std::size_t>(slot - 1)]; }
  double least_winning_cost() const { return competitor_bids.back(); }

  friend bool operator==(const ImpressionOpportunity&, const ImpressionOpportunity&) = default;
};

struct CampaignSpec {
  int horizon = 0;
  int slot_count = 0;
  std::vector<double> exposure_probs;  // h_1..h_D, non-increasing, in (0,1]
  std::vector<std::vector<ImpressionOpportunity>> steps;  // size horizon
  double category = 0.0;

  double exposure(int slot) const { return exposure_probs[static_cast<std::size_t>(slot - 1)]; }
  std::size_t io_count() const;

  friend bool operator==(const CampaignSpec&, const CampaignSpec&) = default;
};

struct AdvertiserBrief {
  double budget = 0.0;
  double target_cpa = 0.0;
};

struct SlotQuote {
  IoId id;
  int slot = 0;
  double raw_cost = 0.0;              // k_d
  double effective_cost = 0.0;        // k_d * h_d
  double effective_conversion = 0.0;  // mu * h_d
};

// Throws ConfigError if the exposure vector is not in (0,1] or not
// non-increasing.
void validate_exposure(std::span<const double> exposure_probs);

// Throws InputError if the IO violates its invariants for a D-slot auction.
void validate_io(const ImpressionOpportunity& io, int slot_count);

// Full structural validation of a campaign; throws ConfigError/InputError.
void validate(const CampaignSpec& campaign);

void validate(const AdvertiserBrief& brief);

// True when two adjacent slot costs tie, i.e. the cost discounts are not
// strictly decreasing. Such IOs are accepted; ranking breaks ties
// deterministically.
bool has_cost_ties(const ImpressionOpportunity& io, int slot_count);

// Exposure-discounted cost and conversion for every slot, in slot order.
std::vector<SlotQuote> effective_quantities(const ImpressionOpportunity& io,
                                            std::span<const double> exposure_probs);

}  // namespace oilbid

#endif  // OILBID_DOMAIN_HPP_
