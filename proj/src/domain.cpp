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

#include "oilbid/domain.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "oilbid/errors.hpp"

namespace oilbid {

std::size_t CampaignSpec::io_count() const {
  return std::accumulate(steps.begin(), steps.end(), std::size_t{0},
                         [](std::size_t n, const auto& s) { return n + s.size(); });
}

void validate_exposure(std::span<const double> exposure_probs) {
  if (exposure_probs.empty()) throw ConfigError("exposure_probs must not be empty");
  for (std::size_t d = 0; d < exposure_probs.size(); ++d) {
    const double h = exposure_probs[d];
    if (!(h > 0.0 && h <= 1.0)) {
      throw ConfigError("exposure probability h_" + std::to_string(d + 1) + " outside (0,1]");
    }
    if (d > 0 && h > exposure_probs[d - 1]) {
      throw ConfigError("exposure probabilities must be non-increasing");
    }
  }
}

void validate_io(const ImpressionOpportunity& io, int slot_count) {
  if (!(io.mu >= 0.0 && io.mu <= 1.0)) throw InputError("mu outside [0,1]");
  if (!(io.sigma >= 0.0) || !std::isfinite(io.sigma)) throw InputError("sigma must be >= 0");
  if (io.competitor_bids.size() != static_cast<std::size_t>(slot_count) + 1) {
    throw InputError("expected " + std::to_string(slot_count + 1) + " competitor bids, got " +
                     std::to_string(io.competitor_bids.size()));
  }
  for (std::size_t j = 0; j < io.competitor_bids.size(); ++j) {
    const double c = io.competitor_bids[j];
    if (!(c >= 0.0) || !std::isfinite(c)) throw InputError("competitor bids must be finite and >= 0");
    if (j > 0 && c > io.competitor_bids[j - 1]) {
      throw InputError("competitor bids must be sorted in non-increasing order");
    }
  }
}

void validate(const CampaignSpec& campaign) {
  if (campaign.horizon < 1) throw ConfigError("horizon must be >= 1");
  if (campaign.slot_count < 1) throw ConfigError("slot_count must be >= 1");
  if (campaign.exposure_probs.size() != static_cast<std::size_t>(campaign.slot_count)) {
    throw ConfigError("exposure_probs length differs from slot_count");
  }
  validate_exposure(campaign.exposure_probs);
  if (campaign.steps.size() != static_cast<std::size_t>(campaign.horizon)) {
    throw ConfigError("steps length differs from horizon");
  }
  for (std::size_t t = 0; t < campaign.steps.size(); ++t) {
    const auto& step = campaign.steps[t];
    for (std::size_t i = 0; i < step.size(); ++i) {
      const auto& io = step[i];
      if (io.id.t != static_cast<int>(t) || io.id.i != static_cast<int>(i)) {
        throw InputError("IO id (" + std::to_string(io.id.t) + "," + std::to_string(io.id.i) +
                         ") does not match its position");
      }
      validate_io(io, campaign.slot_count);
    }
  }
}

void validate(const AdvertiserBrief& brief) {
  if (!(brief.budget > 0.0) || !std::isfinite(brief.budget)) throw InputError("budget must be > 0");
  if (!(brief.target_cpa > 0.0) || !std::isfinite(brief.target_cpa)) {
    throw InputError("target CPA must be > 0");
  }
}

bool has_cost_ties(const ImpressionOpportunity& io, int slot_count) {
  for (int d = 1; d < slot_count; ++d) {
    if (io.slot_cost(d) == io.slot_cost(d + 1)) return true;
  }
  return false;
}

std::vector<SlotQuote> effective_quantities(const ImpressionOpportunity& io,
                                            std::span<const double> exposure_probs) {
  const std::size_t slots = exposure_probs.size();
  if (io.competitor_bids.size() != slots + 1) {
    throw ConfigError("competitor bids (" + std::to_string(io.competitor_bids.size()) +
                      ") do not match D+1 for D=" + std::to_string(slots));
  }
  std::vector<SlotQuote> quotes;
  quotes.reserve(slots);
  for (std::size_t d = 0; d < slots; ++d) {
    const double k = io.competitor_bids[d];
    const double h = exposure_probs[d];
    quotes.push_back({io.id, static_cast<int>(d) + 1, k, k * h, io.mu * h});
  }
  return quotes;
}

}  // namespace oilbid
