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

#include <algorithm>
#include <cmath>
#include <limits>

#include "oilbid/errors.hpp"
#include "oilbid/oracle.hpp"

namespace oilbid {

TwoSlopesParams fit_two_slopes(std::span<const double> oracle_bids,
                               std::span<const ImpressionOpportunity> ios,
                               std::span<const int> held) {
  if (oracle_bids.size() != ios.size() || held.size() != ios.size()) {
    throw InputError("fit_two_slopes: bids, IOs and holdings must align");
  }
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // Cheapest coefficient that would win any slot of a rejected IO.
  double rejected = kInf;
  for (std::size_t n = 0; n < ios.size(); ++n) {
    if (held[n] == kNoSlot && ios[n].mu > 0.0) {
      const int last_slot = static_cast<int>(ios[n].competitor_bids.size()) - 1;
      rejected = std::min(rejected, ios[n].slot_cost(last_slot) / ios[n].mu);
    }
  }

  double accepted = -kInf;      // largest needed coefficient below `rejected`
  double max_held_coef = -kInf;  // largest coefficient the oracle actually bids
  double sx = 0.0, sy = 0.0;
  std::size_t count = 0;
  for (std::size_t n = 0; n < ios.size(); ++n) {
    if (held[n] == kNoSlot || !(ios[n].mu > 0.0) || !(oracle_bids[n] > 0.0)) continue;
    const double needed = ios[n].slot_cost(held[n]) / ios[n].mu;
    if (needed < rejected) accepted = std::max(accepted, needed);
    max_held_coef = std::max(max_held_coef, oracle_bids[n] / ios[n].mu);
    sx += ios[n].mu;
    sy += ios[n].mu / oracle_bids[n];
    ++count;
  }

  TwoSlopesParams params;
  if (std::isfinite(rejected)) {
    params.alpha0 = std::isfinite(accepted) ? 0.5 * (accepted + rejected) : 0.5 * rejected;
  } else if (count > 0) {
    params.alpha0 = max_held_coef;
  }
  if (!(params.alpha0 > 0.0) || !std::isfinite(params.alpha0)) params.alpha0 = 1.0;

  double sxx = 0.0, sxy = 0.0;
  if (count >= 2) {
    const double mx = sx / static_cast<double>(count);
    const double my = sy / static_cast<double>(count);
    for (std::size_t n = 0; n < ios.size(); ++n) {
      if (held[n] == kNoSlot || !(ios[n].mu > 0.0) || !(oracle_bids[n] > 0.0)) continue;
      const double dx = ios[n].mu - mx;
      sxx += dx * dx;
      sxy += dx * (ios[n].mu / oracle_bids[n] - my);
    }
    if (sxx > 0.0) {
      params.slope = sxy / sxx;
      params.intercept = my - params.slope * mx;
    }
  }
  if (count < 2 || !(sxx > 0.0)) {
    params.fallback = true;
    params.slope = 0.0;
    params.intercept = 1.0 / params.alpha0;
    params.crossing_mu = 0.0;
    return params;
  }
  return make_two_slopes(params.alpha0, params.intercept, params.slope);
}

TwoSlopesParams make_two_slopes(double alpha0, double intercept, double slope) {
  TwoSlopesParams params;
  params.alpha0 = alpha0;
  params.intercept = intercept;
  params.slope = slope;
  params.crossing_mu = 0.0;
  if (slope != 0.0 && alpha0 > 0.0) {
    const double crossing = (1.0 / alpha0 - intercept) / slope;
    if (std::isfinite(crossing)) params.crossing_mu = std::max(0.0, crossing);
  }
  return params;
}

double apply_two_slopes(const TwoSlopesParams& params, double mu) {
  if (!(mu > 0.0)) return 0.0;
  if (mu <= params.crossing_mu) return params.alpha0 * mu;
  const double inverse = params.intercept + params.slope * mu;
  if (!(inverse > 0.0)) return params.alpha0 * mu;
  return mu / inverse;
}

}  // namespace oilbid
