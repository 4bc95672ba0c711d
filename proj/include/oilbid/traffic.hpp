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

#ifndef OILBID_TRAFFIC_HPP_
#define OILBID_TRAFFIC_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "oilbid/domain.hpp"

namespace oilbid {

// Synthetic traffic shape. Competitor j of an IO bids gamma_j * mu * (1 + eps_j)
// with gamma_j ~ U[competitor_coef_lo, competitor_coef_hi] and
// eps_j ~ N(0, competitor_noise); the top D+1 bids are kept.
struct TrafficConfig {
  int horizon = 48;
  int slot_count = 3;
  std::vector<double> exposure_probs = {1.0, 0.8, 0.5};
  double ios_mean = 2000.0;        // lambda, mean IO count per step
  double ios_dispersion = 0.02;    // gamma-Poisson overdispersion; 0 = Poisson
  double diurnal_amplitude = 0.3;  // relative sinusoidal swing of the rate over the horizon
  double mu_median = 0.01;         // log-normal location exp(m)
  double mu_log_scale = 0.9;       // log-normal scale s
  double sigma_ratio = 0.3;        // sigma = rho * mu
  int competitors_min = 4;
  int competitors_max = 24;
  double competitor_coef_lo = 2.0;
  double competitor_coef_hi = 12.0;
  double competitor_noise = 0.2;
  double category = 0.0;
  std::uint64_t seed = 0;
};

void validate(const TrafficConfig& config);

// Deterministic in `config.seed`. Degenerate but legal settings (zero IO
// rate) append a message to `warnings` when provided.
CampaignSpec generate(const TrafficConfig& config, std::vector<std::string>* warnings = nullptr);

// Campaign file: one JSON header line, one column line, then
//   t,i,mu,sigma,c1,...,c{D+1}
// rows in (t, i) order. Floats use shortest round-trip formatting.
inline constexpr int kCampaignFormatVersion = 1;

void write_campaign(const CampaignSpec& campaign, std::ostream& out);
CampaignSpec read_campaign(std::istream& in);

void save_campaign(const CampaignSpec& campaign, const std::string& path);
CampaignSpec load_campaign(const std::string& path);

}  // namespace oilbid

#endif  // OILBID_TRAFFIC_HPP_
