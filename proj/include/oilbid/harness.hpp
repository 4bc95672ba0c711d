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

#ifndef OILBID_HARNESS_HPP_
#define OILBID_HARNESS_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "oilbid/auction.hpp"
#include "oilbid/domain.hpp"
#include "oilbid/oil.hpp"
#include "oilbid/oracle.hpp"
#include "oilbid/policy.hpp"

namespace oilbid {

// Something that bids on the IOs of step `state.t`.
class Agent {
 public:
  virtual ~Agent() = default;
  virtual std::vector<double> bids(std::size_t campaign, const AdvertiserBrief& brief,
                                   const EpisodeState& state) const = 0;
};

class OracleAgent final : public Agent {
 public:
  explicit OracleAgent(const OracleExpert& expert) : expert_(expert) {}
  std::vector<double> bids(std::size_t campaign, const AdvertiserBrief& brief,
                           const EpisodeState& state) const override;

 private:
  const OracleExpert& expert_;
};

class PolicyAgent final : public Agent {
 public:
  PolicyAgent(const Policy& policy, std::span<const CampaignSpec> campaigns)
      : policy_(policy), campaigns_(campaigns) {}
  std::vector<double> bids(std::size_t campaign, const AdvertiserBrief& brief,
                           const EpisodeState& state) const override;

 private:
  const Policy& policy_;
  std::span<const CampaignSpec> campaigns_;
};

// Bids alpha * mu on every IO.
class ConstantAlphaAgent final : public Agent {
 public:
  ConstantAlphaAgent(double alpha, std::span<const CampaignSpec> campaigns)
      : alpha_(alpha), campaigns_(campaigns) {}
  std::vector<double> bids(std::size_t campaign, const AdvertiserBrief& brief,
                           const EpisodeState& state) const override;

 private:
  double alpha_;
  std::span<const CampaignSpec> campaigns_;
};

struct EpisodeResult {
  std::int64_t episode = 0;
  std::size_t campaign = 0;
  double budget = 0.0;
  double target_cpa = 0.0;
  double cost = 0.0;
  double conversions = 0.0;
  double cpa = 0.0;  // +inf without conversions
  double score = 0.0;
};

using ScenarioFn = std::function<Scenario(std::int64_t episode)>;

struct RunConfig {
  std::int64_t episodes = 100;
  int jobs = 1;
  OutcomeMode mode = OutcomeMode::kSampled;
};

EpisodeResult run_episode(const CampaignSpec& campaign, const Scenario& scenario,
                          const Agent& agent, OutcomeMode mode, std::int64_t episode = 0);

// Result is identical for any number of jobs.
std::vector<EpisodeResult> run_episodes(std::span<const CampaignSpec> campaigns,
                                        const ScenarioFn& scenario_of, const Agent& agent,
                                        const RunConfig& config);

// Every episode uses the same brief on campaign 0 with its own engine seed.
ScenarioFn fixed_scenarios(const AdvertiserBrief& brief, std::uint64_t seed);
// Episode e uses sampler.at(seed, e).
ScenarioFn sampled_scenarios(const ScenarioSampler& sampler, std::uint64_t seed);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(std::span<const double> values);

struct MetricsReport {
  std::vector<EpisodeResult> episodes;
  MeanSe cost_over_budget;
  MeanSe cpa_ratio;  // K / CPA, 0 for an episode without cost
  MeanSe conversions;
  MeanSe score;
};

MetricsReport summarize(std::vector<EpisodeResult> episodes);

std::string format_report(const MetricsReport& report, std::string_view title);
void write_jsonl(const MetricsReport& report, std::ostream& out);

struct AlphaSearch {
  double best_alpha = 0.0;
  double best_score = 0.0;
  std::vector<double> grid;
  std::vector<double> scores;  // mean score per grid value
};

// `count` log-spaced coefficients in [lo, hi].
std::vector<double> log_grid(double lo, double hi, int count);

AlphaSearch best_constant_alpha(std::span<const CampaignSpec> campaigns,
                                const ScenarioFn& scenario_of, std::span<const double> grid,
                                const RunConfig& config);

}  // namespace oilbid

#endif  // OILBID_HARNESS_HPP_
