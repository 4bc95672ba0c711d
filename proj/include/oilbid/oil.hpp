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

#ifndef OILBID_OIL_HPP_
#define OILBID_OIL_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "oilbid/auction.hpp"
#include "oilbid/domain.hpp"
#include "oilbid/oracle.hpp"
#include "oilbid/policy.hpp"

namespace oilbid {

struct TrainConfig {
  double lr_start = 1e-3;
  double lr_end = 0.0;
  int batch_size = 512;
  int rollout_steps = 128;  // per environment
  int num_envs = 4;
  int epochs = 10;
  double max_grad_norm = 0.7;
  std::int64_t total_interactions = 100'000;
  std::uint64_t seed = 0;
  std::vector<int> hidden{256, 256, 256};
  // Upgrade variant: IOs per step kept as training samples.
  int upgrade_ios_per_step = 4;
  // Written before a DivergenceError is thrown, if non-empty.
  std::string diagnostic_path;
};

void validate(const TrainConfig& config);

// Linear schedule from lr_start at n = 0 to lr_end at n = total_interactions.
double learning_rate(const TrainConfig& config, std::int64_t interactions);

// Uniform (B, K) ranges. The budget range is relative to a campaign's
// efficient spend: the expected cost of the unbudgeted slot-oracle selection
// at the lowest target CPA of the range.
struct ScenarioRanges {
  double budget_lo = 0.25;
  double budget_hi = 1.0;
  double cpa_lo = 4.0;
  double cpa_hi = 12.0;
};

void validate(const ScenarioRanges& ranges);

double efficient_spend(const CampaignSpec& campaign, double target_cpa);

struct Scenario {
  std::size_t campaign = 0;
  AdvertiserBrief brief;
  std::uint64_t engine_seed = 0;
};

class ScenarioSampler {
 public:
  ScenarioSampler(std::span<const CampaignSpec> campaigns, ScenarioRanges ranges);

  Scenario sample(std::mt19937_64& rng) const;
  // Scenario of episode `index` under `seed`, independent of other episodes.
  Scenario at(std::uint64_t seed, std::uint64_t index) const;

  std::size_t campaign_count() const { return spend_.size(); }
  double efficient_spend(std::size_t campaign) const { return spend_[campaign]; }
  const ScenarioRanges& ranges() const { return ranges_; }

 private:
  ScenarioRanges ranges_;
  std::vector<double> spend_;
};

// Source of imitation targets.
class Expert {
 public:
  virtual ~Expert() = default;
  virtual StepPlan plan(std::size_t campaign, const AdvertiserBrief& brief,
                        const EpisodeState& state) const = 0;
};

class OracleExpert final : public Expert {
 public:
  OracleExpert(std::span<const CampaignSpec> campaigns, OracleMode mode,
               EfficiencyFn efficiency = nullptr);
  StepPlan plan(std::size_t campaign, const AdvertiserBrief& brief,
                const EpisodeState& state) const override;
  const Oracle& oracle(std::size_t campaign) const { return oracles_[campaign]; }

 private:
  std::vector<Oracle> oracles_;
};

struct RolloutLog {
  std::int64_t interactions = 0;  // at the start of the rollout
  std::size_t samples = 0;
  double learning_rate = 0.0;
  double loss_first_epoch = 0.0;  // mean minibatch loss before fitting
  double loss_last_epoch = 0.0;
  double grad_norm = 0.0;         // mean pre-clip norm
};

struct EpisodeLog {
  std::int64_t episode = 0;
  std::size_t campaign = 0;
  double budget = 0.0;
  double target_cpa = 0.0;
  double cost = 0.0;
  double conversions = 0.0;
  double score = 0.0;
};

struct TrainLog {
  std::vector<RolloutLog> rollouts;
  std::vector<EpisodeLog> episodes;
};

// Column-major (input, target) samples with the raw mu of each sample.
class Dataset {
 public:
  explicit Dataset(PolicyVariant variant);

  PolicyVariant variant() const { return variant_; }
  std::size_t size() const { return mu_.size(); }
  bool empty() const { return mu_.empty(); }
  void clear();

  void append(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
              std::span<const double> mu);
  TrainingBatch gather(std::span<const std::size_t> indices, const RunningNorm& norm) const;
  Eigen::MatrixXd raw_inputs() const;

 private:
  PolicyVariant variant_;
  int input_dim_;
  int output_dim_;
  std::vector<double> inputs_;
  std::vector<double> targets_;
  std::vector<double> mu_;
};

using RolloutCallback = std::function<void(const RolloutLog&)>;

// Online imitation: the student's bids drive the environment while the
// expert's replanned decisions are the regression targets.
Policy train_oil(std::span<const CampaignSpec> campaigns, const Expert& expert,
                 PolicyVariant variant, const TrainConfig& config, const ScenarioRanges& ranges,
                 TrainLog* log = nullptr, const RolloutCallback& on_rollout = {});

// Rolls out `steps` environment steps. The expert acts unless `actor` is
// given; targets always come from the expert.
Dataset collect_dataset(std::span<const CampaignSpec> campaigns, const Expert& expert,
                        PolicyVariant variant, const ScenarioRanges& ranges, std::int64_t steps,
                        std::uint64_t seed, const Policy* actor = nullptr,
                        int upgrade_ios_per_step = 4);

struct OfflineOptions {
  int passes = 1;
  bool shuffle = true;  // permute the dataset before cutting it into rollouts
};

// The online update schedule replayed over a fixed dataset: rollouts of
// rollout_steps * num_envs samples, each fitted for `epochs` epochs.
Policy offline_train(const Dataset& dataset, const TrainConfig& config,
                     const OfflineOptions& options = {}, TrainLog* log = nullptr);

}  // namespace oilbid

#endif  // OILBID_OIL_HPP_
