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

#include "oilbid/oil.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>

#include "oilbid/errors.hpp"
#include "oilbid/features.hpp"
#include "oilbid/mckp_exact.hpp"
#include "oilbid/rng.hpp"

namespace oilbid {
namespace {

std::vector<std::size_t> pick_columns(PolicyVariant variant, std::size_t io_count, int per_step,
                                      std::mt19937_64& rng) {
  if (variant != PolicyVariant::kUpgrade) return {0};
  std::vector<std::size_t> all(io_count);
  std::iota(all.begin(), all.end(), std::size_t{0});
  const std::size_t keep = std::min(io_count, static_cast<std::size_t>(per_step));
  for (std::size_t k = 0; k < keep; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, io_count - 1);
    std::swap(all[k], all[pick(rng)]);
  }
  all.resize(keep);
  std::sort(all.begin(), all.end());
  return all;
}

Eigen::MatrixXd select_cols(const Eigen::MatrixXd& m, std::span<const std::size_t> cols) {
  Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) {
    out.col(static_cast<Eigen::Index>(k)) = m.col(static_cast<Eigen::Index>(cols[k]));
  }
  return out;
}

// One environment slot of the rollout collector.
struct Env {
  Scenario scenario;
  std::optional<AuctionEngine> engine;
  EpisodeState state;
  std::int64_t episode = 0;
  bool active = false;
};

class Collector {
 public:
  Collector(std::span<const CampaignSpec> campaigns, const Expert& expert, PolicyVariant variant,
            const ScenarioRanges& ranges, int num_envs, int ios_per_step, std::uint64_t seed)
      : campaigns_(campaigns),
        expert_(expert),
        variant_(variant),
        sampler_(campaigns, ranges),
        envs_(static_cast<std::size_t>(num_envs)),
        ios_per_step_(ios_per_step),
        rng_(derive_seed(seed, 2)) {}

  // Advances environment `e` by one step, appending its sample to `out`.
  // `norm`, when given, is updated with the new inputs before acting.
  void step(std::size_t e, const Policy* actor, RunningNorm* norm, Dataset& out,
            std::vector<EpisodeLog>* episodes) {
    Env& env = envs_[e];
    if (env.active && env.state.finished()) {
      if (episodes != nullptr) {
        episodes->push_back({env.episode, env.scenario.campaign, env.scenario.brief.budget,
                             env.scenario.brief.target_cpa, env.state.cumulative_cost,
                             env.state.cumulative_conversions,
                             realized_score(env.state.cumulative_conversions,
                                            env.state.cumulative_cost,
                                            env.scenario.brief.target_cpa)});
      }
      env.active = false;
    }
    if (!env.active) {
      env.scenario = sampler_.sample(rng_);
      env.engine.emplace(campaigns_[env.scenario.campaign],
                         EngineConfig{env.scenario.engine_seed, OutcomeMode::kSampled});
      env.state = env.engine->start(env.scenario.brief);
      env.active = true;
      env.episode = episode_count_++;
    }
    const CampaignSpec& campaign = campaigns_[env.scenario.campaign];
    const auto& ios = campaign.steps[static_cast<std::size_t>(env.state.t)];
    const Observation obs =
        build_observation(env.state, ios, env.scenario.brief, campaign.category);
    const StepPlan plan = expert_.plan(env.scenario.campaign, env.scenario.brief, env.state);
    const Eigen::MatrixXd raw = policy_input_columns(variant_, obs, ios);
    const Eigen::MatrixXd targets = plan_targets(variant_, plan, ios);
    const auto cols = pick_columns(variant_, ios.size(), ios_per_step_, rng_);
    if (!cols.empty()) {
      const Eigen::MatrixXd kept_inputs = select_cols(raw, cols);
      std::vector<double> mu(cols.size(), 0.0);
      if (variant_ == PolicyVariant::kUpgrade) {
        for (std::size_t k = 0; k < cols.size(); ++k) mu[k] = ios[cols[k]].mu;
      }
      if (norm != nullptr) norm->update(kept_inputs);
      out.append(kept_inputs, select_cols(targets, cols), mu);
    }
    const std::vector<double> bids = actor != nullptr ? actor->act(obs, ios) : plan.bids;
    env.engine->step(env.state, bids);
  }

  std::size_t env_count() const { return envs_.size(); }

 private:
  std::span<const CampaignSpec> campaigns_;
  const Expert& expert_;
  PolicyVariant variant_;
  ScenarioSampler sampler_;
  std::vector<Env> envs_;
  int ios_per_step_;
  std::mt19937_64 rng_;
  std::int64_t episode_count_ = 0;
};

void check_finite_or_abort(const Policy& policy, const TrainConfig& config, double value,
                           const char* what) {
  if (std::isfinite(value)) return;
  if (!config.diagnostic_path.empty()) {
    try {
      policy.save(config.diagnostic_path);
    } catch (const std::exception&) {
      // Keep the divergence as the reported error.
    }
  }
  throw DivergenceError(std::string("non-finite ") + what + " during training" +
                        (config.diagnostic_path.empty()
                             ? std::string()
                             : "; diagnostic checkpoint at " + config.diagnostic_path));
}

// `epochs` passes of shuffled minibatches over `indices` of `data`.
RolloutLog fit(Policy& policy, Adam& adam, const Dataset& data,
               std::span<const std::size_t> indices, const TrainConfig& config, double lr,
               std::mt19937_64& rng) {
  RolloutLog log;
  log.samples = indices.size();
  log.learning_rate = lr;
  if (indices.empty()) return log;
  std::vector<std::size_t> order(indices.begin(), indices.end());
  const std::size_t batch = static_cast<std::size_t>(config.batch_size);
  double norm_sum = 0.0;
  std::size_t updates = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t stop = std::min(order.size(), start + batch);
      const TrainingBatch tb =
          data.gather(std::span(order).subspan(start, stop - start), policy.norm());
      LossGrad lg = loss_and_gradient(policy.network(), policy.variant(), tb);
      check_finite_or_abort(policy, config, lg.loss, "loss");
      const double gnorm = clip_grad_norm(lg.gradient, config.max_grad_norm);
      check_finite_or_abort(policy, config, gnorm, "gradient");
      adam.step(policy.network().parameters(), lg.gradient, lr);
      loss_sum += lg.loss;
      norm_sum += gnorm;
      ++batches;
      ++updates;
    }
    const double mean_loss = loss_sum / static_cast<double>(batches);
    if (epoch == 0) log.loss_first_epoch = mean_loss;
    log.loss_last_epoch = mean_loss;
  }
  log.grad_norm = norm_sum / static_cast<double>(updates);
  return log;
}

}  // namespace

void validate(const TrainConfig& c) {
  if (!(c.lr_start > 0.0) || !(c.lr_end >= 0.0) || c.lr_start < c.lr_end) {
    throw ConfigError("learning rates must satisfy lr_start > 0, 0 <= lr_end <= lr_start");
  }
  if (c.batch_size < 1 || c.rollout_steps < 1 || c.num_envs < 1 || c.epochs < 1) {
    throw ConfigError("batch size, rollout steps, environments and epochs must be >= 1");
  }
  if (!(c.max_grad_norm > 0.0)) throw ConfigError("max gradient norm must be > 0");
  if (c.total_interactions < 1) throw ConfigError("total interactions must be >= 1");
  if (c.upgrade_ios_per_step < 1) throw ConfigError("upgrade IOs per step must be >= 1");
  for (int h : c.hidden) {
    if (h < 1) throw ConfigError("hidden layer sizes must be >= 1");
  }
}

double learning_rate(const TrainConfig& config, std::int64_t interactions) {
  const double frac = std::clamp(static_cast<double>(interactions) /
                                     static_cast<double>(config.total_interactions),
                                 0.0, 1.0);
  return config.lr_start + (config.lr_end - config.lr_start) * frac;
}

void validate(const ScenarioRanges& r) {
  if (!(r.budget_lo > 0.0) || !(r.budget_hi >= r.budget_lo) || !std::isfinite(r.budget_hi)) {
    throw ConfigError("budget range must satisfy 0 < lo <= hi");
  }
  if (!(r.cpa_lo > 0.0) || !(r.cpa_hi >= r.cpa_lo) || !std::isfinite(r.cpa_hi)) {
    throw ConfigError("target CPA range must satisfy 0 < lo <= hi");
  }
}

double efficient_spend(const CampaignSpec& campaign, double target_cpa) {
  const Ranking ranking = rank_items(campaign, RankMode::kSlot);
  return select_prefix(ranking, std::numeric_limits<double>::max(), target_cpa).expected_cost;
}

ScenarioSampler::ScenarioSampler(std::span<const CampaignSpec> campaigns, ScenarioRanges ranges)
    : ranges_(ranges) {
  validate(ranges_);
  if (campaigns.empty()) throw ConfigError("at least one campaign is required");
  spend_.reserve(campaigns.size());
  for (const auto& c : campaigns) {
    const double spend = oilbid::efficient_spend(c, ranges_.cpa_lo);
    // A campaign with nothing worth buying still needs a positive budget.
    spend_.push_back(spend > 0.0 ? spend : 1.0);
  }
}

Scenario ScenarioSampler::sample(std::mt19937_64& rng) const {
  Scenario s;
  std::uniform_int_distribution<std::size_t> pick(0, spend_.size() - 1);
  s.campaign = pick(rng);
  std::uniform_real_distribution<double> frac(ranges_.budget_lo, ranges_.budget_hi);
  std::uniform_real_distribution<double> cpa(ranges_.cpa_lo, ranges_.cpa_hi);
  s.brief.budget = frac(rng) * spend_[s.campaign];
  s.brief.target_cpa = cpa(rng);
  s.engine_seed = rng();
  return s;
}

Scenario ScenarioSampler::at(std::uint64_t seed, std::uint64_t index) const {
  std::mt19937_64 rng(derive_seed(seed, index));
  return sample(rng);
}

OracleExpert::OracleExpert(std::span<const CampaignSpec> campaigns, OracleMode mode,
                           EfficiencyFn efficiency) {
  oracles_.reserve(campaigns.size());
  for (const auto& c : campaigns) oracles_.emplace_back(c, mode, efficiency);
}

StepPlan OracleExpert::plan(std::size_t campaign, const AdvertiserBrief& brief,
                            const EpisodeState& state) const {
  return oracles_.at(campaign).replan(brief, state);
}

Dataset::Dataset(PolicyVariant variant)
    : variant_(variant),
      input_dim_(policy_input_dim(variant)),
      output_dim_(policy_output_dim(variant)) {}

void Dataset::clear() {
  inputs_.clear();
  targets_.clear();
  mu_.clear();
}

void Dataset::append(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                     std::span<const double> mu) {
  if (inputs.rows() != input_dim_ || targets.rows() != output_dim_ ||
      inputs.cols() != targets.cols() || static_cast<Eigen::Index>(mu.size()) != inputs.cols()) {
    throw InputError("dataset sample shapes do not match the variant");
  }
  inputs_.insert(inputs_.end(), inputs.data(), inputs.data() + inputs.size());
  targets_.insert(targets_.end(), targets.data(), targets.data() + targets.size());
  mu_.insert(mu_.end(), mu.begin(), mu.end());
}

TrainingBatch Dataset::gather(std::span<const std::size_t> indices,
                              const RunningNorm& norm) const {
  const auto n = static_cast<Eigen::Index>(indices.size());
  Eigen::MatrixXd raw(input_dim_, n);
  TrainingBatch batch;
  batch.targets.resize(output_dim_, n);
  batch.mu.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const std::size_t s = indices[static_cast<std::size_t>(k)];
    raw.col(k) = Eigen::Map<const Eigen::VectorXd>(inputs_.data() + s * input_dim_, input_dim_);
    batch.targets.col(k) =
        Eigen::Map<const Eigen::VectorXd>(targets_.data() + s * output_dim_, output_dim_);
    batch.mu(k) = mu_[s];
  }
  batch.inputs = norm.normalize(raw);
  return batch;
}

Eigen::MatrixXd Dataset::raw_inputs() const {
  return Eigen::Map<const Eigen::MatrixXd>(inputs_.data(), input_dim_,
                                           static_cast<Eigen::Index>(size()));
}

Policy train_oil(std::span<const CampaignSpec> campaigns, const Expert& expert,
                 PolicyVariant variant, const TrainConfig& config, const ScenarioRanges& ranges,
                 TrainLog* log, const RolloutCallback& on_rollout) {
  validate(config);
  Policy policy(variant, config.hidden, derive_seed(config.seed, 1));
  Adam adam(policy.network().parameter_count());
  Collector collector(campaigns, expert, variant, ranges, config.num_envs,
                      config.upgrade_ios_per_step, config.seed);
  std::mt19937_64 shuffle_rng(derive_seed(config.seed, 3));
  Dataset buffer(variant);
  const std::int64_t rollout_size =
      static_cast<std::int64_t>(config.rollout_steps) * config.num_envs;

  std::int64_t n = 0;
  while (n < config.total_interactions) {
    const std::int64_t rollout_start = n;
    buffer.clear();
    while (n < config.total_interactions && n - rollout_start < rollout_size) {
      const auto e = static_cast<std::size_t>(n % static_cast<std::int64_t>(config.num_envs));
      collector.step(e, &policy, &policy.norm(), buffer, log ? &log->episodes : nullptr);
      ++n;
    }
    std::vector<std::size_t> indices(buffer.size());
    std::iota(indices.begin(), indices.end(), std::size_t{0});
    RolloutLog rl = fit(policy, adam, buffer, indices, config,
                        learning_rate(config, rollout_start), shuffle_rng);
    rl.interactions = rollout_start;
    if (log != nullptr) log->rollouts.push_back(rl);
    if (on_rollout) on_rollout(rl);
  }
  return policy;
}

Dataset collect_dataset(std::span<const CampaignSpec> campaigns, const Expert& expert,
                        PolicyVariant variant, const ScenarioRanges& ranges, std::int64_t steps,
                        std::uint64_t seed, const Policy* actor, int upgrade_ios_per_step) {
  if (actor != nullptr && actor->variant() != variant) {
    throw ConfigError("acting policy variant does not match the dataset variant");
  }
  Collector collector(campaigns, expert, variant, ranges, 1, upgrade_ios_per_step, seed);
  Dataset data(variant);
  for (std::int64_t s = 0; s < steps; ++s) collector.step(0, actor, nullptr, data, nullptr);
  return data;
}

Policy offline_train(const Dataset& dataset, const TrainConfig& config,
                     const OfflineOptions& options, TrainLog* log) {
  validate(config);
  if (dataset.empty()) throw InputError("offline training needs a non-empty dataset");
  if (options.passes < 1) throw ConfigError("offline passes must be >= 1");
  Policy policy(dataset.variant(), config.hidden, derive_seed(config.seed, 1));
  policy.norm().update(dataset.raw_inputs());
  Adam adam(policy.network().parameter_count());
  std::mt19937_64 rng(derive_seed(config.seed, 3));

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (options.shuffle) std::shuffle(order.begin(), order.end(), rng);

  TrainConfig schedule = config;
  schedule.total_interactions =
      static_cast<std::int64_t>(dataset.size()) * static_cast<std::int64_t>(options.passes);
  const std::size_t rollout_size =
      static_cast<std::size_t>(config.rollout_steps) * static_cast<std::size_t>(config.num_envs);
  std::int64_t consumed = 0;
  for (int pass = 0; pass < options.passes; ++pass) {
    for (std::size_t start = 0; start < order.size(); start += rollout_size) {
      const std::size_t stop = std::min(order.size(), start + rollout_size);
      RolloutLog rl = fit(policy, adam, dataset, std::span(order).subspan(start, stop - start),
                          config, learning_rate(schedule, consumed), rng);
      rl.interactions = consumed;
      consumed += static_cast<std::int64_t>(stop - start);
      if (log != nullptr) log->rollouts.push_back(rl);
    }
  }
  return policy;
}

}  // namespace oilbid
