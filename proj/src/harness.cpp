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

#include "oilbid/harness.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <cstdio>
#include <limits>
#include <mutex>
#include "json.hpp"
#include <ostream>
#include <thread>

#include "oilbid/errors.hpp"
#include "oilbid/features.hpp"
#include "oilbid/mckp_exact.hpp"
#include "oilbid/rng.hpp"

namespace oilbid {

std::vector<double> OracleAgent::bids(std::size_t campaign, const AdvertiserBrief& brief,
                                      const EpisodeState& state) const {
  return expert_.plan(campaign, brief, state).bids;
}

std::vector<double> PolicyAgent::bids(std::size_t campaign, const AdvertiserBrief& brief,
                                      const EpisodeState& state) const {
  const CampaignSpec& c = campaigns_[campaign];
  const auto& ios = c.steps[static_cast<std::size_t>(state.t)];
  return policy_.act(build_observation(state, ios, brief, c.category), ios);
}

std::vector<double> ConstantAlphaAgent::bids(std::size_t campaign, const AdvertiserBrief&,
                                             const EpisodeState& state) const {
  const auto& ios = campaigns_[campaign].steps[static_cast<std::size_t>(state.t)];
  std::vector<double> b(ios.size());
  for (std::size_t n = 0; n < ios.size(); ++n) b[n] = alpha_ * ios[n].mu;
  return b;
}

EpisodeResult run_episode(const CampaignSpec& campaign, const Scenario& scenario,
                          const Agent& agent, OutcomeMode mode, std::int64_t episode) {
  const AuctionEngine engine(campaign, EngineConfig{scenario.engine_seed, mode});
  EpisodeState state = engine.start(scenario.brief);
  while (!state.finished()) {
    engine.step(state, agent.bids(scenario.campaign, scenario.brief, state));
  }
  EpisodeResult r;
  r.episode = episode;
  r.campaign = scenario.campaign;
  r.budget = scenario.brief.budget;
  r.target_cpa = scenario.brief.target_cpa;
  r.cost = state.cumulative_cost;
  r.conversions = state.cumulative_conversions;
  r.cpa = r.conversions > 0.0 ? r.cost / r.conversions : std::numeric_limits<double>::infinity();
  r.score = realized_score(r.conversions, r.cost, r.target_cpa);
  return r;
}

std::vector<EpisodeResult> run_episodes(std::span<const CampaignSpec> campaigns,
                                        const ScenarioFn& scenario_of, const Agent& agent,
                                        const RunConfig& config) {
  if (config.episodes < 0) throw ConfigError("episode count must be >= 0");
  if (config.jobs < 1) throw ConfigError("jobs must be >= 1");
  std::vector<EpisodeResult> results(static_cast<std::size_t>(config.episodes));
  std::atomic<std::int64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::int64_t e = next.fetch_add(1);
      if (e >= config.episodes) return;
      try {
        const Scenario s = scenario_of(e);
        if (s.campaign >= campaigns.size()) throw InputError("scenario names an unknown campaign");
        results[static_cast<std::size_t>(e)] =
            run_episode(campaigns[s.campaign], s, agent, config.mode, e);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(config.episodes);
        return;
      }
    }
  };
  const int jobs = static_cast<int>(
      std::min<std::int64_t>(config.jobs, std::max<std::int64_t>(1, config.episodes)));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

ScenarioFn fixed_scenarios(const AdvertiserBrief& brief, std::uint64_t seed) {
  return [brief, seed](std::int64_t e) {
    return Scenario{0, brief, derive_seed(seed, static_cast<std::uint64_t>(e))};
  };
}

ScenarioFn sampled_scenarios(const ScenarioSampler& sampler, std::uint64_t seed) {
  return [&sampler, seed](std::int64_t e) {
    return sampler.at(seed, static_cast<std::uint64_t>(e));
  };
}

MeanSe mean_se(std::span<const double> values) {
  MeanSe r;
  if (values.empty()) return r;
  double sum = 0.0;
  for (double v : values) sum += v;
  const double n = static_cast<double>(values.size());
  r.mean = sum / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - r.mean) * (v - r.mean);
    r.se = std::sqrt(ss / (n - 1.0) / n);
  }
  return r;
}

MetricsReport summarize(std::vector<EpisodeResult> episodes) {
  MetricsReport report;
  std::vector<double> cb, ratio, conv, score;
  for (const auto& e : episodes) {
    cb.push_back(e.budget > 0.0 ? e.cost / e.budget : 0.0);
    ratio.push_back(e.cost > 0.0 ? e.target_cpa * e.conversions / e.cost : 0.0);
    conv.push_back(e.conversions);
    score.push_back(e.score);
  }
  report.cost_over_budget = mean_se(cb);
  report.cpa_ratio = mean_se(ratio);
  report.conversions = mean_se(conv);
  report.score = mean_se(score);
  report.episodes = std::move(episodes);
  return report;
}

std::string format_report(const MetricsReport& report, std::string_view title) {
  char buf[160];
  auto row = [&buf](const char* name, const MeanSe& m) {
    std::snprintf(buf, sizeof(buf), "  %-18s %12.6g +- %.3g\n", name, m.mean, m.se);
    return std::string(buf);
  };
  std::snprintf(buf, sizeof(buf), " (%zu episodes)\n", report.episodes.size());
  std::string out = std::string(title) + buf;
  out += row("cost / budget", report.cost_over_budget);
  out += row("target CPA / CPA", report.cpa_ratio);
  out += row("conversions", report.conversions);
  out += row("score", report.score);
  return out;
}

void write_jsonl(const MetricsReport& report, std::ostream& out) {
  for (const auto& e : report.episodes) {
    nlohmann::json j;
    j["episode"] = e.episode;
    j["cost"] = e.cost;
    j["budget"] = e.budget;
    j["cpa"] = std::isfinite(e.cpa) ? nlohmann::json(e.cpa) : nlohmann::json(nullptr);
    j["target_cpa"] = e.target_cpa;
    j["conversions"] = e.conversions;
    j["score"] = e.score;
    out << j.dump() << '\n';
  }
}

std::vector<double> log_grid(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi >= lo) || count < 1) throw ConfigError("invalid coefficient grid");
  std::vector<double> grid(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const double f = count == 1 ? 0.0 : static_cast<double>(k) / (count - 1);
    grid[static_cast<std::size_t>(k)] = lo * std::pow(hi / lo, f);
  }
  return grid;
}

AlphaSearch best_constant_alpha(std::span<const CampaignSpec> campaigns,
                                const ScenarioFn& scenario_of, std::span<const double> grid,
                                const RunConfig& config) {
  AlphaSearch search;
  search.grid.assign(grid.begin(), grid.end());
  search.best_score = -std::numeric_limits<double>::infinity();
  for (double alpha : grid) {
    const ConstantAlphaAgent agent(alpha, campaigns);
    const MetricsReport r = summarize(run_episodes(campaigns, scenario_of, agent, config));
    search.scores.push_back(r.score.mean);
    if (r.score.mean > search.best_score) {
      search.best_score = r.score.mean;
      search.best_alpha = alpha;
    }
  }
  return search;
}

}  // namespace oilbid
