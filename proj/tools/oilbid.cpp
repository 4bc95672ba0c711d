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

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include "json.hpp"
#include <string>
#include <vector>

#include "oilbid/errors.hpp"
#include "oilbid/harness.hpp"
#include "oilbid/oil.hpp"
#include "oilbid/oracle.hpp"
#include "oilbid/policy.hpp"
#include "oilbid/traffic.hpp"
#include "oilbid/verify.hpp"

namespace {

using namespace oilbid;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitVerify = 2;
constexpr int kExitDivergence = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double negated_efficiency(const UpgradeItem& item) { return -upgrade_mode_efficiency(item); }

void add_traffic_flags(CLI::App* cmd, TrafficConfig& tc) {
  cmd->add_option("--seed", tc.seed, "generator seed");
  cmd->add_option("--steps", tc.horizon, "number of time steps T");
  cmd->add_option("--ios-mean", tc.ios_mean, "mean IOs per step");
  cmd->add_option("--slots", tc.slot_count, "slots per IO D");
  cmd->add_option("--exposure", tc.exposure_probs, "exposure probabilities h_1..h_D");
  cmd->add_option("--mu-median", tc.mu_median, "median conversion probability");
  cmd->add_option("--category", tc.category, "advertiser category feature");
}

void add_range_flags(CLI::App* cmd, ScenarioRanges& r) {
  cmd->add_option("--budget-lo", r.budget_lo, "lowest budget, as a fraction of efficient spend");
  cmd->add_option("--budget-hi", r.budget_hi, "highest budget, as a fraction of efficient spend");
  cmd->add_option("--cpa-lo", r.cpa_lo, "lowest target CPA");
  cmd->add_option("--cpa-hi", r.cpa_hi, "highest target CPA");
}

void emit(const MetricsReport& report, const std::string& title, const std::string& jsonl) {
  std::cout << format_report(report, title);
  if (jsonl.empty()) return;
  if (jsonl == "-") {
    write_jsonl(report, std::cout);
    return;
  }
  std::ofstream out(jsonl);
  if (!out) throw InputError("cannot write " + jsonl);
  write_jsonl(report, out);
}

struct GenArgs {
  TrafficConfig traffic;
  std::string out;
};

int cmd_gen(const GenArgs& a) {
  if (a.traffic.horizon < 1) throw UsageError("--steps must be >= 1");
  std::vector<std::string> warnings;
  const CampaignSpec c = generate(a.traffic, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
  save_campaign(c, a.out);
  std::cout << "wrote " << a.out << ": T=" << c.horizon << " D=" << c.slot_count
            << " IOs=" << c.io_count() << '\n';
  return kExitOk;
}

struct OracleArgs {
  std::string campaign;
  double budget = 0.0;
  double cpa = 0.0;
  std::string mode = "upgrade";
  std::int64_t episodes = 100;
  std::uint64_t seed = 0;
  int jobs = 1;
  bool expected = false;
  std::string jsonl;
  ScenarioRanges ranges;
};

int cmd_oracle(const OracleArgs& a) {
  OracleMode mode;
  try {
    mode = parse_oracle_mode(a.mode);
  } catch (const InputError& e) {
    throw UsageError(e.what());
  }
  const std::vector<CampaignSpec> campaigns{load_campaign(a.campaign)};
  const OracleExpert expert(campaigns, mode);
  const OracleAgent agent(expert);
  const RunConfig rc{a.episodes, a.jobs,
                     a.expected ? OutcomeMode::kExpected : OutcomeMode::kSampled};
  std::vector<EpisodeResult> results;
  if (a.budget > 0.0 || a.cpa > 0.0) {
    const AdvertiserBrief brief{a.budget, a.cpa};
    validate(brief);
    results = run_episodes(campaigns, fixed_scenarios(brief, a.seed), agent, rc);
  } else {
    const ScenarioSampler sampler(campaigns, a.ranges);
    results = run_episodes(campaigns, sampled_scenarios(sampler, a.seed), agent, rc);
  }
  emit(summarize(std::move(results)), "oracle-" + std::string(to_string(mode)), a.jsonl);
  return kExitOk;
}

struct TrainArgs {
  std::vector<std::string> campaigns;
  int gen_campaigns = 5;
  TrafficConfig traffic;
  std::string variant = "slot";
  TrainConfig train;
  ScenarioRanges ranges;
  std::string out = "policy.json";
  std::string log;
  std::int64_t eval_episodes = 20;
  int jobs = 1;
};

int cmd_train(TrainArgs a) {
  const PolicyVariant variant = parse_policy_variant(a.variant);
  std::vector<CampaignSpec> all;
  if (!a.campaigns.empty()) {
    for (const auto& path : a.campaigns) all.push_back(load_campaign(path));
  } else {
    if (a.gen_campaigns < 2) throw UsageError("--gen-campaigns must be >= 2");
    for (int k = 0; k < a.gen_campaigns; ++k) {
      TrafficConfig tc = a.traffic;
      tc.seed = a.traffic.seed + static_cast<std::uint64_t>(k);
      all.push_back(generate(tc));
    }
  }
  if (all.size() < 2) throw UsageError("training needs at least two campaigns (one is held out)");
  const std::vector<CampaignSpec> held_out{all.back()};
  all.pop_back();

  std::ofstream log_file;
  if (!a.log.empty()) {
    log_file.open(a.log);
    if (!log_file) throw InputError("cannot write " + a.log);
  }
  a.train.diagnostic_path = a.out + ".diverged.json";
  const OracleExpert expert(all, oracle_mode_for(variant));
  TrainLog log;
  const auto start = std::chrono::steady_clock::now();
  const Policy policy =
      train_oil(all, expert, variant, a.train, a.ranges, &log, [&](const RolloutLog& r) {
        if (log_file) {
          nlohmann::json j{{"interactions", r.interactions}, {"samples", r.samples},
                           {"lr", r.learning_rate},          {"loss", r.loss_first_epoch},
                           {"loss_last_epoch", r.loss_last_epoch}, {"grad_norm", r.grad_norm}};
          log_file << j.dump() << '\n';
        }
      });
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  policy.save(a.out);
  std::printf("trained %s policy on %zu campaigns: %lld interactions, %zu rollouts, %.1f s\n",
              std::string(to_string(variant)).c_str(), all.size(),
              static_cast<long long>(a.train.total_interactions), log.rollouts.size(), seconds);
  if (!log.rollouts.empty()) {
    std::printf("imitation loss: first rollout %.6g, last rollout %.6g\n",
                log.rollouts.front().loss_first_epoch, log.rollouts.back().loss_first_epoch);
  }
  std::cout << "wrote " << a.out << '\n';

  if (a.eval_episodes > 0) {
    const ScenarioSampler sampler(held_out, a.ranges);
    const RunConfig rc{a.eval_episodes, a.jobs, OutcomeMode::kSampled};
    const auto scenarios = sampled_scenarios(sampler, derive_seed(a.train.seed, 99));
    const PolicyAgent student(policy, held_out);
    const OracleExpert held_expert(held_out, oracle_mode_for(variant));
    const OracleAgent oracle(held_expert);
    std::cout << format_report(summarize(run_episodes(held_out, scenarios, student, rc)),
                               "held-out student");
    std::cout << format_report(summarize(run_episodes(held_out, scenarios, oracle, rc)),
                               "held-out oracle");
  }
  return kExitOk;
}

struct EvalArgs {
  std::string checkpoint;
  std::string campaign;
  std::int64_t episodes = 100;
  std::uint64_t seed = 0;
  int jobs = 1;
  bool expected = false;
  std::string jsonl;
  ScenarioRanges ranges;
};

int cmd_eval(const EvalArgs& a) {
  const Policy policy = Policy::load(a.checkpoint);
  const std::vector<CampaignSpec> campaigns{load_campaign(a.campaign)};
  const ScenarioSampler sampler(campaigns, a.ranges);
  const PolicyAgent agent(policy, campaigns);
  const RunConfig rc{a.episodes, a.jobs,
                     a.expected ? OutcomeMode::kExpected : OutcomeMode::kSampled};
  emit(summarize(run_episodes(campaigns, sampled_scenarios(sampler, a.seed), agent, rc)),
       "policy-" + std::string(to_string(policy.variant())), a.jsonl);
  return kExitOk;
}

struct VerifyArgs {
  VerifyConfig config;
  bool corrupt = false;
};

int cmd_verify(VerifyArgs a) {
  if (a.corrupt) a.config.efficiency = negated_efficiency;
  const VerifyReport report = run_verify(a.config);
  std::cout << format_verify_report(report);
  std::cout << (report.ok() ? "verify: all properties hold\n" : "verify: FAILED\n");
  return report.ok() ? kExitOk : kExitVerify;
}

struct BenchArgs {
  std::int64_t slots = 1'000'000;
  int repeat = 1;
  std::uint64_t seed = 0;
};

int cmd_bench(const BenchArgs& a) {
  if (a.slots < 3 || a.repeat < 1) throw UsageError("--slots must be >= 3 and --repeat >= 1");
  std::printf("%12s %12s %12s %12s\n", "slots", "rank [s]", "select [s]", "total [s]");
  double previous = 0.0;
  for (std::int64_t n : {a.slots / 2, a.slots}) {
    TrafficConfig tc;
    tc.seed = a.seed;
    tc.ios_mean = static_cast<double>(n) / (tc.slot_count * tc.horizon);
    tc.ios_dispersion = 0.0;
    const CampaignSpec c = generate(tc);
    double rank_s = 1e300, select_s = 1e300;
    for (int r = 0; r < a.repeat; ++r) {
      const auto t0 = std::chrono::steady_clock::now();
      const Ranking ranking = rank_items(c, RankMode::kUpgrade);
      const auto t1 = std::chrono::steady_clock::now();
      const SelectionSet sel = select_prefix(ranking, 1e300, 8.0);
      const auto t2 = std::chrono::steady_clock::now();
      rank_s = std::min(rank_s, std::chrono::duration<double>(t1 - t0).count());
      select_s = std::min(select_s, std::chrono::duration<double>(t2 - t1).count());
      (void)sel;
    }
    const auto slots = static_cast<long long>(c.io_count()) * c.slot_count;
    std::printf("%12lld %12.4f %12.4f %12.4f\n", slots, rank_s, select_s, rank_s + select_s);
    if (previous > 0.0) std::printf("doubling ratio %.3f\n", (rank_s + select_s) / previous);
    previous = rank_s + select_s;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Budget-constrained multi-slot bidding: oracles, simulator and imitation learning"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "generate a synthetic campaign file");
  add_traffic_flags(gen_cmd, gen.traffic);
  gen_cmd->add_option("--out", gen.out, "output campaign file")->required();

  OracleArgs orc;
  auto* oracle_cmd = app.add_subcommand("oracle", "run a replanning oracle as the bidding agent");
  oracle_cmd->add_option("campaign", orc.campaign, "campaign file")->required();
  oracle_cmd->add_option("--budget", orc.budget, "budget B (sampled per episode if omitted)");
  oracle_cmd->add_option("--cpa", orc.cpa, "target CPA K (sampled per episode if omitted)");
  oracle_cmd->add_option("--mode", orc.mode, "slot | upgrade | 2s");
  oracle_cmd->add_option("--episodes", orc.episodes, "number of episodes");
  oracle_cmd->add_option("--seed", orc.seed, "episode seed");
  oracle_cmd->add_option("--jobs", orc.jobs, "parallel episodes");
  oracle_cmd->add_flag("--expected", orc.expected, "deterministic expected outcomes");
  oracle_cmd->add_option("--jsonl", orc.jsonl, "per-episode JSON lines ('-' for stdout)");
  add_range_flags(oracle_cmd, orc.ranges);

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "train a student policy by oracle imitation");
  train_cmd->add_option("--campaigns", tr.campaigns, "campaign files; the last is held out");
  train_cmd->add_option("--gen-campaigns", tr.gen_campaigns,
                        "campaigns to generate when no files are given");
  add_traffic_flags(train_cmd, tr.traffic);
  train_cmd->add_option("--variant", tr.variant, "slot | upgrade | 2s");
  train_cmd->add_option("--interactions", tr.train.total_interactions, "environment steps");
  train_cmd->add_option("--lr-start", tr.train.lr_start, "initial learning rate");
  train_cmd->add_option("--lr-end", tr.train.lr_end, "final learning rate");
  train_cmd->add_option("--batch-size", tr.train.batch_size, "minibatch size");
  train_cmd->add_option("--rollout-steps", tr.train.rollout_steps, "steps per environment per rollout");
  train_cmd->add_option("--num-envs", tr.train.num_envs, "parallel environments");
  train_cmd->add_option("--epochs", tr.train.epochs, "epochs per rollout");
  train_cmd->add_option("--max-grad-norm", tr.train.max_grad_norm, "gradient clipping norm");
  train_cmd->add_option("--hidden", tr.train.hidden, "hidden layer sizes");
  train_cmd->add_option("--train-seed", tr.train.seed, "training seed");
  train_cmd->add_option("--upgrade-ios", tr.train.upgrade_ios_per_step,
                        "upgrade variant: IO samples kept per step");
  add_range_flags(train_cmd, tr.ranges);
  train_cmd->add_option("--out", tr.out, "checkpoint path");
  train_cmd->add_option("--log", tr.log, "training log (JSON lines)");
  train_cmd->add_option("--eval-episodes", tr.eval_episodes, "held-out evaluation episodes");
  train_cmd->add_option("--jobs", tr.jobs, "parallel evaluation episodes");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a frozen policy");
  eval_cmd->add_option("checkpoint", ev.checkpoint, "policy checkpoint")->required();
  eval_cmd->add_option("campaign", ev.campaign, "campaign file")->required();
  eval_cmd->add_option("--episodes", ev.episodes, "number of episodes");
  eval_cmd->add_option("--seed", ev.seed, "episode seed");
  eval_cmd->add_option("--jobs", ev.jobs, "parallel episodes");
  eval_cmd->add_flag("--expected", ev.expected, "deterministic expected outcomes");
  eval_cmd->add_option("--jsonl", ev.jsonl, "per-episode JSON lines ('-' for stdout)");
  add_range_flags(eval_cmd, ev.ranges);

  VerifyArgs vf;
  auto* verify_cmd = app.add_subcommand("verify", "run the oracle property suite");
  verify_cmd->add_option("--instances", vf.config.instances, "random instances");
  verify_cmd->add_option("--max-ios", vf.config.max_ios, "IOs per brute-force instance");
  verify_cmd->add_option("--max-slots", vf.config.max_slots, "slots per IO");
  verify_cmd->add_option("--seed", vf.config.seed, "instance seed");
  verify_cmd->add_flag("--corrupt", vf.corrupt, "rank by negated efficiency (must fail)");

  BenchArgs bn;
  auto* bench_cmd = app.add_subcommand("bench", "time ranking and selection");
  bench_cmd->add_option("--slots", bn.slots, "slots in the larger campaign");
  bench_cmd->add_option("--repeat", bn.repeat, "repetitions (best time kept)");
  bench_cmd->add_option("--seed", bn.seed, "generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen_cmd) return cmd_gen(gen);
    if (*oracle_cmd) return cmd_oracle(orc);
    if (*train_cmd) return cmd_train(tr);
    if (*eval_cmd) return cmd_eval(ev);
    if (*verify_cmd) return cmd_verify(vf);
    if (*bench_cmd) return cmd_bench(bn);
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
