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

// Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned below.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "../common/gradient_check.hpp"
#include "oilbid/auction.hpp"
#include "oilbid/domain.hpp"
#include "oilbid/errors.hpp"
#include "oilbid/fixtures.hpp"
#include "oilbid/harness.hpp"
#include "oilbid/mckp_exact.hpp"
#include "oilbid/oil.hpp"
#include "oilbid/oracle.hpp"
#include "oilbid/traffic.hpp"
#include "oilbid/verify.hpp"

using namespace oilbid;

namespace {

// Pinned tolerances and budgets.
constexpr double kGoldenDecimals = 1e3;
constexpr double kGoldenSeconds = 1.0;
constexpr std::int64_t kSpioCount = 100'000;
constexpr int kRoundtripCampaigns = 1000;
constexpr int kRoundtripMaxIos = 50;
constexpr double kSpioSeconds = 30.0;
constexpr int kExactInstances = 1000;
constexpr double kExactSeconds = 120.0;
constexpr int kMonteCarloTrials = 1'000'000;
constexpr double kMonteCarloSe = 3.0;
constexpr double kMonteCarloSeconds = 60.0;
constexpr double kGradientTolerance = 1e-4;
constexpr std::int64_t kOilInteractions = 100'000;
constexpr double kOilFraction = 0.85;
constexpr int kOilEvalEpisodes = 100;
constexpr int kAlphaGridSize = 20;
constexpr double kOilSeconds = 900.0;
constexpr double kUtilization = 0.97;
constexpr int kUtilizationEpisodes = 100;
constexpr int kOrderingCampaigns = 100;
constexpr int kOrderingBriefs = 3;
constexpr double kSignLevel = 0.05;
constexpr std::int64_t kScaleSlots = 1'000'000;
constexpr double kScaleSeconds = 5.0;
constexpr double kDoublingRatio = 3.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// A zero standard error demands an exact match.
double zscore(double diff, double se) {
  if (se > 0.0) return diff / se;
  return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

double round3(double x) { return std::round(x * kGoldenDecimals) / kGoldenDecimals; }

Outcome golden_quantities() {
  const auto t0 = std::chrono::steady_clock::now();
  // Rows: mean cost slot 1/2, mean conv slot 1/2, efficiency slot 1/2, upgrade 2->1.
  // Columns: example 1 IO 1, IO 2, example 2 IO 1, IO 2.
  const double golden[7][4] = {
      {1.000, 1.000, 1.000, 1.000}, {0.300, 0.700, 0.300, 0.700}, {0.100, 0.040, 0.200, 0.040},
      {0.080, 0.032, 0.160, 0.032}, {0.100, 0.040, 0.200, 0.040}, {0.267, 0.046, 0.533, 0.046},
      {0.029, 0.027, 0.057, 0.027}};
  int rows_ok = 0, mismatches = 0;
  for (int example = 1; example <= 2; ++example) {
    const CampaignSpec c = two_io_example(example);
    for (int row = 0; row < 7; ++row) {
      bool ok = true;
      for (int io = 0; io < 2; ++io) {
        const ImpressionOpportunity& spio = c.steps[0][static_cast<std::size_t>(io)];
        const auto q = effective_quantities(spio, c.exposure_probs);
        double v = 0.0;
        switch (row) {
          case 0: v = q[0].effective_cost; break;
          case 1: v = q[1].effective_cost; break;
          case 2: v = q[0].effective_conversion; break;
          case 3: v = q[1].effective_conversion; break;
          case 4: v = slot_efficiency(spio.mu, spio.slot_cost(1)); break;
          case 5: v = slot_efficiency(spio.mu, spio.slot_cost(2)); break;
          case 6: v = build_upgrade_chain(spio, c.exposure_probs)[1].efficiency; break;
        }
        const double want = golden[row][2 * (example - 1) + io];
        if (round3(v) != want) {
          ok = false;
          ++mismatches;
        }
      }
      rows_ok += ok ? 1 : 0;
    }
  }
  const double s = seconds_since(t0);
  return {rows_ok == 14 && s < kGoldenSeconds,
          fmt("%d/14 rows match to 3 decimals, %d mismatched values, %.3f s", rows_ok, mismatches, s)};
}

Outcome decision_fixtures() {
  const AdvertiserBrief brief{1.0, 100.0};
  const CampaignSpec ex1 = two_io_example(1), ex2 = two_io_example(2);
  auto holding = [&](const CampaignSpec& c, RankMode mode) {
    const SelectionSet s = select_prefix(rank_items(c, mode), brief.budget, brief.target_cpa);
    std::vector<int> slots(2, kNoSlot);
    for (const Holding& h : held_slots(s)) slots[static_cast<std::size_t>(h.id.i)] = h.slot;
    return std::pair{slots, s.expected_conversions};
  };
  const auto [up1, conv_up1] = holding(ex1, RankMode::kUpgrade);
  const auto [slot1, conv_slot1] = holding(ex1, RankMode::kSlot);
  const auto [up2, conv_up2] = holding(ex2, RankMode::kUpgrade);
  const bool a = up1 == std::vector<int>{2, 2} && round3(conv_up1) == 0.112;
  const bool b = slot1 == std::vector<int>{1, 0} && round3(conv_slot1) == 0.1;
  const bool c = up2 == std::vector<int>{1, 0} && round3(conv_up2) == 0.2;
  const bool suite = verify_fixtures().ok();
  return {a && b && c && suite,
          fmt("ex1 upgrade {S12,S22} %.4f [%s], ex1 slot {S11} %.4f [%s], ex2 upgrade {S11} %.4f [%s], "
              "fixture suite %s",
              conv_up1, a ? "ok" : "bad", conv_slot1, b ? "ok" : "bad", conv_up2, c ? "ok" : "bad",
              suite ? "ok" : "bad")};
}

Outcome spio_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  VerifyReport r = verify_spio_properties(kSpioCount, 2, 5, 20261016);
  const std::int64_t spios = r.checked("harmonic-identity");
  r.merge(verify_coefficient_roundtrip(kRoundtripCampaigns, kRoundtripMaxIos, 20261017));
  const double s = seconds_since(t0);
  std::int64_t failed = 0;
  for (const auto& t : r.tallies) failed += t.failed;
  return {r.ok() && spios == kSpioCount && r.checked("coefficient-roundtrip") > 0 && s < kSpioSeconds,
          fmt("%lld SPIOs, %lld round-trip campaigns (%lld tie-degenerate skipped), %lld violations, %.1f s",
              static_cast<long long>(spios), static_cast<long long>(r.checked("coefficient-roundtrip")),
              static_cast<long long>(r.skipped), static_cast<long long>(failed), s)};
}

Outcome brute_force_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  const VerifyReport r = verify_against_exact(kExactInstances, 8, 3, 20261018);
  const double s = seconds_since(t0);
  std::int64_t failed = 0;
  for (const auto& t : r.tallies) failed += t.failed;
  return {r.ok() && s < kExactSeconds,
          fmt("%d instances: not-above-exact %lld+%lld, gap-bound %lld, exact-consumption %lld checks, "
              "%lld violations, %.1f s",
              kExactInstances, static_cast<long long>(r.checked("not-above-exact/slot")),
              static_cast<long long>(r.checked("not-above-exact/upgrade")),
              static_cast<long long>(r.checked("gap-bound")),
              static_cast<long long>(r.checked("exact-consumption")), static_cast<long long>(failed), s)};
}

Outcome simulator_fidelity() {
  const auto t0 = std::chrono::steady_clock::now();
  const double mu = 0.12, sigma = 0.3 * mu;
  const std::vector<double> bids{1.0, 0.6, 0.35, 0.2};
  CampaignSpec c;
  c.horizon = 1;
  c.slot_count = 3;
  c.exposure_probs = {1.0, 0.8, 0.5};
  c.steps.resize(1);
  c.steps[0].reserve(kMonteCarloTrials);
  for (int i = 0; i < kMonteCarloTrials; ++i) c.steps[0].push_back({{0, i}, mu, sigma, bids});
  bool ok = true;
  std::string detail;
  for (int d = 1; d <= 3; ++d) {
    const double bid = d == 1 ? 1.5 : 0.5 * (bids[static_cast<std::size_t>(d - 1)] + bids[static_cast<std::size_t>(d - 2)]);
    const AuctionEngine engine(c, {static_cast<std::uint64_t>(77 + d), OutcomeMode::kSampled});
    EpisodeState st = engine.start({1e12, 1.0});
    const auto outcomes = engine.step(st, std::vector<double>(kMonteCarloTrials, bid));
    double cs = 0, cs2 = 0, vs = 0, vs2 = 0;
    for (const auto& o : outcomes) {
      if (o.slot != d) ok = false;
      cs += o.price_charged;
      cs2 += o.price_charged * o.price_charged;
      vs += o.conversions;
      vs2 += o.conversions * o.conversions;
    }
    const double n = kMonteCarloTrials;
    const double cm = cs / n, vm = vs / n;
    const double cse = std::sqrt((cs2 / n - cm * cm) / (n - 1));
    const double vse = std::sqrt((vs2 / n - vm * vm) / (n - 1));
    const double h = c.exposure_probs[static_cast<std::size_t>(d - 1)];
    const double zc = zscore(cm - bids[static_cast<std::size_t>(d - 1)] * h, cse);
    const double zv = zscore(vm - mu * h, vse);
    ok = ok && std::abs(zc) <= kMonteCarloSe && std::abs(zv) <= kMonteCarloSe;
    detail += fmt("slot %d z(cost)=%+.2f z(conv)=%+.2f; ", d, zc, zv);
  }
  const double s = seconds_since(t0);
  return {ok && s < kMonteCarloSeconds, detail + fmt("%d trials per slot, %.1f s", kMonteCarloTrials, s)};
}

Outcome gradient_correctness() {
  double worst = 0.0;
  std::string detail;
  for (PolicyVariant v : {PolicyVariant::kSlot, PolicyVariant::kTwoSlopes, PolicyVariant::kUpgrade}) {
    double head = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      auto p = testing::make_gradient_problem(v, seed * 31);
      head = std::max(head, testing::max_relative_gradient_error(p, v, 1e-5));
    }
    detail += fmt("%s %.2e; ", std::string(to_string(v)).c_str(), head);
    worst = std::max(worst, head);
  }
  return {worst < kGradientTolerance, detail + fmt("max relative error %.2e (< %.0e)", worst, kGradientTolerance)};
}

std::vector<CampaignSpec> default_campaigns(std::uint64_t first_seed, int count) {
  std::vector<CampaignSpec> out;
  for (int k = 0; k < count; ++k) {
    TrafficConfig tc;
    tc.seed = first_seed + static_cast<std::uint64_t>(k);
    out.push_back(generate(tc));
  }
  return out;
}

Outcome desk_scale_oil() {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<CampaignSpec> train = default_campaigns(7100, 5);
  const std::vector<CampaignSpec> held_out{train.back()};
  train.pop_back();
  const ScenarioRanges ranges;
  const OracleExpert expert(train, OracleMode::kSlot);
  TrainConfig cfg;
  cfg.total_interactions = kOilInteractions;
  cfg.seed = 7;
  TrainLog log;
  const Policy policy = train_oil(train, expert, PolicyVariant::kSlot, cfg, ranges, &log);

  const ScenarioSampler sampler(held_out, ranges);
  const ScenarioFn scenarios = sampled_scenarios(sampler, 4242);
  const RunConfig rc{kOilEvalEpisodes, 1, OutcomeMode::kSampled};
  const PolicyAgent student(policy, held_out);
  const OracleExpert held_expert(held_out, OracleMode::kSlot);
  const OracleAgent oracle(held_expert);
  const double s_student = summarize(run_episodes(held_out, scenarios, student, rc)).score.mean;
  const double s_oracle = summarize(run_episodes(held_out, scenarios, oracle, rc)).score.mean;
  const auto grid = log_grid(0.5, 50.0, kAlphaGridSize);
  const AlphaSearch best = best_constant_alpha(held_out, scenarios, grid, rc);
  const double s = seconds_since(t0);
  const double ratio = s_student / s_oracle;
  return {ratio >= kOilFraction && s_student > best.best_score && s < kOilSeconds,
          fmt("student %.2f, oracle-slot %.2f (ratio %.3f, need >= %.2f), best constant alpha %.3g scores %.2f, "
              "loss %.3f -> %.3f, %.0f s",
              s_student, s_oracle, ratio, kOilFraction, best.best_alpha, best.best_score,
              log.rollouts.front().loss_first_epoch, log.rollouts.back().loss_first_epoch, s)};
}

Outcome budget_utilization() {
  const std::vector<CampaignSpec> campaigns = default_campaigns(8100, 4);
  const ScenarioSampler sampler(campaigns, {});
  std::string detail;
  bool ok = true;
  for (OracleMode mode : {OracleMode::kSlot, OracleMode::kUpgrade}) {
    const OracleExpert expert(campaigns, mode);
    const MetricsReport r = summarize(run_episodes(campaigns, sampled_scenarios(sampler, 99), OracleAgent(expert),
                                                   {kUtilizationEpisodes, 1, OutcomeMode::kSampled}));
    ok = ok && r.cost_over_budget.mean >= kUtilization;
    detail += fmt("%s cost/budget %.4f +- %.4f; ", std::string(to_string(mode)).c_str(),
                  r.cost_over_budget.mean, r.cost_over_budget.se);
  }
  return {ok, detail + fmt("%d episodes each, need >= %.2f", kUtilizationEpisodes, kUtilization)};
}

// One-sided sign test: P(X >= wins) for X ~ Binomial(wins + losses, 1/2).
double sign_test_p(int wins, int losses) {
  const int n = wins + losses;
  if (n == 0) return 1.0;
  double p = 0.0;
  for (int k = wins; k <= n; ++k) {
    p += std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) - n * std::log(2.0));
  }
  return std::min(1.0, p);
}

Outcome oracle_ordering() {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<double> slot, two, upgrade;
  for (int k = 0; k < kOrderingCampaigns; ++k) {
    TrafficConfig tc;
    tc.seed = 9100 + static_cast<std::uint64_t>(k);
    const std::vector<CampaignSpec> c{generate(tc)};
    const ScenarioSampler sampler(c, {});
    const RunConfig rc{kOrderingBriefs, 1, OutcomeMode::kExpected};
    double means[3];
    int m = 0;
    for (OracleMode mode : {OracleMode::kSlot, OracleMode::kTwoSlopes, OracleMode::kUpgrade}) {
      const OracleExpert expert(c, mode);
      means[m++] = summarize(run_episodes(c, sampled_scenarios(sampler, tc.seed), OracleAgent(expert), rc)).score.mean;
    }
    slot.push_back(means[0]);
    two.push_back(means[1]);
    upgrade.push_back(means[2]);
  }
  auto tally = [](const std::vector<double>& hi, const std::vector<double>& lo) {
    int w = 0, l = 0;
    for (std::size_t k = 0; k < hi.size(); ++k) {
      if (hi[k] > lo[k]) ++w;
      if (hi[k] < lo[k]) ++l;
    }
    return std::pair{w, l};
  };
  auto mean = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  const auto [w1, l1] = tally(upgrade, two);
  const auto [w2, l2] = tally(two, slot);
  const double p1 = sign_test_p(w1, l1), p2 = sign_test_p(w2, l2);
  const double s = seconds_since(t0);
  return {p1 < kSignLevel && p2 < kSignLevel,
          fmt("mean score upgrade %.2f, 2s %.2f, slot %.2f; upgrade>2s %d-%d (p=%.3g), 2s>slot %d-%d (p=%.3g), "
              "level %.2f, %.0f s",
              mean(upgrade), mean(two), mean(slot), w1, l1, p1, w2, l2, p2, kSignLevel, s)};
}

Outcome complexity_scale() {
  double previous = 0.0, ratio = 0.0, largest = 0.0;
  long long slots_big = 0;
  for (std::int64_t n : {kScaleSlots / 2, kScaleSlots}) {
    TrafficConfig tc;
    tc.seed = 5;
    tc.ios_dispersion = 0.0;
    tc.ios_mean = static_cast<double>(n) / (tc.slot_count * tc.horizon);
    const CampaignSpec c = generate(tc);
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < 3; ++r) {
      const auto t0 = std::chrono::steady_clock::now();
      const Ranking ranking = rank_items(c, RankMode::kUpgrade);
      const SelectionSet sel = select_prefix(ranking, std::numeric_limits<double>::max(), 8.0);
      best = std::min(best, seconds_since(t0));
      if (sel.expected_cost < 0) return {false, "negative cost"};
    }
    if (previous > 0.0) ratio = best / previous;
    previous = best;
    largest = best;
    slots_big = static_cast<long long>(c.io_count()) * c.slot_count;
  }
  return {largest < kScaleSeconds && ratio < kDoublingRatio,
          fmt("%lld slots in %.3f s (< %.0f s), doubling ratio %.2f (< %.0f)", slots_big, largest, kScaleSeconds,
              ratio, kDoublingRatio)};
}

}  // namespace

int main(int argc, char** argv) {
  // Optional list of criterion numbers to run; all by default.
  std::vector<bool> wanted(11, argc <= 1);
  for (int a = 1; a < argc; ++a) {
    const int k = std::atoi(argv[a]);
    if (k >= 1 && k <= 10) wanted[static_cast<std::size_t>(k)] = true;
  }
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"golden effective quantities", golden_quantities},
      {"decision fixtures", decision_fixtures},
      {"single-IO property suite", spio_suite},
      {"brute-force equivalence", brute_force_equivalence},
      {"simulator statistical fidelity", simulator_fidelity},
      {"gradient correctness", gradient_correctness},
      {"desk-scale imitation learning", desk_scale_oil},
      {"oracle budget utilization", budget_utilization},
      {"oracle ordering", oracle_ordering},
      {"complexity and scale", complexity_scale},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    if (!wanted[k + 1]) continue;
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s criterion %zu (%s): %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first,
                o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
