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

#include "oilbid/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "oilbid/auction.hpp"
#include "oilbid/errors.hpp"
#include "oilbid/fixtures.hpp"
#include "oilbid/mckp_exact.hpp"
#include "oilbid/rng.hpp"
#include "oilbid/traffic.hpp"

namespace oilbid {
namespace {

constexpr double kIdentityTol = 1e-12;
constexpr double kScoreTol = 1e-12;
constexpr double kGapTol = 1e-9;

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

bool relative_close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

std::string describe(double a, double b) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%.17g vs %.17g", a, b);
  return buf;
}

// Assignment (choice per IO in campaign order) from a selection's holdings.
Assignment assignment_of(const SelectionSet& selection, const CampaignSpec& campaign) {
  Assignment a;
  std::vector<std::size_t> offset(campaign.steps.size() + 1, 0);
  for (std::size_t t = 0; t < campaign.steps.size(); ++t) {
    offset[t + 1] = offset[t] + campaign.steps[t].size();
  }
  a.choice.assign(offset.back(), 0);
  for (const Holding& h : held_slots(selection)) {
    a.choice[offset[static_cast<std::size_t>(h.id.t)] + static_cast<std::size_t>(h.id.i)] = h.slot;
  }
  return a;
}

CampaignSpec remove_io(const CampaignSpec& campaign, std::size_t flat) {
  CampaignSpec out = campaign;
  std::size_t seen = 0;
  for (auto& step : out.steps) {
    if (flat < seen + step.size()) {
      step.erase(step.begin() + static_cast<std::ptrdiff_t>(flat - seen));
      for (std::size_t i = 0; i < step.size(); ++i) step[i].id.i = static_cast<int>(i);
      return out;
    }
    seen += step.size();
  }
  return out;
}

using InstanceCheck =
    void (*)(const CampaignSpec&, double, double, EfficiencyFn, VerifyReport&, std::string*);

// Removes IOs one at a time while `property` keeps failing.
CampaignSpec shrink(const CampaignSpec& campaign, double budget, double target_cpa,
                    EfficiencyFn efficiency, const std::string& property, InstanceCheck check) {
  CampaignSpec current = campaign;
  bool progress = true;
  while (progress && current.io_count() > 1) {
    progress = false;
    for (std::size_t k = 0; k < current.io_count(); ++k) {
      const CampaignSpec candidate = remove_io(current, k);
      VerifyReport probe;
      check(candidate, budget, target_cpa, efficiency, probe, nullptr);
      if (probe.failed(property) > 0) {
        current = candidate;
        progress = true;
        break;
      }
    }
  }
  return current;
}

void note(VerifyReport& report, const std::string& property, bool passed, std::string* detail,
          const std::string& message) {
  report.record(property, passed);
  if (!passed && detail != nullptr && detail->empty()) *detail = property + ": " + message;
}

void check_against_exact(const CampaignSpec& campaign, double budget, double target_cpa,
                         EfficiencyFn efficiency, VerifyReport& report, std::string* detail) {
  const ExactSolution exact = brute_force_solve(campaign, budget, target_cpa);
  const double u_max = exact.value.score;

  for (RankMode mode : {RankMode::kSlot, RankMode::kUpgrade}) {
    const std::string tag(to_string(mode));
    try {
      const Ranking ranking = rank_items(campaign, mode, efficiency);
      const SelectionSet sel = select_prefix(ranking, budget, target_cpa);
      note(report, "within-budget/" + tag, sel.expected_cost <= budget, detail,
           describe(sel.expected_cost, budget));

      const Assignment assignment = assignment_of(sel, campaign);
      report.record("multiple-choice/" + tag, true);
      const ObjectiveValue value = objective_value(assignment, campaign, target_cpa);
      note(report, "objective-agrees/" + tag,
           std::abs(value.score - sel.score) <= kScoreTol * std::max(1.0, std::abs(u_max)), detail,
           describe(value.score, sel.score));
      note(report, "not-above-exact/" + tag, sel.score <= u_max + kScoreTol, detail,
           describe(sel.score, u_max));

      const SelectionSet wider = select_prefix(ranking, 1.5 * budget, target_cpa);
      note(report, "budget-monotone/" + tag, wider.score >= sel.score, detail,
           describe(wider.score, sel.score));

      if (mode == RankMode::kUpgrade) {
        if (const auto bound = gap_bound(sel, budget, target_cpa)) {
          note(report, "gap-bound", u_max - sel.score <= *bound + kGapTol, detail,
               describe(u_max - sel.score, *bound));
          if (std::abs(budget - sel.expected_cost) <= kBudgetSlack * budget) {
            note(report, "exact-consumption", std::abs(u_max - sel.score) <= kGapTol, detail,
                 describe(u_max, sel.score));
          }
        }
      }
    } catch (const std::exception& e) {
      note(report, "multiple-choice/" + tag, false, detail, e.what());
    }
  }

  // Replanning from a perturbed history never plans past the budget, and a
  // fresh state reproduces the full solve.
  try {
    const Oracle oracle(campaign, OracleMode::kUpgrade, efficiency);
    const AdvertiserBrief brief{budget, target_cpa};
    const AuctionEngine engine(campaign, EngineConfig{});
    EpisodeState state = engine.start(brief);
    const StepPlan fresh = oracle.replan(brief, state);
    note(report, "replan-fresh", fresh.score == oracle.solve(brief).score, detail,
         describe(fresh.score, oracle.solve(brief).score));
    for (int t = 0; t < campaign.horizon; ++t) {
      state.t = t;
      state.cumulative_cost = budget * (0.3 + 0.2 * t);
      state.cumulative_cost = std::min(state.cumulative_cost, budget);
      state.cumulative_conversions = 0.01 * t;
      state.remaining_budget = budget - state.cumulative_cost;
      const StepPlan plan = oracle.replan(brief, state);
      note(report, "replan-within-budget", plan.expected_cost <= budget, detail,
           describe(plan.expected_cost, budget));
    }
  } catch (const std::exception& e) {
    note(report, "replan-within-budget", false, detail, e.what());
  }
}

void check_roundtrip(const CampaignSpec& campaign, double budget, double target_cpa,
                     EfficiencyFn efficiency, VerifyReport& report, std::string* detail) {
  const Ranking ranking = rank_items(campaign, RankMode::kSlot, efficiency);
  const SelectionSet sel = select_prefix(ranking, budget, target_cpa);
  double alpha = 0.0;
  try {
    alpha = bid_coefficient_slot(sel);
  } catch (const DegenerateInput&) {
    ++report.skipped;
    return;
  }
  std::vector<Holding> held;
  try {
    held = held_slots(sel);
  } catch (const std::exception& e) {
    note(report, "coefficient-roundtrip", false, detail, e.what());
    return;
  }
  std::set<std::pair<IoId, int>> expected;
  for (const Holding& h : held) expected.insert({h.id, h.slot});
  bool ok = true;
  std::string why;
  for (const auto& step : campaign.steps) {
    for (const auto& io : step) {
      const AuctionResult r = resolve_bid(alpha * io.mu, io.competitor_bids);
      const bool want = std::any_of(expected.begin(), expected.end(),
                                    [&](const auto& e) { return e.first == io.id; });
      const bool match = r.won ? expected.count({io.id, r.slot}) > 0 : !want;
      if (!match && ok) {
        ok = false;
        why = "IO (" + std::to_string(io.id.t) + "," + std::to_string(io.id.i) + ") won slot " +
              std::to_string(r.slot);
      }
    }
  }
  note(report, "coefficient-roundtrip", ok, detail, why);
}

template <typename Gen>
void run_instances(VerifyReport& report, int count, std::uint64_t seed, EfficiencyFn efficiency,
                   InstanceCheck check, Gen&& generate) {
  for (int n = 0; n < count; ++n) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(n)));
    const auto [campaign, budget, cpa] = generate(rng);
    VerifyReport local;
    std::string detail;
    check(campaign, budget, cpa, efficiency, local, &detail);
    for (const auto& tally : local.tallies) {
      if (tally.failed == 0) continue;
      const bool first = std::none_of(report.failures.begin(), report.failures.end(),
                                      [&](const Counterexample& c) { return c.property == tally.name; });
      if (first) {
        report.failures.push_back({tally.name, detail, static_cast<std::uint64_t>(n),
                                   shrink(campaign, budget, cpa, efficiency, tally.name, check),
                                   budget, cpa});
      }
    }
    report.merge(local);
  }
}

}  // namespace

bool VerifyReport::ok() const {
  return std::all_of(tallies.begin(), tallies.end(),
                     [](const PropertyTally& t) { return t.failed == 0; });
}

void VerifyReport::record(const std::string& property, bool passed) {
  auto it = std::find_if(tallies.begin(), tallies.end(),
                         [&](const PropertyTally& t) { return t.name == property; });
  if (it == tallies.end()) {
    tallies.push_back({property, 0, 0});
    it = tallies.end() - 1;
  }
  ++it->checked;
  if (!passed) ++it->failed;
}

void VerifyReport::merge(const VerifyReport& other) {
  for (const auto& t : other.tallies) {
    auto it = std::find_if(tallies.begin(), tallies.end(),
                           [&](const PropertyTally& x) { return x.name == t.name; });
    if (it == tallies.end()) {
      tallies.push_back(t);
    } else {
      it->checked += t.checked;
      it->failed += t.failed;
    }
  }
  for (const auto& f : other.failures) {
    const bool seen = std::any_of(failures.begin(), failures.end(),
                                  [&](const Counterexample& c) { return c.property == f.property; });
    if (!seen) failures.push_back(f);
  }
  skipped += other.skipped;
}

std::int64_t VerifyReport::checked(const std::string& property) const {
  for (const auto& t : tallies) {
    if (t.name == property) return t.checked;
  }
  return 0;
}

std::int64_t VerifyReport::failed(const std::string& property) const {
  for (const auto& t : tallies) {
    if (t.name == property) return t.failed;
  }
  return 0;
}

RandomSpio random_spio(std::mt19937_64& rng, int slots) {
  if (slots < 1) throw ConfigError("slots must be >= 1");
  RandomSpio s;
  s.exposure_probs.resize(static_cast<std::size_t>(slots));
  double h = uniform(rng, 0.5, 1.0);
  for (auto& e : s.exposure_probs) {
    e = h;
    h *= uniform(rng, 0.3, 0.95);
  }
  s.io.mu = uniform(rng, 0.005, 0.5);
  const double k1 = s.io.mu * uniform(rng, 1.0, 20.0);
  double delta = 1.0;
  s.io.competitor_bids.resize(static_cast<std::size_t>(slots) + 1);
  for (auto& c : s.io.competitor_bids) {
    c = k1 * delta;
    delta *= uniform(rng, 0.3, 0.95);
  }
  return s;
}

CampaignSpec random_small_campaign(std::mt19937_64& rng, int max_ios, int max_slots,
                                   int min_slots) {
  CampaignSpec c;
  c.slot_count = uniform_int(rng, min_slots, max_slots);
  const int ios = uniform_int(rng, 1, max_ios);
  c.horizon = uniform_int(rng, 1, std::min(3, ios));
  c.steps.resize(static_cast<std::size_t>(c.horizon));
  bool first = true;
  for (int n = 0; n < ios; ++n) {
    RandomSpio s = random_spio(rng, c.slot_count);
    if (first) {
      c.exposure_probs = s.exposure_probs;
      first = false;
    }
    const int t = uniform_int(rng, 0, c.horizon - 1);
    auto& step = c.steps[static_cast<std::size_t>(t)];
    s.io.id = {t, static_cast<int>(step.size())};
    s.io.sigma = 0.0;
    step.push_back(std::move(s.io));
  }
  return c;
}

VerifyReport verify_spio_properties(std::int64_t count, int min_slots, int max_slots,
                                std::uint64_t seed) {
  VerifyReport report;
  std::mt19937_64 rng(seed);
  for (std::int64_t n = 0; n < count; ++n) {
    const int slots = uniform_int(rng, min_slots, max_slots);
    const RandomSpio s = random_spio(rng, slots);
    const auto& h = s.exposure_probs;
    const auto& io = s.io;
    const double mu = io.mu;
    auto hd = [&](int d) { return h[static_cast<std::size_t>(d - 1)]; };
    auto eta_up = [&](int i, int j) {
      return upgrade_efficiency(mu, io.slot_cost(i), io.slot_cost(j), hd(i), hd(j));
    };

    bool sorted = true;
    for (int d = 1; d < slots; ++d) {
      sorted = sorted && slot_efficiency(mu, io.slot_cost(d + 1)) > slot_efficiency(mu, io.slot_cost(d));
    }
    report.record("slot-efficiency-order", sorted);

    const double eta_last = slot_efficiency(mu, io.slot_cost(slots));
    bool dominates = true;
    for (int i = 1; i <= slots; ++i) {
      for (int j = i + 1; j <= slots; ++j) dominates = dominates && eta_last > eta_up(i, j);
    }
    report.record("last-slot-dominates", dominates);

    bool identity = true;
    bool bounded = true;
    for (int i = 1; i <= slots; ++i) {
      for (int k = i + 1; k <= slots; ++k) {
        for (int j = k + 1; j <= slots; ++j) {
          const double beta = (hd(i) - hd(k)) / (hd(i) - hd(j));
          const double whole = eta_up(i, j);
          const double left = eta_up(i, k);
          const double right = eta_up(k, j);
          identity = identity && relative_close(1.0 / whole, beta / left + (1.0 - beta) / right,
                                                kIdentityTol);
          bounded = bounded && whole >= std::min(left, right) * (1.0 - kIdentityTol);
        }
      }
    }
    report.record("harmonic-identity", identity);
    report.record("harmonic-min-bound", bounded);

    const auto chain = build_upgrade_chain(io, h);
    bool monotone = !chain.empty() && chain.front().slot == slots &&
                    chain.front().from_slot == kNoSlot && chain.back().slot == 1;
    for (std::size_t m = 1; m < chain.size(); ++m) {
      monotone = monotone && chain[m].efficiency <= chain[m - 1].efficiency &&
                 chain[m].from_slot == chain[m - 1].slot;
    }
    report.record("upgrade-chain-monotone", monotone);
  }
  return report;
}

VerifyReport verify_coefficient_roundtrip(int campaigns, int max_ios, std::uint64_t seed,
                                          EfficiencyFn efficiency) {
  VerifyReport report;
  run_instances(report, campaigns, seed, efficiency, check_roundtrip, [&](std::mt19937_64& rng) {
    CampaignSpec c = random_small_campaign(rng, max_ios, 3);
    double reach = 0.0;
    for (const auto& step : c.steps) {
      for (const auto& io : step) reach += io.slot_cost(1) * c.exposure_probs[0];
    }
    const double budget = reach * uniform(rng, 0.05, 1.0);
    const double cpa = uniform(rng, 1.0, 30.0);
    return std::tuple{std::move(c), budget, cpa};
  });
  return report;
}

VerifyReport verify_against_exact(int instances, int max_ios, int max_slots, std::uint64_t seed,
                                  EfficiencyFn efficiency) {
  VerifyReport report;
  run_instances(report, instances, seed, efficiency, check_against_exact,
                [&](std::mt19937_64& rng) {
                  CampaignSpec c = random_small_campaign(rng, max_ios, max_slots);
                  const double cpa = uniform(rng, 1.0, 30.0);
                  const Ranking ranking = rank_items(c, RankMode::kUpgrade);
                  double budget = 0.0;
                  if (rng() % 2 == 0 && ranking.size() > 0) {
                    // Exact cost of a ranking prefix, summed as the scan does.
                    const auto j = static_cast<std::size_t>(
                        uniform_int(rng, 1, static_cast<int>(ranking.size())));
                    for (std::size_t k = 0; k < j; ++k) budget += ranking.delta_cost[k];
                  } else {
                    double reach = 0.0;
                    for (const auto& item : ranking.items) reach += item.delta_cost;
                    budget = reach * uniform(rng, 0.05, 1.0);
                  }
                  if (!(budget > 0.0)) budget = 1.0;
                  return std::tuple{std::move(c), budget, cpa};
                });
  return report;
}

VerifyReport verify_fixtures(EfficiencyFn efficiency) {
  VerifyReport report;
  auto check = [&](const std::string& name, auto&& body) {
    bool passed = false;
    try {
      passed = body();
    } catch (const std::exception&) {
      passed = false;
    }
    report.record(name, passed);
    if (!passed) report.failures.push_back({name, "two-IO example decision differs", 0, {}, 1.0, 100.0});
  };
  const CampaignSpec ex1 = two_io_example(1);
  const CampaignSpec ex2 = two_io_example(2);
  const AdvertiserBrief brief{1.0, 100.0};
  check("example1-upgrade", [&] {
    const SelectionSet sel = Oracle(ex1, OracleMode::kUpgrade, efficiency).solve(brief);
    const auto held = held_slots(sel);
    return held.size() == 2 && held[0].slot == 2 && held[1].slot == 2 &&
           std::abs(sel.expected_conversions - 0.112) < 1e-12 &&
           std::abs(sel.expected_cost - 1.0) < 1e-12;
  });
  check("example1-slot", [&] {
    const SelectionSet sel = Oracle(ex1, OracleMode::kSlot, efficiency).solve(brief);
    const auto held = held_slots(sel);
    return held.size() == 1 && held[0].id == IoId{0, 0} && held[0].slot == 1 &&
           std::abs(sel.expected_conversions - 0.1) < 1e-12;
  });
  check("example2-upgrade", [&] {
    const SelectionSet sel = Oracle(ex2, OracleMode::kUpgrade, efficiency).solve(brief);
    const auto held = held_slots(sel);
    return held.size() == 1 && held[0].id == IoId{0, 0} && held[0].slot == 1 &&
           std::abs(sel.expected_conversions - 0.2) < 1e-12;
  });
  return report;
}

VerifyReport run_verify(const VerifyConfig& config) {
  if (config.instances < 0 || config.max_ios < 1 || config.max_slots < 1) {
    throw ConfigError("verify needs instances >= 0, max IOs >= 1 and max slots >= 1");
  }
  VerifyReport report = verify_fixtures(config.efficiency);
  report.merge(verify_against_exact(config.instances, config.max_ios, config.max_slots,
                                    config.seed, config.efficiency));
  report.merge(verify_coefficient_roundtrip(config.instances, 6 * config.max_ios,
                                            derive_seed(config.seed, 1), config.efficiency));
  report.merge(verify_spio_properties(10 * static_cast<std::int64_t>(config.instances), 2,
                                  std::max(2, config.max_slots), derive_seed(config.seed, 2)));
  return report;
}

std::string format_verify_report(const VerifyReport& report) {
  std::ostringstream out;
  char buf[160];
  for (const auto& t : report.tallies) {
    std::snprintf(buf, sizeof(buf), "%-4s %-28s %8lld checked %6lld failed\n",
                  t.failed == 0 ? "ok" : "FAIL", t.name.c_str(),
                  static_cast<long long>(t.checked), static_cast<long long>(t.failed));
    out << buf;
  }
  if (report.skipped > 0) out << "skipped " << report.skipped << " instances with exact ties\n";
  for (const auto& f : report.failures) {
    out << "\ncounterexample for " << f.property << " (instance " << f.instance << ")\n";
    if (!f.detail.empty()) out << "  " << f.detail << '\n';
    std::snprintf(buf, sizeof(buf), "  budget %.17g, target CPA %.17g\n", f.budget, f.target_cpa);
    out << buf;
    if (f.campaign.horizon > 0) write_campaign(f.campaign, out);
  }
  return out.str();
}

}  // namespace oilbid
