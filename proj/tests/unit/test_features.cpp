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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "oilbid/auction.hpp"
#include "oilbid/features.hpp"
#include "oilbid/traffic.hpp"

using namespace oilbid;

namespace {

struct Logged {
  std::vector<ImpressionOpportunity> ios;
  std::vector<double> bids;
  std::vector<BidOutcome> outcomes;
};

// Reference aggregates recomputed from raw per-step logs.
struct Ref {
  double ios = 0, placed = 0, wins = 0, bid = 0, pv = 0, lwc = 0, conv = 0, cost = 0, pos = 0;
  double lwc_pos = 0, bid_lwc = 0, pv_lwc = 0;
  double slot_wins[3] = {0, 0, 0}, slot_cost[3] = {0, 0, 0};
  std::vector<double> lwcs, pv_lwcs;
};

Ref reference(const std::vector<Logged>& log, std::size_t from) {
  Ref r;
  for (std::size_t s = from; s < log.size(); ++s) {
    const Logged& L = log[s];
    for (std::size_t n = 0; n < L.ios.size(); ++n) {
      const double lwc = L.ios[n].competitor_bids.back();
      const double bid = std::max(0.0, L.bids[n]);
      r.ios += 1;
      r.placed += bid > 0 ? 1 : 0;
      r.bid += bid;
      r.pv += L.ios[n].mu;
      r.lwc += lwc;
      r.lwcs.push_back(lwc);
      if (lwc > 0) {
        r.lwc_pos += 1;
        r.bid_lwc += bid / lwc;
        r.pv_lwc += L.ios[n].mu / lwc;
        r.pv_lwcs.push_back(L.ios[n].mu / lwc);
      }
      const BidOutcome& o = L.outcomes[n];
      if (o.won) {
        r.wins += 1;
        r.pos += o.slot;
        r.conv += o.conversions;
        r.cost += o.price_charged;
        r.slot_wins[o.slot - 1] += 1;
        r.slot_cost[o.slot - 1] += o.price_charged;
      }
    }
  }
  return r;
}

double div0(double a, double b) { return b > 0 ? a / b : 0.0; }

// Linear-interpolation percentile computed with nth_element on a copy.
double pct(std::vector<double> v, double p) {
  if (v.empty()) return 0.0;
  const double pos = p / 100.0 * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(lo), v.end());
  const double a = v[lo];
  if (lo + 1 >= v.size()) return a;
  const double b = *std::min_element(v.begin() + static_cast<std::ptrdiff_t>(lo) + 1, v.end());
  return a + (pos - static_cast<double>(lo)) * (b - a);
}

void check_window(const Observation& obs, const Ref& r, int k) {
  const auto K = static_cast<std::size_t>(k);
  CHECK(obs[5 + K] == doctest::Approx(div0(r.bid, r.ios)).epsilon(1e-12));
  CHECK(obs[8 + K] == doctest::Approx(div0(r.lwc, r.ios)).epsilon(1e-12));
  CHECK(obs[11 + K] == doctest::Approx(pct(r.lwcs, 10)).epsilon(1e-12));
  CHECK(obs[14 + K] == doctest::Approx(pct(r.lwcs, 1)).epsilon(1e-12));
  CHECK(obs[26 + K] == doctest::Approx(div0(r.pos, r.wins)).epsilon(1e-12));
  CHECK(obs[29 + K] == doctest::Approx(div0(r.cost, r.wins)).epsilon(1e-12));
  for (std::size_t s = 0; s < 3; ++s) {
    CHECK(obs[32 + 3 * s + K] == doctest::Approx(div0(r.slot_cost[s], r.slot_wins[s])).epsilon(1e-12));
  }
  CHECK(obs[41 + K] == doctest::Approx(div0(r.bid_lwc, r.lwc_pos)).epsilon(1e-12));
  CHECK(obs[44 + K] == doctest::Approx(div0(r.pv_lwc, r.lwc_pos)).epsilon(1e-12));
  CHECK(obs[47 + K] == doctest::Approx(pct(r.pv_lwcs, 90)).epsilon(1e-12));
  CHECK(obs[50 + K] == doctest::Approx(pct(r.pv_lwcs, 99)).epsilon(1e-12));
}

CampaignSpec small_campaign(std::uint64_t seed) {
  TrafficConfig tc;
  tc.horizon = 7;
  tc.ios_mean = 60;
  tc.seed = seed;
  tc.mu_median = 0.05;
  return generate(tc);
}

}  // namespace

TEST_CASE("empty history") {
  const CampaignSpec c = small_campaign(1);
  const AuctionEngine engine(c, {});
  const EpisodeState s = engine.start({12.0, 8.0});
  const Observation obs = build_observation(s, c.steps[0], {12.0, 8.0}, 3.0);
  CHECK(obs[feature::kTimeLeft] == 1.0);
  CHECK(obs[feature::kBudgetRemaining] == 12.0);
  CHECK(obs[feature::kTotalBudget] == 12.0);
  CHECK(obs[feature::kCurrentCpa] == 0.0);
  CHECK(obs[feature::kCategory] == 3.0);
  for (std::size_t k = 5; k < 53; ++k) CHECK(obs[k] == 0.0);
  CHECK(obs[57] == 0.0);
  CHECK(obs[58] == 0.0);
  CHECK(obs[59] == 0.0);
  CHECK(obs[feature::kCurrentIoCount] == static_cast<double>(c.steps[0].size()));
  CHECK(obs[feature::kCurrentPvalueMean] > 0.0);
}

TEST_CASE("single step window identities") {
  CampaignSpec c;
  c.horizon = 2;
  c.slot_count = 1;
  c.exposure_probs = {1.0};
  c.steps.resize(2);
  for (int t = 0; t < 2; ++t)
    for (int i = 0; i < 100; ++i) c.steps[t].push_back({{t, i}, 0.05, 0.0, {0.5, 0.1}});
  const AuctionEngine engine(c, {});
  EpisodeState s = engine.start({100.0, 8.0});
  engine.step(s, std::vector<double>(100, 0.0));
  const Observation obs = build_observation(s, c.steps[1], {100.0, 8.0});
  CHECK(obs[20] == doctest::Approx(0.05));
  CHECK(obs[57] == 100.0);
  CHECK(obs[feature::kTimeLeft] == 0.5);
}

TEST_CASE("percentile under linear interpolation") {
  std::vector<double> v(100);
  std::iota(v.begin(), v.end(), 1.0);
  CHECK(percentile_sorted(v, 10.0) == doctest::Approx(10.9));
  CHECK(percentile_sorted(v, 0.0) == 1.0);
  CHECK(percentile_sorted(v, 100.0) == 100.0);
  CHECK(percentile_sorted(std::vector<double>{}, 50.0) == 0.0);
  CHECK(percentile_sorted(std::vector<double>{4.0}, 99.0) == 4.0);
}

TEST_CASE("property: features match raw episode logs") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const CampaignSpec c = small_campaign(seed + 10);
    const OutcomeMode mode = seed % 2 ? OutcomeMode::kExpected : OutcomeMode::kSampled;
    const AuctionEngine engine(c, {seed, mode});
    const AdvertiserBrief brief{seed % 3 == 0 ? 0.5 : 20.0, 6.0};
    EpisodeState s = engine.start(brief);
    std::mt19937_64 rng(seed);
    std::vector<Logged> log;
    while (!s.finished()) {
      const auto& ios = c.steps[static_cast<std::size_t>(s.t)];
      const Observation obs = build_observation(s, ios, brief, 1.5);
      const std::size_t n = log.size();
      CHECK(obs[0] == doctest::Approx(static_cast<double>(c.horizon - s.t) / c.horizon));
      CHECK(obs[1] == doctest::Approx(brief.budget - s.cumulative_cost));
      CHECK(obs[3] == doctest::Approx(div0(s.cumulative_cost, s.cumulative_conversions)));
      check_window(obs, reference(log, 0), 0);
      check_window(obs, reference(log, n >= 1 ? n - 1 : 0), 1);
      check_window(obs, reference(log, n >= 3 ? n - 3 : 0), 2);
      const Ref all = reference(log, 0), last = reference(log, n >= 1 ? n - 1 : 0),
                last3 = reference(log, n >= 3 ? n - 3 : 0);
      CHECK(obs[17] == doctest::Approx(div0(all.pv, all.ios)));
      CHECK(obs[18] == doctest::Approx(div0(all.conv, all.wins)));
      CHECK(obs[19] == doctest::Approx(div0(all.wins, all.placed)));
      CHECK(obs[20] == doctest::Approx(div0(last.pv, last.ios)));
      CHECK(obs[21] == doctest::Approx(div0(last3.pv, last3.ios)));
      CHECK(obs[22] == doctest::Approx(div0(last.conv, last.wins)));
      CHECK(obs[23] == doctest::Approx(div0(last3.conv, last3.wins)));
      CHECK(obs[24] == doctest::Approx(div0(last.wins, last.placed)));
      CHECK(obs[25] == doctest::Approx(div0(last3.wins, last3.placed)));
      std::vector<double> mus;
      for (const auto& io : ios) mus.push_back(io.mu);
      CHECK(obs[53] == doctest::Approx(std::accumulate(mus.begin(), mus.end(), 0.0) / mus.size()));
      CHECK(obs[54] == doctest::Approx(pct(mus, 90)));
      CHECK(obs[55] == doctest::Approx(pct(mus, 99)));
      CHECK(obs[57] == last.ios);
      CHECK(obs[58] == last3.ios);
      CHECK(obs[59] == all.ios);
      if (n <= 3) {
        for (std::size_t k : {5, 8, 11, 14, 26, 29, 41, 44, 47, 50}) CHECK(obs[k + 2] == obs[k]);
      }
      for (double v : obs) CHECK(std::isfinite(v));
      CHECK(build_observation(s, ios, brief, 1.5) == obs);

      Logged entry;
      entry.ios = ios;
      for (const auto& io : ios) {
        const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        entry.bids.push_back(u < 0.2 ? 0.0 : io.mu * std::exp(std::uniform_real_distribution<double>(0.0, 3.0)(rng)));
      }
      entry.outcomes = engine.step(s, entry.bids);
      log.push_back(std::move(entry));
    }
  }
}
