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

#include <random>

#include "oilbid/oracle.hpp"
#include "oilbid/verify.hpp"

using namespace oilbid;

namespace {

double negated_efficiency(const UpgradeItem& item) { return -item.efficiency; }

}  // namespace

TEST_CASE("random generators respect the domain") {
  std::mt19937_64 rng(1);
  for (int n = 0; n < 500; ++n) {
    const RandomSpio s = random_spio(rng, 4);
    REQUIRE(s.exposure_probs.size() == 4);
    REQUIRE(s.io.competitor_bids.size() == 5);
    for (std::size_t d = 1; d < 4; ++d) CHECK(s.exposure_probs[d] < s.exposure_probs[d - 1]);
    for (std::size_t d = 1; d < 5; ++d) CHECK(s.io.competitor_bids[d] < s.io.competitor_bids[d - 1]);
    CHECK(s.io.mu > 0.0);
  }
  for (int n = 0; n < 200; ++n) {
    const CampaignSpec c = random_small_campaign(rng, 8, 3, 2);
    CHECK(c.io_count() <= 8);
    CHECK(c.slot_count >= 2);
    CHECK(c.slot_count <= 3);
  }
}

TEST_CASE("report bookkeeping") {
  VerifyReport r;
  r.record("a", true);
  r.record("a", false);
  r.record("b", true);
  CHECK_FALSE(r.ok());
  CHECK(r.checked("a") == 2);
  CHECK(r.failed("a") == 1);
  CHECK(r.failed("missing") == 0);
  VerifyReport other;
  other.record("b", true);
  other.skipped = 3;
  r.merge(other);
  CHECK(r.checked("b") == 2);
  CHECK(r.skipped == 3);
}

TEST_CASE("default suite passes") {
  VerifyConfig cfg;
  cfg.instances = 300;
  cfg.seed = 2;
  const VerifyReport r = run_verify(cfg);
  CHECK(r.ok());
  CHECK(r.checked("not-above-exact/upgrade") > 0);
  CHECK(r.checked("harmonic-identity") > 0);
  CHECK(r.checked("coefficient-roundtrip") > 0);
  CHECK(r.checked("example1-upgrade") == 1);
  CHECK(format_verify_report(r).find("FAIL") == std::string::npos);
}

TEST_CASE("fixtures match the two-IO examples") { CHECK(verify_fixtures().ok()); }

TEST_CASE("negated efficiency is caught") {
  VerifyConfig cfg;
  cfg.instances = 200;
  cfg.seed = 2;
  cfg.efficiency = negated_efficiency;
  const VerifyReport r = run_verify(cfg);
  CHECK_FALSE(r.ok());
  REQUIRE_FALSE(r.failures.empty());
  const Counterexample& c = r.failures.front();
  CHECK_FALSE(c.property.empty());
  CHECK(format_verify_report(r).find("FAIL") != std::string::npos);
}

TEST_CASE("counterexamples are shrunk") {
  const VerifyReport r = verify_against_exact(200, 8, 3, 5, negated_efficiency);
  REQUIRE_FALSE(r.ok());
  for (const auto& c : r.failures) {
    if (c.campaign.steps.empty()) continue;
    CHECK(c.campaign.io_count() <= 8);
  }
}
