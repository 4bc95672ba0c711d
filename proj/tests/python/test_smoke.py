# Copyright 2026 The oilbid Authors
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import math

import pytest

import oilbid


def small_campaign(seed=3):
    cfg = oilbid.TrafficConfig()
    cfg.horizon = 6
    cfg.ios_mean = 40.0
    cfg.seed = seed
    return oilbid.generate(cfg)


def test_generate_is_deterministic(tmp_path):
    a = small_campaign()
    b = small_campaign()
    assert a.io_count() == b.io_count() > 0
    path = str(tmp_path / "c.csv")
    oilbid.save_campaign(a, path)
    c = oilbid.load_campaign(path)
    assert c.io_count() == a.io_count()
    assert [io.mu for io in c.steps[0]] == [io.mu for io in a.steps[0]]


def test_example_oracles_in_expected_mode():
    example = oilbid.two_io_example(1)
    upgrade = oilbid.evaluate_oracle([example], "upgrade", episodes=3, budget=1.1,
                                     target_cpa=10.0, expected=True)
    slot = oilbid.evaluate_oracle([example], "slot", episodes=3, budget=1.1,
                                  target_cpa=10.0, expected=True)
    assert upgrade["conversions"]["mean"] == pytest.approx(0.112, abs=1e-12)
    assert slot["conversions"]["mean"] == pytest.approx(0.1, abs=1e-12)


def test_greedy_never_beats_exact():
    for seed in range(5):
        cfg = oilbid.TrafficConfig()
        cfg.horizon = 2
        cfg.ios_mean = 2.0
        cfg.slot_count = 2
        cfg.exposure_probs = [1.0, 0.6]
        cfg.seed = seed
        campaign = oilbid.generate(cfg)
        if campaign.io_count() == 0 or campaign.io_count() > 8:
            continue
        exact = oilbid.brute_force_solve(campaign, 0.5, 8.0)
        greedy = oilbid.Oracle(campaign, "upgrade").solve(0.5, 8.0)
        assert greedy["score"] <= exact["score"] + 1e-9
        assert greedy["expected_cost"] <= 0.5 + 1e-9


def test_penalized_score():
    assert oilbid.penalized_score(2.0, 10.0, 10.0) == pytest.approx(2.0)
    assert oilbid.penalized_score(1.0, 20.0, 10.0) == pytest.approx(0.25)


def test_verify_passes():
    ok, report = oilbid.verify(instances=50, max_ios=6)
    assert ok, report


def test_observation_has_sixty_finite_features():
    obs = oilbid.observation(small_campaign(), 5.0, 8.0)
    assert len(obs) == 60
    assert all(math.isfinite(x) for x in obs)


def test_policy_round_trip_and_bids(tmp_path):
    campaign = small_campaign()
    policy = oilbid.Policy("slot", hidden=[8], seed=1)
    path = str(tmp_path / "p.json")
    policy.save(path)
    loaded = oilbid.Policy.load(path)
    assert loaded.variant == "slot"
    a = policy.first_step_bids(campaign, 5.0, 8.0)
    b = loaded.first_step_bids(campaign, 5.0, 8.0)
    assert a == b
    assert len(a) == len(campaign.steps[0])
    report = oilbid.evaluate_policy(loaded, [campaign], episodes=4, seed=2)
    assert len(report["episodes"]) == 4


def test_short_training_run():
    campaign = small_campaign()
    policy = oilbid.train([campaign], "slot", interactions=600, hidden=[8, 8], seed=5)
    assert policy.variant == "slot"
    report = oilbid.evaluate_policy(policy, [campaign], episodes=4, expected=True)
    assert math.isfinite(report["score"]["mean"])


def test_errors_map_to_python():
    with pytest.raises(oilbid.InputError):
        oilbid.load_campaign("/nonexistent/campaign.csv")
    with pytest.raises(ValueError):
        oilbid.Oracle(oilbid.two_io_example(1), "bogus")
    with pytest.raises(ValueError):
        oilbid.evaluate_constant(1.0, [small_campaign()], budget=1.0)
    with pytest.raises(oilbid.SizeError):
        cfg = oilbid.TrafficConfig()
        cfg.horizon = 2
        cfg.ios_mean = 30.0
        oilbid.brute_force_solve(oilbid.generate(cfg), 1.0, 8.0)
