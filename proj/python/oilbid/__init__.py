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

"""Budget-constrained bidding: hindsight oracles, imitation-trained policies and replay."""

from ._oilbid import (
    Campaign,
    ConfigError,
    DegenerateInput,
    DivergenceError,
    ImpressionOpportunity,
    InputError,
    Oracle,
    ParseError,
    Policy,
    SizeError,
    TrafficConfig,
    brute_force_solve,
    evaluate_constant,
    evaluate_oracle,
    evaluate_policy,
    generate,
    load_campaign,
    observation,
    penalized_score,
    save_campaign,
    train,
    two_io_example,
    verify,
)

__all__ = [
    "Campaign",
    "ConfigError",
    "DegenerateInput",
    "DivergenceError",
    "ImpressionOpportunity",
    "InputError",
    "Oracle",
    "ParseError",
    "Policy",
    "SizeError",
    "TrafficConfig",
    "brute_force_solve",
    "evaluate_constant",
    "evaluate_oracle",
    "evaluate_policy",
    "generate",
    "load_campaign",
    "observation",
    "penalized_score",
    "save_campaign",
    "train",
    "two_io_example",
    "verify",
]
