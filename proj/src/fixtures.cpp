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

#include "oilbid/fixtures.hpp"

#include "oilbid/errors.hpp"

namespace oilbid {

CampaignSpec two_io_example(int example) {
  if (example != 1 && example != 2) throw InputError("example must be 1 or 2");
  CampaignSpec c;
  c.horizon = 1;
  c.slot_count = 2;
  c.exposure_probs = {1.0, 0.8};
  c.steps.resize(1);
  c.steps[0].push_back({{0, 0}, example == 1 ? 0.1 : 0.2, 0.0, {1.0, 0.375, 0.1}});
  c.steps[0].push_back({{0, 1}, 0.04, 0.0, {1.0, 0.875, 0.1}});
  return c;
}

}  // namespace oilbid
