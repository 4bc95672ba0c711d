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

#ifndef OILBID_FIXTURES_HPP_
#define OILBID_FIXTURES_HPP_

#include "oilbid/domain.hpp"

namespace oilbid {

// The two-IO, two-slot examples: h = (1, 0.8), slot costs
// (1, 0.375) and (1, 0.875), mu = (0.1, 0.04) for example 1 and
// (0.2, 0.04) for example 2. Both IOs sit in the single step t = 0 and
// sigma is 0. Throws InputError for any other `example`.
CampaignSpec two_io_example(int example);

}  // namespace oilbid

#endif  // OILBID_FIXTURES_HPP_
