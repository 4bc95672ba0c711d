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

#ifndef OILBID_FEATURES_HPP_
#define OILBID_FEATURES_HPP_

#include <array>
#include <span>
#include <vector>

#include "oilbid/auction.hpp"
#include "oilbid/domain.hpp"

namespace oilbid {

inline constexpr std::size_t kObservationSize = 60;

using Observation = std::array<double, kObservationSize>;

// Zero-based positions of a few features referenced by name elsewhere; the
// full layout is listed in features.cpp.
namespace feature {
inline constexpr std::size_t kTimeLeft = 0;
inline constexpr std::size_t kBudgetRemaining = 1;
inline constexpr std::size_t kTotalBudget = 2;
inline constexpr std::size_t kCurrentCpa = 3;
inline constexpr std::size_t kCategory = 4;
inline constexpr std::size_t kMeanBid = 5;
inline constexpr std::size_t kMeanLwc = 8;
inline constexpr std::size_t kLwcP10 = 11;
inline constexpr std::size_t kPvalueLastStep = 20;
inline constexpr std::size_t kCurrentPvalueMean = 53;
inline constexpr std::size_t kCurrentIoCount = 56;
inline constexpr std::size_t kIoCountLastStep = 57;
inline constexpr std::size_t kIoCountTotal = 59;
}  // namespace feature

// Linear interpolation between order statistics of an ascending sample
// (p in [0,100]). Returns 0 for an empty sample.
double percentile_sorted(std::span<const double> sorted, double p);

// Builds the observation for step `state.t`. Aggregates that are undefined
// (no history, no wins, no conversions) are reported as 0.
Observation build_observation(const EpisodeState& state,
                              std::span<const ImpressionOpportunity> current_ios,
                              const AdvertiserBrief& brief, double category = 0.0);

}  // namespace oilbid

#endif  // OILBID_FEATURES_HPP_
