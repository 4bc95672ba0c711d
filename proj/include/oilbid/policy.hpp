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

#ifndef OILBID_POLICY_HPP_
#define OILBID_POLICY_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include "json.hpp"
#include <span>
#include <string_view>
#include <vector>

#include "oilbid/domain.hpp"
#include "oilbid/features.hpp"
#include "oilbid/network.hpp"
#include "oilbid/oracle.hpp"

namespace oilbid {

// slot: one log-coefficient per step. two-slopes: (log alpha0, intercept,
// slope) per step. upgrade: one output z per IO, bid = mu * exp(z), fed the
// observation concatenated with the IO's (mu, sigma).
enum class PolicyVariant { kSlot, kUpgrade, kTwoSlopes };

std::string_view to_string(PolicyVariant variant);
PolicyVariant parse_policy_variant(std::string_view name);
OracleMode oracle_mode_for(PolicyVariant variant);
int policy_input_dim(PolicyVariant variant);
int policy_output_dim(PolicyVariant variant);

inline constexpr double kLogClamp = 50.0;
// Regression target used when the oracle bids nothing at all.
inline constexpr double kFloorLogCoefficient = -5.0;

// Per-feature running mean and variance (parallel Welford merge).
class RunningNorm {
 public:
  RunningNorm() = default;
  explicit RunningNorm(int dim);

  int dim() const { return static_cast<int>(mean_.size()); }
  double count() const { return count_; }
  const Eigen::VectorXd& mean() const { return mean_; }
  Eigen::VectorXd variance() const;

  void update(const Eigen::MatrixXd& columns);
  // (x - mean) / sqrt(var + 1e-8), clipped to [-10, 10]; identity before any
  // update.
  Eigen::MatrixXd normalize(const Eigen::MatrixXd& columns) const;

  void restore(double count, Eigen::VectorXd mean, Eigen::VectorXd m2);
  const Eigen::VectorXd& m2() const { return m2_; }

 private:
  double count_ = 0.0;
  Eigen::VectorXd mean_;
  Eigen::VectorXd m2_;
};

// One regression minibatch. `mu` is only read by the upgrade head, which
// maps its output to a bid before comparing with the target.
struct TrainingBatch {
  Eigen::MatrixXd inputs;   // normalized, input_dim x n
  Eigen::MatrixXd targets;  // output_dim x n
  Eigen::VectorXd mu;       // n
};

struct LossGrad {
  double loss = 0.0;
  ParamVector gradient;
};

// Mean over samples of the squared error in action space, and its gradient
// with respect to the network parameters. Throws InputError on an empty
// batch.
LossGrad loss_and_gradient(const Mlp& net, PolicyVariant variant, const TrainingBatch& batch);

// Action-space values of network outputs: identity for slot and two-slopes,
// mu * exp(z) for upgrade.
Eigen::MatrixXd head_actions(PolicyVariant variant, const Eigen::MatrixXd& outputs,
                             const Eigen::VectorXd& mu);

// Regression target(s) for one step of an oracle plan, as columns aligned
// with `policy_input_columns`.
Eigen::MatrixXd plan_targets(PolicyVariant variant, const StepPlan& plan,
                             std::span<const ImpressionOpportunity> ios);

// Raw network inputs for one step: one column for slot and two-slopes, one
// column per IO for upgrade. Throws InputError on a non-finite feature.
Eigen::MatrixXd policy_input_columns(PolicyVariant variant, const Observation& observation,
                                     std::span<const ImpressionOpportunity> ios);

class Policy {
 public:
  Policy(PolicyVariant variant, std::vector<int> hidden, std::uint64_t seed);

  PolicyVariant variant() const { return variant_; }
  const Mlp& network() const { return net_; }
  Mlp& network() { return net_; }
  const RunningNorm& norm() const { return norm_; }
  RunningNorm& norm() { return norm_; }

  // Network outputs for raw input columns (normalized with the frozen stats).
  Eigen::MatrixXd outputs(const Eigen::MatrixXd& raw_inputs) const;

  std::vector<double> act(const Observation& observation,
                          std::span<const ImpressionOpportunity> ios) const;

  // Slot variant only: alpha = exp(c).
  double coefficient(const Observation& observation) const;
  // Two-slopes variant only.
  TwoSlopesParams two_slopes(const Observation& observation) const;

  nlohmann::json to_json() const;
  static Policy from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static Policy load(const std::filesystem::path& path);

 private:
  Policy() = default;
  PolicyVariant variant_ = PolicyVariant::kSlot;
  Mlp net_;
  RunningNorm norm_;
};

// Bit-exact parameter and statistics comparison.
bool identical(const Policy& a, const Policy& b);

}  // namespace oilbid

#endif  // OILBID_POLICY_HPP_
