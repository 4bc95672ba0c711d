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

#include "oilbid/policy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include "json.hpp"

#include "oilbid/errors.hpp"

namespace oilbid {
namespace {

constexpr int kFormatVersion = 1;

double clamp_log(double z) { return std::clamp(z, -kLogClamp, kLogClamp); }

}  // namespace

std::string_view to_string(PolicyVariant variant) {
  switch (variant) {
    case PolicyVariant::kSlot: return "slot";
    case PolicyVariant::kUpgrade: return "upgrade";
    case PolicyVariant::kTwoSlopes: return "2s";
  }
  return "slot";
}

PolicyVariant parse_policy_variant(std::string_view name) {
  if (name == "slot") return PolicyVariant::kSlot;
  if (name == "upgrade") return PolicyVariant::kUpgrade;
  if (name == "2s" || name == "upgrade-2s") return PolicyVariant::kTwoSlopes;
  throw InputError("unknown policy variant '" + std::string(name) + "'");
}

OracleMode oracle_mode_for(PolicyVariant variant) {
  switch (variant) {
    case PolicyVariant::kSlot: return OracleMode::kSlot;
    case PolicyVariant::kUpgrade: return OracleMode::kUpgrade;
    case PolicyVariant::kTwoSlopes: return OracleMode::kTwoSlopes;
  }
  return OracleMode::kSlot;
}

int policy_input_dim(PolicyVariant variant) {
  return variant == PolicyVariant::kUpgrade ? static_cast<int>(kObservationSize) + 2
                                            : static_cast<int>(kObservationSize);
}

int policy_output_dim(PolicyVariant variant) {
  return variant == PolicyVariant::kTwoSlopes ? 3 : 1;
}

RunningNorm::RunningNorm(int dim)
    : mean_(Eigen::VectorXd::Zero(dim)), m2_(Eigen::VectorXd::Zero(dim)) {}

Eigen::VectorXd RunningNorm::variance() const {
  if (count_ <= 0.0) return Eigen::VectorXd::Ones(mean_.size());
  return m2_ / count_;
}

void RunningNorm::update(const Eigen::MatrixXd& columns) {
  if (columns.cols() == 0) return;
  if (columns.rows() != mean_.size()) throw InputError("normalizer input has the wrong dimension");
  const double n = static_cast<double>(columns.cols());
  const Eigen::VectorXd batch_mean = columns.rowwise().mean();
  const Eigen::VectorXd batch_m2 =
      (columns.colwise() - batch_mean).array().square().rowwise().sum().matrix();
  const double total = count_ + n;
  const Eigen::VectorXd delta = batch_mean - mean_;
  mean_ += delta * (n / total);
  m2_ += batch_m2 + delta.array().square().matrix() * (count_ * n / total);
  count_ = total;
}

Eigen::MatrixXd RunningNorm::normalize(const Eigen::MatrixXd& columns) const {
  if (columns.rows() != mean_.size()) throw InputError("normalizer input has the wrong dimension");
  if (count_ <= 0.0) return columns;
  const Eigen::ArrayXd inv_std = (variance().array() + 1e-8).rsqrt();
  Eigen::MatrixXd out = (columns.colwise() - mean_);
  out = (out.array().colwise() * inv_std).matrix();
  return out.cwiseMax(-10.0).cwiseMin(10.0);
}

void RunningNorm::restore(double count, Eigen::VectorXd mean, Eigen::VectorXd m2) {
  if (mean.size() != m2.size()) throw ConfigError("normalizer statistics disagree in size");
  count_ = count;
  mean_ = std::move(mean);
  m2_ = std::move(m2);
}

Eigen::MatrixXd head_actions(PolicyVariant variant, const Eigen::MatrixXd& outputs,
                             const Eigen::VectorXd& mu) {
  if (variant != PolicyVariant::kUpgrade) return outputs;
  Eigen::MatrixXd bids(1, outputs.cols());
  for (Eigen::Index n = 0; n < outputs.cols(); ++n) {
    bids(0, n) = mu(n) * std::exp(clamp_log(outputs(0, n)));
  }
  return bids;
}

LossGrad loss_and_gradient(const Mlp& net, PolicyVariant variant, const TrainingBatch& batch) {
  const Eigen::Index n = batch.inputs.cols();
  if (n == 0) throw InputError("loss_and_gradient needs a non-empty batch");
  if (batch.targets.cols() != n || batch.targets.rows() != net.output_dim()) {
    throw InputError("targets do not match the batch");
  }
  if (variant == PolicyVariant::kUpgrade && batch.mu.size() != n) {
    throw InputError("upgrade batches need one mu per sample");
  }
  Mlp::Tape tape;
  const Eigen::MatrixXd out = net.forward(batch.inputs, &tape);
  const Eigen::MatrixXd actions = head_actions(variant, out, batch.mu);
  const Eigen::MatrixXd err = actions - batch.targets;
  const double inv_n = 1.0 / static_cast<double>(n);

  LossGrad result;
  result.loss = err.squaredNorm() * inv_n;
  Eigen::MatrixXd grad_out = 2.0 * inv_n * err;
  if (variant == PolicyVariant::kUpgrade) {
    for (Eigen::Index k = 0; k < n; ++k) {
      const double z = out(0, k);
      grad_out(0, k) = std::abs(z) < kLogClamp ? grad_out(0, k) * actions(0, k) : 0.0;
    }
  }
  result.gradient.assign(net.parameter_count(), 0.0);
  net.backward(tape, grad_out, result.gradient);
  return result;
}

Eigen::MatrixXd plan_targets(PolicyVariant variant, const StepPlan& plan,
                             std::span<const ImpressionOpportunity> ios) {
  switch (variant) {
    case PolicyVariant::kSlot: {
      Eigen::MatrixXd t(1, 1);
      t(0, 0) = plan.coefficient > 0.0 ? std::max(std::log(plan.coefficient), kFloorLogCoefficient)
                                       : kFloorLogCoefficient;
      return t;
    }
    case PolicyVariant::kTwoSlopes: {
      const TwoSlopesParams p = plan.two_slopes.value_or(TwoSlopesParams{});
      Eigen::MatrixXd t(3, 1);
      t(0, 0) = std::max(std::log(p.alpha0), kFloorLogCoefficient);
      t(1, 0) = p.intercept;
      t(2, 0) = p.slope;
      return t;
    }
    case PolicyVariant::kUpgrade: {
      if (plan.bids.size() != ios.size()) throw InputError("plan does not match the step");
      Eigen::MatrixXd t(1, static_cast<Eigen::Index>(ios.size()));
      for (std::size_t n = 0; n < ios.size(); ++n) t(0, static_cast<Eigen::Index>(n)) = plan.bids[n];
      return t;
    }
  }
  return {};
}

Eigen::MatrixXd policy_input_columns(PolicyVariant variant, const Observation& observation,
                                     std::span<const ImpressionOpportunity> ios) {
  for (double v : observation) {
    if (!std::isfinite(v)) throw InputError("observation contains a non-finite feature");
  }
  const Eigen::Map<const Eigen::VectorXd> obs(observation.data(),
                                              static_cast<Eigen::Index>(observation.size()));
  if (variant != PolicyVariant::kUpgrade) return obs;
  Eigen::MatrixXd cols(policy_input_dim(variant), static_cast<Eigen::Index>(ios.size()));
  for (std::size_t n = 0; n < ios.size(); ++n) {
    const auto c = static_cast<Eigen::Index>(n);
    cols.col(c).head(static_cast<Eigen::Index>(kObservationSize)) = obs;
    cols(static_cast<Eigen::Index>(kObservationSize), c) = ios[n].mu;
    cols(static_cast<Eigen::Index>(kObservationSize) + 1, c) = ios[n].sigma;
  }
  return cols;
}

Policy::Policy(PolicyVariant variant, std::vector<int> hidden, std::uint64_t seed)
    : variant_(variant),
      net_(policy_input_dim(variant), std::move(hidden), policy_output_dim(variant)),
      norm_(policy_input_dim(variant)) {
  std::mt19937_64 rng(seed);
  net_.init_uniform(rng, 0.01);
  // Truth-telling start: alpha = 1 and, for two-slopes, inverse line = 1.
  if (variant_ == PolicyVariant::kTwoSlopes) net_.bias(net_.layer_count() - 1)(1) = 1.0;
}

Eigen::MatrixXd Policy::outputs(const Eigen::MatrixXd& raw_inputs) const {
  return net_.forward(norm_.normalize(raw_inputs));
}

std::vector<double> Policy::act(const Observation& observation,
                                std::span<const ImpressionOpportunity> ios) const {
  std::vector<double> bids(ios.size(), 0.0);
  switch (variant_) {
    case PolicyVariant::kSlot: {
      const double alpha = coefficient(observation);
      for (std::size_t n = 0; n < ios.size(); ++n) bids[n] = alpha * ios[n].mu;
      break;
    }
    case PolicyVariant::kTwoSlopes: {
      const TwoSlopesParams p = two_slopes(observation);
      for (std::size_t n = 0; n < ios.size(); ++n) bids[n] = apply_two_slopes(p, ios[n].mu);
      break;
    }
    case PolicyVariant::kUpgrade: {
      if (ios.empty()) break;
      const Eigen::MatrixXd out = outputs(policy_input_columns(variant_, observation, ios));
      for (std::size_t n = 0; n < ios.size(); ++n) {
        bids[n] = ios[n].mu * std::exp(clamp_log(out(0, static_cast<Eigen::Index>(n))));
      }
      break;
    }
  }
  return bids;
}

double Policy::coefficient(const Observation& observation) const {
  if (variant_ != PolicyVariant::kSlot) throw InputError("coefficient() needs the slot variant");
  const Eigen::MatrixXd out = outputs(policy_input_columns(variant_, observation, {}));
  return std::exp(clamp_log(out(0, 0)));
}

TwoSlopesParams Policy::two_slopes(const Observation& observation) const {
  if (variant_ != PolicyVariant::kTwoSlopes) {
    throw InputError("two_slopes() needs the two-slopes variant");
  }
  const Eigen::MatrixXd out = outputs(policy_input_columns(variant_, observation, {}));
  return make_two_slopes(std::exp(clamp_log(out(0, 0))), out(1, 0), out(2, 0));
}

nlohmann::json Policy::to_json() const {
  nlohmann::json j;
  j["format"] = "oilbid-policy";
  j["version"] = kFormatVersion;
  j["variant"] = std::string(to_string(variant_));
  j["input_dim"] = net_.input_dim();
  j["hidden"] = net_.hidden();
  j["output_dim"] = net_.output_dim();
  j["norm"] = {{"count", norm_.count()},
               {"mean", std::vector<double>(norm_.mean().begin(), norm_.mean().end())},
               {"m2", std::vector<double>(norm_.m2().begin(), norm_.m2().end())}};
  const auto params = net_.parameters();
  j["params"] = std::vector<double>(params.begin(), params.end());
  return j;
}

Policy Policy::from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "oilbid-policy") {
      throw ConfigError("not an oilbid policy checkpoint");
    }
    if (j.at("version").get<int>() != kFormatVersion) {
      throw ConfigError("unsupported checkpoint version " + j.at("version").dump());
    }
    Policy p;
    p.variant_ = parse_policy_variant(j.at("variant").get<std::string>());
    const int input_dim = j.at("input_dim").get<int>();
    const int output_dim = j.at("output_dim").get<int>();
    if (input_dim != policy_input_dim(p.variant_) || output_dim != policy_output_dim(p.variant_)) {
      throw ConfigError("checkpoint dimensions do not match its variant");
    }
    p.net_ = Mlp(input_dim, j.at("hidden").get<std::vector<int>>(), output_dim);
    const auto params = j.at("params").get<std::vector<double>>();
    if (params.size() != p.net_.parameter_count()) {
      throw ConfigError("checkpoint parameter count does not match its architecture");
    }
    for (double v : params) {
      if (!std::isfinite(v)) throw ConfigError("checkpoint contains non-finite parameters");
    }
    std::copy(params.begin(), params.end(), p.net_.parameters().begin());
    const auto& norm = j.at("norm");
    auto mean = norm.at("mean").get<std::vector<double>>();
    auto m2 = norm.at("m2").get<std::vector<double>>();
    if (static_cast<int>(mean.size()) != input_dim || static_cast<int>(m2.size()) != input_dim) {
      throw ConfigError("checkpoint normalizer does not match the input dimension");
    }
    p.norm_.restore(norm.at("count").get<double>(),
                    Eigen::Map<Eigen::VectorXd>(mean.data(), input_dim),
                    Eigen::Map<Eigen::VectorXd>(m2.data(), input_dim));
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed checkpoint: ") + e.what());
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  }
}

void Policy::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << to_json().dump() << '\n';
  if (!out) throw InputError("failed writing " + path.string());
}

Policy Policy::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed checkpoint: ") + e.what());
  }
  return from_json(j);
}

bool identical(const Policy& a, const Policy& b) {
  if (a.variant() != b.variant()) return false;
  const auto pa = a.network().parameters();
  const auto pb = b.network().parameters();
  if (a.network().hidden() != b.network().hidden()) return false;
  if (!std::equal(pa.begin(), pa.end(), pb.begin(), pb.end())) return false;
  return a.norm().count() == b.norm().count() && a.norm().mean() == b.norm().mean() &&
         a.norm().m2() == b.norm().m2();
}

}  // namespace oilbid
