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

#include "oilbid/network.hpp"

#include <cmath>

#include "oilbid/errors.hpp"

namespace oilbid {

Mlp::Mlp(int input_dim, std::vector<int> hidden, int output_dim)
    : input_dim_(input_dim), output_dim_(output_dim), hidden_(std::move(hidden)) {
  if (input_dim < 1 || output_dim < 1) throw ConfigError("network dimensions must be >= 1");
  dims_.push_back(input_dim);
  for (int h : hidden_) {
    if (h < 1) throw ConfigError("hidden layer sizes must be >= 1");
    dims_.push_back(h);
  }
  dims_.push_back(output_dim);
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    offsets_.push_back(offset);
    offset += static_cast<std::size_t>(dims_[l + 1]) * (static_cast<std::size_t>(dims_[l]) + 1);
  }
  params_.assign(offset, 0.0);
}

Eigen::Map<const Eigen::MatrixXd> Mlp::weights(std::size_t l) const {
  return {params_.data() + offsets_[l], dims_[l + 1], dims_[l]};
}
Eigen::Map<Eigen::MatrixXd> Mlp::weights(std::size_t l) {
  return {params_.data() + offsets_[l], dims_[l + 1], dims_[l]};
}
Eigen::Map<const Eigen::VectorXd> Mlp::bias(std::size_t l) const {
  return {params_.data() + offsets_[l] + static_cast<std::size_t>(dims_[l + 1] * dims_[l]),
          dims_[l + 1]};
}
Eigen::Map<Eigen::VectorXd> Mlp::bias(std::size_t l) {
  return {params_.data() + offsets_[l] + static_cast<std::size_t>(dims_[l + 1] * dims_[l]),
          dims_[l + 1]};
}

void Mlp::init_uniform(std::mt19937_64& rng, double output_scale) {
  for (std::size_t l = 0; l < layer_count(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(dims_[l]));
    const double scale = l + 1 == layer_count() ? output_scale : 1.0;
    std::uniform_real_distribution<double> dist(-bound, bound);
    auto w = weights(l);
    for (Eigen::Index k = 0; k < w.size(); ++k) w.data()[k] = scale * dist(rng);
    bias(l).setZero();
  }
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& inputs, Tape* tape) const {
  if (inputs.rows() != input_dim_) throw InputError("network input has the wrong dimension");
  if (tape != nullptr) {
    tape->activations.clear();
    tape->activations.push_back(inputs);
  }
  Eigen::MatrixXd a = inputs;
  for (std::size_t l = 0; l < layer_count(); ++l) {
    Eigen::MatrixXd z = weights(l) * a;
    z.colwise() += bias(l);
    if (l + 1 == layer_count()) return z;
    a = z.cwiseMax(0.0);
    if (tape != nullptr) tape->activations.push_back(a);
  }
  return a;
}

void Mlp::backward(const Tape& tape, const Eigen::MatrixXd& grad_outputs,
                   std::span<double> grad) const {
  if (grad.size() != params_.size()) throw InputError("gradient buffer has the wrong size");
  Eigen::MatrixXd g = grad_outputs;
  for (std::size_t l = layer_count(); l-- > 0;) {
    const Eigen::MatrixXd& a_prev = tape.activations[l];
    Eigen::Map<Eigen::MatrixXd> gw(grad.data() + offsets_[l], dims_[l + 1], dims_[l]);
    Eigen::Map<Eigen::VectorXd> gb(
        grad.data() + offsets_[l] + static_cast<std::size_t>(dims_[l + 1] * dims_[l]),
        dims_[l + 1]);
    gw.noalias() += g * a_prev.transpose();
    gb += g.rowwise().sum();
    if (l == 0) break;
    Eigen::MatrixXd back = weights(l).transpose() * g;
    g = (a_prev.array() > 0.0).select(back, 0.0);
  }
}

Adam::Adam(std::size_t size, double beta1, double beta2, double eps)
    : beta1_(beta1), beta2_(beta2), eps_(eps), m_(size, 0.0), v_(size, 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> grad, double lr) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    m_[k] = beta1_ * m_[k] + (1.0 - beta1_) * grad[k];
    v_[k] = beta2_ * v_[k] + (1.0 - beta2_) * grad[k] * grad[k];
    params[k] -= lr * (m_[k] / c1) / (std::sqrt(v_[k] / c2) + eps_);
  }
}

double clip_grad_norm(std::span<double> grad, double max_norm) {
  double sq = 0.0;
  for (double g : grad) sq += g * g;
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double scale = max_norm / norm;
    for (double& g : grad) g *= scale;
  }
  return norm;
}

}  // namespace oilbid
