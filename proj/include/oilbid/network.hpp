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

#ifndef OILBID_NETWORK_HPP_
#define OILBID_NETWORK_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace oilbid {

using ParamVector = std::vector<double, Eigen::aligned_allocator<double>>;

// Fully connected ReLU network; the output layer is linear. Columns of the
// input matrix are samples. Parameters live in one flat vector, layer by
// layer as [W (out x in, column-major), b (out)].
class Mlp {
 public:
  Mlp() = default;
  Mlp(int input_dim, std::vector<int> hidden, int output_dim);

  int input_dim() const { return input_dim_; }
  int output_dim() const { return output_dim_; }
  const std::vector<int>& hidden() const { return hidden_; }
  std::size_t parameter_count() const { return params_.size(); }

  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases; the output
  // layer weights are additionally scaled by `output_scale`.
  void init_uniform(std::mt19937_64& rng, double output_scale);

  struct Tape {
    std::vector<Eigen::MatrixXd> activations;  // input, then each hidden layer
  };

  Eigen::MatrixXd forward(const Eigen::MatrixXd& inputs, Tape* tape = nullptr) const;

  // Accumulates d loss / d params into `grad` (same layout as parameters())
  // from d loss / d outputs. `tape` must come from forward on the same batch.
  void backward(const Tape& tape, const Eigen::MatrixXd& grad_outputs,
                std::span<double> grad) const;

  // Views of layer `l` (0-based, hidden layers first, output last).
  Eigen::Map<const Eigen::MatrixXd> weights(std::size_t l) const;
  Eigen::Map<Eigen::MatrixXd> weights(std::size_t l);
  Eigen::Map<const Eigen::VectorXd> bias(std::size_t l) const;
  Eigen::Map<Eigen::VectorXd> bias(std::size_t l);
  std::size_t layer_count() const { return dims_.size() - 1; }

 private:
  int input_dim_ = 0;
  int output_dim_ = 0;
  std::vector<int> hidden_;
  std::vector<int> dims_;  // input, hidden..., output
  std::vector<std::size_t> offsets_;
  ParamVector params_;
};

// Adaptive-moment optimizer over a flat parameter vector.
class Adam {
 public:
  explicit Adam(std::size_t size, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  void step(std::span<double> params, std::span<const double> grad, double lr);
  std::int64_t steps() const { return t_; }

 private:
  double beta1_, beta2_, eps_;
  std::int64_t t_ = 0;
  std::vector<double> m_, v_;
};

// Rescales `grad` in place so its L2 norm is at most max_norm; returns the
// norm before clipping.
double clip_grad_norm(std::span<double> grad, double max_norm);

}  // namespace oilbid

#endif  // OILBID_NETWORK_HPP_
