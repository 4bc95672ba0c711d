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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "../common/gradient_check.hpp"
#include "oilbid/errors.hpp"
#include "oilbid/network.hpp"
#include "oilbid/policy.hpp"
#include "oilbid/traffic.hpp"

using namespace oilbid;

namespace {

// Forward pass with explicit loops over the flat parameter layout
// [W (out x in, column-major), b] per layer.
std::vector<double> naive_forward(const Mlp& net, std::vector<double> x) {
  std::vector<int> dims{net.input_dim()};
  for (int h : net.hidden()) dims.push_back(h);
  dims.push_back(net.output_dim());
  const auto p = net.parameters();
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const int in = dims[l], out = dims[l + 1];
    std::vector<double> y(static_cast<std::size_t>(out), 0.0);
    for (int o = 0; o < out; ++o) {
      double s = p[off + static_cast<std::size_t>(in * out + o)];
      for (int i = 0; i < in; ++i) s += p[off + static_cast<std::size_t>(i * out + o)] * x[static_cast<std::size_t>(i)];
      y[static_cast<std::size_t>(o)] = (l + 2 < dims.size()) ? std::max(0.0, s) : s;
    }
    off += static_cast<std::size_t>(in * out + out);
    x = std::move(y);
  }
  CHECK(off == p.size());
  return x;
}

Observation random_observation(std::mt19937_64& rng) {
  Observation obs{};
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (double& v : obs) v = u(rng);
  return obs;
}

}  // namespace

TEST_CASE("parameter layout and forward pass") {
  std::mt19937_64 rng(3);
  Mlp net(5, {7, 4}, 2);
  CHECK(net.parameter_count() == static_cast<std::size_t>(5 * 7 + 7 + 7 * 4 + 4 + 4 * 2 + 2));
  net.init_uniform(rng, 1.0);
  for (double& v : net.parameters()) v += 0.1;
  Eigen::MatrixXd x(5, 3);
  std::normal_distribution<double> normal;
  for (Eigen::Index k = 0; k < x.size(); ++k) x.data()[k] = normal(rng);
  const Eigen::MatrixXd y = net.forward(x);
  for (int c = 0; c < 3; ++c) {
    const auto ref = naive_forward(net, std::vector<double>(x.col(c).data(), x.col(c).data() + 5));
    CHECK(y(0, c) == doctest::Approx(ref[0]).epsilon(1e-12));
    CHECK(y(1, c) == doctest::Approx(ref[1]).epsilon(1e-12));
  }
  CHECK(net.layer_count() == 3);
  CHECK(net.weights(1).rows() == 4);
  CHECK(net.weights(1).cols() == 7);
}

TEST_CASE("initialization bounds") {
  std::mt19937_64 rng(9);
  Mlp net(60, {256, 256, 256}, 1);
  net.init_uniform(rng, 0.01);
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const double fan_in = static_cast<double>(net.weights(l).cols());
    const double bound = (l + 1 == net.layer_count() ? 0.01 : 1.0) / std::sqrt(fan_in);
    CHECK(net.weights(l).cwiseAbs().maxCoeff() <= bound);
    CHECK(net.bias(l).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("gradient check for every head") {
  for (PolicyVariant v : {PolicyVariant::kSlot, PolicyVariant::kTwoSlopes, PolicyVariant::kUpgrade}) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      auto problem = testing::make_gradient_problem(v, seed);
      CHECK(testing::max_relative_gradient_error(problem, v) < 1e-4);
    }
  }
}

TEST_CASE("gradient accumulates") {
  auto p = testing::make_gradient_problem(PolicyVariant::kSlot, 4);
  Mlp::Tape tape;
  const Eigen::MatrixXd out = p.net.forward(p.batch.inputs, &tape);
  const Eigen::MatrixXd g = Eigen::MatrixXd::Ones(out.rows(), out.cols());
  std::vector<double> once(p.net.parameter_count(), 0.0), twice(p.net.parameter_count(), 0.0);
  p.net.backward(tape, g, once);
  p.net.backward(tape, g, twice);
  p.net.backward(tape, g, twice);
  for (std::size_t k = 0; k < once.size(); ++k) CHECK(twice[k] == doctest::Approx(2.0 * once[k]));
}

TEST_CASE("loss is mean squared error of the head action") {
  auto p = testing::make_gradient_problem(PolicyVariant::kUpgrade, 5);
  const Eigen::MatrixXd out = p.net.forward(p.batch.inputs);
  double ref = 0.0;
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    const double bid = p.batch.mu(c) * std::exp(out(0, c));
    ref += (bid - p.batch.targets(0, c)) * (bid - p.batch.targets(0, c));
  }
  ref /= static_cast<double>(out.cols());
  CHECK(loss_and_gradient(p.net, PolicyVariant::kUpgrade, p.batch).loss == doctest::Approx(ref).epsilon(1e-12));
  TrainingBatch empty{Eigen::MatrixXd(62, 0), Eigen::MatrixXd(1, 0), Eigen::VectorXd(0)};
  CHECK_THROWS_AS(loss_and_gradient(p.net, PolicyVariant::kUpgrade, empty), InputError);
}

TEST_CASE("adam matches the update rule") {
  Adam adam(2);
  std::vector<double> params{1.0, -2.0};
  const std::vector<double> g1{0.5, -1.0}, g2{0.1, 2.0};
  adam.step(params, g1, 0.01);
  CHECK(params[0] == doctest::Approx(1.0 - 0.01));
  CHECK(params[1] == doctest::Approx(-2.0 + 0.01));
  const std::vector<double> after_first = params;
  adam.step(params, g2, 0.01);
  for (int k = 0; k < 2; ++k) {
    const double m = (0.9 * 0.1 * g1[k] + 0.1 * g2[k]) / (1 - 0.81);
    const double v = (0.999 * 0.001 * g1[k] * g1[k] + 0.001 * g2[k] * g2[k]) / (1 - 0.999 * 0.999);
    const double first = after_first[static_cast<std::size_t>(k)];
    CHECK(params[static_cast<std::size_t>(k)] == doctest::Approx(first - 0.01 * m / (std::sqrt(v) + 1e-8)).epsilon(1e-12));
  }
  CHECK(adam.steps() == 2);
}

TEST_CASE("gradient clipping") {
  std::vector<double> g{3.0, 4.0};
  CHECK(clip_grad_norm(g, 0.7) == doctest::Approx(5.0));
  CHECK(std::hypot(g[0], g[1]) == doctest::Approx(0.7));
  CHECK(g[0] / g[1] == doctest::Approx(0.75));
  std::vector<double> small{0.1, 0.2};
  clip_grad_norm(small, 0.7);
  CHECK(small == std::vector<double>{0.1, 0.2});
  std::vector<double> zero{0.0, 0.0};
  CHECK(clip_grad_norm(zero, 0.7) == 0.0);
}

TEST_CASE("running normalization") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal(3.0, 2.0);
  Eigen::MatrixXd all(4, 90);
  for (Eigen::Index k = 0; k < all.size(); ++k) all.data()[k] = normal(rng);
  RunningNorm chunked(4);
  CHECK(chunked.normalize(all.leftCols(3)) == all.leftCols(3));
  chunked.update(all.leftCols(10));
  chunked.update(all.middleCols(10, 1));
  chunked.update(all.rightCols(79));
  const Eigen::VectorXd mean = all.rowwise().mean();
  const Eigen::VectorXd var = (all.colwise() - mean).array().square().rowwise().mean();
  CHECK((chunked.mean() - mean).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((chunked.variance() - var).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(chunked.count() == 90.0);
  const Eigen::MatrixXd z = chunked.normalize(all);
  CHECK(z.rowwise().mean().cwiseAbs().maxCoeff() < 1e-9);
  Eigen::MatrixXd far = Eigen::MatrixXd::Constant(4, 1, 1e6);
  CHECK(chunked.normalize(far).maxCoeff() == 10.0);
  CHECK_THROWS_AS(chunked.update(Eigen::MatrixXd(3, 2)), InputError);
}

TEST_CASE("variants") {
  CHECK(parse_policy_variant("slot") == PolicyVariant::kSlot);
  CHECK(parse_policy_variant("upgrade") == PolicyVariant::kUpgrade);
  CHECK(parse_policy_variant("2s") == PolicyVariant::kTwoSlopes);
  CHECK(parse_policy_variant("upgrade-2s") == PolicyVariant::kTwoSlopes);
  CHECK_THROWS_AS(parse_policy_variant("ppo"), InputError);
  CHECK(policy_input_dim(PolicyVariant::kUpgrade) == 62);
  CHECK(policy_output_dim(PolicyVariant::kTwoSlopes) == 3);
  CHECK(oracle_mode_for(PolicyVariant::kTwoSlopes) == OracleMode::kTwoSlopes);
}

TEST_CASE("fresh slot policy bids close to the conversion probability") {
  std::mt19937_64 rng(1);
  const Policy policy(PolicyVariant::kSlot, {256, 256, 256}, 7);
  const Observation obs = random_observation(rng);
  CHECK(std::abs(std::log(policy.coefficient(obs))) < 0.2);
  const std::vector<ImpressionOpportunity> ios{{{0, 0}, 0.02, 0.0, {1, 0.5}}, {{0, 1}, 0.1, 0.0, {1, 0.5}}};
  const auto bids = policy.act(obs, ios);
  CHECK(bids[1] / bids[0] == doctest::Approx(5.0));
  CHECK(policy.act(obs, ios) == bids);
  Observation bad = obs;
  bad[3] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(policy.act(bad, ios), InputError);
}

TEST_CASE("action clamp keeps bids finite") {
  Policy policy(PolicyVariant::kUpgrade, {4}, 1);
  auto params = policy.network().parameters();
  const std::size_t out_bias = params.size() - 1;
  params[out_bias] = 1e4;
  const std::vector<ImpressionOpportunity> ios{{{0, 0}, 0.1, 0.01, {1, 0.5}}};
  const auto bids = policy.act(Observation{}, ios);
  CHECK(std::isfinite(bids[0]));
  CHECK(bids[0] == doctest::Approx(0.1 * std::exp(kLogClamp)));
}

TEST_CASE("two-slopes head") {
  std::mt19937_64 rng(2);
  const Policy policy(PolicyVariant::kTwoSlopes, {32}, 3);
  const Observation obs = random_observation(rng);
  const TwoSlopesParams p = policy.two_slopes(obs);
  CHECK(p.alpha0 > 0.0);
  CHECK(p.intercept == doctest::Approx(1.0).epsilon(0.05));
  const std::vector<ImpressionOpportunity> ios{{{0, 0}, 0.03, 0.0, {1, 0.5}}};
  CHECK(policy.act(obs, ios)[0] == doctest::Approx(apply_two_slopes(p, 0.03)));
}

TEST_CASE("checkpoint round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "oilbid_test_network";
  std::filesystem::create_directories(dir);
  std::mt19937_64 rng(5);
  for (PolicyVariant v : {PolicyVariant::kSlot, PolicyVariant::kTwoSlopes, PolicyVariant::kUpgrade}) {
    Policy policy(v, {8, 8}, 11);
    Eigen::MatrixXd cols(policy_input_dim(v), 5);
    for (Eigen::Index k = 0; k < cols.size(); ++k) cols.data()[k] = static_cast<double>(rng() % 1000) / 7.0;
    policy.norm().update(cols);
    const auto path = dir / (std::string(to_string(v)) + ".json");
    policy.save(path);
    const Policy loaded = Policy::load(path);
    CHECK(identical(policy, loaded));
    const Observation obs = random_observation(rng);
    const std::vector<ImpressionOpportunity> ios{{{0, 0}, 0.05, 0.01, {1, 0.5}}, {{0, 1}, 0.2, 0.02, {1, 0.5}}};
    CHECK(policy.act(obs, ios) == loaded.act(obs, ios));
  }
  {
    std::ofstream(dir / "broken.json") << "{\"format\": \"oilbid-policy\", \"version\": 9}";
    CHECK_THROWS_AS(Policy::load(dir / "broken.json"), ConfigError);
    std::ofstream(dir / "garbage.json") << "not json";
    CHECK_THROWS_AS(Policy::load(dir / "garbage.json"), ConfigError);
    CHECK_THROWS_AS(Policy::load(dir / "missing.json"), InputError);
  }
  Policy a(PolicyVariant::kSlot, {8}, 1), b(PolicyVariant::kSlot, {8}, 2);
  CHECK_FALSE(identical(a, b));
  nlohmann::json j = a.to_json();
  j["params"][0] = "x";
  CHECK_THROWS_AS(Policy::from_json(j), ConfigError);
  j = a.to_json();
  j["params"].erase(0);
  CHECK_THROWS_AS(Policy::from_json(j), ConfigError);
  std::filesystem::remove_all(dir);
}
