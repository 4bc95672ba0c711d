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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "oilbid/auction.hpp"
#include "oilbid/domain.hpp"
#include "oilbid/errors.hpp"
#include "oilbid/features.hpp"
#include "oilbid/fixtures.hpp"
#include "oilbid/harness.hpp"
#include "oilbid/mckp_exact.hpp"
#include "oilbid/oil.hpp"
#include "oilbid/oracle.hpp"
#include "oilbid/policy.hpp"
#include "oilbid/traffic.hpp"
#include "oilbid/verify.hpp"

namespace py = pybind11;
using namespace oilbid;

namespace {

py::object finite_or_none(double x) {
  if (std::isfinite(x)) return py::float_(x);
  return py::none();
}

py::dict mean_se_dict(const MeanSe& m) {
  py::dict d;
  d["mean"] = m.mean;
  d["se"] = m.se;
  return d;
}

py::dict report_dict(const MetricsReport& report) {
  py::dict d;
  d["score"] = mean_se_dict(report.score);
  d["conversions"] = mean_se_dict(report.conversions);
  d["cost_over_budget"] = mean_se_dict(report.cost_over_budget);
  d["cpa_ratio"] = mean_se_dict(report.cpa_ratio);
  py::list episodes;
  for (const EpisodeResult& e : report.episodes) {
    py::dict row;
    row["campaign"] = e.campaign;
    row["budget"] = e.budget;
    row["target_cpa"] = e.target_cpa;
    row["cost"] = e.cost;
    row["conversions"] = e.conversions;
    row["cpa"] = finite_or_none(e.cpa);
    row["score"] = e.score;
    episodes.append(row);
  }
  d["episodes"] = episodes;
  return d;
}

std::vector<std::tuple<int, int, int>> holdings(const SelectionSet& selection) {
  std::vector<std::tuple<int, int, int>> out;
  for (const Holding& h : held_slots(selection)) out.emplace_back(h.id.t, h.id.i, h.slot);
  return out;
}

AdvertiserBrief make_brief(double budget, double target_cpa) {
  AdvertiserBrief brief{budget, target_cpa};
  validate(brief);
  return brief;
}

EpisodeState start_state(const CampaignSpec& campaign, const AdvertiserBrief& brief) {
  return AuctionEngine(campaign, EngineConfig{}).start(brief);
}

struct EvalOptions {
  std::int64_t episodes;
  std::uint64_t seed;
  std::optional<double> budget;
  std::optional<double> target_cpa;
  bool expected;
  int jobs;
};

py::dict evaluate(const std::vector<CampaignSpec>& campaigns, const Agent& agent,
                  const EvalOptions& o) {
  if (campaigns.empty()) throw InputError("at least one campaign is required");
  if (o.budget.has_value() != o.target_cpa.has_value())
    throw ConfigError("budget and target_cpa must be given together");
  const RunConfig rc{o.episodes, o.jobs,
                     o.expected ? OutcomeMode::kExpected : OutcomeMode::kSampled};
  std::vector<EpisodeResult> results;
  if (o.budget) {
    if (campaigns.size() != 1) throw ConfigError("a fixed brief needs exactly one campaign");
    const AdvertiserBrief brief = make_brief(*o.budget, *o.target_cpa);
    py::gil_scoped_release release;
    results = run_episodes(campaigns, fixed_scenarios(brief, o.seed), agent, rc);
  } else {
    const ScenarioSampler sampler(campaigns, ScenarioRanges{});
    py::gil_scoped_release release;
    results = run_episodes(campaigns, sampled_scenarios(sampler, o.seed), agent, rc);
  }
  return report_dict(summarize(std::move(results)));
}

}  // namespace

PYBIND11_MODULE(_oilbid, m) {
  m.doc() = "Core bindings of the oilbid library";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<SizeError>(m, "SizeError", PyExc_ValueError);
  py::register_exception<DegenerateInput>(m, "DegenerateInput", PyExc_ArithmeticError);
  py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_RuntimeError);

  py::class_<ImpressionOpportunity>(m, "ImpressionOpportunity")
      .def(py::init<>())
      .def_property(
          "t", [](const ImpressionOpportunity& io) { return io.id.t; },
          [](ImpressionOpportunity& io, int t) { io.id.t = t; })
      .def_property(
          "i", [](const ImpressionOpportunity& io) { return io.id.i; },
          [](ImpressionOpportunity& io, int i) { io.id.i = i; })
      .def_readwrite("mu", &ImpressionOpportunity::mu)
      .def_readwrite("sigma", &ImpressionOpportunity::sigma)
      .def_readwrite("competitor_bids", &ImpressionOpportunity::competitor_bids)
      .def("least_winning_cost", &ImpressionOpportunity::least_winning_cost);

  py::class_<CampaignSpec>(m, "Campaign")
      .def(py::init<>())
      .def_readwrite("horizon", &CampaignSpec::horizon)
      .def_readwrite("slot_count", &CampaignSpec::slot_count)
      .def_readwrite("exposure_probs", &CampaignSpec::exposure_probs)
      .def_readwrite("steps", &CampaignSpec::steps)
      .def_readwrite("category", &CampaignSpec::category)
      .def("io_count", &CampaignSpec::io_count)
      .def("validate", [](const CampaignSpec& c) { validate(c); });

  py::class_<TrafficConfig>(m, "TrafficConfig")
      .def(py::init<>())
      .def_readwrite("horizon", &TrafficConfig::horizon)
      .def_readwrite("slot_count", &TrafficConfig::slot_count)
      .def_readwrite("exposure_probs", &TrafficConfig::exposure_probs)
      .def_readwrite("ios_mean", &TrafficConfig::ios_mean)
      .def_readwrite("ios_dispersion", &TrafficConfig::ios_dispersion)
      .def_readwrite("diurnal_amplitude", &TrafficConfig::diurnal_amplitude)
      .def_readwrite("mu_median", &TrafficConfig::mu_median)
      .def_readwrite("mu_log_scale", &TrafficConfig::mu_log_scale)
      .def_readwrite("sigma_ratio", &TrafficConfig::sigma_ratio)
      .def_readwrite("competitors_min", &TrafficConfig::competitors_min)
      .def_readwrite("competitors_max", &TrafficConfig::competitors_max)
      .def_readwrite("competitor_coef_lo", &TrafficConfig::competitor_coef_lo)
      .def_readwrite("competitor_coef_hi", &TrafficConfig::competitor_coef_hi)
      .def_readwrite("competitor_noise", &TrafficConfig::competitor_noise)
      .def_readwrite("category", &TrafficConfig::category)
      .def_readwrite("seed", &TrafficConfig::seed);

  m.def("generate", [](const TrafficConfig& config) { return generate(config); },
        py::arg("config"));
  m.def("load_campaign", &load_campaign, py::arg("path"));
  m.def("save_campaign", &save_campaign, py::arg("campaign"), py::arg("path"));
  m.def("two_io_example", &two_io_example, py::arg("example"));
  m.def("penalized_score", &penalized_score, py::arg("conversions"), py::arg("cost"),
        py::arg("target_cpa"));

  py::class_<Oracle>(m, "Oracle")
      .def(py::init([](const CampaignSpec& campaign, const std::string& mode) {
             return Oracle(campaign, parse_oracle_mode(mode));
           }),
           py::arg("campaign"), py::arg("mode") = "upgrade", py::keep_alive<1, 2>())
      .def_property_readonly("mode",
                             [](const Oracle& o) { return std::string(to_string(o.mode())); })
      .def(
          "solve",
          [](const Oracle& o, double budget, double target_cpa) {
            const SelectionSet s = o.solve(make_brief(budget, target_cpa));
            py::dict d;
            d["accepted"] = s.items.size();
            d["expected_cost"] = s.expected_cost;
            d["expected_conversions"] = s.expected_conversions;
            d["score"] = s.score;
            d["held"] = holdings(s);
            return d;
          },
          py::arg("budget"), py::arg("target_cpa"))
      .def(
          "first_step_bids",
          [](const Oracle& o, double budget, double target_cpa) {
            const AdvertiserBrief brief = make_brief(budget, target_cpa);
            return o.replan(brief, start_state(o.campaign(), brief)).bids;
          },
          py::arg("budget"), py::arg("target_cpa"));

  m.def(
      "brute_force_solve",
      [](const CampaignSpec& campaign, double budget, double target_cpa) {
        const ExactSolution s = brute_force_solve(campaign, budget, target_cpa);
        py::dict d;
        d["choice"] = s.assignment.choice;
        d["score"] = s.value.score;
        d["expected_cost"] = s.value.expected_cost;
        d["expected_conversions"] = s.value.expected_conversions;
        return d;
      },
      py::arg("campaign"), py::arg("budget"), py::arg("target_cpa"));

  m.def(
      "verify",
      [](int instances, int max_ios, int max_slots, std::uint64_t seed) {
        VerifyConfig config;
        config.instances = instances;
        config.max_ios = max_ios;
        config.max_slots = max_slots;
        config.seed = seed;
        VerifyReport report;
        {
          py::gil_scoped_release release;
          report = run_verify(config);
        }
        return py::make_tuple(report.ok(), format_verify_report(report));
      },
      py::arg("instances") = 1000, py::arg("max_ios") = 8, py::arg("max_slots") = 3,
      py::arg("seed") = 0);

  py::class_<Policy>(m, "Policy")
      .def(py::init([](const std::string& variant, std::vector<int> hidden, std::uint64_t seed) {
             return Policy(parse_policy_variant(variant), std::move(hidden), seed);
           }),
           py::arg("variant"), py::arg("hidden") = std::vector<int>{256, 256, 256},
           py::arg("seed") = 0)
      .def_static("load", [](const std::string& path) { return Policy::load(path); },
                  py::arg("path"))
      .def("save", [](const Policy& p, const std::string& path) { p.save(path); },
           py::arg("path"))
      .def_property_readonly("variant",
                             [](const Policy& p) { return std::string(to_string(p.variant())); })
      .def(
          "first_step_bids",
          [](const Policy& p, const CampaignSpec& campaign, double budget, double target_cpa) {
            const AdvertiserBrief brief = make_brief(budget, target_cpa);
            const EpisodeState state = start_state(campaign, brief);
            const auto& ios = campaign.steps.front();
            return p.act(build_observation(state, ios, brief, campaign.category), ios);
          },
          py::arg("campaign"), py::arg("budget"), py::arg("target_cpa"));

  m.def(
      "observation",
      [](const CampaignSpec& campaign, double budget, double target_cpa) {
        const AdvertiserBrief brief = make_brief(budget, target_cpa);
        const Observation obs = build_observation(start_state(campaign, brief),
                                                  campaign.steps.front(), brief,
                                                  campaign.category);
        return std::vector<double>(obs.begin(), obs.end());
      },
      py::arg("campaign"), py::arg("budget"), py::arg("target_cpa"));

  m.def(
      "train",
      [](const std::vector<CampaignSpec>& campaigns, const std::string& variant,
         std::int64_t interactions, std::vector<int> hidden, std::uint64_t seed) {
        TrainConfig config;
        config.total_interactions = interactions;
        config.hidden = std::move(hidden);
        config.seed = seed;
        const PolicyVariant v = parse_policy_variant(variant);
        const OracleExpert expert(campaigns, oracle_mode_for(v));
        py::gil_scoped_release release;
        return train_oil(campaigns, expert, v, config, ScenarioRanges{});
      },
      py::arg("campaigns"), py::arg("variant") = "upgrade", py::arg("interactions") = 100000,
      py::arg("hidden") = std::vector<int>{256, 256, 256}, py::arg("seed") = 0);

  m.def(
      "evaluate_oracle",
      [](const std::vector<CampaignSpec>& campaigns, const std::string& mode,
         std::int64_t episodes, std::uint64_t seed, std::optional<double> budget,
         std::optional<double> target_cpa, bool expected, int jobs) {
        const OracleExpert expert(campaigns, parse_oracle_mode(mode));
        const OracleAgent agent(expert);
        return evaluate(campaigns, agent, {episodes, seed, budget, target_cpa, expected, jobs});
      },
      py::arg("campaigns"), py::arg("mode") = "upgrade", py::arg("episodes") = 100,
      py::arg("seed") = 0, py::arg("budget") = py::none(), py::arg("target_cpa") = py::none(),
      py::arg("expected") = false, py::arg("jobs") = 1);

  m.def(
      "evaluate_policy",
      [](const Policy& policy, const std::vector<CampaignSpec>& campaigns,
         std::int64_t episodes, std::uint64_t seed, std::optional<double> budget,
         std::optional<double> target_cpa, bool expected, int jobs) {
        const PolicyAgent agent(policy, campaigns);
        return evaluate(campaigns, agent, {episodes, seed, budget, target_cpa, expected, jobs});
      },
      py::arg("policy"), py::arg("campaigns"), py::arg("episodes") = 100, py::arg("seed") = 0,
      py::arg("budget") = py::none(), py::arg("target_cpa") = py::none(),
      py::arg("expected") = false, py::arg("jobs") = 1);

  m.def(
      "evaluate_constant",
      [](double alpha, const std::vector<CampaignSpec>& campaigns, std::int64_t episodes,
         std::uint64_t seed, std::optional<double> budget, std::optional<double> target_cpa,
         bool expected, int jobs) {
        const ConstantAlphaAgent agent(alpha, campaigns);
        return evaluate(campaigns, agent, {episodes, seed, budget, target_cpa, expected, jobs});
      },
      py::arg("alpha"), py::arg("campaigns"), py::arg("episodes") = 100, py::arg("seed") = 0,
      py::arg("budget") = py::none(), py::arg("target_cpa") = py::none(),
      py::arg("expected") = false, py::arg("jobs") = 1);
}
