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

#include "oilbid/traffic.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string_view>

#include "json.hpp"
#include "oilbid/errors.hpp"

namespace oilbid {

void validate(const TrafficConfig& c) {
  if (c.horizon < 1) throw ConfigError("horizon must be >= 1");
  if (c.slot_count < 1) throw ConfigError("slot_count must be >= 1");
  if (c.exposure_probs.size() != static_cast<std::size_t>(c.slot_count)) {
    throw ConfigError("exposure_probs length differs from slot_count");
  }
  validate_exposure(c.exposure_probs);
  if (!(c.ios_mean >= 0.0) || !std::isfinite(c.ios_mean)) throw ConfigError("ios_mean must be >= 0");
  if (!(c.ios_dispersion >= 0.0)) throw ConfigError("ios_dispersion must be >= 0");
  if (!(c.diurnal_amplitude >= 0.0 && c.diurnal_amplitude < 1.0)) {
    throw ConfigError("diurnal_amplitude must be in [0,1)");
  }
  if (!(c.mu_median > 0.0 && c.mu_median <= 1.0)) throw ConfigError("mu_median must be in (0,1]");
  if (!(c.mu_log_scale >= 0.0)) throw ConfigError("mu_log_scale must be >= 0");
  if (!(c.sigma_ratio >= 0.0)) throw ConfigError("sigma_ratio must be >= 0");
  if (c.competitors_min < c.slot_count + 1 || c.competitors_max < c.competitors_min) {
    throw ConfigError("need slot_count+1 <= competitors_min <= competitors_max");
  }
  if (!(c.competitor_coef_lo > 0.0 && c.competitor_coef_hi >= c.competitor_coef_lo)) {
    throw ConfigError("need 0 < competitor_coef_lo <= competitor_coef_hi");
  }
  if (!(c.competitor_noise >= 0.0)) throw ConfigError("competitor_noise must be >= 0");
}

CampaignSpec generate(const TrafficConfig& config, std::vector<std::string>* warnings) {
  validate(config);
  if (config.ios_mean == 0.0 && warnings != nullptr) {
    warnings->push_back("ios_mean is 0: every step of the generated campaign is empty");
  }
  std::mt19937_64 rng(config.seed);
  std::lognormal_distribution<double> mu_dist(std::log(config.mu_median), config.mu_log_scale);
  std::uniform_real_distribution<double> coef_dist(config.competitor_coef_lo,
                                                   config.competitor_coef_hi);
  std::uniform_int_distribution<int> crowd_dist(config.competitors_min, config.competitors_max);

  CampaignSpec campaign;
  campaign.horizon = config.horizon;
  campaign.slot_count = config.slot_count;
  campaign.exposure_probs = config.exposure_probs;
  campaign.category = config.category;
  campaign.steps.resize(static_cast<std::size_t>(config.horizon));

  const auto keep = static_cast<std::size_t>(config.slot_count) + 1;
  std::vector<double> crowd;
  for (int t = 0; t < config.horizon; ++t) {
    double rate = config.ios_mean *
                  (1.0 + config.diurnal_amplitude *
                             std::sin(2.0 * std::numbers::pi * t / config.horizon));
    if (config.ios_dispersion > 0.0 && rate > 0.0) {
      const double shape = 1.0 / config.ios_dispersion;
      rate *= std::gamma_distribution<double>(shape, 1.0 / shape)(rng);
    }
    const long count = rate > 0.0 ? std::poisson_distribution<long>(rate)(rng) : 0;
    auto& step = campaign.steps[static_cast<std::size_t>(t)];
    step.reserve(static_cast<std::size_t>(count));
    for (long i = 0; i < count; ++i) {
      ImpressionOpportunity io;
      io.id = {t, static_cast<int>(i)};
      io.mu = std::min(1.0, mu_dist(rng));
      io.sigma = config.sigma_ratio * io.mu;
      crowd.resize(static_cast<std::size_t>(crowd_dist(rng)));
      for (double& bid : crowd) {
        const double gamma = coef_dist(rng);
        double eps = 0.0;
        if (config.competitor_noise > 0.0) {
          eps = std::normal_distribution<double>(0.0, config.competitor_noise)(rng);
        }
        bid = gamma * io.mu * (1.0 + std::max(eps, -0.9));
      }
      std::partial_sort(crowd.begin(), crowd.begin() + static_cast<std::ptrdiff_t>(keep),
                        crowd.end(), std::greater<>());
      io.competitor_bids.assign(crowd.begin(), crowd.begin() + static_cast<std::ptrdiff_t>(keep));
      step.push_back(std::move(io));
    }
  }
  return campaign;
}

namespace {

void append_double(std::string& out, double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, res.ptr);
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

template <typename T>
T parse_number(std::string_view field, int line_no, const char* name) {
  T value{};
  const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
    throw ParseError("cannot parse " + std::string(name) + " from '" + std::string(field) + "'",
                     line_no);
  }
  return value;
}

}  // namespace

void write_campaign(const CampaignSpec& campaign, std::ostream& out) {
  validate(campaign);
  nlohmann::json header = {{"format", "oilbid-campaign"},
                           {"version", kCampaignFormatVersion},
                           {"T", campaign.horizon},
                           {"D", campaign.slot_count},
                           {"exposure_probs", campaign.exposure_probs},
                           {"category", campaign.category}};
  out << header.dump() << '\n';
  out << "t,i,mu,sigma";
  for (int j = 1; j <= campaign.slot_count + 1; ++j) out << ",c" << j;
  out << '\n';
  std::string row;
  for (const auto& step : campaign.steps) {
    for (const auto& io : step) {
      row.clear();
      row += std::to_string(io.id.t);
      row += ',';
      row += std::to_string(io.id.i);
      row += ',';
      append_double(row, io.mu);
      row += ',';
      append_double(row, io.sigma);
      for (double c : io.competitor_bids) {
        row += ',';
        append_double(row, c);
      }
      row += '\n';
      out << row;
    }
  }
}

CampaignSpec read_campaign(std::istream& in) {
  std::string line;
  int line_no = 1;
  if (!std::getline(in, line)) throw ParseError("empty campaign file", line_no);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad JSON header: ") + e.what(), line_no);
  }
  CampaignSpec campaign;
  try {
    if (header.value("format", std::string{}) != "oilbid-campaign") {
      throw ParseError("not an oilbid campaign file", line_no);
    }
    const int version = header.at("version").get<int>();
    if (version != kCampaignFormatVersion) {
      throw ParseError("unsupported campaign format version " + std::to_string(version) +
                           " (expected " + std::to_string(kCampaignFormatVersion) + ")",
                       line_no);
    }
    campaign.horizon = header.at("T").get<int>();
    campaign.slot_count = header.at("D").get<int>();
    campaign.exposure_probs = header.at("exposure_probs").get<std::vector<double>>();
    campaign.category = header.value("category", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad header field: ") + e.what(), line_no);
  }
  if (campaign.horizon < 1 || campaign.slot_count < 1) {
    throw ParseError("header T and D must be >= 1", line_no);
  }
  try {
    validate_exposure(campaign.exposure_probs);
  } catch (const ConfigError& e) {
    throw ParseError(e.what(), line_no);
  }
  if (campaign.exposure_probs.size() != static_cast<std::size_t>(campaign.slot_count)) {
    throw ParseError("exposure_probs length differs from D", line_no);
  }
  campaign.steps.resize(static_cast<std::size_t>(campaign.horizon));

  ++line_no;
  if (!std::getline(in, line)) throw ParseError("missing column header", line_no);
  const std::size_t width = 4 + static_cast<std::size_t>(campaign.slot_count) + 1;
  if (split_csv(line).size() != width) throw ParseError("column header has wrong width", line_no);

  int last_t = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != width) {
      throw ParseError("expected " + std::to_string(width) + " fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    }
    ImpressionOpportunity io;
    io.id.t = parse_number<int>(fields[0], line_no, "t");
    io.id.i = parse_number<int>(fields[1], line_no, "i");
    io.mu = parse_number<double>(fields[2], line_no, "mu");
    io.sigma = parse_number<double>(fields[3], line_no, "sigma");
    for (std::size_t j = 4; j < width; ++j) {
      io.competitor_bids.push_back(parse_number<double>(fields[j], line_no, "competitor bid"));
    }
    if (io.id.t < 0 || io.id.t >= campaign.horizon) throw ParseError("t out of range", line_no);
    if (io.id.t < last_t) throw ParseError("rows not in (t, i) order", line_no);
    last_t = io.id.t;
    auto& step = campaign.steps[static_cast<std::size_t>(io.id.t)];
    if (io.id.i != static_cast<int>(step.size())) {
      throw ParseError("IO index " + std::to_string(io.id.i) + " out of sequence", line_no);
    }
    try {
      validate_io(io, campaign.slot_count);
    } catch (const InputError& e) {
      throw ParseError(e.what(), line_no);
    }
    step.push_back(std::move(io));
  }
  return campaign;
}

void save_campaign(const CampaignSpec& campaign, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  write_campaign(campaign, out);
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

CampaignSpec load_campaign(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "' for reading");
  return read_campaign(in);
}

}  // namespace oilbid
