// Copyright 2026 The slqns Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "slqns/estimation.hpp"
#include "slqns/protocols.hpp"

namespace slqns {

struct CampaignConfig {
  std::string name = "campaign";
  DeviceParams device;
  // "closed_form", "ideal" or "trajectory".
  std::string backend = "closed_form";
  SphericalSpectraSet spectra;
  TrajectoryNoise noise;
  SpamParams spam;
  ProtocolPlan plan;
  std::string output_dir = "out";
  nlohmann::json source;

  // Spectra the backend realizes.
  SphericalSpectraSet injected() const;
  std::unique_ptr<Backend> make_backend(int jobs = 1) const;
};

CampaignConfig parse_config(const nlohmann::json& j);
CampaignConfig load_config(const std::string& path);

struct CampaignFailure {
  double omega = 0.0;
  int protocol = 0;
  std::string message;
};

struct CampaignResult {
  ShotDataset data;
  std::map<ShotKey, std::set<int>> membership;
  std::vector<SpectralEstimate> estimates;
  // Time the standard estimate was taken at, parallel to `estimates` (0 for regressions).
  std::vector<double> estimate_times;
  std::vector<CampaignFailure> failures;
  std::vector<std::string> log;
  nlohmann::json report;
  int successes = 0;
};

CampaignResult run_campaign(const CampaignConfig& config, int jobs = 1);

// Writes datasets.csv, manifest.json, estimates.csv, report.json and campaign.log.
void write_bundle(const CampaignResult& result, const std::string& dir);

struct ComparisonRow {
  std::string component;
  std::string method;
  double omega = 0.0;
  double T = 0.0;
  double delta = 0.0;
  double z = 0.0;
};

// Per-point z-scores (a - b) / sqrt(se_a^2 + se_b^2). Throws ConfigError when the grids differ.
std::vector<ComparisonRow> compare_reports(const nlohmann::json& a, const nlohmann::json& b);

std::string step_label(const ShotKey& key);

}  // namespace slqns
