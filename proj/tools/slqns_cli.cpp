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

#include <fstream>
#include <iomanip>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "slqns/error.hpp"
#include "slqns/harness.hpp"

namespace {

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw slqns::ConfigError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw slqns::ConfigError(path + ": " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"slqns: SPAM-robust spin-locking noise spectroscopy"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  bool analytic = false;
  int jobs = 1;
  auto* run = app.add_subcommand("run", "Simulate a campaign and estimate spectra");
  run->add_option("config", config_path, "Campaign JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Override the master seed");
  run->add_option("--out-dir", out_dir, "Output directory (default: config output_dir)");
  run->add_flag("--analytic", analytic, "Use exact expectations instead of sampled shots");
  run->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check a campaign config without running it");
  validate->add_option("config", validate_path, "Campaign JSON")->required()->check(CLI::ExistingFile);

  std::string report_a, report_b;
  double z_threshold = 3.0;
  auto* compare = app.add_subcommand("compare", "Compare the estimates of two report.json files");
  compare->add_option("a", report_a, "First report")->required()->check(CLI::ExistingFile);
  compare->add_option("b", report_b, "Second report")->required()->check(CLI::ExistingFile);
  compare->add_option("--z", z_threshold, "Flag rows with |z| above this");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) {
      const auto cfg = slqns::load_config(validate_path);
      std::cout << "ok: " << cfg.name << ", " << cfg.plan.omegas.size() << " frequencies, backend "
                << cfg.backend << '\n';
      return 0;
    }
    if (*compare) {
      const auto rows = slqns::compare_reports(read_json(report_a), read_json(report_b));
      int flagged = 0;
      std::cout << "component,method,omega_rad_per_us,T_us,delta,z\n" << std::setprecision(10);
      for (const auto& r : rows) {
        std::cout << r.component << ',' << r.method << ',' << r.omega << ',' << r.T << ',' << r.delta << ','
                  << r.z << '\n';
        if (std::abs(r.z) > z_threshold) ++flagged;
      }
      std::cerr << rows.size() << " rows, " << flagged << " with |z| > " << z_threshold << '\n';
      return 0;
    }
    auto cfg = slqns::load_config(config_path);
    if (seed) {
      cfg.plan.seed = *seed;
      cfg.source["seed"] = *seed;
    }
    if (analytic) {
      cfg.plan.analytic = true;
      cfg.source["analytic"] = true;
    }
    const std::string dir = out_dir.empty() ? cfg.output_dir : out_dir;
    const auto result = slqns::run_campaign(cfg, jobs);
    slqns::write_bundle(result, dir);
    for (const auto& f : result.failures)
      std::cerr << "protocol " << f.protocol << " at Omega " << f.omega << " failed: " << f.message << '\n';
    std::cout << "wrote " << dir << ": " << result.data.size() << " datasets, " << result.estimates.size()
              << " estimates, " << result.failures.size() << " failures\n";
    if (result.successes == 0) return 3;
    return 0;
  } catch (const slqns::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
