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

#include <cstdint>
#include <string>
#include <vector>

#include "slqns/spectra.hpp"

namespace slqns {

struct DSAConfig {
  SpectrumModel spectrum;
  double omega_max = 0.0;
  int n_omega = 512;

  double d_omega() const { return omega_max / n_omega; }
  double frequency(int j) const { return j * d_omega(); }
  double amplitude(int j) const;
  // S(omega_max) <= 1e-3 * peak.
  bool cutoff_adequate() const;
  void validate() const;

  // n_omega = 512 and omega_max = omega0 + 10/tc.
  static DSAConfig defaults_for(const Lorentzian& l);
};

struct NoiseTrajectory {
  std::vector<double> times;
  std::vector<double> samples;
  std::uint64_t seed = 0;
  DSAConfig config;

  // Linear interpolation; throws outside the grid.
  double at(double t) const;
};

NoiseTrajectory dsa_sample(const DSAConfig& config, const std::vector<double>& time_grid, std::uint64_t seed);

double theoretical_autocorrelation(const DSAConfig& config, double tau);

std::vector<double> uniform_grid(double t_end, double dt);

enum class BathVariant { MainText, ThreeAxis };

struct BathConfig {
  double lag_gamma = 0.0;
  bool couple_x = true;
  bool couple_y = true;
  bool couple_z = false;

  void validate() const;
  static BathConfig main_text(double gamma) { return {gamma, true, true, false}; }
  static BathConfig three_axis(double gamma) { return {gamma, true, true, true}; }
};

// Time-indexed noise acting on the qubit. Toy bath: H = 1/2 sz (x) (bx tx + by ty + bz tz) with the
// bath qubit starting in |z+>. Classical: H = bx sx + by sy + bz sz.
struct NoiseField {
  std::vector<double> times;
  std::vector<double> bx, by, bz;
  bool toy_bath = false;
  double correlation_time = 0.0;

  double t_end() const { return times.empty() ? 0.0 : times.back(); }
  // Field values at time t by linear interpolation.
  void sample(double t, double& x, double& y, double& z) const;
};

// Bath coefficients on `times`, which must fit inside the trajectory after the lag shift.
NoiseField build_toy_bath(const NoiseTrajectory& beta, const BathConfig& bath, const std::vector<double>& times);
NoiseField build_toy_bath(const NoiseTrajectory& beta, const BathConfig& bath);

NoiseField classical_dephasing(const NoiseTrajectory& beta);

SphericalSpectraSet target_spectra(const DSAConfig& config, double gamma, BathVariant variant);
// Spectra of the classical coupling H = sz beta(t).
SphericalSpectraSet classical_target_spectra(const DSAConfig& config);

void write_trajectory(const NoiseTrajectory& traj, const std::string& csv_path);

}  // namespace slqns
