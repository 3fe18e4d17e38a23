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
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "slqns/noisegen.hpp"
#include "slqns/spectra.hpp"

namespace slqns {

enum class Pauli { X, Y, Z };
enum class DriveAxis { XPlus, ZPlus, ZMinus };

std::string to_string(Pauli p);
std::string to_string(DriveAxis a);

struct DriveConfig {
  DriveAxis axis = DriveAxis::XPlus;
  double omega = 0.0;
  double duration = 0.0;
  // Trotterized virtual-z drive when > 0 (z axes only).
  int discretize_steps = 0;
  double long_time_threshold = 10.0;

  void validate() const;
  // Coefficient of sigma_axis / 2 in the rotating-frame control Hamiltonian.
  double effective_omega() const { return axis == DriveAxis::ZMinus ? -omega : omega; }
  Pauli pauli() const { return axis == DriveAxis::XPlus ? Pauli::X : Pauli::Z; }
};

struct QubitState {
  Eigen::Matrix2cd rho = Eigen::Matrix2cd::Identity() / 2.0;

  static QubitState eigenstate(Pauli axis, int sign);
  static QubitState from_bloch(double x, double y, double z);

  double expectation(Pauli p) const;
  void validate(double tol = 1e-10) const;
};

const Eigen::Matrix2cd& pauli_matrix(Pauli p);

struct RateCoefficients {
  double A = 0.0;
  double B = 0.0;
};

// Rates for a constant z drive. from_plus is the transition rate out of |z+>, to_plus the rate
// into it; s00_zero is S_{0,0}(0).
struct ZDriveRates {
  double from_plus = 0.0;
  double to_plus = 0.0;
  double s00_zero = 0.0;
};

// Joint (system x bath) unitaries at each time of `times`, which must be sorted and inside the
// field grid. Steps are at most dt long and use the field at the step midpoint.
std::vector<Eigen::MatrixXcd> propagate(DriveAxis axis, double omega, const NoiseField& field,
                                        const std::vector<double>& times, double dt);

// Reduced system state after applying a joint unitary to rho0 (x) |z+><z+| (toy bath) or rho0.
QubitState apply_joint(const Eigen::MatrixXcd& u, const QubitState& rho0, bool toy_bath);

QubitState simulate_trajectory(const DriveConfig& drive, const NoiseField& field, const QubitState& rho0, double dt);

struct EnsembleResult {
  double mean = 0.0;
  double standard_error = 0.0;
};

using BathBuilder = std::function<NoiseField(std::uint64_t seed)>;

EnsembleResult ensemble_expectation(const DriveConfig& drive, const BathBuilder& builder, const QubitState& rho0,
                                    Pauli observable, int n_realizations, std::uint64_t base_seed, double dt,
                                    int jobs = 1);

double tcl_expectation_x_drive(const RateCoefficients& r, double sx0, double T);
double tcl_expectation_x_drive(const RateCoefficients& r, const QubitState& rho0, double T);
// Full rotating-frame state under a constant x drive. The x-basis coherence decays at A/2.
QubitState tcl_evolve_x_drive(const RateCoefficients& r, double omega, const QubitState& rho0, double T);

struct ZDriveExpectation {
  double sz = 0.0;
  double coherence = 0.0;
};

ZDriveExpectation tcl_expectation_z_drive(const ZDriveRates& r, const QubitState& rho0, double T);
// Full rotating-frame state under H = omega_eff sz / 2.
QubitState tcl_evolve_z_drive(const ZDriveRates& r, double omega_eff, const QubitState& rho0, double T);

RateCoefficients compute_AB(const SphericalSpectraSet& spectra, double omega, const DeviceParams& device);
ZDriveRates z_drive_rates(const SphericalSpectraSet& spectra, DriveAxis axis, double omega,
                          const DeviceParams& device);

// True when |S+(Omega)/Omega| <= 0.05.
bool secular_regime(double splus, double omega);

std::vector<double> frame_aligned_times(double omega, const std::vector<int>& n_list);

// Maps a toggling-frame coherence rho_{u+u-} (element_sign = +1) or rho_{u-u+} (-1) to the rotating frame.
cplx toggling_to_rotating(cplx coherence, double omega, double t, int element_sign = 1);

// Alternates free noisy evolution over dt = T/steps with exp(-i omega_eff sz dt / 2). The field is
// held at its midpoint value within each slice.
QubitState discretized_z_drive(double omega_eff, double T, int steps, const NoiseField& field, const QubitState& rho0);
// Same slicing with the drive applied simultaneously; the steps -> infinity target of the above.
QubitState sliced_z_drive(double omega_eff, double T, int steps, const NoiseField& field, const QubitState& rho0);

// Finite-time second-order dynamics of <sx> under a constant x drive with sinc filter kernels.
// `s00` is S_{0,0}(w) tabulated on a signed grid.
double tcl_sinc_integrator(const SpectrumModel& s00, double omega, const QubitState& rho0, double T, int n_steps);

}  // namespace slqns
