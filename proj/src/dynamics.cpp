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

#include "slqns/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <gsl/gsl_sf_expint.h>

#include "slqns/error.hpp"
#include "slqns/parallel.hpp"
#include "slqns/rng.hpp"

namespace slqns {

namespace {

const cplx I1(0.0, 1.0);

// exp(-i (h0 + h.sigma) t) for a 2x2 Hermitian generator.
Eigen::Matrix2cd su2_exp(double h0, double hx, double hy, double hz, double t) {
  const double n = std::sqrt(hx * hx + hy * hy + hz * hz);
  const double c = std::cos(n * t);
  const double s = n > 0.0 ? std::sin(n * t) / n : t;
  Eigen::Matrix2cd u;
  u(0, 0) = cplx(c, -s * hz);
  u(1, 1) = cplx(c, s * hz);
  u(0, 1) = -I1 * s * cplx(hx, -hy);
  u(1, 0) = -I1 * s * cplx(hx, hy);
  return std::exp(-I1 * h0 * t) * u;
}

Eigen::Matrix4cd kron(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
  Eigen::Matrix4cd k;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) k.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return k;
}

// One step of H = omega_eff sigma_axis / 2 + noise, held constant over dt.
Eigen::MatrixXcd step_unitary(Pauli axis, double omega_eff, double bx, double by, double bz, bool toy, double dt) {
  const double half = 0.5 * omega_eff;
  if (!toy) {
    double hx = bx, hy = by, hz = bz;
    (axis == Pauli::X ? hx : axis == Pauli::Y ? hy : hz) += half;
    return su2_exp(0.0, hx, hy, hz, dt);
  }
  Eigen::Matrix4cd u = Eigen::Matrix4cd::Zero();
  if (axis == Pauli::Z) {
    // sz (x) (omega I + b.tau)/2 is block diagonal in the system z basis.
    u.block<2, 2>(0, 0) = su2_exp(half, 0.5 * bx, 0.5 * by, 0.5 * bz, dt);
    u.block<2, 2>(2, 2) = su2_exp(-half, -0.5 * bx, -0.5 * by, -0.5 * bz, dt);
    return u;
  }
  // The drive and coupling terms anticommute, so H^2 is a multiple of the identity.
  const Eigen::Matrix4cd h = kron(half * pauli_matrix(axis), Eigen::Matrix2cd::Identity()) +
                             kron(pauli_matrix(Pauli::Z), 0.5 * (bx * pauli_matrix(Pauli::X) +
                                                                 by * pauli_matrix(Pauli::Y) +
                                                                 bz * pauli_matrix(Pauli::Z)));
  const double n = 0.5 * std::sqrt(omega_eff * omega_eff + bx * bx + by * by + bz * bz);
  const double s = n > 0.0 ? std::sin(n * dt) / n : dt;
  u = std::cos(n * dt) * Eigen::Matrix4cd::Identity() - I1 * s * h;
  return u;
}

Pauli axis_pauli(DriveAxis a) { return a == DriveAxis::XPlus ? Pauli::X : Pauli::Z; }

double effective(DriveAxis a, double omega) { return a == DriveAxis::ZMinus ? -omega : omega; }

}  // namespace

std::string to_string(Pauli p) {
  switch (p) {
    case Pauli::X: return "x";
    case Pauli::Y: return "y";
    case Pauli::Z: return "z";
  }
  return "?";
}

std::string to_string(DriveAxis a) {
  switch (a) {
    case DriveAxis::XPlus: return "x+";
    case DriveAxis::ZPlus: return "z+";
    case DriveAxis::ZMinus: return "z-";
  }
  return "?";
}

const Eigen::Matrix2cd& pauli_matrix(Pauli p) {
  static const Eigen::Matrix2cd sx = (Eigen::Matrix2cd() << 0, 1, 1, 0).finished();
  static const Eigen::Matrix2cd sy = (Eigen::Matrix2cd() << 0, -I1, I1, 0).finished();
  static const Eigen::Matrix2cd sz = (Eigen::Matrix2cd() << 1, 0, 0, -1).finished();
  return p == Pauli::X ? sx : p == Pauli::Y ? sy : sz;
}

void DriveConfig::validate() const {
  if (!(std::abs(omega) > 0.0) || !std::isfinite(omega)) throw ConfigError("drive: |Omega| must be positive");
  if (!(duration >= 0.0) || !std::isfinite(duration)) throw ConfigError("drive: duration must be >= 0");
  if (std::abs(omega) * duration < long_time_threshold) {
    std::ostringstream os;
    os << "drive: |Omega| T = " << std::abs(omega) * duration << " below long-time threshold " << long_time_threshold;
    throw ConfigError(os.str());
  }
  if (discretize_steps != 0 && axis == DriveAxis::XPlus) throw ConfigError("drive: discretization applies to z drives only");
  if (discretize_steps < 0) throw ConfigError("drive: discretize_steps must be >= 0");
}

QubitState QubitState::eigenstate(Pauli axis, int sign) {
  QubitState s;
  s.rho = 0.5 * (Eigen::Matrix2cd::Identity() + static_cast<double>(sign >= 0 ? 1 : -1) * pauli_matrix(axis));
  return s;
}

QubitState QubitState::from_bloch(double x, double y, double z) {
  QubitState s;
  s.rho = 0.5 * (Eigen::Matrix2cd::Identity() + x * pauli_matrix(Pauli::X) + y * pauli_matrix(Pauli::Y) +
                 z * pauli_matrix(Pauli::Z));
  return s;
}

double QubitState::expectation(Pauli p) const { return (pauli_matrix(p) * rho).trace().real(); }

void QubitState::validate(double tol) const {
  if (!rho.allFinite()) throw DomainError("state: non-finite entries");
  if (std::abs(rho.trace() - 1.0) > 1e-12 + tol) throw DomainError("state: trace differs from 1");
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-12 + tol) throw DomainError("state: not Hermitian");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(rho);
  if (es.eigenvalues().minCoeff() < -tol) throw DomainError("state: negative eigenvalue");
}

std::vector<Eigen::MatrixXcd> propagate(DriveAxis axis, double omega, const NoiseField& field,
                                        const std::vector<double>& times, double dt) {
  if (!(dt > 0.0)) throw DomainError("propagate: dt must be positive");
  if (!std::is_sorted(times.begin(), times.end()) || (!times.empty() && times.front() < 0.0))
    throw DomainError("propagate: times must be sorted and >= 0");
  if (!times.empty() && times.back() > field.t_end() + 1e-9) throw DomainError("propagate: field does not cover [0, T]");
  const int dim = field.toy_bath ? 4 : 2;
  const Pauli p = axis_pauli(axis);
  const double w = effective(axis, omega);
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(dim, dim);
  std::vector<Eigen::MatrixXcd> out;
  out.reserve(times.size());
  double t = 0.0;
  for (double target : times) {
    const double span = target - t;
    const auto n = static_cast<long>(std::ceil(span / dt - 1e-9));
    const double h = n > 0 ? span / static_cast<double>(n) : 0.0;
    for (long k = 0; k < n; ++k) {
      double bx, by, bz;
      field.sample(t + (static_cast<double>(k) + 0.5) * h, bx, by, bz);
      u = step_unitary(p, w, bx, by, bz, field.toy_bath, h) * u;
    }
    t = target;
    out.push_back(u);
  }
  return out;
}

QubitState apply_joint(const Eigen::MatrixXcd& u, const QubitState& rho0, bool toy_bath) {
  QubitState out;
  if (!toy_bath) {
    out.rho = u * rho0.rho * u.adjoint();
    return out;
  }
  Eigen::Matrix2cd bath = Eigen::Matrix2cd::Zero();
  bath(0, 0) = 1.0;
  const Eigen::Matrix4cd joint = kron(rho0.rho, bath);
  const Eigen::Matrix4cd evolved = u * joint * u.adjoint();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.rho(i, j) = evolved(2 * i, 2 * j) + evolved(2 * i + 1, 2 * j + 1);
  return out;
}

QubitState simulate_trajectory(const DriveConfig& drive, const NoiseField& field, const QubitState& rho0, double dt) {
  drive.validate();
  double limit = 0.05 / std::abs(drive.omega);
  if (field.correlation_time > 0.0) limit = std::min(limit, 0.05 * field.correlation_time);
  if (dt > limit * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "simulate_trajectory: dt = " << dt << " exceeds min(0.05/|Omega|, 0.05 tc) = " << limit;
    throw DomainError(os.str());
  }
  if (drive.discretize_steps > 0) {
    if (drive.discretize_steps < 100) throw ConfigError("drive: discretize_steps must be >= 100");
    return discretized_z_drive(drive.effective_omega(), drive.duration, drive.discretize_steps, field, rho0);
  }
  const auto us = propagate(drive.axis, drive.omega, field, {drive.duration}, dt);
  return apply_joint(us.back(), rho0, field.toy_bath);
}

EnsembleResult ensemble_expectation(const DriveConfig& drive, const BathBuilder& builder, const QubitState& rho0,
                                    Pauli observable, int n_realizations, std::uint64_t base_seed, double dt,
                                    int jobs) {
  if (n_realizations < 2) throw DomainError("ensemble_expectation: need at least 2 realizations");
  std::vector<double> values(static_cast<std::size_t>(n_realizations));
  parallel_for(values.size(), jobs, [&](std::size_t k) {
    const NoiseField field = builder(derive_seed(base_seed, k));
    values[k] = simulate_trajectory(drive, field, rho0, dt).expectation(observable);
  });
  if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); }))
    return {values.front(), 0.0};
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n_realizations;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double var = ss / (n_realizations - 1);
  return {mean, std::sqrt(var / n_realizations)};
}

double tcl_expectation_x_drive(const RateCoefficients& r, double sx0, double T) {
  if (!(r.A > 0.0)) throw DomainError("tcl_expectation_x_drive: A must be positive");
  return sx0 * std::exp(-r.A * T) - (r.B / r.A) * std::expm1(-r.A * T);
}

double tcl_expectation_x_drive(const RateCoefficients& r, const QubitState& rho0, double T) {
  return tcl_expectation_x_drive(r, rho0.expectation(Pauli::X), T);
}

QubitState tcl_evolve_x_drive(const RateCoefficients& r, double omega, const QubitState& rho0, double T) {
  const double sx = r.A > 0.0 ? tcl_expectation_x_drive(r, rho0, T) : rho0.expectation(Pauli::X);
  // rho_{x+x-} = (z + i y) / 2 rotates as exp(-i Omega t) in the rotating frame.
  const cplx c0(rho0.expectation(Pauli::Z), rho0.expectation(Pauli::Y));
  const cplx c = c0 * std::exp(-0.5 * r.A * T) * std::exp(-I1 * omega * T);
  return QubitState::from_bloch(sx, c.imag(), c.real());
}

ZDriveExpectation tcl_expectation_z_drive(const ZDriveRates& r, const QubitState& rho0, double T) {
  if (r.from_plus < 0.0 || r.to_plus < 0.0) throw DomainError("tcl_expectation_z_drive: negative rate");
  const double d0 = rho0.expectation(Pauli::Z);
  const double total = r.from_plus + r.to_plus;
  double d = d0;
  if (total > 0.0) {
    const double dinf = (r.to_plus - r.from_plus) / total;
    d = dinf + (d0 - dinf) * std::exp(-2.0 * total * T);
  }
  const double gamma = total + 2.0 * r.s00_zero;
  return {d, std::abs(rho0.rho(0, 1)) * std::exp(-gamma * T)};
}

QubitState tcl_evolve_z_drive(const ZDriveRates& r, double omega_eff, const QubitState& rho0, double T) {
  const ZDriveExpectation e = tcl_expectation_z_drive(r, rho0, T);
  const double gamma = r.from_plus + r.to_plus + 2.0 * r.s00_zero;
  const cplx c = rho0.rho(0, 1) * std::exp(-gamma * T) * std::exp(-I1 * omega_eff * T);
  // rho_{01} = (x - i y) / 2.
  return QubitState::from_bloch(2.0 * c.real(), -2.0 * c.imag(), e.sz);
}

RateCoefficients compute_AB(const SphericalSpectraSet& s, double omega, const DeviceParams& device) {
  if (!s.has(0, 0)) throw ConfigError("compute_AB: spectra set lacks S_{0,0}");
  if (s.has(1, -1) != s.has(-1, 1)) throw ConfigError("compute_AB: transverse components must come in pairs");
  const double wq = device.omega_q;
  const double p00 = s.value(0, 0, omega).real();
  const double m00 = s.value(0, 0, -omega).real();
  const double a = s.value(1, -1, omega + wq).real();
  const double b = s.value(-1, 1, -omega - wq).real();
  const double c = s.value(1, -1, -omega + wq).real();
  const double d = s.value(-1, 1, omega - wq).real();
  return {p00 + m00 + 0.5 * (a + b + c + d), p00 - m00 + 0.5 * (a - b + c - d)};
}

ZDriveRates z_drive_rates(const SphericalSpectraSet& s, DriveAxis axis, double omega, const DeviceParams& device) {
  if (axis == DriveAxis::XPlus) throw ConfigError("z_drive_rates: x drive given");
  const double w = axis == DriveAxis::ZPlus ? omega : -omega;
  const double wq = device.omega_q;
  return {s.value(-1, 1, -w - wq).real(), s.value(1, -1, w + wq).real(), s.value(0, 0, 0.0).real()};
}

bool secular_regime(double splus, double omega) { return std::abs(splus / omega) <= 0.05; }

std::vector<double> frame_aligned_times(double omega, const std::vector<int>& n_list) {
  if (!(std::abs(omega) > 0.0)) throw DomainError("frame_aligned_times: Omega must be nonzero");
  std::vector<double> out;
  for (int n : n_list) {
    if (n < 1) throw DomainError("frame_aligned_times: n must be >= 1");
    out.push_back(kTwoPi * n / std::abs(omega));
  }
  std::sort(out.begin(), out.end());
  return out;
}

cplx toggling_to_rotating(cplx coherence, double omega, double t, int element_sign) {
  const double phase = (element_sign >= 0 ? -1.0 : 1.0) * omega * t;
  return coherence * cplx(std::cos(phase), std::sin(phase));
}

QubitState discretized_z_drive(double omega_eff, double T, int steps, const NoiseField& field, const QubitState& rho0) {
  if (steps < 1) throw DomainError("discretized_z_drive: steps must be positive");
  if (T > field.t_end() + 1e-9) throw DomainError("discretized_z_drive: field does not cover [0, T]");
  const double h = T / steps;
  const int dim = field.toy_bath ? 4 : 2;
  const Eigen::Matrix2cd rz = su2_exp(0.0, 0.0, 0.0, 0.5 * omega_eff, h);
  const Eigen::MatrixXcd r = field.toy_bath ? Eigen::MatrixXcd(kron(rz, Eigen::Matrix2cd::Identity()))
                                            : Eigen::MatrixXcd(rz);
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(dim, dim);
  for (int k = 0; k < steps; ++k) {
    double bx, by, bz;
    field.sample((k + 0.5) * h, bx, by, bz);
    u = r * step_unitary(Pauli::Z, 0.0, bx, by, bz, field.toy_bath, h) * u;
  }
  return apply_joint(u, rho0, field.toy_bath);
}

QubitState sliced_z_drive(double omega_eff, double T, int steps, const NoiseField& field, const QubitState& rho0) {
  if (steps < 1) throw DomainError("sliced_z_drive: steps must be positive");
  const auto us = propagate(DriveAxis::ZPlus, omega_eff, field, {T}, T / steps);
  return apply_joint(us.back(), rho0, field.toy_bath);
}

namespace {

// (1/pi) int S(w) sin((w - w0) t) / (w - w0) dw for piecewise-linear S.
double sinc_filtered(const Tabulated& tab, double w0, double t) {
  if (t <= 0.0) return 0.0;
  const auto& g = tab.grid;
  const auto& v = tab.values;
  double acc = 0.0;
  double x_prev = g[0] - w0;
  double si_prev = gsl_sf_Si(x_prev * t);
  double cos_prev = std::cos(x_prev * t);
  for (std::size_t k = 0; k + 1 < g.size(); ++k) {
    const double x = g[k + 1] - w0;
    const double si = gsl_sf_Si(x * t);
    const double cs = std::cos(x * t);
    const double m = (v[k + 1] - v[k]) / (g[k + 1] - g[k]);
    const double c0 = v[k] + m * (w0 - g[k]);
    acc += c0 * (si - si_prev) - (m / t) * (cs - cos_prev);
    si_prev = si;
    cos_prev = cs;
  }
  return acc / std::numbers::pi;
}

}  // namespace

double tcl_sinc_integrator(const SpectrumModel& s00, double omega, const QubitState& rho0, double T, int n_steps) {
  const Tabulated* tab = s00.tabulated();
  if (!tab) throw DomainError("tcl_sinc_integrator: spectrum must be tabulated");
  if (n_steps < 1 || !(T > 0.0)) throw DomainError("tcl_sinc_integrator: need T > 0 and n_steps >= 1");
  double spacing = 0.0;
  for (std::size_t k = 0; k + 1 < tab->grid.size(); ++k) spacing = std::max(spacing, tab->grid[k + 1] - tab->grid[k]);
  if (spacing * T > 1.0) {
    std::ostringstream os;
    os << "tcl_sinc_integrator: grid spacing " << spacing << " does not resolve 1/T = " << 1.0 / T;
    throw DomainError(os.str());
  }
  if (tab->grid.front() > -std::abs(omega) || tab->grid.back() < std::abs(omega))
    throw DomainError("tcl_sinc_integrator: grid does not cover +-Omega");

  auto rates = [&](double t, double& fp, double& fm) {
    const double a = sinc_filtered(*tab, omega, t);
    const double b = sinc_filtered(*tab, -omega, t);
    fp = a + b;
    fm = a - b;
  };
  const double h = T / n_steps;
  double d = rho0.expectation(Pauli::X);
  double fp0, fm0;
  rates(0.0, fp0, fm0);
  for (int k = 0; k < n_steps; ++k) {
    const double t = k * h;
    double fp1, fm1, fp2, fm2;
    rates(t + 0.5 * h, fp1, fm1);
    rates(t + h, fp2, fm2);
    const double k1 = -fp0 * d + fm0;
    const double k2 = -fp1 * (d + 0.5 * h * k1) + fm1;
    const double k3 = -fp1 * (d + 0.5 * h * k2) + fm1;
    const double k4 = -fp2 * (d + h * k3) + fm2;
    d += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
    fp0 = fp2;
    fm0 = fm2;
  }
  return d;
}

}  // namespace slqns
