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

#include "slqns/spam.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include "slqns/error.hpp"
#include "slqns/rng.hpp"

namespace slqns {

void SpamParams::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("spam: " + msg); };
  if (!std::isfinite(alpha_sp) || !std::isfinite(alpha_m) || !std::isfinite(delta) || !std::isfinite(c.real()) ||
      !std::isfinite(c.imag()))
    fail("non-finite parameter");
  if (alpha_sp < -1.0 || alpha_sp > 1.0) fail("alpha_SP must lie in [-1, 1]");
  if (std::abs(c.real()) > 1.0 || std::abs(c.imag()) > 1.0) fail("|Re c| and |Im c| must be <= 1");
  if (alpha_m < 0.0 || alpha_m > 1.0) fail("alpha_M must lie in [0, 1]");
  if (delta < 0.0 || delta > 1.0) fail("delta must lie in [0, 1]");
  if (alpha_m + delta > 1.0 + 1e-15) fail("alpha_M + delta must be <= 1 (POVM positivity)");
  if (alpha_sp * alpha_sp + std::norm(c) > 1.0 + 1e-15) fail("alpha_SP^2 + |c|^2 must be <= 1 (state positivity)");
}

namespace {

// Columns are |u+> and |u->.
Eigen::Matrix2cd eigenbasis(Pauli u) {
  const double r = 1.0 / std::sqrt(2.0);
  Eigen::Matrix2cd v;
  switch (u) {
    case Pauli::X: v << r, r, r, -r; break;
    case Pauli::Y: v << r, r, cplx(0, r), cplx(0, -r); break;
    case Pauli::Z: v << 1, 0, 0, 1; break;
  }
  return v;
}

}  // namespace

QubitState faulty_state(Pauli u, int sign, const SpamParams& p) {
  p.validate();
  const int s = sign >= 0 ? 0 : 1;
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  m(s, s) = 0.5 * (1.0 + p.alpha_sp);
  m(1 - s, 1 - s) = 0.5 * (1.0 - p.alpha_sp);
  m(s, 1 - s) = 0.5 * p.c;
  m(1 - s, s) = 0.5 * std::conj(p.c);
  const Eigen::Matrix2cd v = eigenbasis(u);
  QubitState out;
  out.rho = v * m * v.adjoint();
  out.validate();
  return out;
}

Eigen::Matrix2cd povm_plus(Pauli u, const SpamParams& p) {
  return 0.5 * ((1.0 + p.delta) * Eigen::Matrix2cd::Identity() + p.alpha_m * pauli_matrix(u));
}

Probabilities povm_probabilities(const QubitState& rho, Pauli u, const SpamParams& p) {
  double plus = 0.5 * ((1.0 + p.delta) + p.alpha_m * rho.expectation(u));
  plus = std::clamp(plus, 0.0, 1.0);
  return {plus, 1.0 - plus};
}

double spam_corrupted_expectation(double ideal, double decay_factor, int sign, const SpamParams& p, SpamMode mode) {
  if (!(decay_factor > 0.0 && decay_factor <= 1.0)) throw DomainError("spam_corrupted_expectation: decay factor outside (0,1]");
  if (mode == SpamMode::ZDriveX) return p.alpha() * ideal + p.delta;
  const double s = sign >= 0 ? 1.0 : -1.0;
  return p.alpha_m * (ideal - s * (1.0 - p.alpha_sp) * decay_factor) + p.delta;
}

double ShotEntry::std_error() const {
  const double floor = n_shots > 0 ? 1.0 / static_cast<double>(n_shots) : 0.0;
  return std::max(std::sqrt(std::max(variance, 0.0)), floor);
}

ShotEntry sample_shots(double p_plus, std::int64_t n_shots, std::uint64_t seed) {
  if (!(p_plus >= 0.0 && p_plus <= 1.0)) throw DomainError("sample_shots: P+ outside [0,1]");
  if (n_shots < 1) throw DomainError("sample_shots: n_shots must be >= 1");
  CounterRng rng(seed);
  ShotEntry e;
  e.n_shots = n_shots;
  e.n_plus = rng.binomial(n_shots, p_plus);
  e.seed = seed;
  const double n = static_cast<double>(n_shots);
  e.p_plus_hat = static_cast<double>(e.n_plus) / n;
  e.expectation_hat = static_cast<double>(2 * e.n_plus - n_shots) / n;
  e.variance = 4.0 * e.p_plus_hat * (1.0 - e.p_plus_hat) / n;
  return e;
}

ShotEntry analytic_entry(double p_plus, std::int64_t n_shots) {
  if (!(p_plus >= 0.0 && p_plus <= 1.0)) throw DomainError("analytic_entry: P+ outside [0,1]");
  if (n_shots < 1) throw DomainError("analytic_entry: n_shots must be >= 1");
  ShotEntry e;
  e.n_shots = n_shots;
  e.n_plus = -1;
  e.p_plus_hat = p_plus;
  e.expectation_hat = 2.0 * p_plus - 1.0;
  e.variance = 4.0 * p_plus * (1.0 - p_plus) / static_cast<double>(n_shots);
  return e;
}

void ShotDataset::insert(const ShotKey& key, const ShotEntry& entry) { entries_[key] = entry; }

void ShotDataset::merge(const ShotDataset& other) {
  for (const auto& [k, v] : other.entries_) entries_[k] = v;
}

const ShotEntry& ShotDataset::at(const ShotKey& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) {
    std::ostringstream os;
    os << "dataset has no entry for drive " << to_string(key.drive) << ", Omega " << key.omega << ", init "
       << init_label(key.init_axis, key.init_sign) << ", obs " << to_string(key.obs) << ", T " << key.time;
    throw EstimationError(os.str());
  }
  return it->second;
}

std::vector<double> ShotDataset::times(DriveAxis drive, double omega, Pauli obs) const {
  std::set<double> ts;
  for (const auto& [k, v] : entries_)
    if (k.drive == drive && k.omega == omega && k.obs == obs) ts.insert(k.time);
  return {ts.begin(), ts.end()};
}

std::vector<double> ShotDataset::omegas() const {
  std::set<double> ws;
  for (const auto& [k, v] : entries_) ws.insert(k.omega);
  return {ws.begin(), ws.end()};
}

std::string init_label(Pauli axis, int sign) { return to_string(axis) + (sign >= 0 ? "+" : "-"); }

void ShotDataset::write_csv(std::ostream& os) const {
  os << "axis,omega_rad_per_us,init,obs,T_us,n_shots,n_plus,p_plus_hat,expectation_hat,variance,seed\n";
  os << std::setprecision(17);
  for (const auto& [k, v] : entries_) {
    os << to_string(k.drive) << ',' << k.omega << ',' << init_label(k.init_axis, k.init_sign) << ','
       << to_string(k.obs) << ',' << k.time << ',' << v.n_shots << ',' << v.n_plus << ',' << v.p_plus_hat << ','
       << v.expectation_hat << ',' << v.variance << ',' << v.seed << '\n';
  }
}

}  // namespace slqns
