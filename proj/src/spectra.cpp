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

#include "slqns/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "slqns/error.hpp"

namespace slqns {

namespace {

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw DomainError(std::string(what) + ": non-finite argument");
}

}  // namespace

SpectrumModel::SpectrumModel(Lorentzian l) : model_(l) {
  if (!(l.tc > 0.0) || !std::isfinite(l.tc)) throw ConfigError("Lorentzian: tc must be positive");
  if (!std::isfinite(l.omega0)) throw ConfigError("Lorentzian: omega0 must be finite");
  if (!(l.amplitude >= 0.0) || !std::isfinite(l.amplitude)) throw ConfigError("Lorentzian: amplitude must be >= 0");
}

SpectrumModel::SpectrumModel(White w) : model_(w) {
  if (!(w.level >= 0.0) || !std::isfinite(w.level)) throw ConfigError("White: level must be >= 0");
}

SpectrumModel::SpectrumModel(Tabulated t) : model_(std::move(t)) {
  const auto& tab = std::get<Tabulated>(model_);
  if (tab.grid.size() < 2 || tab.grid.size() != tab.values.size())
    throw ConfigError("Tabulated: grid and values need equal length >= 2");
  for (std::size_t i = 0; i < tab.grid.size(); ++i) {
    if (!std::isfinite(tab.grid[i]) || !std::isfinite(tab.values[i])) throw ConfigError("Tabulated: non-finite entry");
    if (tab.values[i] < 0.0) throw ConfigError("Tabulated: values must be >= 0");
    if (i > 0 && !(tab.grid[i] > tab.grid[i - 1])) throw ConfigError("Tabulated: grid must be strictly increasing");
  }
}

SpectrumKind SpectrumModel::kind() const {
  switch (model_.index()) {
    case 0: return SpectrumKind::Lorentzian;
    case 1: return SpectrumKind::White;
    default: return SpectrumKind::Tabulated;
  }
}

double SpectrumModel::operator()(double omega) const {
  require_finite(omega, "evaluate_spectrum");
  if (auto* l = lorentzian()) {
    const double x = l->tc * (std::abs(omega) - l->omega0);
    return l->amplitude / (1.0 + x * x);
  }
  if (auto* w = white()) return w->level;
  const auto& t = *tabulated();
  if (omega < t.grid.front() || omega > t.grid.back()) return 0.0;
  auto it = std::upper_bound(t.grid.begin(), t.grid.end(), omega);
  if (it == t.grid.end()) return t.values.back();
  const std::size_t i = static_cast<std::size_t>(it - t.grid.begin()) - 1;
  const double f = (omega - t.grid[i]) / (t.grid[i + 1] - t.grid[i]);
  return t.values[i] + f * (t.values[i + 1] - t.values[i]);
}

double SpectrumModel::peak() const {
  if (auto* l = lorentzian()) return l->amplitude;
  if (auto* w = white()) return w->level;
  const auto& v = tabulated()->values;
  return *std::max_element(v.begin(), v.end());
}

double SpectrumModel::correlation_time() const {
  if (auto* l = lorentzian()) return l->tc;
  if (white()) return 0.0;
  const auto& g = tabulated()->grid;
  double dmin = g[1] - g[0];
  for (std::size_t i = 2; i < g.size(); ++i) dmin = std::min(dmin, g[i] - g[i - 1]);
  return 1.0 / (g.back() - g.front() + dmin);
}

double evaluate_spectrum(const SpectrumModel& model, double omega) { return model(omega); }

std::string to_string(SpectrumKind kind) {
  switch (kind) {
    case SpectrumKind::Lorentzian: return "lorentzian";
    case SpectrumKind::White: return "white";
    case SpectrumKind::Tabulated: return "tabulated";
  }
  return "unknown";
}

SpectrumModel tabulate(const std::function<double(double)>& f, double lo, double hi, std::size_t n) {
  if (n < 2 || !(hi > lo)) throw DomainError("tabulate: need n >= 2 and hi > lo");
  Tabulated t;
  t.grid.resize(n);
  t.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    t.grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    t.values[i] = f(t.grid[i]);
  }
  return SpectrumModel(std::move(t));
}

ClassicalQuantum split_classical_quantum(cplx s_pos, cplx s_neg_mirror) {
  return {s_pos + s_neg_mirror, s_pos - s_neg_mirror};
}

SphericalTriple spherical_from_cartesian(cplx sxx, cplx syy, cplx sxy, cplx syx, cplx szz) {
  const cplx i(0.0, 1.0);
  return {szz, sxx + syy + i * (sxy - syx), sxx + syy - i * (sxy - syx)};
}

double ComponentSpectrum::operator()(double omega) const {
  const double s = shape(omega);
  return 0.5 * (w_plus * s + w_minus * s * std::sin(lag * omega));
}

void SphericalSpectraSet::set(int alpha, int beta, ComponentSpectrum c) {
  if (alpha < -1 || alpha > 1 || beta < -1 || beta > 1) throw ConfigError("spherical index out of {-1,0,1}");
  components_[{alpha, beta}] = std::move(c);
}

bool SphericalSpectraSet::has(int alpha, int beta) const { return components_.count({alpha, beta}) > 0; }

const ComponentSpectrum& SphericalSpectraSet::component(int alpha, int beta) const {
  auto it = components_.find({alpha, beta});
  if (it == components_.end()) {
    std::ostringstream os;
    os << "spectra set has no component (" << alpha << "," << beta << ")";
    throw ConfigError(os.str());
  }
  return it->second;
}

cplx SphericalSpectraSet::value(int alpha, int beta, double omega) const {
  auto it = components_.find({alpha, beta});
  if (it == components_.end()) return 0.0;
  return it->second(omega);
}

double SphericalSpectraSet::splus(int alpha, int beta, double omega) const {
  return split_classical_quantum(value(alpha, beta, omega), value(beta, alpha, -omega)).plus.real();
}

double SphericalSpectraSet::sminus(int alpha, int beta, double omega) const {
  return split_classical_quantum(value(alpha, beta, omega), value(beta, alpha, -omega)).minus.real();
}

void SphericalSpectraSet::set_classical(bool flag) {
  classical_ = flag;
  if (flag) validate();
}

void SphericalSpectraSet::validate() const {
  for (const auto& [idx, c] : components_) {
    if (!std::isfinite(c.w_plus) || !std::isfinite(c.w_minus) || !std::isfinite(c.lag))
      throw ConfigError("spectra set: non-finite component weights");
    if (c.w_plus < 0.0) throw ConfigError("spectra set: w_plus must be >= 0");
    if (std::abs(c.w_minus) > c.w_plus) throw ConfigError("spectra set: |w_minus| > w_plus gives negative spectra");
    const IndexPair mirror{-idx.first, -idx.second};
    if (idx.first != idx.second && idx != mirror && components_.count(mirror) == 0)
      throw ConfigError("spectra set: component (" + std::to_string(idx.first) + "," + std::to_string(idx.second) +
                        ") stored without its mirror pair");
    if (classical_ && c.w_minus != 0.0 && c.lag != 0.0)
      throw ConfigError("spectra set flagged classical has a nonzero quantum part");
  }
}

SphericalSpectraSet SphericalSpectraSet::dephasing_only(ComponentSpectrum s00) {
  SphericalSpectraSet s;
  s.set(0, 0, std::move(s00));
  s.validate();
  return s;
}

SphericalSpectraSet SphericalSpectraSet::multi_axis(ComponentSpectrum s00, ComponentSpectrum transverse) {
  SphericalSpectraSet s;
  s.set(0, 0, std::move(s00));
  s.set(1, -1, transverse);
  s.set(-1, 1, std::move(transverse));
  s.validate();
  return s;
}

double conjugation_symmetry_residual(const SphericalSpectraSet& set, const std::vector<double>& grid) {
  double worst = 0.0;
  for (const auto& [idx, c] : set.components()) {
    const int a = idx.first, b = idx.second;
    if (!set.has(-a, -b)) continue;
    for (double w : grid) {
      const ClassicalQuantum lhs = split_classical_quantum(set.value(a, b, w), set.value(b, a, -w));
      const ClassicalQuantum rhs = split_classical_quantum(set.value(-a, -b, w), set.value(-b, -a, -w));
      worst = std::max(worst, std::abs(std::conj(lhs.plus) - rhs.plus));
      worst = std::max(worst, std::abs(std::conj(lhs.minus) - rhs.minus));
    }
  }
  return worst;
}

void DeviceParams::validate() const {
  if (!(omega_q > 0.0) || !std::isfinite(omega_q)) throw ConfigError("device: omega_q must be positive");
}

void DeviceParams::check_drive(double omega) const {
  validate();
  if (std::abs(omega) / omega_q > 1e-2) {
    std::ostringstream os;
    os << "device: |Omega|/omega_q = " << std::abs(omega) / omega_q << " exceeds 1e-2";
    throw ConfigError(os.str());
  }
}

}  // namespace slqns
