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

#include "slqns/noisegen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>

#include "slqns/error.hpp"
#include "slqns/json_io.hpp"
#include "slqns/rng.hpp"

namespace slqns {

double DSAConfig::amplitude(int j) const {
  const double s = spectrum(frequency(j));
  return std::sqrt(d_omega() * s / std::numbers::pi);
}

bool DSAConfig::cutoff_adequate() const { return spectrum(omega_max) <= 1e-3 * spectrum.peak(); }

void DSAConfig::validate() const {
  if (n_omega < 2) throw ConfigError("DSA: n_omega must be >= 2");
  if (!(omega_max > 0.0) || !std::isfinite(omega_max)) throw ConfigError("DSA: omega_max must be positive");
}

DSAConfig DSAConfig::defaults_for(const Lorentzian& l) {
  return {SpectrumModel(l), l.omega0 + 10.0 / l.tc, 512};
}

double NoiseTrajectory::at(double t) const {
  if (times.empty() || t < times.front() - 1e-12 || t > times.back() + 1e-12)
    throw DomainError("trajectory: time outside grid");
  auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.end()) return samples.back();
  if (it == times.begin()) return samples.front();
  const std::size_t i = static_cast<std::size_t>(it - times.begin()) - 1;
  const double f = (t - times[i]) / (times[i + 1] - times[i]);
  return samples[i] + f * (samples[i + 1] - samples[i]);
}

NoiseTrajectory dsa_sample(const DSAConfig& config, const std::vector<double>& time_grid, std::uint64_t seed) {
  config.validate();
  if (time_grid.empty()) throw DomainError("dsa_sample: empty time grid");
  if (!std::is_sorted(time_grid.begin(), time_grid.end())) throw DomainError("dsa_sample: time grid not sorted");

  const int n = config.n_omega;
  CounterRng rng(seed);
  std::vector<double> g(n), a(n), b(n), w(n);
  for (int j = 0; j < n; ++j) {
    g[j] = config.amplitude(j);
    w[j] = config.frequency(j);
  }
  for (int j = 0; j < n; ++j) a[j] = g[j] * rng.normal();
  for (int j = 0; j < n; ++j) b[j] = g[j] * rng.normal();

  NoiseTrajectory out{time_grid, std::vector<double>(time_grid.size()), seed, config};

  const double dt = time_grid.size() > 1 ? time_grid[1] - time_grid[0] : 0.0;
  bool uniform = time_grid.size() > 2;
  for (std::size_t k = 1; uniform && k < time_grid.size(); ++k)
    uniform = std::abs(time_grid[k] - time_grid[k - 1] - dt) <= 1e-12 * std::max(1.0, std::abs(dt));

  if (!uniform) {
    for (std::size_t k = 0; k < time_grid.size(); ++k) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += a[j] * std::cos(w[j] * time_grid[k]) + b[j] * std::sin(w[j] * time_grid[k]);
      out.samples[k] = s;
    }
    return out;
  }

  // Phasor recurrence on uniform grids, re-anchored every 64 steps.
  std::vector<double> c(n), s(n), cr(n), sr(n);
  for (int j = 0; j < n; ++j) {
    cr[j] = std::cos(w[j] * dt);
    sr[j] = std::sin(w[j] * dt);
  }
  for (std::size_t k = 0; k < time_grid.size(); ++k) {
    const double t = time_grid[k];
    if (k % 64 == 0) {
      for (int j = 0; j < n; ++j) {
        c[j] = std::cos(w[j] * t);
        s[j] = std::sin(w[j] * t);
      }
    } else {
      for (int j = 0; j < n; ++j) {
        const double cn = c[j] * cr[j] - s[j] * sr[j];
        s[j] = s[j] * cr[j] + c[j] * sr[j];
        c[j] = cn;
      }
    }
    double acc = 0.0;
    for (int j = 0; j < n; ++j) acc += a[j] * c[j] + b[j] * s[j];
    out.samples[k] = acc;
  }
  return out;
}

double theoretical_autocorrelation(const DSAConfig& config, double tau) {
  config.validate();
  double acc = 0.0;
  for (int j = 0; j < config.n_omega; ++j) {
    const double g = config.amplitude(j);
    acc += g * g * std::cos(config.frequency(j) * tau);
  }
  return acc;
}

std::vector<double> uniform_grid(double t_end, double dt) {
  if (!(t_end >= 0.0) || !(dt > 0.0)) throw DomainError("uniform_grid: need t_end >= 0 and dt > 0");
  const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
  std::vector<double> g(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) g[k] = static_cast<double>(k) * dt;
  return g;
}

void BathConfig::validate() const {
  if (!(couple_x || couple_y || couple_z)) throw ConfigError("bath: at least one coupling must be enabled");
  if (!(lag_gamma >= 0.0) || !std::isfinite(lag_gamma)) throw ConfigError("bath: lag_gamma must be >= 0");
}

void NoiseField::sample(double t, double& x, double& y, double& z) const {
  if (times.empty()) throw DomainError("noise field: empty");
  if (t < times.front() - 1e-12 || t > times.back() + 1e-12) throw DomainError("noise field: time outside grid");
  auto it = std::upper_bound(times.begin(), times.end(), t);
  std::size_t i;
  double f;
  if (it == times.end()) {
    i = times.size() - 1;
    f = 0.0;
  } else if (it == times.begin()) {
    i = 0;
    f = 0.0;
  } else {
    i = static_cast<std::size_t>(it - times.begin()) - 1;
    f = (t - times[i]) / (times[i + 1] - times[i]);
  }
  const std::size_t i1 = std::min(i + 1, times.size() - 1);
  x = bx[i] + f * (bx[i1] - bx[i]);
  y = by[i] + f * (by[i1] - by[i]);
  z = bz[i] + f * (bz[i1] - bz[i]);
}

NoiseField build_toy_bath(const NoiseTrajectory& beta, const BathConfig& bath, const std::vector<double>& times) {
  bath.validate();
  if (times.empty()) throw DomainError("build_toy_bath: empty time grid");
  if (beta.times.empty() || times.front() < beta.times.front() - 1e-12 ||
      times.back() + bath.lag_gamma > beta.times.back() + 1e-12)
    throw DomainError("build_toy_bath: lag exceeds trajectory coverage");
  NoiseField f;
  f.toy_bath = true;
  f.times = times;
  f.correlation_time = beta.config.spectrum.correlation_time();
  const std::size_t n = times.size();
  f.bx.assign(n, 0.0);
  f.by.assign(n, 0.0);
  f.bz.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double b0 = beta.at(times[k]);
    if (bath.couple_x) f.bx[k] = b0;
    if (bath.couple_y) f.by[k] = bath.lag_gamma == 0.0 ? b0 : beta.at(times[k] + bath.lag_gamma);
    if (bath.couple_z) f.bz[k] = b0;
  }
  return f;
}

NoiseField build_toy_bath(const NoiseTrajectory& beta, const BathConfig& bath) {
  std::vector<double> times;
  for (double t : beta.times)
    if (t + bath.lag_gamma <= beta.times.back() + 1e-12) times.push_back(t);
  return build_toy_bath(beta, bath, times);
}

NoiseField classical_dephasing(const NoiseTrajectory& beta) {
  NoiseField f;
  f.times = beta.times;
  f.bx.assign(beta.times.size(), 0.0);
  f.by.assign(beta.times.size(), 0.0);
  f.bz = beta.samples;
  f.correlation_time = beta.config.spectrum.correlation_time();
  return f;
}

SphericalSpectraSet target_spectra(const DSAConfig& config, double gamma, BathVariant variant) {
  ComponentSpectrum c;
  c.shape = config.spectrum;
  c.w_plus = variant == BathVariant::MainText ? 1.0 : 1.5;
  c.w_minus = 1.0;
  c.lag = gamma;
  return SphericalSpectraSet::dephasing_only(c);
}

SphericalSpectraSet classical_target_spectra(const DSAConfig& config) {
  auto set = SphericalSpectraSet::dephasing_only(ComponentSpectrum{config.spectrum, 2.0, 0.0, 0.0});
  set.set_classical(true);
  return set;
}

void write_trajectory(const NoiseTrajectory& traj, const std::string& csv_path) {
  std::ofstream csv(csv_path);
  if (!csv) throw Error("cannot open " + csv_path);
  csv << "t_us,beta\n" << std::setprecision(17);
  for (std::size_t k = 0; k < traj.times.size(); ++k) csv << traj.times[k] << ',' << traj.samples[k] << '\n';
  nlohmann::json side = {{"seed", traj.seed},
                         {"omega_max", traj.config.omega_max},
                         {"n_omega", traj.config.n_omega},
                         {"spectrum", to_json(traj.config.spectrum)},
                         {"n_samples", traj.times.size()}};
  std::ofstream js(csv_path + ".json");
  if (!js) throw Error("cannot open " + csv_path + ".json");
  js << side.dump(2) << '\n';
}

}  // namespace slqns
