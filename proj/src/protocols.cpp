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

#include "slqns/protocols.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>
#include <sstream>

#include "slqns/error.hpp"
#include "slqns/parallel.hpp"
#include "slqns/rng.hpp"

namespace slqns {

std::vector<double> ProtocolPlan::times_for(double omega) const {
  if (!times.explicit_times.empty()) return times.explicit_times;
  if (times.count < 1) throw ConfigError("plan: no times given");
  const double lo = std::max(times.t_min, long_time_threshold / std::abs(omega));
  if (times.count == 1) return {lo};
  if (!(times.t_max > lo)) {
    std::ostringstream os;
    os << "plan: t_max " << times.t_max << " us not above the first admissible time " << lo << " us at Omega "
       << omega;
    throw ConfigError(os.str());
  }
  std::vector<double> out(static_cast<std::size_t>(times.count));
  for (int j = 0; j < times.count; ++j) out[j] = lo + (times.t_max - lo) * j / (times.count - 1);
  return out;
}

std::vector<double> ProtocolPlan::aligned_times_for(double omega) const {
  if (skip_aligned) return {};
  if (!aligned_n.empty()) return frame_aligned_times(omega, aligned_n);
  // One aligned time per scheduled time, nearest admissible period count, deduplicated upward.
  const double period = kTwoPi / std::abs(omega);
  const int n_min = static_cast<int>(std::ceil(long_time_threshold / kTwoPi - 1e-12));
  std::vector<int> ns;
  int last = 0;
  for (double t : times_for(omega)) {
    int n = std::max({n_min, 1, static_cast<int>(std::lround(t / period))});
    if (n <= last) n = last + 1;
    ns.push_back(n);
    last = n;
  }
  return frame_aligned_times(omega, ns);
}

void ProtocolPlan::validate() const {
  if (protocols.empty()) throw ConfigError("plan: no protocol selected");
  for (int p : protocols)
    if (p < 1 || p > 4) throw ConfigError("plan: protocol must be 1, 2, 3 or 4");
  if (omegas.empty()) throw ConfigError("plan: empty omega list");
  if (n_shots < 1) throw ConfigError("plan: shots must be >= 1");
  if (!(long_time_threshold > 0.0)) throw ConfigError("plan: long-time threshold must be positive");
  const bool robust = std::count(protocols.begin(), protocols.end(), 2) + std::count(protocols.begin(), protocols.end(), 4) > 0;
  for (double w : omegas) {
    std::ostringstream where;
    where << " (Omega = " << w << " rad/us)";
    if (!std::isfinite(w) || w == 0.0) throw ConfigError("plan: Omega must be finite and nonzero" + where.str());
    if (std::abs(w) < low_frequency_cutoff && !allow_low_frequency)
      throw ConfigError("plan: |Omega| below the low-frequency exclusion threshold" + where.str());
    const auto ts = times_for(w);
    for (double t : ts)
      if (!(std::abs(w) * t >= long_time_threshold * (1.0 - 1e-12))) {
        std::ostringstream os;
        os << "plan: |Omega| T = " << std::abs(w) * t << " below long-time threshold " << long_time_threshold
           << where.str();
        throw ConfigError(os.str());
      }
    std::set<double> distinct(ts.begin(), ts.end());
    if (distinct.size() != ts.size()) throw ConfigError("plan: duplicate times" + where.str());
    if (robust && ts.size() < 3) throw ConfigError("plan: protocols 2 and 4 need at least 3 distinct times" + where.str());
    for (double t : aligned_times_for(w))
      if (std::abs(w) * t < long_time_threshold * (1.0 - 1e-12))
        throw ConfigError("plan: aligned time violates the long-time threshold" + where.str());
  }
  for (int n : aligned_n)
    if (n < 1) throw ConfigError("plan: aligned_n entries must be >= 1");
}

ShotEntry Backend::measure(const ShotKey& key, const SpamParams& spam, const RunOptions& opts) const {
  const double p = probability_plus(key, spam);
  const std::uint64_t seed = key_seed(opts.seed, key);
  ShotEntry e = opts.analytic ? analytic_entry(p, opts.n_shots) : sample_shots(p, opts.n_shots, seed);
  e.seed = seed;
  return e;
}

ClosedFormBackend::ClosedFormBackend(SphericalSpectraSet spectra, DeviceParams device)
    : spectra_(std::move(spectra)), device_(device) {
  spectra_.validate();
  device_.validate();
}

QubitState ClosedFormBackend::evolve(const ShotKey& key, const QubitState& rho0) const {
  if (key.drive == DriveAxis::XPlus)
    return tcl_evolve_x_drive(compute_AB(spectra_, key.omega, device_), key.omega, rho0, key.time);
  const ZDriveRates r = z_drive_rates(spectra_, key.drive, key.omega, device_);
  const double eff = key.drive == DriveAxis::ZMinus ? -key.omega : key.omega;
  return tcl_evolve_z_drive(r, eff, rho0, key.time);
}

double ClosedFormBackend::probability_plus(const ShotKey& key, const SpamParams& spam) const {
  const QubitState rho0 = faulty_state(key.init_axis, key.init_sign, spam);
  return povm_probabilities(evolve(key, rho0), key.obs, spam).plus;
}

double IdealBackend::probability_plus(const ShotKey& key, const SpamParams&) const {
  return ClosedFormBackend::probability_plus(key, SpamParams{});
}

SphericalSpectraSet TrajectoryNoise::spectra() const {
  if (!toy_bath) return classical_target_spectra(dsa);
  return target_spectra(dsa, bath.lag_gamma, bath.couple_z ? BathVariant::ThreeAxis : BathVariant::MainText);
}

TrajectoryBackend::TrajectoryBackend(TrajectoryNoise noise) : noise_(std::move(noise)) {
  noise_.dsa.validate();
  noise_.bath.validate();
  if (noise_.realizations < 2) throw ConfigError("trajectory: need at least 2 realizations");
  if (!(noise_.dt > 0.0)) throw ConfigError("trajectory: dt must be positive");
}

NoiseField TrajectoryBackend::field(std::size_t k, double t_end) const {
  const double lag = noise_.toy_bath ? noise_.bath.lag_gamma : 0.0;
  const auto grid = uniform_grid(t_end + lag + noise_.dt, noise_.dt);
  const NoiseTrajectory beta = dsa_sample(noise_.dsa, grid, derive_seed(noise_.seed, k));
  if (!noise_.toy_bath) return classical_dephasing(beta);
  return build_toy_bath(beta, noise_.bath, uniform_grid(t_end, noise_.dt));
}

void TrajectoryBackend::prepare(DriveAxis drive, double omega, const std::vector<double>& times) const {
  std::vector<double> todo;
  {
    std::lock_guard lock(mutex_);
    auto& slot = cache_[{static_cast<int>(drive), omega}];
    for (double t : times)
      if (!slot.count(t)) todo.push_back(t);
  }
  if (todo.empty()) return;
  std::sort(todo.begin(), todo.end());
  todo.erase(std::unique(todo.begin(), todo.end()), todo.end());
  const DriveConfig cfg{drive, omega, todo.back(), 0, 0.0};
  double limit = 0.05 / std::abs(omega);
  const double tc = noise_.dsa.spectrum.correlation_time();
  if (tc > 0.0) limit = std::min(limit, 0.05 * tc);
  if (noise_.dt > limit * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "trajectory: dt = " << noise_.dt << " exceeds min(0.05/|Omega|, 0.05 tc) = " << limit;
    throw DomainError(os.str());
  }
  const auto n = static_cast<std::size_t>(noise_.realizations);
  std::vector<std::vector<Eigen::MatrixXcd>> per(n);
  parallel_for(n, noise_.jobs, [&](std::size_t k) {
    per[k] = propagate(cfg.axis, cfg.omega, field(k, todo.back()), todo, noise_.dt);
  });
  std::lock_guard lock(mutex_);
  auto& slot = cache_[{static_cast<int>(drive), omega}];
  for (std::size_t i = 0; i < todo.size(); ++i) {
    std::vector<Eigen::MatrixXcd> us(n);
    for (std::size_t k = 0; k < n; ++k) us[k] = per[k][i];
    slot[todo[i]] = std::move(us);
  }
}

const std::vector<Eigen::MatrixXcd>& TrajectoryBackend::unitaries(DriveAxis drive, double omega, double T) const {
  prepare(drive, omega, {T});
  std::lock_guard lock(mutex_);
  return cache_.at({static_cast<int>(drive), omega}).at(T);
}

double TrajectoryBackend::probability_plus(const ShotKey& key, const SpamParams& spam) const {
  const QubitState rho0 = faulty_state(key.init_axis, key.init_sign, spam);
  const auto& us = unitaries(key.drive, key.omega, key.time);
  QubitState mean;
  mean.rho.setZero();
  for (const auto& u : us) mean.rho += apply_joint(u, rho0, noise_.toy_bath).rho;
  mean.rho /= static_cast<double>(us.size());
  return povm_probabilities(mean, key.obs, spam).plus;
}

EnsembleResult TrajectoryBackend::expectation(DriveAxis drive, double omega, const QubitState& rho0, Pauli obs,
                                              double T) const {
  const auto& us = unitaries(drive, omega, T);
  std::vector<double> v;
  v.reserve(us.size());
  for (const auto& u : us) v.push_back(apply_joint(u, rho0, noise_.toy_bath).expectation(obs));
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()))};
}

std::uint64_t key_seed(std::uint64_t seed, const ShotKey& key) {
  std::uint64_t h = splitmix64(static_cast<std::uint64_t>(key.drive) + 1);
  h = splitmix64(h ^ std::bit_cast<std::uint64_t>(key.omega));
  h = splitmix64(h ^ (static_cast<std::uint64_t>(key.init_axis) * 4 + static_cast<std::uint64_t>(key.init_sign + 1)));
  h = splitmix64(h ^ static_cast<std::uint64_t>(key.obs));
  h = splitmix64(h ^ std::bit_cast<std::uint64_t>(key.time));
  return derive_seed(seed, h);
}

ShotDataset run_keys(const Backend& backend, const std::vector<ShotKey>& keys, const SpamParams& spam,
                     const RunOptions& opts) {
  spam.validate();
  for (const auto& k : keys)
    if (std::abs(k.omega) * k.time < opts.long_time_threshold * (1.0 - 1e-12)) {
      std::ostringstream os;
      os << "protocol: |Omega| T = " << std::abs(k.omega) * k.time << " below long-time threshold "
         << opts.long_time_threshold;
      throw ConfigError(os.str());
    }
  std::map<std::pair<int, double>, std::vector<double>> batches;
  for (const auto& k : keys) batches[{static_cast<int>(k.drive), k.omega}].push_back(k.time);
  for (const auto& [dk, ts] : batches) backend.prepare(static_cast<DriveAxis>(dk.first), dk.second, ts);
  std::vector<ShotEntry> entries(keys.size());
  parallel_for(keys.size(), opts.jobs, [&](std::size_t i) { entries[i] = backend.measure(keys[i], spam, opts); });
  ShotDataset ds;
  for (std::size_t i = 0; i < keys.size(); ++i) ds.insert(keys[i], entries[i]);
  return ds;
}

namespace {

void push_pair(std::vector<ShotKey>& keys, DriveAxis drive, double omega, Pauli init, Pauli obs, double t) {
  keys.push_back({drive, omega, init, 1, obs, t});
  keys.push_back({drive, omega, init, -1, obs, t});
}

void check_series(const std::vector<double>& times) {
  std::set<double> distinct(times.begin(), times.end());
  if (distinct.size() != times.size()) throw ConfigError("protocol: duplicate times");
  if (times.size() < 3) throw ConfigError("protocol: at least 3 distinct times required");
}

void check_aligned(double omega, double t) {
  const double n = std::abs(omega) * t / kTwoPi;
  if (std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, n) || std::round(n) < 1)
    throw ConfigError("protocol: aligned time violates the frame-alignment condition");
}

}  // namespace

ShotDataset run_protocol1(const Backend& backend, const SpamParams& spam, double omega, double T,
                          const RunOptions& opts) {
  std::vector<ShotKey> keys;
  push_pair(keys, DriveAxis::XPlus, omega, Pauli::X, Pauli::X, T);
  return run_keys(backend, keys, spam, opts);
}

ShotDataset run_protocol2(const Backend& backend, const SpamParams& spam, double omega,
                          const std::vector<double>& times, const RunOptions& opts) {
  check_series(times);
  std::vector<ShotKey> keys;
  for (double t : times) push_pair(keys, DriveAxis::XPlus, omega, Pauli::X, Pauli::X, t);
  return run_keys(backend, keys, spam, opts);
}

ShotDataset run_protocol3(const Backend& backend, const SpamParams& spam, double omega, double T, double aligned_T,
                          const RunOptions& opts) {
  check_aligned(omega, aligned_T);
  std::vector<ShotKey> keys;
  push_pair(keys, DriveAxis::ZPlus, omega, Pauli::Z, Pauli::Z, T);
  push_pair(keys, DriveAxis::ZPlus, omega, Pauli::X, Pauli::X, aligned_T);
  push_pair(keys, DriveAxis::ZMinus, omega, Pauli::Z, Pauli::Z, T);
  push_pair(keys, DriveAxis::XPlus, omega, Pauli::X, Pauli::X, T);
  return run_keys(backend, keys, spam, opts);
}

ShotDataset run_protocol4(const Backend& backend, const SpamParams& spam, double omega,
                          const std::vector<double>& times, const std::vector<double>& aligned_times,
                          const RunOptions& opts) {
  check_series(times);
  if (!aligned_times.empty()) check_series(aligned_times);
  std::vector<ShotKey> keys;
  for (double t : times) {
    push_pair(keys, DriveAxis::ZPlus, omega, Pauli::Z, Pauli::Z, t);
    push_pair(keys, DriveAxis::ZMinus, omega, Pauli::Z, Pauli::Z, t);
    push_pair(keys, DriveAxis::XPlus, omega, Pauli::X, Pauli::X, t);
  }
  for (double t : aligned_times) {
    check_aligned(omega, t);
    push_pair(keys, DriveAxis::ZPlus, omega, Pauli::X, Pauli::X, t);
  }
  return run_keys(backend, keys, spam, opts);
}

ShotDataset run_plan(const Backend& backend, const SpamParams& spam, const ProtocolPlan& plan, int jobs) {
  plan.validate();
  RunOptions opts{plan.n_shots, plan.seed, plan.analytic, 1, plan.long_time_threshold};
  std::vector<ShotDataset> parts(plan.omegas.size());
  parallel_for(plan.omegas.size(), jobs, [&](std::size_t i) {
    const double w = plan.omegas[i];
    const auto ts = plan.times_for(w);
    const auto aligned = plan.aligned_times_for(w);
    for (int p : plan.protocols) {
      switch (p) {
        case 1:
          for (double t : ts) parts[i].merge(run_protocol1(backend, spam, w, t, opts));
          break;
        case 2: parts[i].merge(run_protocol2(backend, spam, w, ts, opts)); break;
        case 3:
          if (aligned.empty()) throw ConfigError("plan: protocol 3 needs aligned times");
          for (std::size_t j = 0; j < ts.size(); ++j)
            parts[i].merge(run_protocol3(backend, spam, w, ts[j], aligned[std::min(j, aligned.size() - 1)], opts));
          break;
        case 4: parts[i].merge(run_protocol4(backend, spam, w, ts, aligned, opts)); break;
      }
    }
  });
  ShotDataset all;
  for (const auto& p : parts) all.merge(p);
  return all;
}

}  // namespace slqns
