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
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "slqns/dynamics.hpp"
#include "slqns/noisegen.hpp"
#include "slqns/spam.hpp"

namespace slqns {

// Times shared by all drive amplitudes, or a per-Omega rule linspace(max(t_min, threshold/|Omega|), t_max, count).
struct TimeSpec {
  std::vector<double> explicit_times;
  int count = 0;
  double t_min = 0.0;
  double t_max = 0.0;
};

struct ProtocolPlan {
  std::vector<int> protocols;
  std::vector<double> omegas;
  TimeSpec times;
  std::vector<int> aligned_n;
  std::int64_t n_shots = 1000;
  std::uint64_t seed = 0;
  bool analytic = false;
  bool skip_aligned = false;
  double long_time_threshold = 10.0;
  // |Omega| below this is rejected unless allow_low_frequency is set. 2.3 kHz by default.
  double low_frequency_cutoff = kTwoPi * 2.3e-3;
  bool allow_low_frequency = false;

  std::vector<double> times_for(double omega) const;
  std::vector<double> aligned_times_for(double omega) const;
  void validate() const;
};

struct RunOptions {
  std::int64_t n_shots = 1000;
  std::uint64_t seed = 0;
  bool analytic = false;
  int jobs = 1;
  double long_time_threshold = 10.0;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string name() const = 0;
  // Exact (or ensemble-averaged) probability of the +1 outcome.
  virtual double probability_plus(const ShotKey& key, const SpamParams& spam) const = 0;
  // Optional batch hook called with every time a drive will be evaluated at.
  virtual void prepare(DriveAxis, double, const std::vector<double>&) const {}

  ShotEntry measure(const ShotKey& key, const SpamParams& spam, const RunOptions& opts) const;
};

class ClosedFormBackend : public Backend {
 public:
  ClosedFormBackend(SphericalSpectraSet spectra, DeviceParams device);
  std::string name() const override { return "closed_form"; }
  double probability_plus(const ShotKey& key, const SpamParams& spam) const override;
  QubitState evolve(const ShotKey& key, const QubitState& rho0) const;

  const SphericalSpectraSet& spectra() const { return spectra_; }
  const DeviceParams& device() const { return device_; }

 private:
  SphericalSpectraSet spectra_;
  DeviceParams device_;
};

// Closed-form dynamics with SPAM switched off regardless of the parameters passed.
class IdealBackend : public ClosedFormBackend {
 public:
  using ClosedFormBackend::ClosedFormBackend;
  std::string name() const override { return "ideal"; }
  double probability_plus(const ShotKey& key, const SpamParams& spam) const override;
};

struct TrajectoryNoise {
  DSAConfig dsa;
  // Toy bath when true, classical H = sz beta(t) otherwise.
  bool toy_bath = true;
  BathConfig bath;
  int realizations = 500;
  std::uint64_t seed = 1;
  double dt = 0.005;
  int jobs = 1;

  // Dephasing spectra realized by this noise model.
  SphericalSpectraSet spectra() const;
};

class TrajectoryBackend : public Backend {
 public:
  explicit TrajectoryBackend(TrajectoryNoise noise);
  std::string name() const override { return "trajectory"; }
  double probability_plus(const ShotKey& key, const SpamParams& spam) const override;
  void prepare(DriveAxis drive, double omega, const std::vector<double>& times) const override;
  // Ensemble mean and standard error of the observable for an ideal initial state.
  EnsembleResult expectation(DriveAxis drive, double omega, const QubitState& rho0, Pauli obs, double T) const;

 private:
  NoiseField field(std::size_t k, double t_end) const;
  const std::vector<Eigen::MatrixXcd>& unitaries(DriveAxis drive, double omega, double T) const;

  TrajectoryNoise noise_;
  mutable std::mutex mutex_;
  // (drive, omega) -> time -> per-realization joint unitary.
  mutable std::map<std::pair<int, double>, std::map<double, std::vector<Eigen::MatrixXcd>>> cache_;
};

ShotDataset run_keys(const Backend& backend, const std::vector<ShotKey>& keys, const SpamParams& spam,
                     const RunOptions& opts);

ShotDataset run_protocol1(const Backend& backend, const SpamParams& spam, double omega, double T,
                          const RunOptions& opts);
ShotDataset run_protocol2(const Backend& backend, const SpamParams& spam, double omega,
                          const std::vector<double>& times, const RunOptions& opts);
ShotDataset run_protocol3(const Backend& backend, const SpamParams& spam, double omega, double T, double aligned_T,
                          const RunOptions& opts);
// An empty aligned grid skips the S_{0,0}(0) path.
ShotDataset run_protocol4(const Backend& backend, const SpamParams& spam, double omega,
                          const std::vector<double>& times, const std::vector<double>& aligned_times,
                          const RunOptions& opts);

// Every protocol of the plan at every drive amplitude.
ShotDataset run_plan(const Backend& backend, const SpamParams& spam, const ProtocolPlan& plan, int jobs = 1);

std::uint64_t key_seed(std::uint64_t seed, const ShotKey& key);

}  // namespace slqns
