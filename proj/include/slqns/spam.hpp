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

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <vector>

#include "slqns/dynamics.hpp"

namespace slqns {

struct SpamParams {
  double alpha_sp = 1.0;
  cplx c = 0.0;
  double alpha_m = 1.0;
  double delta = 0.0;

  double alpha() const { return alpha_sp * alpha_m; }
  void validate() const;
  bool ideal() const { return alpha_sp == 1.0 && c == cplx(0.0) && alpha_m == 1.0 && delta == 0.0; }
};

QubitState faulty_state(Pauli u, int sign, const SpamParams& p);

struct Probabilities {
  double plus = 0.0;
  double minus = 0.0;
};

Probabilities povm_probabilities(const QubitState& rho, Pauli u, const SpamParams& p);

// POVM element for outcome +1 along u.
Eigen::Matrix2cd povm_plus(Pauli u, const SpamParams& p);

enum class SpamMode { XDriveX, ZDriveZ, ZDriveX };

double spam_corrupted_expectation(double ideal, double decay_factor, int sign, const SpamParams& p, SpamMode mode);

struct ShotKey {
  DriveAxis drive = DriveAxis::XPlus;
  double omega = 0.0;
  Pauli init_axis = Pauli::X;
  int init_sign = 1;
  Pauli obs = Pauli::X;
  double time = 0.0;

  auto operator<=>(const ShotKey&) const = default;
};

struct ShotEntry {
  std::int64_t n_shots = 0;
  // -1 for analytic (unsampled) entries.
  std::int64_t n_plus = -1;
  double p_plus_hat = 0.5;
  double expectation_hat = 0.0;
  double variance = 0.0;
  std::uint64_t seed = 0;

  bool analytic() const { return n_plus < 0; }
  // sqrt(variance), floored at 1/n_shots.
  double std_error() const;
};

// Var(e) = 4 P+ P- / n for e = 2 P+ - 1.
ShotEntry sample_shots(double p_plus, std::int64_t n_shots, std::uint64_t seed);
ShotEntry analytic_entry(double p_plus, std::int64_t n_shots);

class ShotDataset {
 public:
  void insert(const ShotKey& key, const ShotEntry& entry);
  void merge(const ShotDataset& other);
  bool contains(const ShotKey& key) const { return entries_.count(key) > 0; }
  const ShotEntry& at(const ShotKey& key) const;
  const std::map<ShotKey, ShotEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  // Sorted distinct times of the entries matching drive, omega and observable.
  std::vector<double> times(DriveAxis drive, double omega, Pauli obs) const;
  std::vector<double> omegas() const;

  void write_csv(std::ostream& os) const;

 private:
  std::map<ShotKey, ShotEntry> entries_;
};

std::string init_label(Pauli axis, int sign);

}  // namespace slqns
