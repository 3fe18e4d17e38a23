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

#include <complex>
#include <functional>
#include <map>
#include <numbers>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace slqns {

using cplx = std::complex<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Ordinary frequency in MHz <-> angular frequency in rad/us.
inline double mhz_to_rad_per_us(double f_mhz) { return kTwoPi * f_mhz; }
inline double rad_per_us_to_mhz(double omega) { return omega / kTwoPi; }

struct Lorentzian {
  double omega0 = 0.0;
  double tc = 1.0;
  double amplitude = 1.0;
};

struct White {
  double level = 0.0;
};

struct Tabulated {
  std::vector<double> grid;
  std::vector<double> values;
};

enum class SpectrumKind { Lorentzian, White, Tabulated };

class SpectrumModel {
 public:
  SpectrumModel() : SpectrumModel(White{}) {}
  SpectrumModel(Lorentzian l);
  SpectrumModel(White w);
  SpectrumModel(Tabulated t);

  SpectrumKind kind() const;
  double operator()(double omega) const;
  double peak() const;
  // Shortest spectral feature scale, used to derive a correlation time.
  double correlation_time() const;

  const Lorentzian* lorentzian() const { return std::get_if<Lorentzian>(&model_); }
  const White* white() const { return std::get_if<White>(&model_); }
  const Tabulated* tabulated() const { return std::get_if<Tabulated>(&model_); }

 private:
  std::variant<Lorentzian, White, Tabulated> model_;
};

double evaluate_spectrum(const SpectrumModel& model, double omega);

std::string to_string(SpectrumKind kind);

// Tabulates `f` on a uniform grid over [lo, hi].
SpectrumModel tabulate(const std::function<double(double)>& f, double lo, double hi, std::size_t n);

struct ClassicalQuantum {
  cplx plus;
  cplx minus;
};

ClassicalQuantum split_classical_quantum(cplx s_pos, cplx s_neg_mirror);
inline cplx reconstruct(const ClassicalQuantum& cq) { return 0.5 * (cq.plus + cq.minus); }

struct SphericalTriple {
  cplx s00;
  cplx s_m1p1;
  cplx s_p1m1;
};

SphericalTriple spherical_from_cartesian(cplx sxx, cplx syy, cplx sxy, cplx syx, cplx szz);

// S(w) = 1/2 [w_plus shape(w) + w_minus shape(w) sin(lag w)]. For even shapes the pair split
// gives S+ = w_plus shape and S- = w_minus shape sin(lag w).
struct ComponentSpectrum {
  SpectrumModel shape;
  double w_plus = 1.0;
  double w_minus = 0.0;
  double lag = 0.0;

  double operator()(double omega) const;
};

using IndexPair = std::pair<int, int>;

class SphericalSpectraSet {
 public:
  void set(int alpha, int beta, ComponentSpectrum c);
  bool has(int alpha, int beta) const;
  const ComponentSpectrum& component(int alpha, int beta) const;
  const std::map<IndexPair, ComponentSpectrum>& components() const { return components_; }

  // Missing components evaluate to zero.
  cplx value(int alpha, int beta, double omega) const;
  double splus(int alpha, int beta, double omega) const;
  double sminus(int alpha, int beta, double omega) const;

  bool classical() const { return classical_; }
  void set_classical(bool flag);

  void validate() const;

  static SphericalSpectraSet dephasing_only(ComponentSpectrum s00);
  static SphericalSpectraSet multi_axis(ComponentSpectrum s00, ComponentSpectrum transverse);

 private:
  std::map<IndexPair, ComponentSpectrum> components_;
  bool classical_ = false;
};

// Max |[S±_{a,b}(w)]* - S±_{-a,-b}(w)| over the grid and all mirrored pairs.
double conjugation_symmetry_residual(const SphericalSpectraSet& set, const std::vector<double>& grid);

struct DeviceParams {
  double omega_q = kTwoPi * 5000.0;

  void validate() const;
  void check_drive(double omega) const;
};

}  // namespace slqns
