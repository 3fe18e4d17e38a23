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

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "slqns/spam.hpp"

namespace slqns {

enum class Method { Standard, RobustLinear, RobustNonlinear };

std::string to_string(Method m);

// Frequency argument omega_sign * Omega + omega_q_sign * omega_q.
struct FrequencyArg {
  int omega_sign = 1;
  int omega_q_sign = 0;

  std::string label() const;
  double value(double omega, double omega_q) const { return omega_sign * omega + omega_q_sign * omega_q; }
  bool operator==(const FrequencyArg&) const = default;
};

struct SpectralEstimate {
  // e.g. "S+_{1,-1}".
  std::string component;
  FrequencyArg argument;
  // Drive amplitude the estimate belongs to.
  double omega = 0.0;
  double value = 0.0;
  double std_error = 0.0;
  Method method = Method::Standard;

  std::string label() const { return component + "(" + argument.label() + ")"; }
  double ci95() const { return 1.959963984540054 * std_error; }
};

struct RegressionResult {
  double slope = 0.0;
  double intercept = 0.0;
  // Order (intercept, slope).
  Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();
  std::vector<double> residuals;
  std::vector<double> weights;
  double chi2 = 0.0;

  double slope_se() const { return std::sqrt(covariance(1, 1)); }
  double intercept_se() const { return std::sqrt(covariance(0, 0)); }
};

RegressionResult weighted_linreg(const std::vector<double>& x, const std::vector<double>& y,
                                 const std::vector<double>& sigma);

struct SingleAxisSpectra {
  double splus = 0.0;
  double sminus = 0.0;
};

SingleAxisSpectra invert_single_axis(double exp_plus, double exp_minus, double T);

// Generic pair inversion: D = e+ - e- = 2 exp(-k R T), (e+ + e-)/2 = sign (Q/R)(1 - exp(-k R T)).
// x drive: k = 1, sign = +1. +z drive: k = 2, sign = -1. -z drive: k = 2, sign = +1.
SingleAxisSpectra invert_pair(double exp_plus, double exp_minus, double T, double k, double sign);

// Error-free single-axis forward model for sx measured from faulty |x+-> (sign = +-1).
double single_axis_forward(double splus, double sminus, const SpamParams& spam, double T, int sign);

// Covariance of f(x) from a diagonal input covariance by central differences.
Eigen::MatrixXd delta_method(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& x, const Eigen::VectorXd& variances, double h = 1e-6);

// Standard Protocol-1 estimates with delta-method errors.
std::vector<SpectralEstimate> standard_single_axis(const ShotDataset& data, double omega, double T);

struct SpamEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::string warning;
};

struct RobustSingleAxisResult {
  SpectralEstimate splus;
  // S- (nonlinear path) or alpha_M S- (linear path).
  SpectralEstimate sminus;
  SpamEstimate alpha;
  SpamEstimate alpha_m;
  SpamEstimate delta;
  Method method = Method::RobustLinear;
  int iterations = 0;
  double chi2 = 0.0;
};

// Small-S+T path. Throws LinearizationError if max S+ T_j > guard.
RobustSingleAxisResult robust_single_axis_linearized(const ShotDataset& data, double omega, double guard = 0.1);

struct NonlinearOptions {
  int max_iterations = 200;
  double tolerance = 1e-9;
  double initial_damping = 1e-3;
};

RobustSingleAxisResult robust_single_axis_nonlinear(const ShotDataset& data, double omega,
                                                    const NonlinearOptions& opts = {});

// Model prediction of the nonlinear single-axis fit, parameters (S+, S-, alpha_M, delta).
double robust_single_axis_model(const Eigen::Vector4d& theta, double T, int sign);

struct MultiAxisResult {
  std::vector<SpectralEstimate> estimates;
  SpectralEstimate A;
  SpectralEstimate B;
  SpamEstimate alpha_m;
  SpamEstimate delta;
  // Per-channel intercept-derived alpha values: x, z+, z-, aligned.
  std::vector<SpamEstimate> channel_alpha;
  std::vector<std::string> notes;

  const SpectralEstimate* find(const std::string& component, FrequencyArg arg) const;
};

// Protocol-3 inversion at one (T, aligned T). Without aligned data S_{0,0}(0) is omitted.
MultiAxisResult invert_multi_axis(const ShotDataset& data, double omega, double T, std::optional<double> aligned_T);

MultiAxisResult robust_multi_axis(const ShotDataset& data, double omega);

// Injected value of a labeled component, e.g. ("S+_{1,-1}", Omega+omega_q).
double component_value(const SphericalSpectraSet& set, const std::string& component, FrequencyArg arg, double omega,
                       double omega_q);

namespace components {
inline const FrequencyArg kOmegaPlusQ{1, 1};
inline const FrequencyArg kMinusOmegaMinusQ{-1, -1};
inline const FrequencyArg kOmegaMinusQ{1, -1};
inline const FrequencyArg kMinusOmegaPlusQ{-1, 1};
inline const FrequencyArg kOmega{1, 0};
inline const FrequencyArg kZero{0, 0};
}  // namespace components

}  // namespace slqns
