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

#include <cmath>

#include "doctest.h"
#include "slqns/error.hpp"
#include "slqns/estimation.hpp"
#include "slqns/protocols.hpp"
#include "slqns/rng.hpp"

using namespace slqns;

namespace {

const DeviceParams kDevice;

SphericalSpectraSet lorentz_set(double amp = 0.1) {
  return SphericalSpectraSet::dephasing_only({SpectrumModel(Lorentzian{4.0, 0.5, amp}), 1.0, 1.0, 0.3});
}

SphericalSpectraSet multi(double amp = 0.1) {
  return SphericalSpectraSet::multi_axis({SpectrumModel(Lorentzian{4.0, 0.5, amp}), 1.5, 1.0, 0.3},
                                         {SpectrumModel(White{0.02}), 1.0, 0.5, 0.2});
}

RunOptions opts(bool analytic, std::int64_t shots = 1000, std::uint64_t seed = 1) {
  RunOptions o;
  o.analytic = analytic;
  o.n_shots = shots;
  o.seed = seed;
  return o;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
  return v;
}

void check_truth(const std::vector<SpectralEstimate>& es, const SphericalSpectraSet& set, double tol) {
  for (const auto& e : es) {
    CAPTURE(e.label());
    const double truth = component_value(set, e.component, e.argument, e.omega, kDevice.omega_q);
    CHECK(e.value == doctest::Approx(truth).epsilon(tol).scale(std::max(std::abs(truth), 1e-3)));
  }
}

}  // namespace

TEST_CASE("single axis inversion") {
  const double s = 0.07, T = 9.0;
  auto r = invert_single_axis(std::exp(-s * T), -std::exp(-s * T), T);
  CHECK(r.splus == doctest::Approx(s).epsilon(1e-14));
  CHECK(r.sminus == doctest::Approx(0.0).scale(1.0));
  const RateCoefficients ab{0.1, 0.02};
  const auto b = invert_single_axis(tcl_expectation_x_drive(ab, 1.0, 10.0), tcl_expectation_x_drive(ab, -1.0, 10.0), 10.0);
  CHECK(b.splus == doctest::Approx(0.1).epsilon(1e-10));
  CHECK(b.sminus == doctest::Approx(0.02).epsilon(1e-10));
  CHECK_THROWS_AS(invert_single_axis(0.3, 0.3, 5.0), EstimationError);
  // No resolved decay: the drift term takes its R -> 0 limit.
  const auto flat = invert_single_axis(1.0, -1.0, 5.0);
  CHECK(flat.splus == 0.0);
  CHECK(flat.sminus == 0.0);
  const auto over = invert_single_axis(1.0, -1.001, 5.0);
  CHECK(over.splus < 0.0);
  CHECK(std::isfinite(over.sminus));
  CHECK(invert_pair(1.0 + 0.02, -1.0 + 0.02, 5.0, 2.0, -1.0).sminus == doctest::Approx(-0.02 / 10.0));
  CHECK_THROWS_AS(invert_single_axis(0.2, 0.5, 5.0), EstimationError);
}

TEST_CASE("pair inversion for z drives") {
  for (double sign : {-1.0, 1.0}) {
    const double R = 0.05, Q = 0.012, T = 8.0;
    const double e = std::exp(-2 * R * T);
    const double mean = sign * (Q / R) * (1 - e);
    const auto r = invert_pair(mean + e, mean - e, T, 2.0, sign);
    CHECK(r.splus == doctest::Approx(R).epsilon(1e-12));
    CHECK(r.sminus == doctest::Approx(Q).epsilon(1e-12));
  }
}

TEST_CASE("weighted linear regression") {
  const std::vector<double> x{0, 1, 2, 3, 4};
  std::vector<double> y;
  for (double v : x) y.push_back(2 * v + 1);
  const auto r = weighted_linreg(x, y, {0.1, 0.5, 1.0, 0.2, 3.0});
  CHECK(r.slope == doctest::Approx(2.0));
  CHECK(r.intercept == doctest::Approx(1.0));
  for (double res : r.residuals) CHECK(std::abs(res) < 1e-12);

  CounterRng rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> xs(10), ys(10), sig(10, 0.3);
    Eigen::MatrixXd X(10, 2);
    Eigen::VectorXd Y(10);
    for (int i = 0; i < 10; ++i) {
      xs[i] = 5 * rng.uniform();
      ys[i] = -0.7 * xs[i] + 0.4 + rng.normal();
      X(i, 0) = 1.0;
      X(i, 1) = xs[i];
      Y(i) = ys[i];
    }
    const Eigen::Vector2d ols = X.colPivHouseholderQr().solve(Y);
    const auto w = weighted_linreg(xs, ys, sig);
    CHECK(w.intercept == doctest::Approx(ols(0)).epsilon(1e-10));
    CHECK(w.slope == doctest::Approx(ols(1)).epsilon(1e-10));
    const Eigen::Matrix2d cov = 0.09 * (X.transpose() * X).inverse();
    CHECK((w.covariance - cov).norm() < 1e-10 * cov.norm());
    CHECK((w.covariance - w.covariance.transpose()).norm() == 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(w.covariance);
    CHECK(es.eigenvalues().minCoeff() >= 0.0);
    double wres = 0.0;
    for (std::size_t i = 0; i < w.residuals.size(); ++i) wres += w.weights[i] * w.residuals[i];
    CHECK(std::abs(wres) < 1e-9);
  }

  // A dominant weight pins the line to that point.
  const auto p = weighted_linreg({0, 1, 2, 3}, {0.0, 2.0, 1.0, 5.0}, {1.0, 1.0, 1e-6, 1.0});
  CHECK(p.intercept + 2 * p.slope == doctest::Approx(1.0).epsilon(1e-8));

  CHECK_THROWS_AS(weighted_linreg({1, 1, 1}, {0, 1, 2}, {1, 1, 1}), EstimationError);
  CHECK_THROWS_AS(weighted_linreg({1, 2}, {0, 1}, {1, 0}), EstimationError);
  CHECK_THROWS_AS(weighted_linreg({1}, {0}, {1}), EstimationError);
}

TEST_CASE("delta method") {
  const Eigen::VectorXd x = Eigen::Vector2d(1.5, -0.5);
  const Eigen::VectorXd v = Eigen::Vector2d(0.01, 0.04);
  const auto cov = delta_method([](const Eigen::VectorXd& p) { return Eigen::VectorXd(Eigen::Vector2d(p[0] * p[1], p[0] + p[1])); },
                                x, v);
  CHECK(cov(0, 0) == doctest::Approx(0.25 * 0.01 + 2.25 * 0.04).epsilon(1e-6));
  CHECK(cov(1, 1) == doctest::Approx(0.05).epsilon(1e-6));
  CHECK(cov(0, 1) == doctest::Approx(-0.5 * 0.01 + 1.5 * 0.04).epsilon(1e-6));
}

TEST_CASE("standard estimator bias under spam") {
  const auto set = lorentz_set();
  const ClosedFormBackend be(set, kDevice);
  const SpamParams spam{0.98, 0.0, 0.94, 0.02};
  const double w = 3.0;
  for (double T : {5.0, 10.0, 20.0}) {
    const auto e = standard_single_axis(run_protocol1(be, spam, w, T, opts(true)), w, T);
    CHECK(e[0].value - set.splus(0, 0, w) == doctest::Approx(-std::log(spam.alpha()) / T).epsilon(1e-10));
  }
}

TEST_CASE("linearized robust single axis") {
  const double w = 4.0;
  const auto set = lorentz_set(0.002);
  const ClosedFormBackend be(set, kDevice);
  const auto ts = linspace(3.0, 20.0, 15);
  {
    const SpamParams spam{1.0, 0.0, 0.92, 0.0};
    const auto d = run_protocol2(be, spam, w, ts, opts(true));
    const auto r = robust_single_axis_linearized(d, w);
    CHECK(r.alpha.value == doctest::Approx(0.92).epsilon(1e-3));
    CHECK(r.method == Method::RobustLinear);
    CHECK(r.sminus.component == "alpha_M*S-_{0,0}");
  }
  {
    const auto d = run_protocol2(be, SpamParams{}, w, ts, opts(true));
    const auto r = robust_single_axis_linearized(d, w);
    CHECK(r.alpha.value == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(std::abs(r.delta.value) < 1e-3);
    CHECK(r.splus.value == doctest::Approx(set.splus(0, 0, w)).epsilon(0.02));
  }
  {
    // Sampled data at the single-axis figure settings.
    const SpamParams spam{1.0, 0.0, 0.96, 0.01};
    const auto d = run_protocol2(be, spam, w, ts, opts(false, 1000, 77));
    const auto r = robust_single_axis_linearized(d, w);
    CHECK(std::abs(r.alpha_m.value - 0.96) < 3 * r.alpha_m.std_error);
    CHECK(std::abs(r.delta.value - 0.01) < 3 * r.delta.std_error);
    CHECK(std::abs(r.splus.value - set.splus(0, 0, w)) < 3 * r.splus.std_error);
  }
  const ClosedFormBackend strong(lorentz_set(0.2), kDevice);
  CHECK_THROWS_AS(robust_single_axis_linearized(run_protocol2(strong, SpamParams{}, w, ts, opts(true)), w),
                  LinearizationError);
}

TEST_CASE("linearized intercepts are unbiased over replications") {
  // Weights from sample variances correlate with the data; reweighting removes the drift in alpha.
  const double w = 7.0;
  const ClosedFormBackend be(lorentz_set(0.0015), kDevice);
  const SpamParams spam{1.0, 0.0, 0.96, 0.01};
  const auto ts = linspace(2.0, 40.0, 15);
  const int reps = 300;
  double za = 0.0, zd = 0.0;
  for (int k = 0; k < reps; ++k) {
    const auto r = robust_single_axis_linearized(run_protocol2(be, spam, w, ts, opts(false, 1000, 9000 + k)), w);
    za += (r.alpha_m.value - 0.96) / r.alpha_m.std_error;
    zd += (r.delta.value - 0.01) / r.delta.std_error;
  }
  CHECK(std::abs(za / reps) < 3.0 / std::sqrt(reps));
  CHECK(std::abs(zd / reps) < 3.0 / std::sqrt(reps));
}

TEST_CASE("nonlinear robust single axis") {
  const double w = 4.0;
  const auto set = lorentz_set(0.1);
  const ClosedFormBackend be(set, kDevice);
  // S+ T from 0.5 to 3.
  const double sp = set.splus(0, 0, w);
  const auto ts = linspace(0.5 / sp, 3.0 / sp, 15);
  const SpamParams spam{1.0, 0.0, 0.94, 0.02};
  {
    const auto r = robust_single_axis_nonlinear(run_protocol2(be, spam, w, ts, opts(true)), w);
    CHECK(r.splus.value == doctest::Approx(sp).epsilon(1e-8));
    CHECK(r.sminus.value == doctest::Approx(set.sminus(0, 0, w)).epsilon(1e-8));
    CHECK(r.alpha_m.value == doctest::Approx(0.94).epsilon(1e-8));
    CHECK(r.delta.value == doctest::Approx(0.02).epsilon(1e-8));
  }
  {
    const auto r = robust_single_axis_nonlinear(run_protocol2(be, spam, w, ts, opts(false, 1000, 3)), w);
    CHECK(std::abs(r.splus.value - sp) < 3 * r.splus.std_error);
    CHECK(std::abs(r.sminus.value - set.sminus(0, 0, w)) < 3 * r.sminus.std_error);
    CHECK(std::abs(r.alpha_m.value - 0.94) < 3 * r.alpha_m.std_error);
    CHECK(std::abs(r.delta.value - 0.02) < 3 * r.delta.std_error);
  }
  {
    const auto d = run_protocol2(be, SpamParams{}, w, ts, opts(true));
    const auto r = robust_single_axis_nonlinear(d, w);
    const auto s = standard_single_axis(d, w, ts[3]);
    CHECK(r.splus.value == doctest::Approx(s[0].value).epsilon(1e-8));
    CHECK(r.sminus.value == doctest::Approx(s[1].value).epsilon(1e-8));
  }
  CHECK_THROWS_AS(robust_single_axis_nonlinear(run_protocol2(be, spam, w, {ts[0], ts[1], ts[2]}, opts(true)), w),
                  EstimationError);
}

TEST_CASE("single axis non-identifiability") {
  const Eigen::Vector4d th(0.12, 0.03, 0.45, 0.02);
  const SpamParams base{0.45, 0.0, 0.45, 0.02};
  for (double c : {0.5, 2.0}) {
    const SpamParams scaled{c * base.alpha_sp, 0.0, base.alpha_m / c, base.delta};
    for (double T : {1.0, 7.0, 30.0})
      for (int s : {1, -1})
        CHECK(single_axis_forward(th[0], th[1], base, T, s) ==
              doctest::Approx(single_axis_forward(th[0], c * th[1], scaled, T, s)).epsilon(1e-12));
  }
  // The nonlinear model is the forward model with alpha_SP folded into alpha_M.
  for (double T : {2.0, 9.0})
    CHECK(robust_single_axis_model(th, T, -1) ==
          doctest::Approx(single_axis_forward(th[0], th[1], {1.0, 0.0, th[2], th[3]}, T, -1)).epsilon(1e-14));
}

TEST_CASE("multi axis inversion") {
  const double w = 2.5, T = 9.0;
  const double ta = frame_aligned_times(w, {4})[0];
  {
    const auto set = multi();
    const ClosedFormBackend be(set, kDevice);
    const auto r = invert_multi_axis(run_protocol3(be, SpamParams{}, w, T, ta, opts(true)), w, T, ta);
    CHECK(r.estimates.size() == 7);
    check_truth(r.estimates, set, 1e-8);
    const auto ab = compute_AB(set, w, kDevice);
    CHECK(r.A.value == doctest::Approx(ab.A).epsilon(1e-8));
    CHECK(r.B.value == doctest::Approx(ab.B).epsilon(1e-8));
  }
  {
    const ComponentSpectrum white{SpectrumModel(White{0.03}), 1.0, 0.0, 0.0};
    const auto set = SphericalSpectraSet::multi_axis(white, white);
    const ClosedFormBackend be(set, kDevice);
    for (double wi : {1.0, 2.5, 6.0}) {
      const double t = 12.0 / wi + 3.0;
      const double a = frame_aligned_times(wi, {3})[0];
      const auto r = invert_multi_axis(run_protocol3(be, SpamParams{}, wi, t, a, opts(true)), wi, t, a);
      check_truth(r.estimates, set, 1e-8);
    }
  }
  {
    // Dephasing only, sampled: transverse estimates vanish within their intervals.
    auto set = SphericalSpectraSet::multi_axis({SpectrumModel(Lorentzian{4.0, 0.5, 0.1}), 1.0, 1.0, 0.3},
                                               {SpectrumModel(White{0.0}), 1.0, 0.0, 0.0});
    const ClosedFormBackend be(set, kDevice);
    const auto r = invert_multi_axis(run_protocol3(be, SpamParams{}, w, T, ta, opts(false, 5000, 8)), w, T, ta);
    for (const auto& e : r.estimates) {
      CAPTURE(e.label());
      const double truth = component_value(set, e.component, e.argument, w, kDevice.omega_q);
      CHECK(std::abs(e.value - truth) <= 3 * e.std_error + 1e-12);
    }
  }
}

TEST_CASE("robust multi axis") {
  const double w = 2.5;
  const auto set = multi();
  const ClosedFormBackend be(set, kDevice);
  const auto ts = linspace(5.0, 30.0, 10);
  std::vector<int> ns;
  for (double t : ts) ns.push_back(static_cast<int>(std::lround(t * w / kTwoPi)));
  const auto al = frame_aligned_times(w, ns);
  {
    const SpamParams spam{1.0, 0.0, 0.872, 0.038};
    const auto r = robust_multi_axis(run_protocol4(be, spam, w, ts, al, opts(true)), w);
    check_truth(r.estimates, set, 1e-8);
    CHECK(r.alpha_m.value == doctest::Approx(0.872).epsilon(1e-8));
    CHECK(r.delta.value == doctest::Approx(0.038).epsilon(1e-8));
    CHECK(r.alpha_m.warning.empty());
  }
  {
    const auto r = robust_multi_axis(run_protocol4(be, SpamParams{}, w, ts, {}, opts(true)), w);
    CHECK(r.estimates.size() == 6);
    CHECK(r.find("S_{0,0}", components::kZero) == nullptr);
    check_truth(r.estimates, set, 1e-8);
  }
  {
    // SPAM off, sampled: robust and standard agree within their intervals.
    const auto d = run_protocol4(be, SpamParams{}, w, ts, al, opts(false, 2000, 12));
    const auto r = robust_multi_axis(d, w);
    const auto s = invert_multi_axis(d, w, ts[5], al[5]);
    for (const auto& e : s.estimates) {
      const auto* q = r.find(e.component, e.argument);
      REQUIRE(q != nullptr);
      CAPTURE(e.label());
      CHECK(std::abs(q->value - e.value) < 3 * std::hypot(q->std_error, e.std_error));
    }
  }
}

TEST_CASE("doubling shots halves the variance") {
  const double w = 4.0;
  const ClosedFormBackend be(lorentz_set(0.1), kDevice);
  const auto ts = linspace(3.0, 30.0, 15);
  const SpamParams spam{1.0, 0.0, 0.96, 0.01};
  double ratio_std = 0.0, ratio_rob = 0.0;
  const int trials = 5;
  for (int k = 0; k < trials; ++k) {
    const auto a = run_protocol2(be, spam, w, ts, opts(false, 1000, 100 + k));
    const auto b = run_protocol2(be, spam, w, ts, opts(false, 2000, 200 + k));
    const double sa = standard_single_axis(a, w, ts[4])[0].std_error;
    const double sb = standard_single_axis(b, w, ts[4])[0].std_error;
    ratio_std += sb * sb / (sa * sa);
    const double ra = robust_single_axis_nonlinear(a, w).splus.std_error;
    const double rb = robust_single_axis_nonlinear(b, w).splus.std_error;
    ratio_rob += rb * rb / (ra * ra);
  }
  CHECK(ratio_std / trials == doctest::Approx(0.5).epsilon(0.2));
  CHECK(ratio_rob / trials == doctest::Approx(0.5).epsilon(0.2));
}

TEST_CASE("estimate labels") {
  CHECK(components::kOmegaPlusQ.label() == "Omega+omega_q");
  CHECK(components::kMinusOmegaMinusQ.label() == "-Omega-omega_q");
  CHECK(components::kZero.label() == "0");
  CHECK(components::kOmega.label() == "Omega");
  SpectralEstimate e{"S+_{0,0}", components::kOmega, 2.0, 0.1, 0.01, Method::Standard};
  CHECK(e.label() == "S+_{0,0}(Omega)");
  CHECK(e.ci95() == doctest::Approx(0.0196).epsilon(1e-3));
  CHECK(to_string(Method::RobustNonlinear) == "robust_nonlinear");
}
