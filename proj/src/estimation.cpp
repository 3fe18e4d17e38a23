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

#include "slqns/estimation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "slqns/error.hpp"

namespace slqns {

std::string to_string(Method m) {
  switch (m) {
    case Method::Standard: return "standard";
    case Method::RobustLinear: return "robust_linear";
    case Method::RobustNonlinear: return "robust_nonlinear";
  }
  return "?";
}

std::string FrequencyArg::label() const {
  std::string s;
  if (omega_sign != 0) s += omega_sign > 0 ? "Omega" : "-Omega";
  if (omega_q_sign != 0) s += omega_q_sign > 0 ? (s.empty() ? "omega_q" : "+omega_q") : "-omega_q";
  return s.empty() ? "0" : s;
}

RegressionResult weighted_linreg(const std::vector<double>& x, const std::vector<double>& y,
                                 const std::vector<double>& sigma) {
  const std::size_t n = x.size();
  if (y.size() != n || sigma.size() != n) throw EstimationError("weighted_linreg: length mismatch");
  if (n < 2) throw EstimationError("weighted_linreg: need at least 2 points");
  RegressionResult r;
  r.weights.resize(n);
  double sw = 0.0, swx = 0.0, swy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(sigma[i] > 0.0) || !std::isfinite(sigma[i])) throw EstimationError("weighted_linreg: sigma must be positive");
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw EstimationError("weighted_linreg: non-finite data");
    const double w = 1.0 / (sigma[i] * sigma[i]);
    r.weights[i] = w;
    sw += w;
    swx += w * x[i];
    swy += w * y[i];
  }
  const double xbar = swx / sw, ybar = swy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - xbar;
    sxx += r.weights[i] * dx * dx;
    sxy += r.weights[i] * dx * (y[i] - ybar);
  }
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(x[i] - xbar));
  if (!(sxx > 1e-24 * sw * std::max(scale * scale, 1e-300))) throw EstimationError("weighted_linreg: degenerate design (need 2 distinct x)");
  r.slope = sxy / sxx;
  r.intercept = ybar - r.slope * xbar;
  r.covariance(0, 0) = 1.0 / sw + xbar * xbar / sxx;
  r.covariance(1, 1) = 1.0 / sxx;
  r.covariance(0, 1) = r.covariance(1, 0) = -xbar / sxx;
  r.residuals.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    r.residuals[i] = y[i] - r.intercept - r.slope * x[i];
    r.chi2 += r.weights[i] * r.residuals[i] * r.residuals[i];
  }
  return r;
}

SingleAxisSpectra invert_pair(double exp_plus, double exp_minus, double T, double k, double sign) {
  const double d = exp_plus - exp_minus;
  if (!(d > 0.0)) throw EstimationError("log argument failure: e+ - e- <= 0 (decoherence floor reached)");
  if (!(T > 0.0)) throw EstimationError("invert: T must be positive");
  const double rate = std::log(2.0 / d) / (k * T);
  const double m = 0.5 * (exp_plus + exp_minus);
  // R / (1 - exp(-k R T)), continuous through R = 0 where gaps of 2 or more land.
  const double x = k * rate * T;
  const double g = std::abs(x) < 1e-8 ? (1.0 + 0.5 * x) / (k * T) : rate / -std::expm1(-x);
  return {rate, sign * m * g};
}

SingleAxisSpectra invert_single_axis(double exp_plus, double exp_minus, double T) {
  return invert_pair(exp_plus, exp_minus, T, 1.0, 1.0);
}

double single_axis_forward(double splus, double sminus, const SpamParams& spam, double T, int sign) {
  const double decay = std::exp(-splus * T);
  const double drift = splus > 0.0 ? (sminus / splus) * -std::expm1(-splus * T) : sminus * T;
  const double s = sign >= 0 ? 1.0 : -1.0;
  return spam.alpha_m * (drift + s * spam.alpha_sp * decay) + spam.delta;
}

Eigen::MatrixXd delta_method(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& x, const Eigen::VectorXd& variances, double h) {
  const Eigen::VectorXd f0 = f(x);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(f0.size(), f0.size());
  Eigen::VectorXd xp = x, xm = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (variances[i] == 0.0) continue;
    xp[i] = x[i] + h;
    xm[i] = x[i] - h;
    const Eigen::VectorXd col = (f(xp) - f(xm)) / (2.0 * h);
    xp[i] = xm[i] = x[i];
    cov += variances[i] * col * col.transpose();
  }
  return cov;
}

namespace {

struct Pair {
  double T = 0.0;
  const ShotEntry* plus = nullptr;
  const ShotEntry* minus = nullptr;
};

std::vector<Pair> collect(const ShotDataset& data, DriveAxis drive, double omega, Pauli axis) {
  std::vector<Pair> out;
  for (double t : data.times(drive, omega, axis)) {
    const ShotKey kp{drive, omega, axis, 1, axis, t};
    const ShotKey km{drive, omega, axis, -1, axis, t};
    if (!data.contains(kp) || !data.contains(km)) continue;
    out.push_back({t, &data.at(kp), &data.at(km)});
  }
  return out;
}

Pair single_pair(const ShotDataset& data, DriveAxis drive, double omega, Pauli axis, double T) {
  return {T, &data.at({drive, omega, axis, 1, axis, T}), &data.at({drive, omega, axis, -1, axis, T})};
}

SpectralEstimate make(const std::string& comp, FrequencyArg arg, double omega, double value, double var, Method m) {
  return {comp, arg, omega, value, std::sqrt(std::max(var, 0.0)), m};
}

std::string drive_context(const char* what, double omega) {
  std::ostringstream os;
  os << what << " at Omega = " << omega << ": ";
  return os.str();
}

}  // namespace

std::vector<SpectralEstimate> standard_single_axis(const ShotDataset& data, double omega, double T) {
  const Pair p = single_pair(data, DriveAxis::XPlus, omega, Pauli::X, T);
  Eigen::VectorXd x(2), v(2);
  x << p.plus->expectation_hat, p.minus->expectation_hat;
  v << std::pow(p.plus->std_error(), 2), std::pow(p.minus->std_error(), 2);
  auto f = [&](const Eigen::VectorXd& e) {
    const SingleAxisSpectra s = invert_single_axis(e[0], e[1], T);
    return Eigen::VectorXd((Eigen::VectorXd(2) << s.splus, s.sminus).finished());
  };
  Eigen::VectorXd val;
  Eigen::MatrixXd cov;
  try {
    val = f(x);
    cov = delta_method(f, x, v);
  } catch (const EstimationError& e) {
    throw EstimationError(drive_context("S+_{0,0}", omega) + e.what());
  }
  return {make("S+_{0,0}", components::kOmega, omega, val[0], cov(0, 0), Method::Standard),
          make("S-_{0,0}", components::kOmega, omega, val[1], cov(1, 1), Method::Standard)};
}

namespace {

constexpr int kReweightPasses = 2;

// Variance of a sampled expectation at the model value e; analytic entries keep their own.
double model_variance(const ShotEntry& entry, double e) {
  if (entry.analytic() || entry.n_shots <= 0) return std::pow(entry.std_error(), 2);
  const double n = static_cast<double>(entry.n_shots);
  return std::max((1.0 - std::min(e * e, 1.0)) / n, 1.0 / (n * n));
}

}  // namespace

RobustSingleAxisResult robust_single_axis_linearized(const ShotDataset& data, double omega, double guard) {
  const auto pairs = collect(data, DriveAxis::XPlus, omega, Pauli::X);
  std::vector<double> vp, vm, dm;
  for (const auto& p : pairs) {
    vp.push_back(std::pow(p.plus->std_error(), 2));
    vm.push_back(std::pow(p.minus->std_error(), 2));
    dm.push_back(p.plus->expectation_hat - p.minus->expectation_hat);
  }
  std::vector<double> tl, yl, sl, tq, yq, sq;
  RegressionResult c, q;
  // Sample variances first, then model variances from the previous fit.
  for (int pass = 0; pass <= kReweightPasses; ++pass) {
    tl.clear(), yl.clear(), sl.clear(), tq.clear(), yq.clear(), sq.clear();
    for (std::size_t j = 0; j < pairs.size(); ++j) {
      const auto& p = pairs[j];
      const double d = p.plus->expectation_hat - p.minus->expectation_hat;
      const double var = vp[j] + vm[j];
      if (d > 0.0) {
        tl.push_back(p.T);
        yl.push_back(std::log(2.0 / d));
        sl.push_back(std::sqrt(var) / (dm[j] > 0.0 ? dm[j] : d));
      }
      tq.push_back(p.T);
      yq.push_back(0.5 * (p.plus->expectation_hat + p.minus->expectation_hat));
      sq.push_back(0.5 * std::sqrt(var));
    }
    if (tl.size() < 3) throw EstimationError(drive_context("robust linear", omega) + "fewer than 3 usable time points");
    c = weighted_linreg(tl, yl, sl);
    q = weighted_linreg(tq, yq, sq);
    for (std::size_t j = 0; j < pairs.size(); ++j) {
      const double T = pairs[j].T;
      const double drift = q.intercept + q.slope * T, decay = std::exp(-c.intercept - c.slope * T);
      vp[j] = model_variance(*pairs[j].plus, drift + decay);
      vm[j] = model_variance(*pairs[j].minus, drift - decay);
      dm[j] = 2.0 * decay;
    }
  }
  const double tmax = *std::max_element(tl.begin(), tl.end());
  if (c.slope * tmax > guard) {
    std::ostringstream os;
    os << drive_context("robust linear", omega) << "max S+ T = " << c.slope * tmax << " exceeds guard " << guard
       << "; use the nonlinear path";
    throw LinearizationError(os.str());
  }
  RobustSingleAxisResult r;
  r.method = Method::RobustLinear;
  r.splus = make("S+_{0,0}", components::kOmega, omega, c.slope, c.covariance(1, 1), Method::RobustLinear);
  r.sminus = make("alpha_M*S-_{0,0}", components::kOmega, omega, q.slope, q.covariance(1, 1), Method::RobustLinear);
  const double a = std::exp(-c.intercept);
  r.alpha = {a, a * c.intercept_se(), ""};
  r.alpha_m = {a, a * c.intercept_se(), "alpha_M taken equal to alpha"};
  r.delta = {q.intercept, q.intercept_se(), ""};
  r.chi2 = c.chi2 + q.chi2;
  return r;
}

namespace {

// (1 - exp(-x)) / x and its derivative.
double phi(double x) { return std::abs(x) < 1e-8 ? 1.0 - 0.5 * x : -std::expm1(-x) / x; }
double dphi(double x) {
  if (std::abs(x) < 1e-3) return -0.5 + x / 3.0 - x * x / 8.0 + x * x * x / 30.0;
  return (std::exp(-x) - phi(x)) / x;
}

void project(Eigen::Vector4d& th) {
  th[0] = std::max(th[0], 0.0);
  th[2] = std::clamp(th[2], 0.0, 1.0);
  th[3] = std::clamp(th[3], 0.0, 1.0 - th[2]);
}

}  // namespace

double robust_single_axis_model(const Eigen::Vector4d& th, double T, int sign) {
  const double g = th[1] * T * phi(th[0] * T);
  const double h = std::exp(-th[0] * T);
  return th[2] * (g + (sign >= 0 ? h : -h)) + th[3];
}

RobustSingleAxisResult robust_single_axis_nonlinear(const ShotDataset& data, double omega,
                                                    const NonlinearOptions& opts) {
  const auto pairs = collect(data, DriveAxis::XPlus, omega, Pauli::X);
  if (pairs.size() < 4) throw EstimationError(drive_context("robust nonlinear", omega) + "need at least 4 time points");
  const std::size_t n = 2 * pairs.size();
  std::vector<double> ts(n), ys(n), ws(n);
  std::vector<int> sg(n);
  for (std::size_t j = 0; j < pairs.size(); ++j) {
    ts[2 * j] = ts[2 * j + 1] = pairs[j].T;
    ys[2 * j] = pairs[j].plus->expectation_hat;
    ys[2 * j + 1] = pairs[j].minus->expectation_hat;
    ws[2 * j] = 1.0 / std::pow(pairs[j].plus->std_error(), 2);
    ws[2 * j + 1] = 1.0 / std::pow(pairs[j].minus->std_error(), 2);
    sg[2 * j] = 1;
    sg[2 * j + 1] = -1;
  }

  // Start from the two-stage fit: exact log regression, then the drift regression.
  Eigen::Vector4d th;
  {
    std::vector<double> tl, yl, sl;
    for (const auto& p : pairs) {
      const double d = p.plus->expectation_hat - p.minus->expectation_hat;
      if (d <= 0.0) continue;
      tl.push_back(p.T);
      yl.push_back(std::log(2.0 / d));
      sl.push_back(std::hypot(p.plus->std_error(), p.minus->std_error()) / d);
    }
    if (tl.size() < 2) throw EstimationError(drive_context("robust nonlinear", omega) + "no usable initialization");
    const RegressionResult c = weighted_linreg(tl, yl, sl);
    const double r0 = std::max(c.slope, 1e-6);
    const double a0 = std::clamp(std::exp(-c.intercept), 1e-3, 1.0);
    std::vector<double> f, m, sm;
    for (const auto& p : pairs) {
      f.push_back(p.T * phi(r0 * p.T));
      m.push_back(0.5 * (p.plus->expectation_hat + p.minus->expectation_hat));
      sm.push_back(0.5 * std::hypot(p.plus->std_error(), p.minus->std_error()));
    }
    const RegressionResult q = weighted_linreg(f, m, sm);
    th << r0, q.slope / a0, a0, q.intercept;
    project(th);
  }

  auto residuals = [&](const Eigen::Vector4d& p, Eigen::VectorXd& r, Eigen::MatrixXd* J) {
    r.resize(static_cast<Eigen::Index>(n));
    if (J) J->resize(static_cast<Eigen::Index>(n), 4);
    for (std::size_t i = 0; i < n; ++i) {
      const double T = ts[i];
      const double x = p[0] * T;
      const double g = p[1] * T * phi(x);
      const double h = std::exp(-x);
      const double s = sg[i] > 0 ? 1.0 : -1.0;
      const double sw = std::sqrt(ws[i]);
      r[i] = sw * (ys[i] - (p[2] * (g + s * h) + p[3]));
      if (J) {
        (*J)(i, 0) = sw * p[2] * (p[1] * T * T * dphi(x) - s * T * h);
        (*J)(i, 1) = sw * p[2] * T * phi(x);
        (*J)(i, 2) = sw * (g + s * h);
        (*J)(i, 3) = sw;
      }
    }
  };

  Eigen::VectorXd r;
  Eigen::MatrixXd J;
  double cost = 0.0;
  int it = 0;
  // Sample-variance weights first, then model-variance weights at the previous solution.
  for (int pass = 0; pass <= kReweightPasses; ++pass) {
    if (pass > 0)
      for (std::size_t i = 0; i < n; ++i) {
        const auto& e = sg[i] > 0 ? *pairs[i / 2].plus : *pairs[i / 2].minus;
        ws[i] = 1.0 / model_variance(e, robust_single_axis_model(th, ts[i], sg[i]));
      }
    residuals(th, r, &J);
    cost = r.squaredNorm();
    double lambda = opts.initial_damping;
    bool converged = false;
    it = 0;
    for (; it < opts.max_iterations; ++it) {
      const Eigen::Matrix4d jtj = J.transpose() * J;
      const Eigen::Vector4d g = J.transpose() * r;
      Eigen::Matrix4d a = jtj;
      for (int i = 0; i < 4; ++i) a(i, i) += lambda * std::max(jtj(i, i), 1e-12);
      // Parameters pinned at a bound whose step points outward are frozen.
      std::array<bool, 4> frozen{};
      Eigen::Vector4d dx = a.ldlt().solve(g);
      for (int pass = 0; pass < 4; ++pass) {
        bool changed = false;
        for (int i = 0; i < 4; ++i) {
          if (frozen[i]) continue;
          const bool at_lo = (i != 1) && th[i] <= 0.0 && dx[i] < 0.0;
          const bool at_hi = ((i == 2 && th[2] >= 1.0) || (i == 3 && th[3] >= 1.0 - th[2])) && dx[i] > 0.0;
          if (at_lo || at_hi) frozen[i] = changed = true;
        }
        if (!changed) break;
        Eigen::Matrix4d af = a;
        Eigen::Vector4d gf = g;
        for (int i = 0; i < 4; ++i)
          if (frozen[i]) {
            af.row(i).setZero();
            af.col(i).setZero();
            af(i, i) = 1.0;
            gf[i] = 0.0;
          }
        dx = af.ldlt().solve(gf);
      }
      Eigen::Vector4d trial = th + dx;
      project(trial);
      const Eigen::Vector4d step = trial - th;
      Eigen::VectorXd rt;
      residuals(trial, rt, nullptr);
      const double ct = rt.squaredNorm();
      const bool small = step.norm() <= opts.tolerance * (th.norm() + opts.tolerance);
      if (ct <= cost) {
        th = trial;
        cost = ct;
        residuals(th, r, &J);
        lambda *= 0.5;
      } else {
        lambda *= 4.0;
      }
      if (small) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      std::ostringstream os;
      os << drive_context("robust nonlinear", omega) << "no convergence after " << it << " iterations (S+ = " << th[0]
         << ", S- = " << th[1] << ", alpha_M = " << th[2] << ", delta = " << th[3] << ", chi2 = " << cost << ")";
      throw EstimationError(os.str());
    }
  }
  const Eigen::Matrix4d jtj = J.transpose() * J;
  const Eigen::Matrix4d cov = jtj.completeOrthogonalDecomposition().pseudoInverse();

  RobustSingleAxisResult res;
  res.method = Method::RobustNonlinear;
  res.iterations = it + 1;
  res.chi2 = cost;
  res.splus = make("S+_{0,0}", components::kOmega, omega, th[0], cov(0, 0), Method::RobustNonlinear);
  res.sminus = make("S-_{0,0}", components::kOmega, omega, th[1], cov(1, 1), Method::RobustNonlinear);
  res.alpha_m = {th[2], std::sqrt(std::max(cov(2, 2), 0.0)), ""};
  res.alpha = res.alpha_m;
  res.delta = {th[3], std::sqrt(std::max(cov(3, 3), 0.0)), ""};
  return res;
}

double component_value(const SphericalSpectraSet& set, const std::string& component, FrequencyArg arg, double omega,
                       double omega_q) {
  const double w = arg.value(omega, omega_q);
  if (component == "S+_{0,0}") return set.splus(0, 0, w);
  if (component == "S-_{0,0}") return set.sminus(0, 0, w);
  if (component == "S_{0,0}") return set.value(0, 0, w).real();
  if (component == "S+_{1,-1}") return set.splus(1, -1, w);
  if (component == "S-_{1,-1}") return set.sminus(1, -1, w);
  if (component == "S+_{-1,1}") return set.splus(-1, 1, w);
  if (component == "S-_{-1,1}") return set.sminus(-1, 1, w);
  throw ConfigError("unknown component label " + component);
}

const SpectralEstimate* MultiAxisResult::find(const std::string& component, FrequencyArg arg) const {
  for (const auto& e : estimates)
    if (e.component == component && e.argument == arg) return &e;
  return nullptr;
}

namespace {

struct Channel {
  DriveAxis drive;
  Pauli axis;
  double k;
  double sign;
  std::vector<Pair> pairs;
};

void append(const std::vector<Pair>& pairs, Eigen::VectorXd& x, Eigen::VectorXd& v, Eigen::Index& at) {
  for (const auto& p : pairs) {
    x[at] = p.plus->expectation_hat;
    v[at++] = std::pow(p.plus->std_error(), 2);
    x[at] = p.minus->expectation_hat;
    v[at++] = std::pow(p.minus->std_error(), 2);
  }
}

std::vector<SpectralEstimate> multi_axis_estimates(const Eigen::VectorXd& val, const Eigen::MatrixXd& cov,
                                                   double omega, bool aligned, Method m) {
  using namespace components;
  std::vector<SpectralEstimate> out;
  out.push_back(make("S+_{1,-1}", kOmegaPlusQ, omega, val[0], cov(0, 0), m));
  out.push_back(make("S-_{-1,1}", kMinusOmegaMinusQ, omega, val[1], cov(1, 1), m));
  if (aligned) out.push_back(make("S_{0,0}", kZero, omega, val[2], cov(2, 2), m));
  out.push_back(make("S+_{-1,1}", kOmegaMinusQ, omega, val[3], cov(3, 3), m));
  out.push_back(make("S-_{1,-1}", kMinusOmegaPlusQ, omega, val[4], cov(4, 4), m));
  out.push_back(make("S+_{0,0}", kOmega, omega, val[7], cov(7, 7), m));
  out.push_back(make("S-_{0,0}", kOmega, omega, val[8], cov(8, 8), m));
  return out;
}

// Layout of the derived vector: R_z+, Q_z+, S00(0), R_z-, Q_z-, A, B, S+00, S-00.
Eigen::VectorXd derived(double rz, double qz, double s000, double rmz, double qmz, double a, double b) {
  Eigen::VectorXd o(9);
  o << rz, qz, s000, rmz, qmz, a, b, a - 0.5 * (rz + rmz), b - 0.5 * (qmz - qz);
  return o;
}

}  // namespace

MultiAxisResult invert_multi_axis(const ShotDataset& data, double omega, double T, std::optional<double> aligned_T) {
  std::vector<Pair> pz, pal, pmz, px;
  try {
    pz = {single_pair(data, DriveAxis::ZPlus, omega, Pauli::Z, T)};
    pmz = {single_pair(data, DriveAxis::ZMinus, omega, Pauli::Z, T)};
    px = {single_pair(data, DriveAxis::XPlus, omega, Pauli::X, T)};
    if (aligned_T) pal = {single_pair(data, DriveAxis::ZPlus, omega, Pauli::X, *aligned_T)};
  } catch (const EstimationError& e) {
    throw EstimationError(drive_context("invert_multi_axis", omega) + e.what());
  }
  const bool aligned = aligned_T.has_value();
  Eigen::VectorXd x(aligned ? 8 : 6), v(aligned ? 8 : 6);
  Eigen::Index at = 0;
  append(pz, x, v, at);
  append(pmz, x, v, at);
  append(px, x, v, at);
  if (aligned) append(pal, x, v, at);

  auto labeled = [&](const char* comp, double ep, double em, double t, double k, double s) {
    try {
      return invert_pair(ep, em, t, k, s);
    } catch (const EstimationError& e) {
      throw EstimationError(drive_context(comp, omega) + e.what());
    }
  };
  auto f = [&](const Eigen::VectorXd& e) {
    const auto z = labeled("S+_{1,-1}(Omega+omega_q)", e[0], e[1], T, 2.0, -1.0);
    const auto mz = labeled("S+_{-1,1}(Omega-omega_q)", e[2], e[3], T, 2.0, 1.0);
    const auto xx = labeled("A(Omega)", e[4], e[5], T, 1.0, 1.0);
    double s000 = 0.0;
    if (aligned) {
      const double d = e[6] - e[7];
      if (!(d > 0.0)) throw EstimationError(drive_context("S_{0,0}(0)", omega) + "log argument failure: e+ - e- <= 0");
      s000 = std::log(2.0 / d) / (2.0 * *aligned_T) - 0.5 * z.splus;
    }
    return derived(z.splus, z.sminus, s000, mz.splus, mz.sminus, xx.splus, xx.sminus);
  };
  const Eigen::VectorXd val = f(x);
  const Eigen::MatrixXd cov = delta_method(f, x, v);
  MultiAxisResult res;
  res.estimates = multi_axis_estimates(val, cov, omega, aligned, Method::Standard);
  res.A = make("A", components::kOmega, omega, val[5], cov(5, 5), Method::Standard);
  res.B = make("B", components::kOmega, omega, val[6], cov(6, 6), Method::Standard);
  res.alpha_m = {1.0, 0.0, "not estimated by the standard inversion"};
  res.delta = {0.0, 0.0, "not estimated by the standard inversion"};
  return res;
}

MultiAxisResult robust_multi_axis(const ShotDataset& data, double omega) {
  std::vector<Channel> ch = {{DriveAxis::ZPlus, Pauli::Z, 2.0, -1.0, {}},
                             {DriveAxis::ZMinus, Pauli::Z, 2.0, 1.0, {}},
                             {DriveAxis::XPlus, Pauli::X, 1.0, 1.0, {}}};
  for (auto& c : ch) {
    c.pairs = collect(data, c.drive, omega, c.axis);
    if (c.pairs.size() < 3)
      throw EstimationError(drive_context("robust_multi_axis", omega) + "drive " + to_string(c.drive) +
                            " has fewer than 3 time points");
  }
  const std::vector<Pair> al = collect(data, DriveAxis::ZPlus, omega, Pauli::X);
  const bool aligned = al.size() >= 3;

  Eigen::Index total = 0;
  for (const auto& c : ch) total += 2 * static_cast<Eigen::Index>(c.pairs.size());
  if (aligned) total += 2 * static_cast<Eigen::Index>(al.size());
  Eigen::VectorXd x(total), v(total);
  Eigen::Index at = 0;
  for (const auto& c : ch) append(c.pairs, x, v, at);
  if (aligned) append(al, x, v, at);

  // Weights are fixed at the observed data so the delta method differentiates the estimator only.
  struct Fixed {
    std::vector<double> sigma_log, sigma_mean;
    std::vector<bool> use;
  };
  const std::size_t nch = ch.size() + (aligned ? 1 : 0);
  std::vector<Fixed> fixed(nch);
  std::vector<const std::vector<Pair>*> series;
  for (const auto& c : ch) series.push_back(&c.pairs);
  if (aligned) series.push_back(&al);
  MultiAxisResult res;
  for (std::size_t i = 0; i < nch; ++i) {
    for (const auto& p : *series[i]) {
      const double d = p.plus->expectation_hat - p.minus->expectation_hat;
      const double s = std::hypot(p.plus->std_error(), p.minus->std_error());
      fixed[i].use.push_back(d > 0.0);
      fixed[i].sigma_log.push_back(d > 0.0 ? s / d : 1.0);
      fixed[i].sigma_mean.push_back(0.5 * s);
      if (!(d > 0.0)) {
        std::ostringstream os;
        os << "excluded T = " << p.T << " on channel " << i << ": log argument failure";
        res.notes.push_back(os.str());
      }
    }
    if (std::count(fixed[i].use.begin(), fixed[i].use.end(), true) < 3)
      throw EstimationError(drive_context("robust_multi_axis", omega) + "fewer than 3 usable points on a channel");
  }

  auto log_fits = [&](const Eigen::VectorXd& e) {
    std::vector<RegressionResult> fits;
    Eigen::Index k = 0;
    for (std::size_t i = 0; i < nch; ++i) {
      std::vector<double> t, y, s;
      for (std::size_t j = 0; j < series[i]->size(); ++j, k += 2) {
        if (!fixed[i].use[j]) continue;
        const double d = e[k] - e[k + 1];
        if (!(d > 0.0)) throw EstimationError(drive_context("robust_multi_axis", omega) + "log argument failure");
        t.push_back((*series[i])[j].T);
        y.push_back(std::log(2.0 / d));
        s.push_back(fixed[i].sigma_log[j]);
      }
      fits.push_back(weighted_linreg(t, y, s));
    }
    return fits;
  };

  // Pooling weights from the first-pass intercept and drift-intercept errors.
  const auto first = log_fits(x);
  std::vector<double> w_alpha(nch);
  double w_sum = 0.0;
  for (std::size_t i = 0; i < nch; ++i) {
    w_alpha[i] = 1.0 / first[i].covariance(0, 0);
    w_sum += w_alpha[i];
  }
  for (auto& w : w_alpha) w /= w_sum;

  auto drift_fits = [&](const Eigen::VectorXd& e, const std::vector<RegressionResult>& logs) {
    std::vector<RegressionResult> fits;
    Eigen::Index k = 0;
    for (std::size_t i = 0; i < ch.size(); ++i) {
      const double rate = logs[i].slope / ch[i].k;
      std::vector<double> f, m, s;
      for (std::size_t j = 0; j < ch[i].pairs.size(); ++j, k += 2) {
        f.push_back(ch[i].sign * -std::expm1(-ch[i].k * rate * ch[i].pairs[j].T));
        m.push_back(0.5 * (e[k] + e[k + 1]));
        s.push_back(fixed[i].sigma_mean[j]);
      }
      fits.push_back(weighted_linreg(f, m, s));
    }
    return fits;
  };

  const auto first_drift = drift_fits(x, first);
  std::vector<double> w_delta;
  double wd_sum = 0.0;
  for (const auto& q : first_drift) {
    w_delta.push_back(1.0 / q.covariance(0, 0));
    wd_sum += w_delta.back();
  }
  if (aligned)
    for (std::size_t j = 0; j < al.size(); ++j) {
      w_delta.push_back(1.0 / std::pow(fixed[3].sigma_mean[j], 2));
      wd_sum += w_delta.back();
    }
  for (auto& w : w_delta) w /= wd_sum;

  // Output layout: derived(...) followed by alpha and delta.
  auto f = [&](const Eigen::VectorXd& e) {
    const auto logs = log_fits(e);
    double icpt = 0.0;
    for (std::size_t i = 0; i < nch; ++i) icpt += w_alpha[i] * logs[i].intercept;
    const double alpha = std::exp(-icpt);
    const auto drifts = drift_fits(e, logs);
    double delta = 0.0;
    for (std::size_t i = 0; i < drifts.size(); ++i) delta += w_delta[i] * drifts[i].intercept;
    if (aligned) {
      Eigen::Index k = x.size() - 2 * static_cast<Eigen::Index>(al.size());
      for (std::size_t j = 0; j < al.size(); ++j, k += 2) delta += w_delta[3 + j] * 0.5 * (e[k] + e[k + 1]);
    }
    double rate[3], quantum[3];
    for (std::size_t i = 0; i < 3; ++i) {
      rate[i] = logs[i].slope / ch[i].k;
      quantum[i] = drifts[i].slope * rate[i] / alpha;
    }
    const double s000 = aligned ? 0.5 * (logs[3].slope - rate[0]) : 0.0;
    Eigen::VectorXd o(11);
    o << derived(rate[0], quantum[0], s000, rate[1], quantum[1], rate[2], quantum[2]), alpha, delta;
    return o;
  };
  const Eigen::VectorXd val = f(x);
  const Eigen::MatrixXd cov = delta_method(f, x, v);

  res.estimates = multi_axis_estimates(val, cov, omega, aligned, Method::RobustLinear);
  res.A = make("A", components::kOmega, omega, val[5], cov(5, 5), Method::RobustLinear);
  res.B = make("B", components::kOmega, omega, val[6], cov(6, 6), Method::RobustLinear);
  res.alpha_m = {val[9], std::sqrt(std::max(cov(9, 9), 0.0)), ""};
  res.delta = {val[10], std::sqrt(std::max(cov(10, 10), 0.0)), ""};

  const char* names[] = {"z+", "z-", "x", "aligned"};
  double icpt_pooled = -std::log(val[9]);
  double icpt_se = 1.0 / std::sqrt(w_sum);
  for (std::size_t i = 0; i < nch; ++i) {
    const double se = first[i].intercept_se();
    const double a = std::exp(-first[i].intercept);
    res.channel_alpha.push_back({a, a * se, names[i]});
    const double z = (first[i].intercept - icpt_pooled) / std::sqrt(std::max(se * se - icpt_se * icpt_se, 1e-300));
    if (std::abs(z) > 3.0) {
      std::ostringstream os;
      os << "intercept of channel " << names[i] << " disagrees with the pooled alpha by " << z << " sigma";
      res.alpha_m.warning += (res.alpha_m.warning.empty() ? "" : "; ") + os.str();
    }
  }
  if (!aligned) res.notes.push_back("aligned grid absent: S_{0,0}(0) not estimated");
  return res;
}

}  // namespace slqns
