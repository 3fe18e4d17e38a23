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

#include "slqns/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "slqns/error.hpp"
#include "slqns/json_io.hpp"
#include "slqns/parallel.hpp"

namespace slqns {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError(where + ": unknown key \"" + it.key() + "\"");
}

template <class T>
T get(const json& j, const char* key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  return get<T>(j, key, where);
}

}  // namespace

SphericalSpectraSet CampaignConfig::injected() const {
  return backend == "trajectory" ? noise.spectra() : spectra;
}

std::unique_ptr<Backend> CampaignConfig::make_backend(int jobs) const {
  if (backend == "closed_form") return std::make_unique<ClosedFormBackend>(spectra, device);
  if (backend == "ideal") return std::make_unique<IdealBackend>(spectra, device);
  TrajectoryNoise n = noise;
  n.jobs = jobs;
  return std::make_unique<TrajectoryBackend>(n);
}

CampaignConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  check_keys(j,
             {"name", "protocol", "protocols", "device", "omegas_MHz", "times_us", "time_rule", "aligned_n",
              "skip_aligned", "shots", "seed", "analytic", "long_time_threshold", "low_frequency_cutoff_kHz",
              "allow_low_frequency", "backend", "spectra", "noise", "spam", "output_dir", "description"},
             "config");
  CampaignConfig c;
  c.source = j;
  c.name = get_or<std::string>(j, "name", "campaign", "config");
  c.output_dir = get_or<std::string>(j, "output_dir", "out/" + c.name, "config");

  if (j.contains("device")) {
    const json& d = j.at("device");
    check_keys(d, {"omega_q_MHz"}, "device");
    c.device.omega_q = mhz_to_rad_per_us(get<double>(d, "omega_q_MHz", "device"));
  }
  c.device.validate();

  auto& p = c.plan;
  if (j.contains("protocols")) p.protocols = get<std::vector<int>>(j, "protocols", "config");
  else p.protocols = {get<int>(j, "protocol", "config")};
  for (double f : get<std::vector<double>>(j, "omegas_MHz", "config")) p.omegas.push_back(mhz_to_rad_per_us(f));
  if (j.contains("times_us")) p.times.explicit_times = get<std::vector<double>>(j, "times_us", "config");
  if (j.contains("time_rule")) {
    const json& r = j.at("time_rule");
    check_keys(r, {"count", "t_min_us", "t_max_us"}, "time_rule");
    p.times.count = get<int>(r, "count", "time_rule");
    p.times.t_min = get_or<double>(r, "t_min_us", 0.0, "time_rule");
    p.times.t_max = get_or<double>(r, "t_max_us", 0.0, "time_rule");
  }
  if (p.times.explicit_times.empty() && p.times.count == 0) throw ConfigError("config: times_us or time_rule required");
  p.aligned_n = get_or<std::vector<int>>(j, "aligned_n", {}, "config");
  p.skip_aligned = get_or<bool>(j, "skip_aligned", false, "config");
  p.n_shots = get_or<std::int64_t>(j, "shots", 1000, "config");
  p.seed = get_or<std::uint64_t>(j, "seed", 0, "config");
  p.analytic = get_or<bool>(j, "analytic", false, "config");
  p.long_time_threshold = get_or<double>(j, "long_time_threshold", 10.0, "config");
  p.low_frequency_cutoff = mhz_to_rad_per_us(1e-3 * get_or<double>(j, "low_frequency_cutoff_kHz", 2.3, "config"));
  p.allow_low_frequency = get_or<bool>(j, "allow_low_frequency", false, "config");

  c.backend = get_or<std::string>(j, "backend", "closed_form", "config");
  if (c.backend != "closed_form" && c.backend != "ideal" && c.backend != "trajectory")
    throw ConfigError("config.backend: expected closed_form, ideal or trajectory");

  if (c.backend == "trajectory") {
    if (!j.contains("noise")) throw ConfigError("config: trajectory backend needs a \"noise\" section");
    const json& n = j.at("noise");
    check_keys(n, {"spectrum", "omega_max", "n_omega", "coupling", "lag_us", "variant", "realizations", "dt_us", "seed"},
               "noise");
    const SpectrumModel s = spectrum_from_json(n.at("spectrum"));
    if (auto* l = s.lorentzian()) c.noise.dsa = DSAConfig::defaults_for(*l);
    else c.noise.dsa.spectrum = s;
    c.noise.dsa.omega_max = get_or<double>(n, "omega_max", c.noise.dsa.omega_max, "noise");
    c.noise.dsa.n_omega = get_or<int>(n, "n_omega", 512, "noise");
    c.noise.dsa.validate();
    const std::string coupling = get_or<std::string>(n, "coupling", "toy_bath", "noise");
    if (coupling != "toy_bath" && coupling != "classical") throw ConfigError("noise.coupling: toy_bath or classical");
    c.noise.toy_bath = coupling == "toy_bath";
    const double lag = get_or<double>(n, "lag_us", 0.0, "noise");
    const std::string variant = get_or<std::string>(n, "variant", "main_text", "noise");
    if (variant != "main_text" && variant != "three_axis") throw ConfigError("noise.variant: main_text or three_axis");
    c.noise.bath = variant == "main_text" ? BathConfig::main_text(lag) : BathConfig::three_axis(lag);
    c.noise.bath.validate();
    c.noise.realizations = get_or<int>(n, "realizations", 500, "noise");
    c.noise.dt = get_or<double>(n, "dt_us", 0.005, "noise");
    c.noise.seed = get_or<std::uint64_t>(n, "seed", p.seed + 1, "noise");
  } else {
    if (!j.contains("spectra")) throw ConfigError("config: \"spectra\" section required");
    const json& s = j.at("spectra");
    check_keys(s, {"dephasing", "transverse"}, "spectra");
    const ComponentSpectrum deph = component_from_json(s.at("dephasing"));
    c.spectra = s.contains("transverse") ? SphericalSpectraSet::multi_axis(deph, component_from_json(s.at("transverse")))
                                         : SphericalSpectraSet::dephasing_only(deph);
  }

  if (j.contains("spam")) {
    const json& s = j.at("spam");
    check_keys(s, {"alpha_sp", "c", "alpha_m", "delta"}, "spam");
    c.spam.alpha_sp = get_or<double>(s, "alpha_sp", 1.0, "spam");
    if (s.contains("c")) {
      const auto v = get<std::vector<double>>(s, "c", "spam");
      if (v.size() != 2) throw ConfigError("spam.c: expected [re, im]");
      c.spam.c = cplx(v[0], v[1]);
    }
    c.spam.alpha_m = get_or<double>(s, "alpha_m", 1.0, "spam");
    c.spam.delta = get_or<double>(s, "delta", 0.0, "spam");
  }
  c.spam.validate();

  const bool multi = std::any_of(p.protocols.begin(), p.protocols.end(), [](int q) { return q >= 3; });
  if (multi && c.backend == "trajectory") throw ConfigError("config: the trajectory backend supports protocols 1 and 2 only");
  if (multi && !c.spectra.has(1, -1)) throw ConfigError("config: protocols 3 and 4 need transverse spectra");
  p.validate();
  for (double w : p.omegas) c.device.check_drive(w);
  return c;
}

CampaignConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  return parse_config(j);
}

std::string step_label(const ShotKey& k) {
  std::string drive = k.drive == DriveAxis::XPlus ? "+x drive" : k.drive == DriveAxis::ZPlus ? "+z drive" : "-z drive";
  return drive + ", prepare " + init_label(k.init_axis, k.init_sign) + ", measure s" + to_string(k.obs);
}

namespace {

struct OmegaOutcome {
  ShotDataset data;
  std::map<ShotKey, std::set<int>> membership;
  std::vector<SpectralEstimate> estimates;
  std::vector<double> times;
  std::vector<CampaignFailure> failures;
  std::vector<std::string> log;
  json spam = json::array();
  int successes = 0;
};

void add(OmegaOutcome& o, const std::vector<SpectralEstimate>& es, double T = 0.0) {
  for (const auto& e : es) {
    o.estimates.push_back(e);
    o.times.push_back(T);
  }
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(6) << x;
  return os.str();
}

OmegaOutcome run_omega(const CampaignConfig& cfg, const Backend& backend, double w) {
  OmegaOutcome o;
  const auto& plan = cfg.plan;
  const RunOptions opts{plan.n_shots, plan.seed, plan.analytic, 1, plan.long_time_threshold};
  const auto ts = plan.times_for(w);
  const auto aligned = plan.aligned_times_for(w);
  auto merge = [&](const ShotDataset& d, int protocol) {
    o.data.merge(d);
    for (const auto& [k, v] : d.entries()) o.membership[k].insert(protocol);
  };
  auto fail = [&](int protocol, const std::string& msg) {
    o.failures.push_back({w, protocol, msg});
    o.log.push_back("FAIL protocol " + std::to_string(protocol) + " Omega " + fmt(w) + ": " + msg);
  };
  for (int p : plan.protocols) {
    try {
      if (p == 1) {
        for (double t : ts) {
          const auto d = run_protocol1(backend, cfg.spam, w, t, opts);
          merge(d, 1);
          try {
            add(o, standard_single_axis(d, w, t), t);
            ++o.successes;
          } catch (const EstimationError& e) {
            fail(1, e.what());
          }
        }
      } else if (p == 2) {
        const auto d = run_protocol2(backend, cfg.spam, w, ts, opts);
        merge(d, 2);
        try {
          const auto r = robust_single_axis_nonlinear(d, w);
          add(o, {r.splus, r.sminus});
          o.spam.push_back({{"omega_rad_per_us", w}, {"protocol", 2}, {"method", "robust_nonlinear"},
                            {"alpha_m", r.alpha_m.value}, {"alpha_m_se", r.alpha_m.std_error},
                            {"delta", r.delta.value}, {"delta_se", r.delta.std_error}});
          ++o.successes;
        } catch (const EstimationError& e) {
          fail(2, e.what());
        }
        try {
          const auto r = robust_single_axis_linearized(d, w);
          add(o, {r.splus, r.sminus});
        } catch (const LinearizationError& e) {
          o.log.push_back("note protocol 2 Omega " + fmt(w) + ": " + e.what());
        } catch (const EstimationError& e) {
          fail(2, e.what());
        }
      } else if (p == 3) {
        if (aligned.empty() && !plan.skip_aligned) throw ConfigError("protocol 3 needs aligned times");
        for (std::size_t j = 0; j < ts.size(); ++j) {
          std::optional<double> at;
          if (!aligned.empty()) at = aligned[std::min(j, aligned.size() - 1)];
          ShotDataset d;
          if (at) {
            d = run_protocol3(backend, cfg.spam, w, ts[j], *at, opts);
          } else {
            std::vector<ShotKey> keys;
            for (auto [drive, axis] : {std::pair{DriveAxis::ZPlus, Pauli::Z}, std::pair{DriveAxis::ZMinus, Pauli::Z},
                                       std::pair{DriveAxis::XPlus, Pauli::X}})
              for (int s : {1, -1}) keys.push_back({drive, w, axis, s, axis, ts[j]});
            d = run_keys(backend, keys, cfg.spam, opts);
          }
          merge(d, 3);
          try {
            const auto r = invert_multi_axis(d, w, ts[j], at);
            add(o, r.estimates, ts[j]);
            add(o, {r.A, r.B}, ts[j]);
            ++o.successes;
          } catch (const EstimationError& e) {
            fail(3, e.what());
          }
        }
      } else if (p == 4) {
        const auto d = run_protocol4(backend, cfg.spam, w, ts, aligned, opts);
        merge(d, 4);
        try {
          const auto r = robust_multi_axis(d, w);
          add(o, r.estimates);
          add(o, {r.A, r.B});
          o.spam.push_back({{"omega_rad_per_us", w}, {"protocol", 4}, {"method", "robust_linear"},
                            {"alpha_m", r.alpha_m.value}, {"alpha_m_se", r.alpha_m.std_error},
                            {"delta", r.delta.value}, {"delta_se", r.delta.std_error},
                            {"warning", r.alpha_m.warning}});
          for (const auto& n : r.notes) o.log.push_back("note protocol 4 Omega " + fmt(w) + ": " + n);
          ++o.successes;
        } catch (const EstimationError& e) {
          fail(4, e.what());
        }
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      fail(p, e.what());
    }
  }
  return o;
}

json pooled_spam(const json& rows, int protocol) {
  double wa = 0.0, sa = 0.0, wd = 0.0, sd = 0.0;
  for (const auto& r : rows) {
    if (r.at("protocol").get<int>() != protocol) continue;
    const double ase = r.at("alpha_m_se").get<double>(), dse = r.at("delta_se").get<double>();
    if (ase > 0.0) {
      wa += 1.0 / (ase * ase);
      sa += r.at("alpha_m").get<double>() / (ase * ase);
    }
    if (dse > 0.0) {
      wd += 1.0 / (dse * dse);
      sd += r.at("delta").get<double>() / (dse * dse);
    }
  }
  if (wa == 0.0 || wd == 0.0) return json();
  return {{"protocol", protocol}, {"alpha_m", sa / wa}, {"alpha_m_se", 1.0 / std::sqrt(wa)},
          {"delta", sd / wd}, {"delta_se", 1.0 / std::sqrt(wd)}};
}

}  // namespace

CampaignResult run_campaign(const CampaignConfig& config, int jobs) {
  config.plan.validate();
  const auto backend = config.make_backend(jobs);
  std::vector<OmegaOutcome> parts(config.plan.omegas.size());
  // Trajectory ensembles parallelize inside the backend.
  const int outer = config.backend == "trajectory" ? 1 : jobs;
  parallel_for(parts.size(), outer, [&](std::size_t i) { parts[i] = run_omega(config, *backend, config.plan.omegas[i]); });

  CampaignResult res;
  json spam_rows = json::array();
  for (const auto& p : parts) {
    res.data.merge(p.data);
    for (const auto& [k, v] : p.membership) res.membership[k].insert(v.begin(), v.end());
    res.estimates.insert(res.estimates.end(), p.estimates.begin(), p.estimates.end());
    res.estimate_times.insert(res.estimate_times.end(), p.times.begin(), p.times.end());
    res.failures.insert(res.failures.end(), p.failures.begin(), p.failures.end());
    res.log.insert(res.log.end(), p.log.begin(), p.log.end());
    for (const auto& r : p.spam) spam_rows.push_back(r);
    res.successes += p.successes;
  }

  const SphericalSpectraSet truth = config.injected();
  json report;
  report["name"] = config.name;
  report["backend"] = config.backend;
  report["seed"] = config.plan.seed;
  report["analytic"] = config.plan.analytic;
  report["config"] = config.source;
  report["spam_injected"] = {{"alpha_sp", config.spam.alpha_sp}, {"c", {config.spam.c.real(), config.spam.c.imag()}},
                             {"alpha_m", config.spam.alpha_m}, {"delta", config.spam.delta},
                             {"alpha", config.spam.alpha()}};
  json pooled = json::array();
  for (int p : {2, 4}) {
    json j = pooled_spam(spam_rows, p);
    if (!j.is_null()) pooled.push_back(j);
  }
  report["spam_estimates"] = {{"per_frequency", spam_rows}, {"pooled", pooled}};

  json est = json::array();
  for (std::size_t i = 0; i < res.estimates.size(); ++i) {
    const auto& e = res.estimates[i];
    json row = {{"component", e.component}, {"argument", e.argument.label()}, {"omega_rad_per_us", e.omega},
                {"omega_MHz", rad_per_us_to_mhz(e.omega)}, {"T_us", res.estimate_times[i]}, {"value", e.value},
                {"std_error", e.std_error}, {"method", to_string(e.method)}};
    if (e.component.rfind("alpha_M*", 0) == 0) {
      row["truth"] = config.spam.alpha_m * component_value(truth, e.component.substr(8), e.argument, e.omega,
                                                           config.device.omega_q);
    } else if (e.component != "A" && e.component != "B") {
      row["truth"] = component_value(truth, e.component, e.argument, e.omega, config.device.omega_q);
    } else {
      const RateCoefficients ab = compute_AB(truth, e.omega, config.device);
      row["truth"] = e.component == "A" ? ab.A : ab.B;
    }
    est.push_back(row);
  }
  report["estimates"] = est;

  // Standard-vs-robust comparison on the classical dephasing spectrum per frequency.
  json cmp = json::array();
  for (double w : config.plan.omegas) {
    const SpectralEstimate* robust = nullptr;
    for (const auto& e : res.estimates)
      if (e.omega == w && e.component == "S+_{0,0}" && e.method != Method::Standard &&
          (!robust || e.method == Method::RobustNonlinear))
        robust = &e;
    if (!robust) continue;
    json standard = json::array();
    for (std::size_t i = 0; i < res.estimates.size(); ++i) {
      const auto& e = res.estimates[i];
      if (e.omega == w && e.component == "S+_{0,0}" && e.method == Method::Standard)
        standard.push_back({{"T_us", res.estimate_times[i]}, {"value", e.value}, {"std_error", e.std_error},
                            {"minus_robust", e.value - robust->value}});
    }
    cmp.push_back({{"omega_rad_per_us", w}, {"omega_MHz", rad_per_us_to_mhz(w)}, {"component", "S+_{0,0}(Omega)"},
                   {"robust", robust->value}, {"robust_se", robust->std_error},
                   {"robust_method", to_string(robust->method)},
                   {"truth", truth.splus(0, 0, w)}, {"standard", standard}});
  }
  report["comparison"] = cmp;
  json fails = json::array();
  for (const auto& f : res.failures)
    fails.push_back({{"omega_rad_per_us", f.omega}, {"protocol", f.protocol}, {"message", f.message}});
  report["failures"] = fails;
  json warnings = json::array();
  for (double w : config.plan.omegas) {
    const double sp = truth.has(0, 0) ? compute_AB(truth, w, config.device).A : 0.0;
    if (!secular_regime(sp, w))
      warnings.push_back("Omega " + fmt(w) + ": |S+(Omega)/Omega| = " + fmt(std::abs(sp / w)) + " exceeds 0.05");
  }
  for (const auto& r : spam_rows)
    if (r.contains("warning") && !r.at("warning").get<std::string>().empty()) warnings.push_back(r.at("warning"));
  report["warnings"] = warnings;
  for (const auto& w : warnings) res.log.push_back("warning: " + w.get<std::string>());
  res.report = std::move(report);
  return res;
}

void write_bundle(const CampaignResult& result, const std::string& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const std::string& name) {
    std::ofstream f(std::filesystem::path(dir) / name);
    if (!f) throw Error("cannot write " + (std::filesystem::path(dir) / name).string());
    return f;
  };
  {
    auto f = open("datasets.csv");
    result.data.write_csv(f);
  }
  {
    json rows = json::array();
    std::size_t row = 0;
    for (const auto& [k, v] : result.data.entries()) {
      const auto it = result.membership.find(k);
      std::vector<int> protocols;
      if (it != result.membership.end()) protocols.assign(it->second.begin(), it->second.end());
      rows.push_back({{"row", row++}, {"protocols", protocols}, {"step", step_label(k)},
                      {"axis", to_string(k.drive)}, {"omega_rad_per_us", k.omega},
                      {"init", init_label(k.init_axis, k.init_sign)}, {"obs", to_string(k.obs)}, {"T_us", k.time},
                      {"seed", v.seed}});
    }
    auto f = open("manifest.json");
    f << json{{"name", result.report.value("name", "")}, {"seed", result.report.value("seed", 0)}, {"rows", rows}}.dump(1)
      << '\n';
  }
  {
    auto f = open("estimates.csv");
    f << "component,freq_rad_per_us,value,std_error,method,T_us\n" << std::setprecision(17);
    for (std::size_t i = 0; i < result.estimates.size(); ++i) {
      const auto& e = result.estimates[i];
      f << e.label() << ',' << e.omega << ',' << e.value << ',' << e.std_error << ',' << to_string(e.method) << ','
        << result.estimate_times[i] << '\n';
    }
  }
  {
    auto f = open("report.json");
    f << result.report.dump(2) << '\n';
  }
  {
    auto f = open("campaign.log");
    for (const auto& l : result.log) f << l << '\n';
    f << "datasets: " << result.data.size() << " rows, estimates: " << result.estimates.size()
      << ", failures: " << result.failures.size() << '\n';
  }
}

std::vector<ComparisonRow> compare_reports(const json& a, const json& b) {
  auto index = [](const json& r) {
    if (!r.contains("estimates")) throw ConfigError("report lacks \"estimates\"");
    std::map<std::tuple<std::string, std::string, double, double>, std::pair<double, double>> m;
    for (const auto& e : r.at("estimates")) {
      const std::string comp = e.at("component").get<std::string>() + "(" + e.at("argument").get<std::string>() + ")";
      m[{comp, e.at("method").get<std::string>(), e.at("omega_rad_per_us").get<double>(), e.at("T_us").get<double>()}] =
          {e.at("value").get<double>(), e.at("std_error").get<double>()};
    }
    return m;
  };
  const auto ia = index(a), ib = index(b);
  if (ia.size() != ib.size()) throw ConfigError("compare: reports have different estimate grids");
  std::vector<ComparisonRow> out;
  for (const auto& [k, va] : ia) {
    auto it = ib.find(k);
    if (it == ib.end()) throw ConfigError("compare: grid mismatch at " + std::get<0>(k) + " Omega " + fmt(std::get<2>(k)));
    const double d = va.first - it->second.first;
    const double s = std::hypot(va.second, it->second.second);
    out.push_back({std::get<0>(k), std::get<1>(k), std::get<2>(k), std::get<3>(k), d, s > 0.0 ? d / s : 0.0});
  }
  return out;
}

}  // namespace slqns
