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

#include "slqns/json_io.hpp"

#include "slqns/error.hpp"

namespace slqns {

using nlohmann::json;

json to_json(const SpectrumModel& m) {
  json j;
  j["kind"] = to_string(m.kind());
  if (auto* l = m.lorentzian()) {
    j["params"] = {{"omega0", l->omega0}, {"tc", l->tc}, {"amplitude", l->amplitude}};
  } else if (auto* w = m.white()) {
    j["params"] = {{"level", w->level}};
  } else {
    j["params"] = {{"grid", m.tabulated()->grid}, {"values", m.tabulated()->values}};
  }
  return j;
}

SpectrumModel spectrum_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind")) throw ConfigError("spectrum: expected object with \"kind\"");
  const std::string kind = j.at("kind").get<std::string>();
  const json p = j.value("params", json::object());
  try {
    if (kind == "lorentzian") {
      return SpectrumModel(Lorentzian{p.at("omega0").get<double>(), p.at("tc").get<double>(), p.value("amplitude", 1.0)});
    }
    if (kind == "white") return SpectrumModel(White{p.at("level").get<double>()});
    if (kind == "tabulated") {
      return SpectrumModel(Tabulated{p.at("grid").get<std::vector<double>>(), p.at("values").get<std::vector<double>>()});
    }
  } catch (const json::exception& e) {
    throw ConfigError("spectrum \"" + kind + "\": " + e.what());
  }
  throw ConfigError("spectrum: unknown kind \"" + kind + "\"");
}

json to_json(const ComponentSpectrum& c) {
  return {{"shape", to_json(c.shape)}, {"w_plus", c.w_plus}, {"w_minus", c.w_minus}, {"lag", c.lag}};
}

ComponentSpectrum component_from_json(const json& j) {
  ComponentSpectrum c;
  if (j.contains("shape")) {
    c.shape = spectrum_from_json(j.at("shape"));
    c.w_plus = j.value("w_plus", 1.0);
    c.w_minus = j.value("w_minus", 0.0);
    c.lag = j.value("lag", 0.0);
  } else {
    c.shape = spectrum_from_json(j);
  }
  return c;
}

}  // namespace slqns
