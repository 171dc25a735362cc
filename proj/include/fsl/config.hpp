// Copyright 2026 The chiral-fsl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Run configuration. The file format is sectioned key = value text:
//
//   # comment
//   [model]
//   N = 10
//   transfer_time = 80 ns
//
// Frequencies are angular, in rad/ns; times carry a unit (ns, us, /kappa or T)
// and are normalized to ns. Unknown sections or keys are errors.

#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fsl/dynamics.hpp"
#include "fsl/hamiltonians.hpp"
#include "fsl/protocols.hpp"

namespace fsl {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class TimeUnit { ns, us, inv_kappa, transfer_time };

struct Duration {
  double value = 0.0;
  TimeUnit unit = TimeUnit::ns;

  // Value in ns, given the chiral coupling in rad/ns.
  double resolve(double kappa) const {
    switch (unit) {
      case TimeUnit::ns: return value;
      case TimeUnit::us: return 1e3 * value;
      case TimeUnit::inv_kappa:
        if (kappa == 0) throw ConfigError("/kappa times need kappa != 0");
        return value / std::abs(kappa);
      case TimeUnit::transfer_time: return value * ModelParams{kappa}.transfer_time();
    }
    return value;
  }
  bool operator==(const Duration&) const = default;
};

namespace detail {

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_number(const std::string& s, const std::string& key) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + s + "'");
  }
  if (trim(s.substr(used)).size() || !std::isfinite(v)) throw ConfigError(key + ": expected a number, got '" + s + "'");
  return v;
}

inline int parse_int(const std::string& s, const std::string& key) {
  const double v = parse_number(s, key);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(key + ": expected an integer, got '" + s + "'");
  return static_cast<int>(v);
}

inline bool parse_bool(const std::string& s, const std::string& key) {
  if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + s + "'");
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace detail

// "80 ns", "3.47us", "2.5 /kappa", "1T".
inline Duration parse_duration(const std::string& text, const std::string& key = "time") {
  const std::string s = detail::trim(text);
  static const std::vector<std::pair<std::string, TimeUnit>> units = {
      {"/kappa", TimeUnit::inv_kappa}, {"ns", TimeUnit::ns}, {"us", TimeUnit::us}, {"T", TimeUnit::transfer_time}};
  for (auto& [suffix, unit] : units)
    if (s.size() > suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0)
      return {detail::parse_number(s.substr(0, s.size() - suffix.size()), key), unit};
  throw ConfigError(key + ": time needs a unit (ns, us, /kappa or T), got '" + text + "'");
}

inline std::string to_string(const Duration& d) {
  static const char* names[] = {" ns", " us", " /kappa", " T"};
  std::ostringstream os;
  os.precision(17);
  os << d.value << names[static_cast<int>(d.unit)];
  return os.str();
}

struct RunConfig {
  struct Model {
    ModelParams params{1.0, 1.0};
    int N = 10;
    bool two_cavity = false;
    std::optional<Duration> transfer_time;  // overrides kappa when set
  } model;

  struct Evolution {
    Duration horizon{1.0, TimeUnit::transfer_time};
    int samples = 201;
    double tol = 1e-9;
    Level sigma = Level::g;
    std::string hamiltonian = "chiral";   // chiral | modulated | coupling | homogeneous
    std::string initial = "corner";       // corner | superposition
  } evolution;

  struct Dissipation {
    bool enabled = false;
    std::optional<Duration> t1 = Duration{650.0, TimeUnit::ns};
    std::optional<Duration> tphi = Duration{150.0, TimeUnit::ns};
    std::optional<Duration> t_cavity = Duration{3.47, TimeUnit::us};
    DephasingConvention dephasing = DephasingConvention::pure;
  } dissipation;

  struct Protocol {
    std::string kind = "noon";  // noon | ecs | ghz | two_cavity
    double alpha = 2.0;
    int M = 2;
    PulseMode pulses = PulseMode::ideal;
    bool final_rotation = false;
    std::optional<Duration> time;  // two_cavity rotation time
    std::size_t budget = 20000;
    bool dump_states = false;
    double max_loss = 1e-6;
  } protocol;

  struct Floquet {
    std::vector<double> ratios{25, 50, 100, 200};
    int N = 1;
    double tol = 1e-9;
    std::string scheme = "frequency";  // frequency | coupling
    std::string chirality = "forward";
  } floquet;

  struct Output {
    std::string directory = ".";
    std::set<std::string> formats{"csv", "json", "jsonl"};
  } output;

  // kappa after applying transfer_time.
  double kappa() const {
    if (model.transfer_time) {
      if (model.transfer_time->unit == TimeUnit::inv_kappa || model.transfer_time->unit == TimeUnit::transfer_time)
        throw ConfigError("model.transfer_time must be given in ns or us");
      return kappa_for_transfer_time(model.transfer_time->resolve(1.0));
    }
    return model.params.kappa;
  }

  ModelParams params() const {
    ModelParams p = model.params;
    p.kappa = kappa();
    p.validate();
    return p;
  }

  DissipationParams dissipation_params() const {
    DissipationParams d;
    if (!dissipation.enabled) return d;
    const double k = kappa();
    if (dissipation.t1) d.t1_qubit = dissipation.t1->resolve(k);
    if (dissipation.tphi) d.tphi_qubit = dissipation.tphi->resolve(k);
    if (dissipation.t_cavity) d.t_cavity = dissipation.t_cavity->resolve(k);
    return d;
  }

  bool wants(const std::string& format) const { return output.formats.count(format) != 0; }

  // Sets `section.key` from its textual value.
  void set(const std::string& dotted, const std::string& raw);

  static const std::vector<std::string>& keys();
};

namespace detail {

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

inline const std::map<std::string, Setter>& config_setters() {
  static const std::map<std::string, Setter> table = {
      {"model.N", [](RunConfig& c, const std::string& v, const std::string& k) { c.model.N = parse_int(v, k); }},
      {"model.kappa",
       [](RunConfig& c, const std::string& v, const std::string& k) { c.model.params.kappa = parse_number(v, k); }},
      {"model.transfer_time",
       [](RunConfig& c, const std::string& v, const std::string& k) { c.model.transfer_time = parse_duration(v, k); }},
      {"model.g_v",
       [](RunConfig& c, const std::string& v, const std::string& k) { c.model.params.g_v = parse_number(v, k); }},
      {"model.nu_d",
       [](RunConfig& c, const std::string& v, const std::string& k) { c.model.params.nu_d = parse_number(v, k); }},
      {"model.f", [](RunConfig& c, const std::string& v, const std::string& k) { c.model.params.f = parse_number(v, k); }},
      {"model.delta",
       [](RunConfig& c, const std::string& v, const std::string& k) { c.model.params.delta = parse_number(v, k); }},
      {"model.two_cavity",
       [](RunConfig& c, const std::string& v, const std::string& k) { c.model.two_cavity = parse_bool(v, k); }},
      {"evolution.horizon",
       [](RunConfig& c, const std::string& v, const std::string& k) { c.evolution.horizon = parse_duration(v, k); }},
      {"evolution.samples",
       [](RunConfig& c, const std::string& v, const std::string& k) { c.evolution.samples = parse_int(v, k); }},
      {"evolution.tol",
       [](RunConfig& c, const std::string& v, const std::string& k) { c.evolution.tol = parse_number(v, k); }},
      {"evolution.sigma",
       [](RunConfig& c, const std::string& v, const std::string& k) {
         try {
           c.evolution.sigma = parse_level(v);
         } catch (const std::invalid_argument& e) {
           throw ConfigError(k + ": " + e.what());
         }
       }},
      {"evolution.hamiltonian",
       [](RunConfig& c, const std::string& v, const std::string& k) {
         static const std::set<std::string> ok{"chiral", "modulated", "coupling", "homogeneous"};
         if (!ok.count(v)) throw ConfigError(k + ": expected chiral, modulated, coupling or homogeneous");
         c.evolution.hamiltonian = v;
       }},
      {"evolution.initial",
       [](RunConfig& c, const std::string& v, const std::string& k) {
         if (v != "corner" && v != "superposition") throw ConfigError(k + ": expected corner or superposition");
         c.evolution.initial = v;
       }},
      {"dissipation.enabled",
       [](RunConfig& c, const std::string& v, const std::string& k) { c.dissipation.enabled = parse_bool(v, k); }},
      {"dissipation.t1",
       [](RunConfig& c, const std::string& v, const std::string& k) { c.dissipation.t1 = parse_duration(v, k); }},
      {"dissipation.tphi",
       [](RunConfig& c, const std::string& v, const std::string& k) { c.dissipation.tphi = parse_duration(v, k); }},
      {"dissipation.t_cavity",
       [](RunConfig& c, const std::string& v, const std::string& k) { c.dissipation.t_cavity = parse_duration(v, k); }},
      {"dissipation.dephasing",
       [](RunConfig& c, const std::string& v, const std::string& k) {
         if (v == "pure") c.dissipation.dephasing = DephasingConvention::pure;
         else if (v == "total_t2") c.dissipation.dephasing = DephasingConvention::total_t2;
         else throw ConfigError(k + ": expected pure or total_t2");
       }},
      {"protocol.kind",
       [](RunConfig& c, const std::string& v, const std::string& k) {
         static const std::set<std::string> ok{"noon", "ecs", "ghz", "two_cavity"};
         if (!ok.count(v)) throw ConfigError(k + ": expected noon, ecs, ghz or two_cavity");
         c.protocol.kind = v;
       }},
      {"protocol.alpha",
       [](RunConfig& c, const std::string& v, const std::string& k) { c.protocol.alpha = parse_number(v, k); }},
      {"protocol.M", [](RunConfig& c, const std::string& v, const std::string& k) { c.protocol.M = parse_int(v, k); }},
      {"protocol.pulses",
       [](RunConfig& c, const std::string& v, const std::string& k) {
         try {
           c.protocol.pulses = parse_pulse_mode(v);
         } catch (const std::invalid_argument& e) {
           throw ConfigError(k + ": " + e.what());
         }
       }},
      {"protocol.final_rotation",
       [](RunConfig& c, const std::string& v, const std::string& k) { c.protocol.final_rotation = parse_bool(v, k); }},
      {"protocol.time",
       [](RunConfig& c, const std::string& v, const std::string& k) { c.protocol.time = parse_duration(v, k); }},
      {"protocol.budget",
       [](RunConfig& c, const std::string& v, const std::string& k) {
         int b = parse_int(v, k);
         if (b <= 0) throw ConfigError(k + ": budget must be positive");
         c.protocol.budget = static_cast<std::size_t>(b);
       }},
      {"protocol.dump_states",
       [](RunConfig& c, const std::string& v, const std::string& k) { c.protocol.dump_states = parse_bool(v, k); }},
      {"protocol.max_loss",
       [](RunConfig& c, const std::string& v, const std::string& k) { c.protocol.max_loss = parse_number(v, k); }},
      {"floquet.ratios",
       [](RunConfig& c, const std::string& v, const std::string& k) {
         c.floquet.ratios.clear();
         for (auto& item : split_list(v)) c.floquet.ratios.push_back(parse_number(item, k));
       }},
      {"floquet.N", [](RunConfig& c, const std::string& v, const std::string& k) { c.floquet.N = parse_int(v, k); }},
      {"floquet.tol",
       [](RunConfig& c, const std::string& v, const std::string& k) { c.floquet.tol = parse_number(v, k); }},
      {"floquet.scheme",
       [](RunConfig& c, const std::string& v, const std::string& k) {
         if (v != "frequency" && v != "coupling") throw ConfigError(k + ": expected frequency or coupling");
         c.floquet.scheme = v;
       }},
      {"floquet.chirality",
       [](RunConfig& c, const std::string& v, const std::string& k) {
         if (v != "forward" && v != "reversed") throw ConfigError(k + ": expected forward or reversed");
         c.floquet.chirality = v;
       }},
      {"output.directory", [](RunConfig& c, const std::string& v, const std::string&) { c.output.directory = v; }},
      {"output.formats",
       [](RunConfig& c, const std::string& v, const std::string& k) {
         static const std::set<std::string> ok{"csv", "json", "jsonl"};
         c.output.formats.clear();
         for (auto& f : split_list(v)) {
           if (!ok.count(f)) throw ConfigError(k + ": unknown format '" + f + "'");
           c.output.formats.insert(f);
         }
       }},
  };
  return table;
}

}  // namespace detail

inline void RunConfig::set(const std::string& dotted, const std::string& raw) {
  const auto& table = detail::config_setters();
  auto it = table.find(dotted);
  if (it == table.end()) throw ConfigError("unknown key '" + dotted + "'");
  it->second(*this, detail::trim(raw), dotted);
}

inline const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> k = [] {
    std::vector<std::string> out;
    for (auto& [name, setter] : detail::config_setters()) out.push_back(name);
    return out;
  }();
  return k;
}

inline RunConfig parse_config(std::istream& is, RunConfig base = {}) {
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "unterminated section header");
      section = detail::trim(line.substr(1, line.size() - 2));
      static const std::set<std::string> sections{"model", "evolution", "dissipation", "protocol", "floquet", "output"};
      if (!sections.count(section)) throw ConfigError(where + "unknown section [" + section + "]");
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    if (section.empty()) throw ConfigError(where + "key outside any section");
    try {
      base.set(section + "." + detail::trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  return base;
}

inline RunConfig load_config(const std::string& path, RunConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  return parse_config(in, std::move(base));
}

// Flat "section.key=value" overrides.
inline void apply_overrides(RunConfig& c, const std::vector<std::string>& overrides) {
  for (auto& o : overrides) {
    auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + o + "' is not key=value");
    c.set(detail::trim(o.substr(0, eq)), o.substr(eq + 1));
  }
}

}  // namespace fsl
