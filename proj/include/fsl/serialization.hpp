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

// JSON, JSON-lines and CSV forms of the result types. Doubles in CSV and COO
// text are printed with 17 significant digits; JSON uses the shortest
// representation that parses back to the same double.

#pragma once

#include <cstdio>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "fsl/analysis.hpp"
#include "fsl/floquet.hpp"
#include "fsl/fock_basis.hpp"
#include "fsl/protocols.hpp"

namespace fsl {

using json = nlohmann::json;

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline BasisKind parse_basis_kind(const std::string& s) {
  if (s == "shell") return BasisKind::shell;
  if (s == "truncated") return BasisKind::truncated;
  if (s == "photon_blocks") return BasisKind::photon_blocks;
  throw std::invalid_argument("unknown basis kind '" + s + "'");
}

inline void to_json(json& j, const BasisState& s) {
  j = json{{"sigma", std::string(1, level_char(s.sigma))}, {"n", s.occ}};
}
inline void from_json(const json& j, BasisState& s) {
  s.sigma = parse_level(j.at("sigma").get<std::string>());
  s.occ = j.at("n").get<std::vector<int>>();
}

inline json basis_to_json(const Basis& b) {
  return json{{"kind", to_string(b.kind())}, {"excitation", b.excitation()}, {"modes", b.modes()},
              {"groups", b.groups()}, {"states", b.states()}};
}
inline BasisPtr basis_from_json(const json& j) {
  return std::make_shared<const Basis>(parse_basis_kind(j.at("kind").get<std::string>()), j.at("excitation").get<int>(),
                                       j.at("modes").get<int>(), j.at("states").get<std::vector<BasisState>>(),
                                       j.at("groups").get<int>());
}

inline json state_to_json(const StateVector& psi) {
  json amp = json::array();
  for (Eigen::Index i = 0; i < psi.amp.size(); ++i) amp.push_back({psi.amp(i).real(), psi.amp(i).imag()});
  return json{{"basis", basis_to_json(*psi.basis)}, {"amplitudes", amp}};
}
inline StateVector state_from_json(const json& j) {
  StateVector psi;
  psi.basis = basis_from_json(j.at("basis"));
  const auto& amp = j.at("amplitudes");
  if (amp.size() != psi.basis->dim()) throw std::invalid_argument("amplitude count does not match the basis");
  psi.amp.resize(static_cast<Eigen::Index>(amp.size()));
  for (std::size_t i = 0; i < amp.size(); ++i)
    psi.amp(static_cast<Eigen::Index>(i)) = {amp[i].at(0).get<double>(), amp[i].at(1).get<double>()};
  return psi;
}

// `with_states` adds a full amplitude dump to every stage.
inline json protocol_to_json(const ProtocolResult& r, bool with_states = false) {
  json stages = json::array();
  for (auto& s : r.stages) {
    json st{{"label", s.label}};
    if (with_states && s.state.basis) st["state"] = state_to_json(s.state);
    stages.push_back(st);
  }
  return json{{"kind", r.kind},
              {"target_fidelity", r.target_fidelity},
              {"relative_phase", r.relative_phase},
              {"metrics", r.metrics},
              {"stages", stages}};
}
inline ProtocolResult protocol_from_json(const json& j) {
  ProtocolResult r;
  r.kind = j.at("kind").get<std::string>();
  r.target_fidelity = j.at("target_fidelity").get<double>();
  r.relative_phase = j.at("relative_phase").get<double>();
  r.metrics = j.at("metrics").get<std::map<std::string, double>>();
  for (auto& st : j.at("stages")) {
    StageState s;
    s.label = st.at("label").get<std::string>();
    if (st.contains("state")) s.state = state_from_json(st.at("state"));
    r.stages.push_back(std::move(s));
  }
  return r;
}

inline json floquet_to_json(const FloquetReport& r) {
  json rows = json::array();
  for (auto& [ratio, inf] : r.comparison) rows.push_back({{"nu_ratio", ratio}, {"infidelity", inf}});
  return json{{"f", r.f}, {"beta", r.beta}, {"kappa_eff", r.kappa_eff}, {"j0_residual", r.j0_residual},
              {"comparison", rows}};
}
inline FloquetReport floquet_from_json(const json& j) {
  FloquetReport r;
  r.f = j.at("f").get<double>();
  r.beta = j.at("beta").get<double>();
  r.kappa_eff = j.at("kappa_eff").get<double>();
  r.j0_residual = j.at("j0_residual").get<double>();
  for (auto& row : j.at("comparison"))
    r.comparison.emplace_back(row.at("nu_ratio").get<double>(), row.at("infidelity").get<double>());
  return r;
}

inline json snapshot_to_json(const LatticeSnapshot& s) {
  json sites = json::array();
  for (auto& p : s.sites) {
    json site = p.site;
    site["p"] = p.probability;
    sites.push_back(std::move(site));
  }
  return json{{"t", s.t}, {"sites", sites}};
}
inline LatticeSnapshot snapshot_from_json(const json& j) {
  LatticeSnapshot s;
  s.t = j.at("t").get<double>();
  for (auto& site : j.at("sites")) s.sites.push_back({site.get<BasisState>(), site.at("p").get<double>()});
  return s;
}

// One frame per line.
inline void write_snapshots_jsonl(std::ostream& os, const std::vector<LatticeSnapshot>& frames) {
  for (auto& f : frames) os << snapshot_to_json(f).dump() << '\n';
}
inline std::vector<LatticeSnapshot> read_snapshots_jsonl(std::istream& is) {
  std::vector<LatticeSnapshot> out;
  std::string line;
  while (std::getline(is, line))
    if (!line.empty()) out.push_back(snapshot_from_json(json::parse(line)));
  return out;
}

inline void write_fig3_csv(std::ostream& os, const Fig3Curves& c) {
  os << "t,p_e090,p_g0010,coh\n";
  for (std::size_t i = 0; i < c.times.size(); ++i)
    os << format_double(c.times[i]) << ',' << format_double(c.p_e090[i]) << ',' << format_double(c.p_g0010[i])
       << ',' << format_double(c.coh[i]) << '\n';
}

namespace detail {

inline std::vector<double> split_csv_row(const std::string& line, std::size_t expected) {
  std::vector<double> v;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
  if (v.size() != expected) throw std::invalid_argument("malformed CSV row: " + line);
  return v;
}

}  // namespace detail

inline Fig3Curves read_fig3_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "t,p_e090,p_g0010,coh")
    throw std::invalid_argument("expected header t,p_e090,p_g0010,coh");
  Fig3Curves c;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto v = detail::split_csv_row(line, 4);
    c.times.push_back(v[0]);
    c.p_e090.push_back(v[1]);
    c.p_g0010.push_back(v[2]);
    c.coh.push_back(v[3]);
  }
  return c;
}

inline void write_floquet_csv(std::ostream& os, const FloquetReport& r) {
  os << "nu_ratio,infidelity\n";
  for (auto& [ratio, inf] : r.comparison) os << format_double(ratio) << ',' << format_double(inf) << '\n';
}

// Observables along a closed-system trajectory: norm, IPR and mean occupations.
inline void write_observables_csv(std::ostream& os, const PureEvolution& r) {
  os << "t,norm,ipr,p_e,n0,n1,n2\n";
  for (std::size_t i = 0; i < r.states.size(); ++i) {
    const auto& psi = r.states[i];
    double pe = 0.0, n[3] = {0.0, 0.0, 0.0};
    for (std::size_t k = 0; k < psi.basis->dim(); ++k) {
      const double p = std::norm(psi.amp(static_cast<Eigen::Index>(k)));
      const auto& s = psi.basis->state(k);
      if (s.sigma == Level::e) pe += p;
      for (int m = 0; m < std::min(3, psi.basis->modes()); ++m) n[m] += p * s.occ[static_cast<std::size_t>(m)];
    }
    os << format_double(r.times[i]) << ',' << format_double(psi.norm()) << ',' << format_double(ipr(psi)) << ','
       << format_double(pe) << ',' << format_double(n[0]) << ',' << format_double(n[1]) << ','
       << format_double(n[2]) << '\n';
  }
}

// Coordinate-list dump: row,col,re,im.
inline void write_coo(std::ostream& os, const Operator& op) {
  os << "row,col,re,im\n";
  for (int k = 0; k < op.matrix.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(op.matrix, k); it; ++it)
      os << it.row() << ',' << it.col() << ',' << format_double(it.value().real()) << ','
         << format_double(it.value().imag()) << '\n';
}

}  // namespace fsl
