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

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fsl/dynamics.hpp"
#include "fsl/fock_basis.hpp"
#include "fsl/hamiltonians.hpp"

namespace fsl {

inline double fidelity(const StateVector& a, const StateVector& b) {
  return std::min(1.0, std::abs(inner(a, b)));
}

inline double fidelity_mixed(const DensityMatrix& rho, const StateVector& psi) {
  require_same_basis(rho.basis, psi.basis, "mixed fidelity");
  const double v = psi.amp.dot(rho.rho * psi.amp).real();
  return std::clamp(std::sqrt(std::max(0.0, v)), 0.0, 1.0);
}

struct SiteProbability {
  BasisState site;
  double probability = 0.0;

  bool operator==(const SiteProbability&) const = default;
};

struct LatticeSnapshot {
  double t = 0.0;
  std::vector<SiteProbability> sites;  // basis order

  double total() const {
    double s = 0.0;
    for (auto& p : sites) s += p.probability;
    return s;
  }
  double probability(const BasisState& s) const {
    for (auto& p : sites)
      if (p.site == s) return p.probability;
    return 0.0;
  }
  bool operator==(const LatticeSnapshot&) const = default;
};

inline LatticeSnapshot lattice_snapshot(const StateVector& psi, double t = 0.0) {
  LatticeSnapshot s{t, {}};
  s.sites.reserve(psi.basis->dim());
  for (std::size_t i = 0; i < psi.basis->dim(); ++i)
    s.sites.push_back({psi.basis->state(i), std::norm(psi.amp(static_cast<Eigen::Index>(i)))});
  return s;
}

inline LatticeSnapshot lattice_snapshot(const DensityMatrix& rho, double t = 0.0) {
  LatticeSnapshot s{t, {}};
  s.sites.reserve(rho.basis->dim());
  for (std::size_t i = 0; i < rho.basis->dim(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    s.sites.push_back({rho.basis->state(i), std::max(0.0, rho.rho(k, k).real())});
  }
  return s;
}

template <class State>
std::vector<LatticeSnapshot> snapshots(const EvolutionResult<State>& r) {
  std::vector<LatticeSnapshot> out;
  for (std::size_t i = 0; i < r.states.size(); ++i) out.push_back(lattice_snapshot(r.states[i], r.times[i]));
  return out;
}

// Inverse participation ratio over lattice sites, sum_i p_i^2.
inline double ipr(const LatticeSnapshot& s) {
  double v = 0.0;
  for (auto& p : s.sites) v += p.probability * p.probability;
  return v;
}
inline double ipr(const StateVector& psi) { return ipr(lattice_snapshot(psi)); }
inline double ipr(const DensityMatrix& rho) { return ipr(lattice_snapshot(rho)); }

struct CornerArrival {
  double time = 0.0;
  int cavity = -1;  // corner holding every photon of the branch
  double probability = 0.0;
};

// Argmax over the sampled grid of the corner probabilities on the sigma
// sublattice, skipping the corner that dominates at t = 0. Maxima within 1e-9
// of each other count as ties and go to the earliest grid time.
inline CornerArrival corner_arrival(const PureEvolution& r, Level sigma) {
  if (r.states.empty()) throw std::invalid_argument("empty evolution");
  const auto& basis = *r.states.front().basis;
  const int modes = basis.modes();
  std::optional<int> photons;
  for (auto& s : basis.states())
    if (s.sigma == sigma && std::norm(r.states.front().amplitude(s)) > 0) {
      photons = s.photons();
      break;
    }
  if (!photons) throw std::invalid_argument("the initial state has no weight on this sublattice");

  std::vector<std::optional<std::size_t>> corner(static_cast<std::size_t>(modes));
  for (int j = 0; j < modes; ++j) {
    BasisState c{sigma, std::vector<int>(static_cast<std::size_t>(modes), 0)};
    c.occ[static_cast<std::size_t>(j)] = *photons;
    corner[static_cast<std::size_t>(j)] = basis.find(c);
  }
  auto prob = [&](std::size_t k, int j) {
    auto idx = corner[static_cast<std::size_t>(j)];
    return idx ? std::norm(r.states[k].amp(static_cast<Eigen::Index>(*idx))) : 0.0;
  };
  int start = 0;
  for (int j = 1; j < modes; ++j)
    if (prob(0, j) > prob(0, start)) start = j;

  // time-major scan so near-equal maxima resolve to the earliest arrival
  CornerArrival best;
  for (std::size_t k = 0; k < r.states.size(); ++k)
    for (int j = 0; j < modes; ++j) {
      if (j == start || !corner[static_cast<std::size_t>(j)]) continue;
      const double p = prob(k, j);
      if (p > best.probability + 1e-9) best = {r.times[k], j, p};
    }
  return best;
}

struct Fig3Curves {
  std::vector<double> times;
  std::vector<double> p_e090;
  std::vector<double> p_g0010;
  std::vector<double> coh;

  bool operator==(const Fig3Curves&) const = default;
};

// Population of the e-sublattice corner in cavity 1, population of the
// g-sublattice corner in cavity 2, and the modulus of their coherence.
struct Fig3Sites {
  BasisState e_corner;
  BasisState g_corner;

  static Fig3Sites for_photons(int N) {
    return {{Level::e, {0, N - 1, 0}}, {Level::g, {0, 0, N}}};
  }
};

inline void append_fig3_point(Fig3Curves& c, const Fig3Sites& s, double t, const DensityMatrix& rho) {
  c.times.push_back(t);
  c.p_e090.push_back(rho.element(s.e_corner, s.e_corner).real());
  c.p_g0010.push_back(rho.element(s.g_corner, s.g_corner).real());
  c.coh.push_back(std::abs(rho.element(s.g_corner, s.e_corner)));
}

inline Fig3Curves fig3_observables(const MixedEvolution& r, int N = 10) {
  if (r.states.size() != r.times.size()) throw std::invalid_argument("evolution did not keep every state");
  Fig3Curves c;
  auto sites = Fig3Sites::for_photons(N);
  for (std::size_t i = 0; i < r.states.size(); ++i) append_fig3_point(c, sites, r.times[i], r.states[i]);
  return c;
}

// Lindblad run from (|g;N,0,0> - |e;N-1,0,0>)/sqrt(2) under the chiral
// Hamiltonian, in nanoseconds.
struct Fig3Setup {
  int N = 10;
  double transfer_time = 80.0;
  bool dissipation = true;
  DissipationParams rates{650.0, 150.0, 3470.0};
  DephasingConvention dephasing = DephasingConvention::pure;
  double horizon = 160.0;
  int samples = 401;
  double tol = 1e-9;
};

struct Fig3Run {
  Fig3Curves curves;
  std::map<std::string, double> diagnostics;
  bool flagged = false;
  std::vector<std::string> notes;
  DensityMatrix final_state;
};

inline StateVector fig3_initial_state(const BasisPtr& basis, int N) {
  StateVector psi{basis, fock_state(basis, Level::g, N, 0, 0).amp - fock_state(basis, Level::e, N - 1, 0, 0).amp};
  psi.normalize();
  return psi;
}

inline Fig3Run fig3_pipeline(const Fig3Setup& setup) {
  if (setup.N < 1) throw std::invalid_argument("N must be >= 1");
  auto basis = enumerate_truncated(setup.N);
  ModelParams params;
  params.kappa = kappa_for_transfer_time(setup.transfer_time);
  Operator H = chiral_hamiltonian(params, basis);
  std::vector<Operator> collapse;
  if (setup.dissipation) collapse = build_collapse_ops(basis, setup.rates, setup.dephasing);

  Fig3Run run;
  auto sites = Fig3Sites::for_photons(setup.N);
  LindbladOptions opt;
  opt.tol = setup.tol;
  opt.store_states = false;
  opt.observer = [&](std::size_t, double t, const DensityMatrix& rho) {
    append_fig3_point(run.curves, sites, t, rho);
  };
  auto r = lindblad_evolve(H, collapse, DensityMatrix::from_pure(fig3_initial_state(basis, setup.N)),
                           linear_grid(setup.horizon, setup.samples), opt);
  run.diagnostics = r.diagnostics;
  run.flagged = r.flagged;
  run.notes = r.notes;
  run.final_state = r.states.back();
  return run;
}

// Curve values at the grid point nearest t.
inline std::array<double, 3> fig3_at(const Fig3Curves& c, double t) {
  if (c.times.empty()) throw std::invalid_argument("empty curves");
  std::size_t k = 0;
  for (std::size_t i = 1; i < c.times.size(); ++i)
    if (std::abs(c.times[i] - t) < std::abs(c.times[k] - t)) k = i;
  return {c.p_e090[k], c.p_g0010[k], c.coh[k]};
}

// Elementary triangle of the Fock-state lattice, traversed counterclockwise
// (same sense as the corners 0 -> 1 -> 2). Around an up triangle one photon
// hops 0 -> 1 -> 2 -> 0; around a down triangle it hops 1 -> 0 -> 2 -> 1.
struct Plaquette {
  bool up = true;
  std::array<BasisState, 3> loop;  // loop[k] -> loop[k+1 mod 3]
};

// Every elementary triangle on the sigma sublattice of a three-mode basis.
inline std::vector<Plaquette> enumerate_plaquettes(const BasisPtr& basis, Level sigma) {
  if (basis->modes() != 3) throw std::invalid_argument("plaquettes need a three-mode basis");
  std::vector<Plaquette> out;
  auto has = [&](const BasisState& s) { return basis->contains(s); };
  for (auto& s : basis->states()) {
    if (s.sigma != sigma) continue;
    const auto& n = s.occ;
    // up triangle with base site holding an extra photon in cavity 0
    if (n[0] >= 1) {
      BasisState a = s, b = s, c = s;
      b.occ = {n[0] - 1, n[1] + 1, n[2]};
      c.occ = {n[0] - 1, n[1], n[2] + 1};
      if (has(b) && has(c)) out.push_back({true, {a, b, c}});
    }
    // down triangle with one photon missing from cavity 0
    if (n[1] >= 1 && n[2] >= 1) {
      BasisState d = s, e = s, f = s;
      e.occ = {n[0] + 1, n[1] - 1, n[2]};
      f.occ = {n[0] + 1, n[1], n[2] - 1};
      if (has(e) && has(f)) out.push_back({false, {d, e, f}});
    }
  }
  return out;
}

// arg of <l1|H|l0><l2|H|l1><l0|H|l2>, in (-pi, pi].
inline double plaquette_flux(const Operator& H, const Plaquette& p) {
  Complex prod{1.0};
  for (int k = 0; k < 3; ++k) {
    Complex h = H.element(p.loop[static_cast<std::size_t>((k + 1) % 3)], p.loop[static_cast<std::size_t>(k)]);
    if (h == Complex{}) throw std::invalid_argument("plaquette edge has no hopping element");
    prod *= h;
  }
  double phi = std::arg(prod);
  if (phi <= -kPi) phi += 2.0 * kPi;
  return phi;
}

struct TransportComparison {
  double chiral_ipr = 0.0;
  double homogeneous_ipr = 0.0;
  double horizon = 0.0;
  double hop_rate = 0.0;
};

// IPR of |g;N,0,0> after `periods` transfer times under the chiral lattice
// and under the homogeneous lattice with hop rate `hop_rate` (default
// sqrt(N) kappa, the coupling out of the starting corner).
inline TransportComparison compare_transport(const ModelParams& params, int N, double periods = 3.0,
                                             std::optional<double> hop_rate = {}) {
  auto basis = enumerate_shell(N);
  auto psi0 = fock_state(basis, Level::g, N, 0, 0);
  TransportComparison out;
  out.horizon = periods * params.transfer_time();
  out.hop_rate = hop_rate.value_or(std::sqrt(double(N)) * std::abs(params.kappa));
  out.chiral_ipr = ipr(SpectralPropagator(chiral_hamiltonian(params, basis)).apply(out.horizon, psi0));
  out.homogeneous_ipr =
      ipr(SpectralPropagator(homogeneous_lattice_hamiltonian(basis, out.hop_rate)).apply(out.horizon, psi0));
  return out;
}

}  // namespace fsl
