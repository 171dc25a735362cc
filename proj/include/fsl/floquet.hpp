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

#include <cmath>
#include <future>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fsl/bessel.hpp"
#include "fsl/dynamics.hpp"
#include "fsl/hamiltonians.hpp"

namespace fsl {

// sin(2 n pi / 3) without rounding: exactly zero for n divisible by 3.
inline double sin_two_thirds_pi(int n) {
  static constexpr double s[3] = {0.0, 0.86602540378443864676, -0.86602540378443864676};
  return s[((n % 3) + 3) % 3];
}

inline double beta_term(int n, double f) {
  if (n % 3 == 0) return 0.0;
  const double j = bessel_j(n, f);
  return 2.0 * j * j * sin_two_thirds_pi(n) / n;
}

struct BetaSeries {
  double value = 0.0;
  int terms = 0;  // highest order included
};

// beta = sum_{n>=1} 2 J_n(f)^2 sin(2 n pi / 3) / n, stopped at the first
// nonvanishing term below `tol` once n exceeds f (the terms then decay
// monotonically). `max_order` caps the sum for convergence studies.
inline BetaSeries beta_series_detail(double f, double tol = 1e-12, std::optional<int> max_order = {}) {
  if (tol <= 0) throw std::invalid_argument("tolerance must be positive");
  BetaSeries out;
  for (int n = 1; n < 400; ++n) {
    if (max_order && n > *max_order) break;
    const double t = beta_term(n, f);
    out.value += t;
    out.terms = n;
    if (n % 3 != 0 && n > std::abs(f) && std::abs(t) < tol) break;
  }
  return out;
}

inline double beta_series(double f, double tol = 1e-12) { return beta_series_detail(f, tol).value; }

enum class ModulationScheme { frequency, coupling };

// Frequency modulation: g_v^2 beta(f) / nu_d. Coupling modulation: sqrt(3) g_v^2 / nu_d.
inline double effective_kappa(const ModelParams& params, ModulationScheme scheme = ModulationScheme::frequency) {
  if (params.nu_d <= 0) throw std::invalid_argument("nu_d must be positive");
  if (scheme == ModulationScheme::coupling) return coupling_modulated_kappa(params);
  return params.g_v * params.g_v * beta_series(params.f) / params.nu_d;
}

struct FloquetComparison {
  double nu_ratio = 0.0;    // nu_d / g_v
  int N = 1;
  double horizon = 0.0;
  double kappa_eff = 0.0;
  double infidelity = 0.0;  // 1 - |<psi_full|psi_eff>|
  double norm_drift = 0.0;
};

struct CompareOptions {
  double tol = 1e-9;
  std::optional<double> horizon;  // defaults to the effective transfer time
  // Round the horizon to a whole number of drive periods, so the micromotion
  // phase at the endpoint matches the start and does not alias into the scan.
  bool stroboscopic = true;
  Level sigma = Level::g;
  DriveChirality chirality = DriveChirality::forward;
  ModulationScheme scheme = ModulationScheme::frequency;
};

// Evolves |sigma; N,0,0> (|e; N-1,0,0> for sigma = e) under the modulated
// Hamiltonian and under the chiral Hamiltonian with the predicted kappa.
inline FloquetComparison compare_full_vs_effective(const ModelParams& params, int N,
                                                   const CompareOptions& options = {}) {
  if (N < 1) throw std::invalid_argument("comparison needs N >= 1");
  auto basis = enumerate_shell(N);
  const int photons = options.sigma == Level::e ? N - 1 : N;
  auto psi0 = fock_state(basis, options.sigma, photons, 0, 0);

  FloquetComparison out;
  out.N = N;
  out.nu_ratio = params.g_v > 0 ? params.nu_d / params.g_v : 0.0;
  if (params.g_v == 0.0) {
    out.horizon = options.horizon.value_or(0.0);
    return out;
  }
  out.kappa_eff = effective_kappa(params, options.scheme);
  ModelParams eff = params;
  eff.kappa = out.kappa_eff;
  out.horizon = options.horizon.value_or(eff.transfer_time());
  if (options.stroboscopic && params.nu_d > 0) {
    const double period = 2.0 * kPi / params.nu_d;
    out.horizon = std::max(1.0, std::round(out.horizon / period)) * period;
  }

  auto drive = options.scheme == ModulationScheme::frequency
                   ? full_modulated_drive(params, basis, options.chirality)
                   : coupling_modulated_drive(params, basis, options.chirality);
  TimeDepOptions td;
  td.tol = options.tol;
  auto full = evolve_timedep(drive, psi0, {out.horizon}, td);
  if (full.flagged) throw NumericalError("modulated evolution flagged: " + full.notes.front());

  Operator h_eff = chiral_hamiltonian(eff, basis);
  // Time-averaged part: the J_0-weighted resonant coupling (absent for coupling modulation).
  if (options.scheme == ModulationScheme::frequency) h_eff = h_eff + jc_resonant(params, basis);
  else if (params.delta != 0.0) h_eff = h_eff + (0.5 * params.delta) * pauli_z(basis);
  auto effective = SpectralPropagator(h_eff).apply(out.horizon, psi0);

  out.infidelity = std::max(0.0, 1.0 - std::abs(inner(full.states.back(), effective)));
  out.norm_drift = full.diagnostics["norm_drift"];
  return out;
}

struct FloquetReport {
  double f = 0.0;
  double beta = 0.0;
  double kappa_eff = 0.0;
  double j0_residual = 0.0;  // |J_0(f)|
  std::vector<std::pair<double, double>> comparison;  // (nu_d / g_v, infidelity)

  bool operator==(const FloquetReport&) const = default;
};

// Beta and kappa at `params.f` plus the full-vs-effective infidelity for each
// nu_d / g_v ratio. Scan points run concurrently.
inline FloquetReport floquet_report(const ModelParams& params, int N, const std::vector<double>& ratios,
                                    const CompareOptions& options = {}) {
  FloquetReport r;
  r.f = params.f;
  r.beta = beta_series(params.f);
  r.j0_residual = std::abs(bessel_j(0, params.f));
  if (params.nu_d > 0) r.kappa_eff = effective_kappa(params, options.scheme);
  std::vector<std::future<FloquetComparison>> jobs;
  for (double ratio : ratios) {
    ModelParams p = params;
    p.nu_d = ratio * p.g_v;
    jobs.push_back(std::async(std::launch::async, [p, N, options] { return compare_full_vs_effective(p, N, options); }));
  }
  for (std::size_t i = 0; i < jobs.size(); ++i) r.comparison.emplace_back(ratios[i], jobs[i].get().infidelity);
  return r;
}

}  // namespace fsl
