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
#include <functional>
#include <stdexcept>
#include <vector>

#include "fsl/bessel.hpp"
#include "fsl/fock_basis.hpp"

namespace fsl {

// Physical constants of the three-cavity model, hbar = 1, angular frequencies.
struct ModelParams {
  double kappa = 1.0;  // effective chiral coupling; its sign selects the circulation
  double g_v = 0.0;    // vacuum Rabi coupling
  double nu_d = 0.0;   // modulation frequency
  double f = 0.0;      // modulation index, depth / nu_d
  double delta = 0.0;  // atom-cavity detuning

  void validate() const {
    if (g_v < 0 || nu_d < 0) throw std::invalid_argument("g_v and nu_d must be nonnegative");
    if (!std::isfinite(kappa) || !std::isfinite(f) || !std::isfinite(delta))
      throw std::invalid_argument("model parameters must be finite");
  }

  // Transfer time 2 pi / (3 sqrt(3) |kappa|).
  double transfer_time() const {
    if (kappa == 0) throw std::invalid_argument("transfer time needs kappa != 0");
    return 2.0 * kPi / (3.0 * std::sqrt(3.0) * std::abs(kappa));
  }
};

inline double kappa_for_transfer_time(double T) { return 2.0 * kPi / (3.0 * std::sqrt(3.0) * T); }

// Sign of the modulation phase sequence 2 j pi / 3.
enum class DriveChirality { forward, reversed };

namespace detail {

inline void require_three_mode_groups(const BasisPtr& basis, int group) {
  if (basis->modes() % 3 != 0 || group < 0 || 3 * (group + 1) > basis->modes())
    throw std::invalid_argument("basis has no three-mode group " + std::to_string(group));
}

}  // namespace detail

// i kappa sigma_z sum_j a_{j+1}^dagger a_j + h.c. on the modes of `group`
// (modes 3*group .. 3*group+2). With sigma_z|g> = -|g> this fixes
// <g;0,1,0|H|g;1,0,0> = -i kappa.
inline Operator chiral_hamiltonian(const ModelParams& params, const BasisPtr& basis, int group = 0) {
  detail::require_three_mode_groups(basis, group);
  const int o = 3 * group;
  Operator forward = hop(basis, o + 0, o + 1) + hop(basis, o + 1, o + 2) + hop(basis, o + 2, o + 0);
  Operator sz = pauli_z(basis);
  Operator k = (kI * params.kappa) * (sz * forward);
  return k + k.adjoint();
}

// Chiral lattice with the sqrt(n) factors stripped: every hop has magnitude
// `hop_rate` and the same +-i phase as chiral_hamiltonian.
inline Operator homogeneous_lattice_hamiltonian(const BasisPtr& basis, double hop_rate) {
  Operator h = chiral_hamiltonian(ModelParams{1.0}, basis);
  for (int k = 0; k < h.matrix.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(h.matrix, k); it; ++it) {
      double m = std::abs(it.value());
      if (m > 0) it.valueRef() *= hop_rate / m;
    }
  return h;
}

// delta sigma_z / 2 + g_v J_0(f) sum_j (sigma^+ a_j + h.c.).
inline Operator jc_resonant(const ModelParams& params, const BasisPtr& basis) {
  Operator h = (0.5 * params.delta) * pauli_z(basis);
  const double coupling = params.g_v * bessel_j(0, params.f);
  for (int j = 0; j < basis->modes(); ++j) {
    Operator a = coupling * jc_lowering(basis, j);
    h = h + a + a.adjoint();
  }
  return h;
}

// H(t) = H_static + sum_k (c_k(t) A_k + conj(c_k(t)) A_k^dagger).
struct DrivenHamiltonian {
  Operator static_part;
  std::vector<Operator> terms;
  std::vector<Operator> adjoints;
  std::function<void(double, std::vector<Complex>&)> coefficients;
  double period = 0.0;  // 0 when not periodic

  Operator at(double t) const {
    std::vector<Complex> c(terms.size());
    coefficients(t, c);
    Operator h = static_part;
    for (std::size_t k = 0; k < terms.size(); ++k) h = h + c[k] * terms[k] + std::conj(c[k]) * adjoints[k];
    return h;
  }

  // out = -i H(t) psi
  void apply_generator(double t, const Vector& psi, Vector& out, std::vector<Complex>& scratch) const {
    scratch.resize(terms.size());
    coefficients(t, scratch);
    out.noalias() = static_part.matrix * psi;
    for (std::size_t k = 0; k < terms.size(); ++k) {
      out.noalias() += scratch[k] * (terms[k].matrix * psi);
      out.noalias() += std::conj(scratch[k]) * (adjoints[k].matrix * psi);
    }
    out *= -kI;
  }

  const BasisPtr& basis() const { return static_part.basis(); }
};

inline DrivenHamiltonian make_driven(Operator static_part, std::vector<Operator> terms,
                                     std::function<void(double, std::vector<Complex>&)> coefficients,
                                     double period) {
  DrivenHamiltonian d{std::move(static_part), std::move(terms), {}, std::move(coefficients), period};
  for (auto& t : d.terms) {
    require_same_basis(t.domain, d.static_part.domain, "driven Hamiltonian");
    d.adjoints.push_back(t.adjoint());
  }
  return d;
}

inline DrivenHamiltonian constant_drive(Operator h) {
  return make_driven(std::move(h), {}, [](double, std::vector<Complex>&) {}, 0.0);
}

inline double drive_phase_offset(int j, DriveChirality c) {
  return (c == DriveChirality::forward ? 1.0 : -1.0) * 2.0 * kPi * j / 3.0;
}

// Frequency-modulated cavities in the frame rotating at the mean cavity frequency:
// delta sigma_z/2 + g_v sum_j (sigma^+ a_j exp(i f cos(nu_d t - 2 j pi/3)) + h.c.).
inline DrivenHamiltonian full_modulated_drive(const ModelParams& params, const BasisPtr& basis,
                                              DriveChirality chirality = DriveChirality::forward) {
  std::vector<Operator> terms;
  for (int j = 0; j < 3; ++j) terms.push_back(params.g_v * jc_lowering(basis, j));
  const double nu = params.nu_d, f = params.f;
  std::vector<double> offsets{drive_phase_offset(0, chirality), drive_phase_offset(1, chirality),
                              drive_phase_offset(2, chirality)};
  auto coeff = [nu, f, offsets](double t, std::vector<Complex>& c) {
    for (std::size_t j = 0; j < 3; ++j) c[j] = std::polar(1.0, f * std::cos(nu * t - offsets[j]));
  };
  double period = nu > 0 ? 2.0 * kPi / nu : 0.0;
  return make_driven((0.5 * params.delta) * pauli_z(basis), std::move(terms), coeff, period);
}

inline Operator full_modulated(const ModelParams& params, const BasisPtr& basis, double t,
                               DriveChirality chirality = DriveChirality::forward) {
  return full_modulated_drive(params, basis, chirality).at(t);
}

// Coupling modulation g_j(t) = 2 g_v cos(nu_d t - 2 j pi / 3), resonant cavities.
inline DrivenHamiltonian coupling_modulated_drive(const ModelParams& params, const BasisPtr& basis,
                                                  DriveChirality chirality = DriveChirality::forward) {
  std::vector<Operator> terms;
  for (int j = 0; j < 3; ++j) terms.push_back(jc_lowering(basis, j));
  const double nu = params.nu_d, g = params.g_v;
  std::vector<double> offsets{drive_phase_offset(0, chirality), drive_phase_offset(1, chirality),
                              drive_phase_offset(2, chirality)};
  auto coeff = [nu, g, offsets](double t, std::vector<Complex>& c) {
    for (std::size_t j = 0; j < 3; ++j) c[j] = 2.0 * g * std::cos(nu * t - offsets[j]);
  };
  double period = nu > 0 ? 2.0 * kPi / nu : 0.0;
  return make_driven(zero_operator(basis), std::move(terms), coeff, period);
}

inline Operator coupling_modulated(const ModelParams& params, const BasisPtr& basis, double t) {
  return coupling_modulated_drive(params, basis).at(t);
}

inline std::vector<double> modulated_couplings(const ModelParams& params, double t) {
  std::vector<double> g(3);
  for (int j = 0; j < 3; ++j) g[j] = 2.0 * params.g_v * std::cos(params.nu_d * t - 2.0 * kPi * j / 3.0);
  return g;
}

// Effective chiral coupling predicted for coupling modulation.
inline double coupling_modulated_kappa(const ModelParams& params) {
  if (params.nu_d <= 0) throw std::invalid_argument("nu_d must be positive");
  return std::sqrt(3.0) * params.g_v * params.g_v / params.nu_d;
}

// J_y = i a_0^dagger a_1 - i a_1^dagger a_0 (twice the usual spin generator).
inline Operator schwinger_jy(const BasisPtr& basis2) {
  if (basis2->modes() != 2) throw std::invalid_argument("Schwinger-boson operators need a two-mode basis");
  return kI * hop(basis2, 1, 0) - kI * hop(basis2, 0, 1);
}

inline Operator schwinger_jx(const BasisPtr& basis2) {
  if (basis2->modes() != 2) throw std::invalid_argument("Schwinger-boson operators need a two-mode basis");
  return hop(basis2, 1, 0) + hop(basis2, 0, 1);
}

inline Operator schwinger_jz(const BasisPtr& basis2) {
  if (basis2->modes() != 2) throw std::invalid_argument("Schwinger-boson operators need a two-mode basis");
  return number(basis2, 0) - number(basis2, 1);
}

// kappa sigma_z J_y on a two-mode basis.
inline Operator two_cavity_hamiltonian(const ModelParams& params, const BasisPtr& basis2) {
  return params.kappa * (pauli_z(basis2) * schwinger_jy(basis2));
}

}  // namespace fsl
