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

#include <gtest/gtest.h>

#include <cmath>

#include "fsl/dynamics.hpp"
#include "fsl/hamiltonians.hpp"

using namespace fsl;

namespace {

// exp(-i H t) by scaling and squaring of a Taylor series.
DenseMatrix taylor_exp(const DenseMatrix& H, double t) {
  const double norm = H.cwiseAbs().rowwise().sum().maxCoeff() * std::abs(t);
  int squarings = 0;
  while (norm / std::pow(2.0, squarings) > 0.25) ++squarings;
  DenseMatrix A = (-kI * t / std::pow(2.0, squarings)) * H;
  DenseMatrix term = DenseMatrix::Identity(H.rows(), H.cols());
  DenseMatrix sum = term;
  for (int k = 1; k < 30; ++k) {
    term = term * A / double(k);
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

}  // namespace

TEST(Propagator, MatchesTaylorOracle) {
  ModelParams p;
  p.kappa = 0.8;
  p.g_v = 0.5;
  p.f = 1.2;
  auto b = enumerate_truncated(3);
  Operator h = chiral_hamiltonian(p, b) + jc_resonant(p, b);
  for (double t : {0.3, 2.7}) {
    DenseMatrix u = DenseMatrix(propagator_exact(h, t).matrix);
    EXPECT_LT((u - taylor_exp(DenseMatrix(h.matrix), t)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Propagator, SplitsIntoConservedBlocks) {
  auto b = enumerate_shell(4);
  SpectralPropagator U(chiral_hamiltonian(ModelParams{}, b));
  EXPECT_EQ(U.block_count(), 2u);
  EXPECT_EQ(U.eigenvalues().size(), Eigen::Index(b->dim()));
  EXPECT_THROW(SpectralPropagator(kI * chiral_hamiltonian(ModelParams{}, b)), std::invalid_argument);
}

TEST(Propagator, CornerTransferHasUnitAmplitude) {
  ModelParams p;
  p.kappa = 1.4;
  for (int N : {1, 3, 7}) {
    auto b = enumerate_shell(N);
    SpectralPropagator U(chiral_hamiltonian(p, b));
    auto out = U.apply(p.transfer_time(), fock_state(b, Level::g, N, 0, 0));
    const Complex a = out.amplitude(BasisState{Level::g, {0, 0, N}});
    EXPECT_NEAR(a.real(), 1.0, 1e-12);
    EXPECT_NEAR(a.imag(), 0.0, 1e-12);
    auto oute = U.apply(p.transfer_time(), fock_state(b, Level::e, N - 1, 0, 0));
    EXPECT_NEAR(std::abs(oute.amplitude(BasisState{Level::e, {0, N - 1, 0}})), 1.0, 1e-12);
  }
}

TEST(Propagator, HeisenbergCoefficients) {
  ModelParams p;
  p.kappa = 0.6;
  auto b = enumerate_shell(1);
  SpectralPropagator U(chiral_hamiltonian(p, b));
  for (double t : {0.1, 0.9, 2.2}) {
    auto c = heisenberg_coefficients(p, -1, t);
    for (int j = 0; j < 3; ++j) {
      BasisState s{Level::g, {0, 0, 0}};
      s.occ[std::size_t(j)] = 1;
      auto out = U.apply(t, fock_state(b, s));
      for (int i = 0; i < 3; ++i) {
        BasisState r{Level::g, {0, 0, 0}};
        r.occ[std::size_t(i)] = 1;
        EXPECT_NEAR(std::abs(out.amplitude(r) - c[std::size_t(((j - i) % 3 + 3) % 3)]), 0.0, 1e-13);
      }
    }
  }
}

TEST(Evolve, GridAndNorm) {
  auto g = linear_grid(2.0, 5);
  ASSERT_EQ(g.size(), 5u);
  EXPECT_DOUBLE_EQ(g[1], 0.5);
  EXPECT_DOUBLE_EQ(g.back(), 2.0);
  auto b = enumerate_shell(6);
  auto r = evolve_exact(chiral_hamiltonian(ModelParams{}, b), fock_state(b, Level::g, 6, 0, 0), linear_grid(3.0, 31));
  EXPECT_LT(r.diagnostics.at("norm_drift"), 1e-12);
  EXPECT_EQ(r.states.size(), 31u);
}

TEST(Evolve, AdaptiveIntegratorOnConstantDrive) {
  ModelParams p;
  p.g_v = 0.7;
  auto b = enumerate_truncated(2);
  Operator h = chiral_hamiltonian(p, b) + jc_resonant(p, b);
  auto psi0 = fock_state(b, Level::e, 1, 0, 0);
  auto times = linear_grid(4.0, 9);
  TimeDepOptions opt;
  opt.tol = 1e-10;
  auto num = evolve_timedep(constant_drive(h), psi0, times, opt);
  auto ref = evolve_exact(h, psi0, times);
  EXPECT_FALSE(num.flagged);
  for (std::size_t i = 0; i < times.size(); ++i)
    EXPECT_LT((num.states[i].amp - ref.states[i].amp).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Evolve, AdaptiveIntegratorOnPeriodicDrive) {
  // f = 0 leaves a constant coupling of |e;0,0,0> to the bright state of the
  // three one-photon sites, so |g;1,0,0> keeps 2/3 + cos(sqrt3 g t) / 3
  ModelParams p;
  p.g_v = 0.3;
  p.nu_d = 5.0;
  p.f = 0.0;
  auto b = enumerate_truncated(1);
  auto drive = full_modulated_drive(p, b);
  BasisState g1{Level::g, {1, 0, 0}};
  auto r = evolve_timedep(drive, fock_state(b, g1), {0.0, 1.5}, {1e-10, {}});
  const double a = 2.0 / 3.0 + std::cos(std::sqrt(3.0) * 0.3 * 1.5) / 3.0;
  EXPECT_NEAR(std::norm(r.states[1].amplitude(g1)), a * a, 1e-8);
}

TEST(Dissipation, CollapseRateConventions) {
  DissipationParams d{650.0, 150.0, 3470.0};
  auto pure = collapse_rates(d);
  EXPECT_DOUBLE_EQ(pure.atom_decay, 1.0 / 650.0);
  EXPECT_DOUBLE_EQ(pure.cavity_decay, 1.0 / 3470.0);
  EXPECT_DOUBLE_EQ(pure.atom_dephasing, 0.5 / 150.0);
  auto t2 = collapse_rates(d, DephasingConvention::total_t2);
  EXPECT_NEAR(t2.atom_dephasing, 0.5 * (1.0 / 150.0 - 0.5 / 650.0), 1e-18);
  EXPECT_THROW(collapse_rates({10.0, 30.0, 0.0}, DephasingConvention::total_t2), std::invalid_argument);
  EXPECT_EQ(collapse_rates({}).atom_decay, 0.0);
  EXPECT_THROW(build_collapse_ops(enumerate_shell(2), d), std::invalid_argument);
  EXPECT_EQ(build_collapse_ops(enumerate_truncated(2), d).size(), 5u);
}

TEST(Lindblad, SingleChannelDecayLaws) {
  auto b = enumerate_truncated(1);
  auto h = zero_operator(b);
  auto times = linear_grid(3.0, 7);
  LindbladOptions opt;
  opt.tol = 1e-10;

  auto atom = lindblad_evolve(h, build_collapse_ops(b, {2.0, 0.0, 0.0}),
                              DensityMatrix::from_pure(fock_state(b, Level::e, 0, 0, 0)), times, opt);
  BasisState e0{Level::e, {0, 0, 0}}, g0{Level::g, {0, 0, 0}}, g1{Level::g, {0, 1, 0}};
  for (std::size_t i = 0; i < times.size(); ++i) {
    EXPECT_NEAR(atom.states[i].element(e0, e0).real(), std::exp(-times[i] / 2.0), 1e-9);
    EXPECT_NEAR(atom.states[i].trace().real(), 1.0, 1e-12);
  }

  auto cav = lindblad_evolve(h, build_collapse_ops(b, {0.0, 0.0, 1.5}),
                             DensityMatrix::from_pure(fock_state(b, g1)), times, opt);
  for (std::size_t i = 0; i < times.size(); ++i)
    EXPECT_NEAR(cav.states[i].element(g1, g1).real(), std::exp(-times[i] / 1.5), 1e-9);

  StateVector plus = fock_state(b, e0);
  plus.amp(Eigen::Index(b->index(g0))) = 1.0;
  plus.normalize();
  auto deph = lindblad_evolve(h, build_collapse_ops(b, {0.0, 0.8, 0.0}), DensityMatrix::from_pure(plus), times, opt);
  for (std::size_t i = 0; i < times.size(); ++i) {
    EXPECT_NEAR(std::abs(deph.states[i].element(g0, e0)), 0.5 * std::exp(-times[i] / 0.8), 1e-9);
    EXPECT_NEAR(deph.states[i].element(e0, e0).real(), 0.5, 1e-10);
  }
}

TEST(Lindblad, ClosedLimitMatchesPureEvolution) {
  ModelParams p;
  p.g_v = 0.4;
  auto b = enumerate_truncated(3);
  Operator h = chiral_hamiltonian(p, b) + jc_resonant(p, b);
  auto psi0 = fock_state(b, Level::g, 2, 1, 0);
  auto times = linear_grid(2.0, 5);
  LindbladOptions opt;
  opt.tol = 1e-10;
  auto mixed = lindblad_evolve(h, {}, DensityMatrix::from_pure(psi0), times, opt);
  auto pure = evolve_exact(h, psi0, times);
  for (std::size_t i = 0; i < times.size(); ++i) {
    DenseMatrix ref = pure.states[i].amp * pure.states[i].amp.adjoint();
    EXPECT_LT((mixed.states[i].rho - ref).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_NEAR(mixed.states[i].purity(), 1.0, 1e-8);
  }
}

TEST(Lindblad, PhysicalityUnderAllChannels) {
  auto b = enumerate_truncated(3);
  ModelParams p;
  Operator h = chiral_hamiltonian(p, b);
  StateVector psi = fock_state(b, Level::g, 3, 0, 0);
  psi.amp(Eigen::Index(b->index(BasisState{Level::e, {2, 0, 0}}))) = -1.0;
  psi.normalize();
  LindbladOptions opt;
  opt.tol = 1e-11;
  auto r = lindblad_evolve(h, build_collapse_ops(b, {3.0, 1.0, 5.0}), DensityMatrix::from_pure(psi),
                           linear_grid(4.0, 9), opt);
  for (auto& rho : r.states) {
    EXPECT_NEAR(rho.trace().real(), 1.0, 1e-9);
    EXPECT_LT(rho.hermiticity_residual(), 1e-12);
    EXPECT_GT(rho.min_eigenvalue(), -1e-9);
    // Cauchy-Schwarz on the coherence between the two corners
    BasisState a{Level::g, {0, 0, 3}}, c{Level::e, {0, 2, 0}};
    EXPECT_LE(std::norm(rho.element(a, c)), rho.element(a, a).real() * rho.element(c, c).real() + 1e-12);
  }
  EXPECT_LT(r.states.back().purity(), 0.9);
}
