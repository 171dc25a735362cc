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
#include <set>

#include "fsl/fock_basis.hpp"

using namespace fsl;

namespace {

// Brute-force count of (n0, n1, n2) with n0 + n1 + n2 = N.
int count_triples(int N) {
  int c = 0;
  for (int a = 0; a <= N; ++a)
    for (int b = 0; b <= N; ++b)
      for (int d = 0; d <= N; ++d)
        if (a + b + d == N) ++c;
  return c;
}

double poisson(double mean, int n) { return std::exp(-mean + n * std::log(mean) - std::lgamma(n + 1.0)); }

}  // namespace

TEST(Basis, ShellDimensionMatchesBruteForce) {
  for (int N = 0; N <= 12; ++N) {
    auto b = enumerate_shell(N);
    EXPECT_EQ(int(b->dim()), count_triples(N) + (N >= 1 ? count_triples(N - 1) : 0));
    EXPECT_EQ(int(b->dim()), (N + 1) * (N + 1));
  }
}

TEST(Basis, SmallShellsListed) {
  auto b0 = enumerate_shell(0);
  ASSERT_EQ(b0->dim(), 1u);
  EXPECT_EQ(b0->state(0), (BasisState{Level::g, {0, 0, 0}}));

  auto b1 = enumerate_shell(1);
  std::vector<BasisState> expect{{Level::g, {1, 0, 0}}, {Level::g, {0, 1, 0}}, {Level::g, {0, 0, 1}}, {Level::e, {0, 0, 0}}};
  EXPECT_EQ(b1->states(), expect);
  EXPECT_EQ(enumerate_shell(-1)->dim(), 0u);
  EXPECT_THROW(enumerate_shell(-2), std::invalid_argument);
}

TEST(Basis, ShellIsDescendingLexicographicPerSublattice) {
  auto b = enumerate_shell(6);
  for (std::size_t i = 1; i < b->dim(); ++i) {
    const auto& prev = b->state(i - 1);
    const auto& cur = b->state(i);
    if (prev.sigma == cur.sigma) EXPECT_GT(prev.occ, cur.occ);
    else EXPECT_TRUE(prev.sigma == Level::g && cur.sigma == Level::e);
  }
}

TEST(Basis, EveryStateHasTheShellExcitation) {
  for (int N = 0; N <= 8; ++N) {
    auto b = enumerate_shell(N);
    for (auto& s : b->states()) EXPECT_EQ(s.excitation(), N);
  }
}

TEST(Basis, IndexRoundTripsAndRejectsForeignStates) {
  auto b = enumerate_shell(5);
  for (std::size_t i = 0; i < b->dim(); ++i) EXPECT_EQ(b->index(b->state(i)), i);
  EXPECT_THROW(b->index({Level::g, {2, 2, 2}}), std::out_of_range);
  EXPECT_FALSE(b->find({Level::e, {5, 0, 0}}).has_value());
}

TEST(Basis, TruncatedConcatenatesShells) {
  auto t = enumerate_truncated(4);
  int expect = 0;
  for (int M = 0; M <= 4; ++M) expect += (M + 1) * (M + 1);
  EXPECT_EQ(int(t->dim()), expect);
  std::size_t k = 0;
  for (int M = 0; M <= 4; ++M) {
    auto shell = enumerate_shell(M);
    for (auto& s : shell->states()) EXPECT_EQ(t->state(k++), s);
  }
  EXPECT_EQ(enumerate_truncated(10)->dim(), 506u);
}

TEST(Basis, PhotonBlocks) {
  auto b = enumerate_photon_blocks(2, 3, 1);
  EXPECT_EQ(b->dim(), 2u * 3u * 3u);
  EXPECT_EQ(b->modes(), 6);
  EXPECT_EQ(b->groups(), 2);
  for (auto& s : b->states()) {
    EXPECT_EQ(s.occ[0] + s.occ[1] + s.occ[2], 1);
    EXPECT_EQ(s.occ[3] + s.occ[4] + s.occ[5], 1);
  }
  auto two = enumerate_photon_blocks(1, 2, 6);
  EXPECT_EQ(two->dim(), 14u);
  EXPECT_THROW(enumerate_photon_blocks(0, 3, 1), std::invalid_argument);
}

TEST(Operators, NumberFromLadder) {
  auto t = enumerate_truncated(5);
  for (int j = 0; j < 3; ++j) {
    Operator n = creation(t, j) * annihilation(t, j);
    EXPECT_LT(max_abs(n - number(t, j)), 1e-14);
  }
}

TEST(Operators, ShellLadderIsRectangular) {
  auto b = enumerate_shell(3);
  Operator a = annihilation(b, 1);
  EXPECT_EQ(a.codomain->excitation(), 2);
  EXPECT_EQ(a.matrix.rows(), 9);
  EXPECT_EQ(a.matrix.cols(), 16);
  // a_1 |g;1,2,0> = sqrt(2) |g;1,1,0>
  EXPECT_NEAR(std::abs(a.element(BasisState{Level::g, {1, 1, 0}}, BasisState{Level::g, {1, 2, 0}})), std::sqrt(2.0), 1e-15);
  Operator ad = creation(b, 2);
  EXPECT_EQ(ad.codomain->excitation(), 4);
  // a a^dagger - a^dagger a = 1 as maps shell(3) -> shell(3)
  Operator comm = annihilation(ad.codomain, 2) * ad - creation(a.codomain, 2) * annihilation(b, 2);
  EXPECT_LT(max_abs(comm - identity(b)), 1e-14);
}

TEST(Operators, CommutatorOnTruncatedBelowCutoff) {
  auto t = enumerate_truncated(4);
  Operator c = commutator(annihilation(t, 0), creation(t, 0));
  for (std::size_t i = 0; i < t->dim(); ++i) {
    const auto& s = t->state(i);
    if (s.excitation() < 4) EXPECT_NEAR(c.element(i, i).real(), 1.0, 1e-14);
  }
}

TEST(Operators, HopConservesPhotonsAndMatchesLadderProduct) {
  auto t = enumerate_truncated(4);
  Operator h = hop(t, 0, 2);
  EXPECT_LT(max_abs(h - creation(t, 2) * annihilation(t, 0)), 1e-14);
  EXPECT_LT(max_abs(commutator(h, total_photons(t))), 1e-14);
  auto pb = enumerate_photon_blocks(1, 2, 3);
  Operator h2 = hop(pb, 1, 0);
  EXPECT_NEAR(h2.element(BasisState{Level::g, {1, 2}}, BasisState{Level::g, {0, 3}}).real(), std::sqrt(3.0), 1e-15);
  EXPECT_THROW(annihilation(pb, 0), std::invalid_argument);
}

TEST(Operators, AtomOperators) {
  auto t = enumerate_truncated(3);
  Operator sz = pauli_z(t);
  Operator proj = excited_projector(t);
  EXPECT_LT(max_abs(sz - (2.0 * proj - identity(t))), 1e-15);
  EXPECT_TRUE(sz.is_hermitian());
  Operator jc = jc_lowering(t, 1);
  EXPECT_LT(max_abs(commutator(jc, total_excitation(t))), 1e-14);
  EXPECT_NEAR(jc.element(BasisState{Level::e, {0, 1, 0}}, BasisState{Level::g, {0, 2, 0}}).real(), std::sqrt(2.0), 1e-15);
  auto s = enumerate_shell(2);
  EXPECT_EQ(atom_raise(s).codomain->excitation(), 3);
  EXPECT_EQ(atom_lower(s).codomain->excitation(), 1);
}

TEST(Operators, BasisMismatchThrows) {
  auto a = enumerate_shell(2), b = enumerate_shell(3);
  EXPECT_THROW(pauli_z(a) + pauli_z(b), std::invalid_argument);
  EXPECT_THROW(apply(pauli_z(a), fock_state(b, Level::g, 3, 0, 0)), std::invalid_argument);
  EXPECT_THROW(number(a, 3), std::invalid_argument);
}

TEST(States, FockAndInner) {
  auto b = enumerate_shell(2);
  auto x = fock_state(b, Level::g, 2, 0, 0);
  auto y = fock_state(b, Level::e, 0, 1, 0);
  EXPECT_DOUBLE_EQ(x.norm(), 1.0);
  EXPECT_EQ(inner(x, y), Complex{});
  EXPECT_THROW(fock_state(b, Level::g, 1, 0, 0), std::invalid_argument);
  EXPECT_NEAR(expectation(number(b, 0), x).real(), 2.0, 1e-15);
}

TEST(States, CoherentStateMatchesPoisson) {
  const double alpha = 1.7;
  const int n_max = coherent_truncation(alpha * alpha, 1e-10);
  auto t = enumerate_truncated(n_max);
  auto c = coherent_state(t, alpha, 0, 1e-10);
  double kept = 0.0;
  for (int n = 0; n <= n_max; ++n) kept += poisson(alpha * alpha, n);
  EXPECT_NEAR(c.truncation_loss, 1.0 - kept, 1e-14);
  for (int n = 0; n <= n_max; ++n) {
    const double p = std::norm(c.state.amplitude({Level::g, {n, 0, 0}}));
    EXPECT_NEAR(p, poisson(alpha * alpha, n) / kept, 1e-13);
  }
  EXPECT_NEAR(expectation(number(t, 0), c.state).real(), alpha * alpha, 1e-8);
}

TEST(States, CoherentTruncationIsMinimal) {
  for (double mean : {0.5, 1.0, 4.0, 9.0}) {
    const int n = coherent_truncation(mean, 1e-6);
    double tail = 1.0;
    for (int k = 0; k <= n; ++k) tail -= poisson(mean, k);
    EXPECT_LE(tail, 1e-6);
    EXPECT_GT(tail + poisson(mean, n), 1e-6);
  }
  EXPECT_EQ(coherent_truncation(0.0, 1e-6), 0);
}

TEST(States, CoherentLossAboveThresholdThrows) {
  auto t = enumerate_truncated(3);
  EXPECT_THROW(coherent_state(t, 2.0, 0, 1e-6), NumericalError);
  EXPECT_THROW(coherent_state(enumerate_shell(3), 1.0, 0), std::invalid_argument);
}

TEST(States, ReducedAtomState) {
  auto b = enumerate_shell(2);
  StateVector psi{b, (fock_state(b, Level::g, 2, 0, 0).amp - fock_state(b, Level::e, 1, 0, 0).amp) / std::sqrt(2.0)};
  auto r = reduced_atom_state(psi);
  // different photon states: the atom is maximally mixed
  EXPECT_NEAR(r(0, 0).real(), 0.5, 1e-15);
  EXPECT_NEAR(std::abs(r(0, 1)), 0.0, 1e-15);
  auto pb = enumerate_photon_blocks(1, 3, 1);
  StateVector phi{pb, (fock_state(pb, {Level::g, {1, 0, 0}}).amp + fock_state(pb, {Level::e, {1, 0, 0}}).amp) / std::sqrt(2.0)};
  auto q = reduced_atom_state(phi);
  EXPECT_NEAR(q(0, 1).real(), 0.5, 1e-15);
  EXPECT_NEAR((q * q).trace().real(), 1.0, 1e-15);
}

TEST(States, DensityMatrixDiagnostics) {
  auto b = enumerate_shell(1);
  auto rho = DensityMatrix::from_pure(fock_state(b, Level::g, 0, 1, 0));
  EXPECT_NEAR(rho.trace().real(), 1.0, 1e-15);
  EXPECT_NEAR(rho.purity(), 1.0, 1e-15);
  EXPECT_NEAR(rho.min_eigenvalue(), 0.0, 1e-15);
  EXPECT_EQ(rho.hermiticity_residual(), 0.0);
}
