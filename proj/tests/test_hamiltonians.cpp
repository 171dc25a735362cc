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

#include "fsl/bessel.hpp"
#include "fsl/hamiltonians.hpp"

using namespace fsl;

namespace {

DenseMatrix dense(const Operator& op) { return DenseMatrix(op.matrix); }

bool same_pattern(const Operator& a, const Operator& b) {
  DenseMatrix x = dense(a), y = dense(b);
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j)
      if ((x(i, j) == Complex{}) != (y(i, j) == Complex{})) return false;
  return true;
}

}  // namespace

TEST(Chiral, SignConvention) {
  ModelParams p;
  p.kappa = 0.7;
  auto b = enumerate_shell(1);
  auto h = chiral_hamiltonian(p, b);
  const Complex g01 = h.element(BasisState{Level::g, {0, 1, 0}}, BasisState{Level::g, {1, 0, 0}});
  EXPECT_NEAR(g01.real(), 0.0, 1e-16);
  EXPECT_NEAR(g01.imag(), -0.7, 1e-16);
  auto b2 = enumerate_shell(2);
  auto h2 = chiral_hamiltonian(p, b2);
  const Complex e01 = h2.element(BasisState{Level::e, {0, 1, 0}}, BasisState{Level::e, {1, 0, 0}});
  EXPECT_NEAR(e01.imag(), 0.7, 1e-16);
  // sqrt(n) factors: a_1^dagger a_0 |g;2,0,0> = sqrt(2) |g;1,1,0>
  EXPECT_NEAR(std::abs(h2.element(BasisState{Level::g, {1, 1, 0}}, BasisState{Level::g, {2, 0, 0}})), 0.7 * std::sqrt(2.0), 1e-15);
}

TEST(Chiral, HermitianAndConserving) {
  ModelParams p;
  for (int N : {1, 3, 6}) {
    auto b = enumerate_shell(N);
    auto h = chiral_hamiltonian(p, b);
    EXPECT_TRUE(h.is_hermitian(1e-14));
    EXPECT_EQ(max_abs(commutator(h, pauli_z(b))), 0.0);
    EXPECT_EQ(max_abs(commutator(h, total_photons(b))), 0.0);
  }
  auto t = enumerate_truncated(4);
  EXPECT_EQ(max_abs(commutator(chiral_hamiltonian(p, t), total_excitation(t))), 0.0);
}

TEST(Chiral, SingleExcitationSpectrum) {
  ModelParams p;
  p.kappa = 1.3;
  auto h = chiral_hamiltonian(p, enumerate_shell(1));
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(dense(h));
  // g block {0, +-sqrt3 kappa} plus the e vacuum at 0
  std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + 4);
  std::sort(ev.begin(), ev.end());
  EXPECT_NEAR(ev[0], -std::sqrt(3.0) * 1.3, 1e-13);
  EXPECT_NEAR(ev[1], 0.0, 1e-13);
  EXPECT_NEAR(ev[2], 0.0, 1e-13);
  EXPECT_NEAR(ev[3], std::sqrt(3.0) * 1.3, 1e-13);
}

TEST(Chiral, Deterministic) {
  ModelParams p;
  auto b = enumerate_shell(5);
  auto a = chiral_hamiltonian(p, b), c = chiral_hamiltonian(p, b);
  EXPECT_TRUE(DenseMatrix(a.matrix) == DenseMatrix(c.matrix));
}

TEST(Chiral, ActsOnItsGroupOnly) {
  ModelParams p;
  auto b = enumerate_photon_blocks(2, 3, 1);
  auto h1 = chiral_hamiltonian(p, b, 1);
  for (int j = 0; j < 3; ++j) EXPECT_EQ(max_abs(commutator(h1, number(b, j))), 0.0);
  EXPECT_GT(max_abs(commutator(h1, number(b, 3))), 0.5);
  EXPECT_THROW(chiral_hamiltonian(p, b, 2), std::invalid_argument);
}

TEST(Params, Validation) {
  ModelParams p;
  p.g_v = -1;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  ModelParams q;
  q.kappa = 0;
  EXPECT_THROW(q.transfer_time(), std::invalid_argument);
  q.kappa = -2.0;
  EXPECT_NO_THROW(q.validate());
  EXPECT_DOUBLE_EQ(q.transfer_time(), ModelParams{2.0}.transfer_time());
  EXPECT_NEAR(ModelParams{kappa_for_transfer_time(80.0)}.transfer_time(), 80.0, 1e-12);
  EXPECT_NEAR(ModelParams{1.0}.transfer_time(), 2.0 * kPi / (3.0 * std::sqrt(3.0)), 1e-15);
}

TEST(Homogeneous, SingleExcitationCoincidesWithChiral) {
  auto b = enumerate_shell(1);
  EXPECT_LT(max_abs(homogeneous_lattice_hamiltonian(b, 0.4) - chiral_hamiltonian(ModelParams{0.4}, b)), 1e-16);
}

TEST(Homogeneous, UniformMagnitudesSamePhases) {
  auto b = enumerate_shell(2);
  auto hom = homogeneous_lattice_hamiltonian(b, 0.9);
  auto chi = chiral_hamiltonian(ModelParams{1.0}, b);
  EXPECT_TRUE(same_pattern(hom, chi));
  EXPECT_TRUE(hom.is_hermitian(1e-12));
  bool chiral_has_sqrt2 = false;
  for (int k = 0; k < hom.matrix.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(hom.matrix, k); it; ++it) {
      EXPECT_NEAR(std::abs(it.value()), 0.9, 1e-15);
      const Complex c = chi.matrix.coeff(it.row(), it.col());
      EXPECT_NEAR(std::arg(it.value()), std::arg(c), 1e-15);
      if (std::abs(std::abs(c) - std::sqrt(2.0)) < 1e-12) chiral_has_sqrt2 = true;
    }
  EXPECT_TRUE(chiral_has_sqrt2);
}

TEST(JaynesCummings, ResonantPart) {
  ModelParams p;
  p.g_v = 2.0;
  p.f = 1.1;
  p.delta = 0.3;
  auto b = enumerate_shell(2);
  auto h = jc_resonant(p, b);
  EXPECT_TRUE(h.is_hermitian());
  EXPECT_NEAR(h.element(BasisState{Level::e, {1, 0, 0}}, BasisState{Level::g, {2, 0, 0}}).real(),
              2.0 * bessel_j(0, 1.1) * std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(h.element(BasisState{Level::e, {1, 0, 0}}, BasisState{Level::e, {1, 0, 0}}).real(), 0.15, 1e-15);
  EXPECT_NEAR(h.element(BasisState{Level::g, {2, 0, 0}}, BasisState{Level::g, {2, 0, 0}}).real(), -0.15, 1e-15);
}

TEST(Modulated, ElementsFollowDrivePhase) {
  ModelParams p;
  p.g_v = 1.5;
  p.nu_d = 40.0;
  p.f = 2.0;
  auto b = enumerate_shell(1);
  for (double t : {0.0, 0.013, 0.1}) {
    auto h = full_modulated(p, b, t);
    EXPECT_TRUE(h.is_hermitian(1e-14));
    for (int j = 0; j < 3; ++j) {
      BasisState g{Level::g, {0, 0, 0}};
      g.occ[std::size_t(j)] = 1;
      const Complex expect = 1.5 * std::polar(1.0, 2.0 * std::cos(40.0 * t - 2.0 * kPi * j / 3.0));
      const Complex got = h.element(BasisState{Level::e, {0, 0, 0}}, g);
      EXPECT_NEAR(std::abs(got - expect), 0.0, 1e-14);
    }
  }
}

TEST(Modulated, PeriodAverageIsResonantPart) {
  // time average of exp(i f cos(nu t - phi)) is J_0(f): compare the
  // trapezoid average of H(t) over one period with jc_resonant
  ModelParams p;
  p.g_v = 1.0;
  p.nu_d = 3.0;
  p.f = 1.7;
  p.delta = 0.2;
  auto b = enumerate_shell(2);
  auto drive = full_modulated_drive(p, b);
  const int m = 400;
  DenseMatrix avg = DenseMatrix::Zero(Eigen::Index(b->dim()), Eigen::Index(b->dim()));
  for (int k = 0; k < m; ++k) avg += dense(drive.at(k * drive.period / m)) / double(m);
  EXPECT_LT((avg - dense(jc_resonant(p, b))).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Modulated, GeneratorMatchesAssembledHamiltonian) {
  ModelParams p;
  p.g_v = 0.8;
  p.nu_d = 12.0;
  p.f = 2.4;
  auto b = enumerate_truncated(3);
  auto drive = full_modulated_drive(p, b, DriveChirality::reversed);
  Vector psi = Vector::Random(Eigen::Index(b->dim()));
  Vector out;
  std::vector<Complex> scratch;
  drive.apply_generator(0.37, psi, out, scratch);
  Vector ref = -kI * (drive.at(0.37).matrix * psi);
  EXPECT_LT((out - ref).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(CouplingModulated, Couplings) {
  ModelParams p;
  p.g_v = 1.2;
  p.nu_d = 5.0;
  for (double t : {0.0, 0.31, 1.7}) {
    auto g = modulated_couplings(p, t);
    EXPECT_NEAR(g[0] + g[1] + g[2], 0.0, 1e-14);
    EXPECT_NEAR(g[1], 2.4 * std::cos(5.0 * t - 2.0 * kPi / 3.0), 1e-15);
    auto h = coupling_modulated(p, enumerate_shell(1), t);
    EXPECT_NEAR(h.element(BasisState{Level::e, {0, 0, 0}}, BasisState{Level::g, {0, 1, 0}}).real(), g[1], 1e-14);
  }
  EXPECT_NEAR(coupling_modulated_kappa(p), std::sqrt(3.0) * 1.44 / 5.0, 1e-15);
}

TEST(TwoCavity, SinglePhotonMatrix) {
  ModelParams p;
  p.kappa = 0.6;
  auto b = enumerate_photon_blocks(1, 2, 1);
  auto h = two_cavity_hamiltonian(p, b);
  BasisState g10{Level::g, {1, 0}}, g01{Level::g, {0, 1}};
  // -kappa [[0, i], [-i, 0]] on (|1,0>, |0,1>)
  EXPECT_NEAR(std::abs(h.element(g10, g01) - (-0.6 * kI)), 0.0, 1e-16);
  EXPECT_NEAR(std::abs(h.element(g01, g10) - (0.6 * kI)), 0.0, 1e-16);
  EXPECT_EQ(h.element(g10, g10), Complex{});
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(dense(h));
  EXPECT_NEAR(es.eigenvalues().minCoeff(), -0.6, 1e-15);
  EXPECT_NEAR(es.eigenvalues().maxCoeff(), 0.6, 1e-15);
}

TEST(TwoCavity, ConservesPhotonsAndDoublesSpinGenerator) {
  ModelParams p;
  auto b = enumerate_photon_blocks(1, 2, 4);
  auto h = two_cavity_hamiltonian(p, b);
  EXPECT_EQ(max_abs(commutator(h, number(b, 0) + number(b, 1))), 0.0);
  // single photon: conventional S_y = sigma_y / 2 with |1,0> as spin up
  auto b1 = enumerate_photon_blocks(1, 2, 1);
  auto jy = schwinger_jy(b1);
  BasisState g10{Level::g, {1, 0}}, g01{Level::g, {0, 1}};
  const Complex sy_10_01 = -0.5 * kI;
  EXPECT_NEAR(std::abs(jy.element(g10, g01) - (-2.0 * sy_10_01)), 0.0, 1e-16);
  // [J_x, J_y] = -2 i J_z in this normalization
  auto bx = enumerate_photon_blocks(1, 2, 3);
  EXPECT_LT(max_abs(commutator(schwinger_jx(bx), schwinger_jy(bx)) + (2.0 * kI) * schwinger_jz(bx)), 1e-14);
  EXPECT_THROW(schwinger_jy(enumerate_shell(1)), std::invalid_argument);
}
