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

#include "fsl/floquet.hpp"

using namespace fsl;

namespace {

ModelParams driven(double ratio) {
  ModelParams p;
  p.g_v = 1.0;
  p.f = find_j0_zero();
  p.nu_d = ratio;
  return p;
}

}  // namespace

TEST(Floquet, EffectiveKappa) {
  ModelParams p = driven(40.0);
  p.g_v = 2.0;
  EXPECT_NEAR(effective_kappa(p), 4.0 * beta_series(p.f) / 40.0, 1e-15);
  EXPECT_NEAR(effective_kappa(p, ModulationScheme::coupling), std::sqrt(3.0) * 4.0 / 40.0, 1e-15);
  p.nu_d = 0.0;
  EXPECT_THROW(effective_kappa(p), std::invalid_argument);
}

TEST(Floquet, BetaTermsAlternateWithSinPattern) {
  EXPECT_EQ(sin_two_thirds_pi(3), 0.0);
  EXPECT_NEAR(sin_two_thirds_pi(1), std::sqrt(3.0) / 2.0, 1e-16);
  EXPECT_NEAR(sin_two_thirds_pi(2), -std::sqrt(3.0) / 2.0, 1e-16);
  auto d = beta_series_detail(find_j0_zero());
  EXPECT_NEAR(d.value, 0.307, 1e-3);
}

TEST(Floquet, NoCouplingMeansNoError) {
  ModelParams p = driven(50.0);
  p.g_v = 0.0;
  EXPECT_EQ(compare_full_vs_effective(p, 2).infidelity, 0.0);
}

TEST(Floquet, FrequencyModulationApproachesEffectiveModel) {
  auto c = compare_full_vs_effective(driven(25.0), 1);
  EXPECT_LT(c.infidelity, 2e-3);
  EXPECT_LT(c.norm_drift, 1e-7);
  EXPECT_NEAR(c.nu_ratio, 25.0, 1e-15);
  // whole number of drive periods
  const double periods = c.horizon * 25.0 / (2.0 * kPi);
  EXPECT_NEAR(periods, std::round(periods), 1e-9);
}

TEST(Floquet, ErrorShrinksWithDriveFrequency) {
  CompareOptions opt;
  opt.sigma = Level::e;
  const double a = compare_full_vs_effective(driven(25.0), 2, opt).infidelity;
  const double b = compare_full_vs_effective(driven(50.0), 2, opt).infidelity;
  EXPECT_LT(b, a);
}

TEST(Floquet, CouplingModulation) {
  ModelParams p;
  p.g_v = 1.0;
  p.nu_d = 50.0;
  CompareOptions opt;
  opt.scheme = ModulationScheme::coupling;
  auto c = compare_full_vs_effective(p, 1, opt);
  EXPECT_NEAR(c.kappa_eff, std::sqrt(3.0) / 50.0, 1e-15);
  EXPECT_LT(c.infidelity, 1e-2);
}

TEST(Floquet, ReversedChiralityBreaksAgreement) {
  CompareOptions opt;
  opt.chirality = DriveChirality::reversed;
  EXPECT_GT(compare_full_vs_effective(driven(50.0), 1, opt).infidelity, 0.5);
}

TEST(Floquet, ReportIsDeterministic) {
  ModelParams p = driven(0.0);
  auto a = floquet_report(p, 1, {25.0, 50.0});
  auto b = floquet_report(p, 1, {25.0, 50.0});
  EXPECT_EQ(a, b);
  ASSERT_EQ(a.comparison.size(), 2u);
  EXPECT_LT(a.j0_residual, 1e-15);
  EXPECT_EQ(a.kappa_eff, 0.0);
  EXPECT_LT(a.comparison[1].second, a.comparison[0].second);
}
