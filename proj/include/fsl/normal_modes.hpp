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

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "fsl/fock_basis.hpp"
#include "fsl/hamiltonians.hpp"

namespace fsl {

// b_j = sum_j' F[j][j'] a_j', F[j][j'] = exp(i j j' 2 pi / 3) / sqrt(3).
inline Eigen::Matrix3cd mode_transform_matrix() {
  Eigen::Matrix3cd F;
  for (int j = 0; j < 3; ++j)
    for (int jp = 0; jp < 3; ++jp) F(j, jp) = std::polar(1.0 / std::sqrt(3.0), 2.0 * kPi * ((j * jp) % 3) / 3.0);
  return F;
}

// Single-photon frequency of normal mode b_j: -2 kappa sigma_z sin(2 j pi / 3).
inline double mode_frequency(int j, double kappa, int sigma_z) {
  static constexpr double s[3] = {0.0, 0.86602540378443864676, -0.86602540378443864676};
  return -2.0 * kappa * sigma_z * s[((j % 3) + 3) % 3];
}

struct NormalModeAmplitude {
  std::array<int, 3> m{};
  double amplitude = 0.0;
};

// |N,0,0> expanded over b-mode occupations (m0, m1, m2):
// sqrt(N! / (3^N m0! m1! m2!)), evaluated in log space.
inline std::vector<NormalModeAmplitude> expand_corner_state(int N) {
  if (N < 0) throw std::invalid_argument("N must be nonnegative");
  std::vector<NormalModeAmplitude> out;
  const double base = std::lgamma(N + 1.0) - N * std::log(3.0);
  for (auto& c : detail::compositions(N, 3)) {
    double lg = base - std::lgamma(c[0] + 1.0) - std::lgamma(c[1] + 1.0) - std::lgamma(c[2] + 1.0);
    out.push_back({{c[0], c[1], c[2]}, std::exp(0.5 * lg)});
  }
  return out;
}

struct Dispersion {
  double energy = 0.0;
  double momentum = 0.0;
};

// Energy sqrt(3) kappa sigma_z (m2 - m1) and quasi-momentum 2 pi (m2 - m1) / 3,
// positive along a_0 -> a_1 -> a_2.
inline Dispersion dispersion(int m1, int m2, int sigma_z, double kappa = 1.0) {
  const int dm = m2 - m1;
  return {std::sqrt(3.0) * kappa * sigma_z * dm, 2.0 * kPi * dm / 3.0};
}

// Lattice sites per unit time: 3 sqrt(3) kappa sigma_z / (2 pi) = sigma_z / T.
inline double group_velocity(const ModelParams& params, int sigma_z) {
  return 3.0 * std::sqrt(3.0) * params.kappa * sigma_z / (2.0 * kPi);
}

}  // namespace fsl
