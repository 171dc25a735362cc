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
#include <cmath>
#include <stdexcept>
#include <vector>

namespace fsl {

namespace detail {

// Ascending power series; accurate while x*x/4 stays small next to n+1.
inline double bessel_j_series(int n, double x) {
  const double half = 0.5 * x;
  double term = 1.0;
  for (int k = 1; k <= n; ++k) term *= half / k;
  const double q = -half * half;
  double sum = term;
  for (int k = 1; k < 500; ++k) {
    term *= q / (double(k) * double(k + n));
    sum += term;
    if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

// Miller's downward recurrence normalized by J_0 + 2 sum_k J_2k = 1.
inline double bessel_j_miller(int n, double x) {
  const int top = std::max(n, static_cast<int>(x));
  int start = top + 20 + static_cast<int>(std::sqrt(160.0 * (top + 1)));
  start += start % 2;
  const double two_over_x = 2.0 / x;
  double next = 0.0;  // J_{k+1}
  double cur = 1e-300;
  double result = 0.0;
  double norm = 0.0;
  for (int k = start; k > 0; --k) {
    double prev = k * two_over_x * cur - next;  // J_{k-1}
    next = cur;
    cur = prev;
    if (std::abs(cur) > 1e250) {
      cur *= 1e-250;
      next *= 1e-250;
      result *= 1e-250;
      norm *= 1e-250;
    }
    if (k - 1 == n) result = cur;
    if ((k - 1) % 2 == 0 && k - 1 > 0) norm += 2.0 * cur;
  }
  norm += cur;  // J_0 term
  return result / norm;
}

}  // namespace detail

// Bessel function of the first kind J_n(x) for integer order n.
inline double bessel_j(int n, double x) {
  if (n < 0) return (n % 2 ? -1.0 : 1.0) * bessel_j(-n, x);
  if (x == 0.0) return n == 0 ? 1.0 : 0.0;
  if (x < 0.0) return (n % 2 ? -1.0 : 1.0) * bessel_j(n, -x);
  if (x * x < 0.5 * (n + 1)) return detail::bessel_j_series(n, x);
  return detail::bessel_j_miller(n, x);
}

// First positive root of J_0, bracketed in (2, 3).
inline double find_j0_zero() {
  double lo = 2.0, hi = 3.0;
  for (int i = 0; i < 30; ++i) {
    double mid = 0.5 * (lo + hi);
    (bessel_j(0, mid) > 0.0 ? lo : hi) = mid;
  }
  double r = 0.5 * (lo + hi);
  for (int i = 0; i < 8; ++i) {
    double step = bessel_j(0, r) / (-bessel_j(1, r));
    r -= step;
    if (std::abs(step) < 1e-15) break;
  }
  return r;
}

}  // namespace fsl
