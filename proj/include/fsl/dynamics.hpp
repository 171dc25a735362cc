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
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fsl/fock_basis.hpp"
#include "fsl/hamiltonians.hpp"

namespace fsl {

template <class State>
struct EvolutionResult {
  std::vector<double> times;
  std::vector<State> states;
  std::map<std::string, double> diagnostics;
  bool flagged = false;
  std::vector<std::string> notes;

  void flag(std::string why) {
    flagged = true;
    notes.push_back(std::move(why));
  }
};

using PureEvolution = EvolutionResult<StateVector>;
using MixedEvolution = EvolutionResult<DensityMatrix>;

// exp(-i H t) for time-independent Hermitian H. The Hamiltonian is split into
// the connected components of its sparsity graph and each block is
// diagonalized densely, so conserved quantities keep the blocks small.
class SpectralPropagator {
 public:
  explicit SpectralPropagator(const Operator& H) : basis_(H.domain) {
    if (!H.is_square()) throw std::invalid_argument("propagator needs a square operator");
    const double scale = std::max(1.0, max_abs(H));
    if (!H.is_hermitian(1e-12 * scale)) throw std::invalid_argument("propagator needs a Hermitian operator");

    const auto n = static_cast<std::size_t>(H.matrix.rows());
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto root = [&](std::size_t i) {
      while (parent[i] != i) i = parent[i] = parent[parent[i]];
      return i;
    };
    for (int k = 0; k < H.matrix.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(H.matrix, k); it; ++it)
        if (it.value() != Complex{}) {
          auto a = root(static_cast<std::size_t>(it.row()));
          auto b = root(static_cast<std::size_t>(it.col()));
          if (a != b) parent[std::max(a, b)] = std::min(a, b);
        }
    std::map<std::size_t, std::size_t> block_of;
    for (std::size_t i = 0; i < n; ++i) {
      auto r = root(i);
      auto [it, fresh] = block_of.emplace(r, blocks_.size());
      if (fresh) blocks_.emplace_back();
      blocks_[it->second].indices.push_back(static_cast<Eigen::Index>(i));
    }
    for (auto& b : blocks_) {
      const auto m = static_cast<Eigen::Index>(b.indices.size());
      DenseMatrix h(m, m);
      for (Eigen::Index r = 0; r < m; ++r)
        for (Eigen::Index c = 0; c < m; ++c) h(r, c) = H.matrix.coeff(b.indices[r], b.indices[c]);
      Eigen::SelfAdjointEigenSolver<DenseMatrix> es(h);
      if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
      b.energies = es.eigenvalues();
      b.vectors = es.eigenvectors();
    }
  }

  const BasisPtr& basis() const { return basis_; }
  std::size_t block_count() const { return blocks_.size(); }

  Vector eigenvalues() const {
    std::vector<double> all;
    for (auto& b : blocks_)
      for (Eigen::Index i = 0; i < b.energies.size(); ++i) all.push_back(b.energies(i));
    std::sort(all.begin(), all.end());
    Vector out(static_cast<Eigen::Index>(all.size()));
    for (std::size_t i = 0; i < all.size(); ++i) out(static_cast<Eigen::Index>(i)) = all[i];
    return out;
  }

  Vector apply(double t, const Vector& psi) const {
    Vector out(psi.size());
    for (auto& b : blocks_) {
      const auto m = static_cast<Eigen::Index>(b.indices.size());
      Vector local(m);
      for (Eigen::Index i = 0; i < m; ++i) local(i) = psi(b.indices[i]);
      Vector coeff = b.vectors.adjoint() * local;
      for (Eigen::Index i = 0; i < m; ++i) coeff(i) *= std::polar(1.0, -b.energies(i) * t);
      local = b.vectors * coeff;
      for (Eigen::Index i = 0; i < m; ++i) out(b.indices[i]) = local(i);
    }
    return out;
  }

  StateVector apply(double t, const StateVector& psi) const {
    require_same_basis(basis_, psi.basis, "propagator application");
    return {basis_, apply(t, psi.amp)};
  }

  Operator propagator(double t) const {
    std::vector<Triplet> trip;
    for (auto& b : blocks_) {
      const auto m = static_cast<Eigen::Index>(b.indices.size());
      DenseMatrix phases = DenseMatrix::Zero(m, m);
      for (Eigen::Index i = 0; i < m; ++i) phases(i, i) = std::polar(1.0, -b.energies(i) * t);
      DenseMatrix u = b.vectors * phases * b.vectors.adjoint();
      for (Eigen::Index r = 0; r < m; ++r)
        for (Eigen::Index c = 0; c < m; ++c)
          if (u(r, c) != Complex{}) trip.emplace_back(b.indices[r], b.indices[c], u(r, c));
    }
    return detail::from_triplets(basis_, basis_, trip);
  }

 private:
  struct Block {
    std::vector<Eigen::Index> indices;
    Eigen::VectorXd energies;
    DenseMatrix vectors;
  };
  BasisPtr basis_;
  std::vector<Block> blocks_;
};

inline Operator propagator_exact(const Operator& H, double t) { return SpectralPropagator(H).propagator(t); }

inline PureEvolution evolve_exact(const Operator& H, const StateVector& psi0, const std::vector<double>& times) {
  SpectralPropagator U(H);
  PureEvolution r;
  r.times = times;
  double drift = 0.0;
  for (double t : times) {
    r.states.push_back(U.apply(t, psi0));
    drift = std::max(drift, std::abs(r.states.back().norm() - psi0.norm()));
  }
  r.diagnostics["norm_drift"] = drift;
  return r;
}

// Evenly spaced grid of `samples` points on [0, horizon] (samples >= 2).
inline std::vector<double> linear_grid(double horizon, int samples) {
  if (samples < 2) return {horizon};
  std::vector<double> out(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) out[static_cast<std::size_t>(i)] = horizon * i / (samples - 1);
  out.back() = horizon;
  return out;
}

struct IntegratorOptions {
  double rtol = 1e-8;
  double atol = 1e-8;
  double max_step = std::numeric_limits<double>::infinity();
  double min_step = 1e-14;  // relative to the horizon
  double initial_step = 0.0;
};

struct IntegratorStats {
  long accepted = 0;
  long rejected = 0;
  long evaluations = 0;
};

namespace detail {

struct DormandPrince {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                          b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
};

}  // namespace detail

// Adaptive Dormand-Prince 5(4) with FSAL. Steps are clipped to land exactly on
// every requested output time; `on_output(i, y)` fires at times[i].
// `rhs(t, y, dy)` writes dy/dt. `after_step(y)` may project the accepted state.
template <class State, class Rhs, class Output, class AfterStep>
IntegratorStats integrate_dp54(Rhs&& rhs, State y, double t0, const std::vector<double>& times,
                               const IntegratorOptions& opt, Output&& on_output, AfterStep&& after_step) {
  using DP = detail::DormandPrince;
  IntegratorStats stats;
  if (times.empty()) return stats;
  for (std::size_t i = 1; i < times.size(); ++i)
    if (times[i] < times[i - 1]) throw std::invalid_argument("output times must be nondecreasing");
  if (times.front() < t0) throw std::invalid_argument("output times precede the initial time");

  const double horizon = std::max(times.back() - t0, 1e-300);
  const double h_min = opt.min_step * horizon;
  State k1 = y, k2 = y, k3 = y, k4 = y, k5 = y, k6 = y, k7 = y, tmp = y, ynew = y;
  double t = t0;
  rhs(t, y, k1);
  ++stats.evaluations;
  double h = opt.initial_step > 0 ? opt.initial_step : std::min(opt.max_step, horizon * 1e-3);

  auto error_norm = [&](const State& err, const State& a, const State& b) {
    auto scale = opt.atol + opt.rtol * a.array().abs().max(b.array().abs());
    return (err.array().abs() / scale).maxCoeff();
  };

  std::size_t next = 0;
  while (next < times.size() && times[next] <= t) on_output(next++, y);
  while (next < times.size()) {
    const double target = times[next];
    h = std::min({h, opt.max_step, target - t});
    bool lands = (t + h >= target) || (target - (t + h) < 1e-12 * horizon);
    if (lands) h = target - t;

    tmp = y + h * DP::a21 * k1;
    rhs(t + DP::c2 * h, tmp, k2);
    tmp = y + h * (DP::a31 * k1 + DP::a32 * k2);
    rhs(t + DP::c3 * h, tmp, k3);
    tmp = y + h * (DP::a41 * k1 + DP::a42 * k2 + DP::a43 * k3);
    rhs(t + DP::c4 * h, tmp, k4);
    tmp = y + h * (DP::a51 * k1 + DP::a52 * k2 + DP::a53 * k3 + DP::a54 * k4);
    rhs(t + DP::c5 * h, tmp, k5);
    tmp = y + h * (DP::a61 * k1 + DP::a62 * k2 + DP::a63 * k3 + DP::a64 * k4 + DP::a65 * k5);
    rhs(t + h, tmp, k6);
    ynew = y + h * (DP::b1 * k1 + DP::b3 * k3 + DP::b4 * k4 + DP::b5 * k5 + DP::b6 * k6);
    rhs(t + h, ynew, k7);
    stats.evaluations += 6;
    tmp = h * (DP::e1 * k1 + DP::e3 * k3 + DP::e4 * k4 + DP::e5 * k5 + DP::e6 * k6 + DP::e7 * k7);
    const double err = error_norm(tmp, y, ynew);

    if (err <= 1.0 || h <= h_min) {
      if (err > 1.0) throw NumericalError("step size underflow at t=" + std::to_string(t));
      t = lands ? target : t + h;
      y.swap(ynew);
      if (after_step(y)) {
        rhs(t, y, k1);
        ++stats.evaluations;
      } else {
        k1.swap(k7);
      }
      ++stats.accepted;
      while (next < times.size() && times[next] <= t) on_output(next++, y);
      double grow = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      // A clipped landing step says nothing about the natural step size.
      if (!lands) h *= grow;
    } else {
      h *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
      ++stats.rejected;
      if (h < h_min) throw NumericalError("step size underflow at t=" + std::to_string(t));
    }
  }
  return stats;
}

struct TimeDepOptions {
  double tol = 1e-8;
  // Defaults to a twentieth of the drive period when the drive is periodic.
  std::optional<double> max_step;
};

// Schrodinger evolution under a time-dependent Hamiltonian. The norm is never
// renormalized. Local errors accumulate over long drive-resolved horizons, so
// when the norm drift exceeds 10 * tol the run is repeated with the local
// tolerance tightened in proportion (global error ~ local^(4/5)); the result is
// flagged if the drift still exceeds the bound.
inline PureEvolution evolve_timedep(const DrivenHamiltonian& H, const StateVector& psi0,
                                    const std::vector<double>& times, const TimeDepOptions& options = {}) {
  if (options.tol <= 0) throw std::invalid_argument("tolerance must be positive");
  require_same_basis(H.basis(), psi0.basis, "time-dependent evolution");
  IntegratorOptions opt;
  opt.rtol = opt.atol = options.tol;
  if (options.max_step) opt.max_step = *options.max_step;
  else if (H.period > 0) opt.max_step = H.period / 20.0;

  std::vector<Complex> scratch;
  auto rhs = [&](double t, const Vector& y, Vector& dy) { H.apply_generator(t, y, dy, scratch); };
  const double n0 = psi0.norm();
  const double bound = 10 * options.tol;
  PureEvolution r;
  for (int attempt = 1; attempt <= 3; ++attempt) {
    r = PureEvolution{};
    r.times = times;
    r.states.resize(times.size());
    double drift = 0.0;
    auto out = [&](std::size_t i, const Vector& y) {
      r.states[i] = {psi0.basis, y};
      drift = std::max(drift, std::abs(y.norm() - n0));
    };
    auto stats = integrate_dp54(rhs, psi0.amp, 0.0, times, opt, out, [](Vector&) { return false; });
    r.diagnostics["norm_drift"] = drift;
    r.diagnostics["steps_accepted"] = double(stats.accepted);
    r.diagnostics["steps_rejected"] = double(stats.rejected);
    r.diagnostics["rhs_evaluations"] = double(stats.evaluations);
    r.diagnostics["local_tol"] = opt.rtol;
    r.diagnostics["attempts"] = attempt;
    if (drift <= bound) return r;
    const double shrink = std::clamp(std::pow(0.3 * bound / drift, 1.25), 1e-4, 0.5);
    opt.rtol = opt.atol = std::max(opt.rtol * shrink, 1e-15);
  }
  r.flag("norm drift " + std::to_string(r.diagnostics["norm_drift"]) + " exceeds 10*tol");
  return r;
}

inline PureEvolution evolve_timedep(const std::function<Operator(double)>& H_of_t, const StateVector& psi0,
                                    const std::vector<double>& times, const TimeDepOptions& options = {}) {
  require_same_basis(H_of_t(0.0).domain, psi0.basis, "time-dependent evolution");
  IntegratorOptions opt;
  opt.rtol = opt.atol = options.tol;
  if (options.max_step) opt.max_step = *options.max_step;
  auto rhs = [&](double t, const Vector& y, Vector& dy) { dy = -kI * (H_of_t(t).matrix * y); };
  PureEvolution r;
  r.times = times;
  r.states.resize(times.size());
  double drift = 0.0;
  const double n0 = psi0.norm();
  auto out = [&](std::size_t i, const Vector& y) {
    r.states[i] = {psi0.basis, y};
    drift = std::max(drift, std::abs(y.norm() - n0));
  };
  auto stats = integrate_dp54(rhs, psi0.amp, 0.0, times, opt, out, [](Vector&) { return false; });
  r.diagnostics["norm_drift"] = drift;
  r.diagnostics["steps_accepted"] = double(stats.accepted);
  if (drift > 10 * options.tol) r.flag("norm drift " + std::to_string(drift) + " exceeds 10*tol");
  return r;
}

// Coefficients c_j(t) = [1 + 2 cos(sqrt(3) kappa sigma_z t + 2 j pi / 3)] / 3 of
// a_0(t) = sum_j c_j(t) a_j(0).
inline std::array<double, 3> heisenberg_coefficients(const ModelParams& params, int sigma_z, double t) {
  std::array<double, 3> c{};
  for (int j = 0; j < 3; ++j)
    c[static_cast<std::size_t>(j)] =
        (1.0 + 2.0 * std::cos(std::sqrt(3.0) * params.kappa * sigma_z * t + 2.0 * kPi * j / 3.0)) / 3.0;
  return c;
}

// Relaxation and dephasing times; a value <= 0 means the channel is absent.
struct DissipationParams {
  double t1_qubit = 0.0;
  double tphi_qubit = 0.0;
  double t_cavity = 0.0;
};

enum class DephasingConvention {
  pure,      // tphi is the pure-dephasing time: sqrt(1/(2 tphi)) sigma_z
  total_t2,  // tphi is T2: pure rate 1/T2 - 1/(2 T1)
};

struct CollapseRates {
  double atom_decay = 0.0;
  double atom_dephasing = 0.0;  // coefficient squared of the sigma_z channel
  double cavity_decay = 0.0;
};

inline CollapseRates collapse_rates(const DissipationParams& d, DephasingConvention conv = DephasingConvention::pure) {
  CollapseRates r;
  if (d.t1_qubit > 0) r.atom_decay = 1.0 / d.t1_qubit;
  if (d.t_cavity > 0) r.cavity_decay = 1.0 / d.t_cavity;
  if (d.tphi_qubit > 0) {
    double pure_rate = 1.0 / d.tphi_qubit;
    if (conv == DephasingConvention::total_t2) {
      pure_rate -= 0.5 * r.atom_decay;
      if (pure_rate < -1e-15) throw std::invalid_argument("T2 exceeds 2*T1; no pure dephasing rate");
      pure_rate = std::max(pure_rate, 0.0);
    }
    r.atom_dephasing = 0.5 * pure_rate;
  }
  return r;
}

inline std::vector<Operator> build_collapse_ops(const BasisPtr& basis, const DissipationParams& d,
                                                DephasingConvention conv = DephasingConvention::pure) {
  auto rates = collapse_rates(d, conv);
  std::vector<Operator> out;
  if (rates.atom_decay > 0) out.push_back(std::sqrt(rates.atom_decay) * atom_lower(basis));
  if (rates.atom_dephasing > 0) out.push_back(std::sqrt(rates.atom_dephasing) * pauli_z(basis));
  if (rates.cavity_decay > 0)
    for (int j = 0; j < basis->modes(); ++j) out.push_back(std::sqrt(rates.cavity_decay) * annihilation(basis, j));
  for (auto& L : out)
    if (!L.is_square()) throw std::invalid_argument("collapse operators need a truncated basis");
  return out;
}

struct LindbladOptions {
  double tol = 1e-7;
  double max_step = std::numeric_limits<double>::infinity();
  // Output indices at which the minimum eigenvalue is computed. When empty:
  // every output if the largest invariant block has dimension <= 128,
  // otherwise only the last.
  std::vector<std::size_t> positivity_checks;
  // Keep every output state in the result (otherwise only the last).
  bool store_states = true;
  // Called at every output time with the current density matrix.
  std::function<void(std::size_t, double, const DensityMatrix&)> observer;
};

namespace detail {

// Density matrices that stay block-diagonal in total excitation: H and every
// L^dagger L conserve it, each L shifts it by a fixed amount. Blocks are packed
// column-major into one vector.
class ExcitationSectors {
 public:
  static std::optional<ExcitationSectors> detect(const SparseMatrix& gen, const std::vector<Operator>& collapse,
                                                 const DensityMatrix& rho0) {
    const auto& b = *rho0.basis;
    ExcitationSectors s;
    s.label_.resize(b.dim());
    std::map<int, std::size_t> by_label;
    for (std::size_t i = 0; i < b.dim(); ++i) {
      int lab = b.state(i).excitation();
      s.label_[i] = lab;
      auto [it, fresh] = by_label.emplace(lab, s.sectors_.size());
      if (fresh) s.sectors_.push_back({lab, {}, 0});
      s.local_.push_back(static_cast<Eigen::Index>(s.sectors_[it->second].idx.size()));
      s.sector_of_.push_back(it->second);
      s.sectors_[it->second].idx.push_back(static_cast<Eigen::Index>(i));
    }
    for (int k = 0; k < gen.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(gen, k); it; ++it)
        if (it.value() != Complex{} && s.label_[it.row()] != s.label_[it.col()]) return std::nullopt;
    for (auto& L : collapse) {
      std::optional<int> shift;
      for (int k = 0; k < L.matrix.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(L.matrix, k); it; ++it) {
          if (it.value() == Complex{}) continue;
          int d = s.label_[it.row()] - s.label_[it.col()];
          if (shift && *shift != d) return std::nullopt;
          shift = d;
        }
    }
    for (Eigen::Index c = 0; c < rho0.rho.cols(); ++c)
      for (Eigen::Index r = 0; r < rho0.rho.rows(); ++r)
        if (s.label_[r] != s.label_[c] && rho0.rho(r, c) != Complex{}) return std::nullopt;

    Eigen::Index off = 0;
    for (auto& sec : s.sectors_) {
      sec.offset = off;
      off += static_cast<Eigen::Index>(sec.idx.size() * sec.idx.size());
    }
    s.packed_size_ = off;
    for (std::size_t k = 0; k < s.sectors_.size(); ++k) s.gen_.push_back(s.sub(gen, k, k));
    for (auto& L : collapse)
      for (std::size_t src = 0; src < s.sectors_.size(); ++src)
        for (std::size_t dst = 0; dst < s.sectors_.size(); ++dst) {
          SparseMatrix m = s.sub(L.matrix, dst, src);
          if (m.nonZeros() > 0) s.jumps_.push_back({dst, src, std::move(m)});
        }
    return s;
  }

  Eigen::Index packed_size() const { return packed_size_; }
  std::size_t largest_block() const {
    std::size_t m = 0;
    for (auto& sec : sectors_) m = std::max(m, sec.idx.size());
    return m;
  }

  Vector pack(const DenseMatrix& rho) const {
    Vector v(packed_size_);
    for (auto& sec : sectors_) {
      auto blk = block(v, sec);
      for (std::size_t c = 0; c < sec.idx.size(); ++c)
        for (std::size_t r = 0; r < sec.idx.size(); ++r) blk(Eigen::Index(r), Eigen::Index(c)) = rho(sec.idx[r], sec.idx[c]);
    }
    return v;
  }

  DenseMatrix unpack(const Vector& v) const {
    const auto n = static_cast<Eigen::Index>(label_.size());
    DenseMatrix rho = DenseMatrix::Zero(n, n);
    for (auto& sec : sectors_) {
      auto blk = block(v, sec);
      for (std::size_t c = 0; c < sec.idx.size(); ++c)
        for (std::size_t r = 0; r < sec.idx.size(); ++r) rho(sec.idx[r], sec.idx[c]) = blk(Eigen::Index(r), Eigen::Index(c));
    }
    return rho;
  }

  void rhs(const Vector& y, Vector& dy) {
    dy.resize(packed_size_);
    for (std::size_t k = 0; k < sectors_.size(); ++k) {
      auto rho = block(y, sectors_[k]);
      auto out = block(dy, sectors_[k]);
      scratch_.noalias() = gen_[k] * rho;
      out = scratch_ + scratch_.adjoint();
    }
    for (auto& j : jumps_) {
      auto rho = block(y, sectors_[j.src]);
      auto out = block(dy, sectors_[j.dst]);
      work_.noalias() = j.op * rho;
      scratch_ = work_.adjoint();
      out.noalias() += j.op * scratch_;
    }
  }

  double symmetrize(Vector& y) {
    double residual = 0.0;
    for (auto& sec : sectors_) {
      auto blk = block(y, sec);
      residual = std::max(residual, (blk - blk.adjoint()).cwiseAbs().maxCoeff());
      DenseMatrix sym = 0.5 * (blk + blk.adjoint());
      blk = sym;
    }
    return residual;
  }

  Complex trace(const Vector& y) const {
    Complex t{};
    for (auto& sec : sectors_) t += block(y, sec).trace();
    return t;
  }

  double min_eigenvalue(const Vector& y) const {
    double m = std::numeric_limits<double>::infinity();
    for (auto& sec : sectors_) {
      Eigen::SelfAdjointEigenSolver<DenseMatrix> es(DenseMatrix(block(y, sec)), Eigen::EigenvaluesOnly);
      m = std::min(m, es.eigenvalues().minCoeff());
    }
    return m;
  }

 private:
  struct Sector {
    int label;
    std::vector<Eigen::Index> idx;
    Eigen::Index offset;
  };
  struct Jump {
    std::size_t dst, src;
    SparseMatrix op;
  };

  static Eigen::Map<DenseMatrix> block(Vector& v, const Sector& sec) {
    auto d = static_cast<Eigen::Index>(sec.idx.size());
    return {v.data() + sec.offset, d, d};
  }
  static Eigen::Map<const DenseMatrix> block(const Vector& v, const Sector& sec) {
    auto d = static_cast<Eigen::Index>(sec.idx.size());
    return {v.data() + sec.offset, d, d};
  }

  SparseMatrix sub(const SparseMatrix& m, std::size_t dst, std::size_t src) const {
    std::vector<Triplet> t;
    for (int k = 0; k < m.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(m, k); it; ++it)
        if (sector_of_[it.row()] == dst && sector_of_[it.col()] == src && it.value() != Complex{})
          t.emplace_back(local_[it.row()], local_[it.col()], it.value());
    SparseMatrix out(static_cast<Eigen::Index>(sectors_[dst].idx.size()),
                     static_cast<Eigen::Index>(sectors_[src].idx.size()));
    out.setFromTriplets(t.begin(), t.end());
    out.makeCompressed();
    return out;
  }

  std::vector<int> label_;
  std::vector<std::size_t> sector_of_;
  std::vector<Eigen::Index> local_;
  std::vector<Sector> sectors_;
  Eigen::Index packed_size_ = 0;
  std::vector<SparseMatrix> gen_;
  std::vector<Jump> jumps_;
  DenseMatrix scratch_, work_;
};

}  // namespace detail

// d rho/dt = -i[H, rho] + sum_k (L rho L^dagger - {L^dagger L, rho}/2).
// Written as -i H_eff rho + h.c. + sum_k L rho L^dagger with
// H_eff = H - (i/2) sum_k L^dagger L; each accepted step is re-symmetrized.
// When the dynamics preserve block-diagonality in total excitation the blocks
// are integrated alone.
inline MixedEvolution lindblad_evolve(const Operator& H, const std::vector<Operator>& collapse,
                                      const DensityMatrix& rho0, const std::vector<double>& times,
                                      const LindbladOptions& options = {}) {
  if (options.tol <= 0) throw std::invalid_argument("tolerance must be positive");
  require_same_basis(H.domain, rho0.basis, "Lindblad evolution");
  require_same_basis(H.codomain, rho0.basis, "Lindblad evolution");
  SparseMatrix h_eff = H.matrix;
  for (auto& L : collapse) {
    require_same_basis(L.domain, rho0.basis, "collapse operator");
    require_same_basis(L.codomain, rho0.basis, "collapse operator");
    h_eff -= (0.5 * kI) * SparseMatrix(L.matrix.adjoint() * L.matrix);
  }
  const SparseMatrix gen = -kI * h_eff;

  IntegratorOptions opt;
  opt.rtol = opt.atol = options.tol;
  opt.max_step = options.max_step;

  MixedEvolution r;
  r.times = times;
  const Complex tr0 = rho0.trace();
  double trace_drift = 0.0;
  double herm_residual = 0.0;
  double min_eig = std::numeric_limits<double>::infinity();

  auto sectors = detail::ExcitationSectors::detect(gen, collapse, rho0);
  const std::size_t largest = sectors ? sectors->largest_block() : rho0.basis->dim();
  std::vector<bool> check(times.size(), false);
  if (!options.positivity_checks.empty()) {
    for (auto i : options.positivity_checks)
      if (i < check.size()) check[i] = true;
  } else if (!times.empty()) {
    if (largest <= 128) check.assign(times.size(), true);
    else check.back() = true;
  }

  auto record = [&](std::size_t i, DensityMatrix&& rho) {
    if (options.observer) options.observer(i, times[i], rho);
    if (options.store_states || i + 1 == times.size()) {
      if (r.states.empty()) r.states.resize(options.store_states ? times.size() : 1);
      r.states[options.store_states ? i : 0] = std::move(rho);
    }
  };

  IntegratorStats stats;
  if (sectors) {
    auto rhs = [&](double, const Vector& y, Vector& dy) { sectors->rhs(y, dy); };
    auto out = [&](std::size_t i, const Vector& y) {
      trace_drift = std::max(trace_drift, std::abs(sectors->trace(y) - tr0));
      if (check[i]) min_eig = std::min(min_eig, sectors->min_eigenvalue(y));
      record(i, DensityMatrix{rho0.basis, sectors->unpack(y)});
    };
    auto sym = [&](Vector& y) {
      herm_residual = std::max(herm_residual, sectors->symmetrize(y));
      return true;
    };
    stats = integrate_dp54(rhs, sectors->pack(rho0.rho), 0.0, times, opt, out, sym);
    r.diagnostics["sectors"] = 1.0;
  } else {
    DenseMatrix scratch, work;
    auto rhs = [&](double, const DenseMatrix& rho, DenseMatrix& drho) {
      scratch.noalias() = gen * rho;
      drho = scratch + scratch.adjoint();
      for (auto& L : collapse) {
        work.noalias() = L.matrix * rho;
        scratch = work.adjoint();
        drho.noalias() += L.matrix * scratch;
      }
    };
    auto out = [&](std::size_t i, const DenseMatrix& rho) {
      DensityMatrix d{rho0.basis, rho};
      trace_drift = std::max(trace_drift, std::abs(d.trace() - tr0));
      if (check[i]) min_eig = std::min(min_eig, d.min_eigenvalue());
      record(i, std::move(d));
    };
    auto sym = [&](DenseMatrix& rho) {
      herm_residual = std::max(herm_residual, (rho - rho.adjoint()).cwiseAbs().maxCoeff());
      DenseMatrix s = 0.5 * (rho + rho.adjoint());
      rho.swap(s);
      return true;
    };
    stats = integrate_dp54(rhs, rho0.rho, 0.0, times, opt, out, sym);
    r.diagnostics["sectors"] = 0.0;
  }

  r.diagnostics["trace_drift"] = trace_drift;
  r.diagnostics["hermiticity_residual"] = herm_residual;
  r.diagnostics["min_eigenvalue"] = min_eig;
  r.diagnostics["steps_accepted"] = double(stats.accepted);
  r.diagnostics["steps_rejected"] = double(stats.rejected);
  if (trace_drift > 10 * options.tol) r.flag("trace drift exceeds 10*tol");
  if (herm_residual > 1e-10) r.flag("hermiticity residual exceeds 1e-10");
  if (min_eig < -100 * options.tol) r.flag("negative eigenvalue " + std::to_string(min_eig));
  return r;
}

}  // namespace fsl
