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

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fsl {

using Complex = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;
using DenseMatrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Triplet = Eigen::Triplet<Complex>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr Complex kI{0.0, 1.0};

// Raised when a computation cannot meet its numerical contract (integrator
// underflow, dimension budget, truncation loss).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Level : std::uint8_t { g = 0, e = 1 };

inline int pauli_z_value(Level s) { return s == Level::e ? 1 : -1; }
inline char level_char(Level s) { return s == Level::e ? 'e' : 'g'; }
inline Level parse_level(const std::string& s) {
  if (s == "g") return Level::g;
  if (s == "e") return Level::e;
  throw std::invalid_argument("atom level must be 'g' or 'e', got '" + s + "'");
}

// One lattice site: atom level plus the photon occupation of every mode.
struct BasisState {
  Level sigma = Level::g;
  std::vector<int> occ;

  int photons() const {
    int n = 0;
    for (int k : occ) n += k;
    return n;
  }
  int excitation() const { return photons() + (sigma == Level::e ? 1 : 0); }

  auto operator<=>(const BasisState&) const = default;
  bool operator==(const BasisState&) const = default;
};

inline std::string to_string(const BasisState& s) {
  std::string out(1, level_char(s.sigma));
  out += ';';
  for (std::size_t k = 0; k < s.occ.size(); ++k) {
    if (k) out += ',';
    out += std::to_string(s.occ[k]);
  }
  return out;
}

enum class BasisKind {
  shell,          // fixed total excitation N (photons + atom)
  truncated,      // every excitation 0..N_max
  photon_blocks,  // both atom levels, fixed photon count per group of modes
};

inline std::string to_string(BasisKind k) {
  switch (k) {
    case BasisKind::shell: return "shell";
    case BasisKind::truncated: return "truncated";
    case BasisKind::photon_blocks: return "photon_blocks";
  }
  return "unknown";
}

namespace detail {

// All compositions of `total` into `parts` nonnegative integers, ordered with
// the first part descending, then the second, and so on.
inline void compositions(int total, int parts, std::vector<int>& prefix,
                         std::vector<std::vector<int>>& out) {
  if (parts == 1) {
    prefix.push_back(total);
    out.push_back(prefix);
    prefix.pop_back();
    return;
  }
  for (int first = total; first >= 0; --first) {
    prefix.push_back(first);
    compositions(total - first, parts - 1, prefix, out);
    prefix.pop_back();
  }
}

inline std::vector<std::vector<int>> compositions(int total, int parts) {
  std::vector<std::vector<int>> out;
  if (total < 0 || parts <= 0) return out;
  std::vector<int> prefix;
  compositions(total, parts, prefix, out);
  return out;
}

}  // namespace detail

// Ordered enumeration of lattice sites with a position index.
//
// Ordering: shell(N) lists the g-sublattice then the e-sublattice, each with
// occupations in descending lexicographic order (n0 descending, then n1, ...).
// truncated(N_max) concatenates shell(0), shell(1), ..., shell(N_max).
// photon_blocks lists g then e; occupations are the cartesian product of the
// per-group compositions, group 0 varying slowest.
class Basis {
 public:
  Basis(BasisKind kind, int excitation, int modes, std::vector<BasisState> states,
        int groups = 1)
      : kind_(kind), excitation_(excitation), modes_(modes), groups_(groups),
        states_(std::move(states)) {
    for (std::size_t i = 0; i < states_.size(); ++i) {
      if (static_cast<int>(states_[i].occ.size()) != modes_)
        throw std::invalid_argument("basis state has wrong number of modes");
      for (int n : states_[i].occ)
        if (n < 0) throw std::invalid_argument("negative occupation in basis state");
      if (!index_.emplace(states_[i], i).second)
        throw std::invalid_argument("duplicate basis state " + to_string(states_[i]));
    }
  }

  BasisKind kind() const { return kind_; }
  // N for shell and truncated bases, photons per group for photon_blocks.
  int excitation() const { return excitation_; }
  int modes() const { return modes_; }
  int groups() const { return groups_; }
  std::size_t dim() const { return states_.size(); }
  const std::vector<BasisState>& states() const { return states_; }
  const BasisState& state(std::size_t i) const { return states_.at(i); }

  std::optional<std::size_t> find(const BasisState& s) const {
    auto it = index_.find(s);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  bool contains(const BasisState& s) const { return index_.count(s) != 0; }
  std::size_t index(const BasisState& s) const {
    auto it = index_.find(s);
    if (it == index_.end())
      throw std::out_of_range("state " + to_string(s) + " is not in the basis");
    return it->second;
  }

  bool operator==(const Basis& o) const {
    return kind_ == o.kind_ && excitation_ == o.excitation_ && modes_ == o.modes_ &&
           groups_ == o.groups_ && states_ == o.states_;
  }

 private:
  BasisKind kind_;
  int excitation_;
  int modes_;
  int groups_;
  std::vector<BasisState> states_;
  std::map<BasisState, std::size_t> index_;
};

using BasisPtr = std::shared_ptr<const Basis>;

inline bool same_basis(const BasisPtr& a, const BasisPtr& b) {
  return a == b || (a && b && *a == *b);
}

inline void require_same_basis(const BasisPtr& a, const BasisPtr& b, const char* what) {
  if (!same_basis(a, b)) throw std::invalid_argument(std::string("basis mismatch in ") + what);
}

namespace detail {

inline std::vector<BasisState> shell_states(int N, int modes) {
  std::vector<BasisState> out;
  if (N < 0) return out;
  for (auto& occ : compositions(N, modes)) out.push_back({Level::g, occ});
  for (auto& occ : compositions(N - 1, modes)) out.push_back({Level::e, occ});
  return out;
}

}  // namespace detail

// Sites with total excitation exactly N. N = -1 yields the empty basis, the
// codomain of a lowering operator on shell(0).
inline BasisPtr enumerate_shell(int N, int modes = 3) {
  if (N < -1) throw std::invalid_argument("shell excitation must be >= -1");
  if (modes < 1) throw std::invalid_argument("need at least one mode");
  return std::make_shared<const Basis>(BasisKind::shell, N, modes, detail::shell_states(N, modes));
}

inline BasisPtr enumerate_truncated(int N_max, int modes = 3) {
  if (N_max < 0) throw std::invalid_argument("truncation must be >= 0");
  if (modes < 1) throw std::invalid_argument("need at least one mode");
  std::vector<BasisState> states;
  for (int M = 0; M <= N_max; ++M) {
    auto shell = detail::shell_states(M, modes);
    states.insert(states.end(), shell.begin(), shell.end());
  }
  return std::make_shared<const Basis>(BasisKind::truncated, N_max, modes, std::move(states));
}

// Both atom levels times `groups` independent sets of `modes_per_group` modes,
// each set holding exactly `photons` photons. Used for the two-cavity model
// (one group of two modes) and for chains of three-cavity links.
inline BasisPtr enumerate_photon_blocks(int groups, int modes_per_group, int photons) {
  if (groups < 1 || modes_per_group < 1 || photons < 0)
    throw std::invalid_argument("invalid photon-block basis shape");
  auto per_group = detail::compositions(photons, modes_per_group);
  std::vector<std::vector<int>> occs{{}};
  for (int g = 0; g < groups; ++g) {
    std::vector<std::vector<int>> next;
    for (auto& head : occs)
      for (auto& tail : per_group) {
        auto occ = head;
        occ.insert(occ.end(), tail.begin(), tail.end());
        next.push_back(std::move(occ));
      }
    occs = std::move(next);
  }
  std::vector<BasisState> states;
  for (Level s : {Level::g, Level::e})
    for (auto& occ : occs) states.push_back({s, occ});
  return std::make_shared<const Basis>(BasisKind::photon_blocks, photons, groups * modes_per_group,
                                       std::move(states), groups);
}

// Sparse matrix from `domain` to `codomain` (square when they coincide).
struct Operator {
  BasisPtr codomain;
  BasisPtr domain;
  SparseMatrix matrix;

  bool is_square() const { return same_basis(codomain, domain); }
  const BasisPtr& basis() const {
    if (!is_square()) throw std::logic_error("operator is not square on one basis");
    return domain;
  }

  Operator adjoint() const { return {domain, codomain, SparseMatrix(matrix.adjoint())}; }

  bool is_hermitian(double tol = 1e-12) const {
    if (!is_square()) return false;
    SparseMatrix diff = matrix - SparseMatrix(matrix.adjoint());
    for (int k = 0; k < diff.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(diff, k); it; ++it)
        if (std::abs(it.value()) > tol) return false;
    return true;
  }

  Complex element(std::size_t row, std::size_t col) const {
    return matrix.coeff(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
  }
  Complex element(const BasisState& row, const BasisState& col) const {
    return element(codomain->index(row), domain->index(col));
  }
};

inline Operator operator*(const Operator& a, const Operator& b) {
  require_same_basis(a.domain, b.codomain, "operator product");
  return {a.codomain, b.domain, SparseMatrix(a.matrix * b.matrix)};
}
inline Operator operator+(const Operator& a, const Operator& b) {
  require_same_basis(a.domain, b.domain, "operator sum");
  require_same_basis(a.codomain, b.codomain, "operator sum");
  return {a.codomain, a.domain, SparseMatrix(a.matrix + b.matrix)};
}
inline Operator operator-(const Operator& a, const Operator& b) {
  require_same_basis(a.domain, b.domain, "operator difference");
  require_same_basis(a.codomain, b.codomain, "operator difference");
  return {a.codomain, a.domain, SparseMatrix(a.matrix - b.matrix)};
}
inline Operator operator*(Complex c, const Operator& a) {
  return {a.codomain, a.domain, SparseMatrix(c * a.matrix)};
}
inline Operator operator*(double c, const Operator& a) { return Complex(c) * a; }

inline Operator commutator(const Operator& a, const Operator& b) { return a * b - b * a; }

// Largest absolute matrix element; the max-norm used throughout the tests.
inline double max_abs(const Operator& a) {
  double m = 0.0;
  for (int k = 0; k < a.matrix.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(a.matrix, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

inline Operator zero_operator(const BasisPtr& basis) {
  auto d = static_cast<Eigen::Index>(basis->dim());
  return {basis, basis, SparseMatrix(d, d)};
}

inline Operator identity(const BasisPtr& basis) {
  auto d = static_cast<Eigen::Index>(basis->dim());
  SparseMatrix m(d, d);
  m.setIdentity();
  return {basis, basis, m};
}

namespace detail {

inline Operator from_triplets(const BasisPtr& codomain, const BasisPtr& domain,
                              const std::vector<Triplet>& t) {
  SparseMatrix m(static_cast<Eigen::Index>(codomain->dim()), static_cast<Eigen::Index>(domain->dim()));
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return {codomain, domain, std::move(m)};
}

// Basis that receives the image of a single-step excitation change.
inline BasisPtr shifted_basis(const BasisPtr& basis, int excitation_delta, bool photon_change) {
  switch (basis->kind()) {
    case BasisKind::truncated: return basis;
    case BasisKind::shell:
      if (excitation_delta == 0) return basis;
      return enumerate_shell(std::max(-1, basis->excitation() + excitation_delta), basis->modes());
    case BasisKind::photon_blocks:
      if (photon_change)
        throw std::invalid_argument(
            "ladder operators leave a photon-block basis; build bilinears with hop()");
      return basis;
  }
  return basis;
}

inline void check_mode(const BasisPtr& basis, int j) {
  if (j < 0 || j >= basis->modes())
    throw std::invalid_argument("mode index " + std::to_string(j) + " out of range");
}

}  // namespace detail

// a_j. Rectangular shell(N) -> shell(N-1) on shell bases, square on truncated ones.
inline Operator annihilation(const BasisPtr& basis, int j) {
  detail::check_mode(basis, j);
  auto target = detail::shifted_basis(basis, -1, true);
  std::vector<Triplet> t;
  for (std::size_t c = 0; c < basis->dim(); ++c) {
    BasisState s = basis->state(c);
    int n = s.occ[j];
    if (n == 0) continue;
    s.occ[j] = n - 1;
    if (auto r = target->find(s)) t.emplace_back(*r, c, std::sqrt(double(n)));
  }
  return detail::from_triplets(target, basis, t);
}

// a_j^dagger. On a truncated basis the image beyond N_max is dropped.
inline Operator creation(const BasisPtr& basis, int j) {
  detail::check_mode(basis, j);
  auto target = detail::shifted_basis(basis, +1, true);
  std::vector<Triplet> t;
  for (std::size_t c = 0; c < basis->dim(); ++c) {
    BasisState s = basis->state(c);
    int n = s.occ[j];
    s.occ[j] = n + 1;
    if (auto r = target->find(s)) t.emplace_back(*r, c, std::sqrt(double(n + 1)));
  }
  return detail::from_triplets(target, basis, t);
}

inline Operator number(const BasisPtr& basis, int j) {
  detail::check_mode(basis, j);
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < basis->dim(); ++i)
    if (int n = basis->state(i).occ[j]) t.emplace_back(i, i, double(n));
  return detail::from_triplets(basis, basis, t);
}

inline Operator total_photons(const BasisPtr& basis) {
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < basis->dim(); ++i)
    if (int n = basis->state(i).photons()) t.emplace_back(i, i, double(n));
  return detail::from_triplets(basis, basis, t);
}

inline Operator total_excitation(const BasisPtr& basis) {
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < basis->dim(); ++i)
    if (int n = basis->state(i).excitation()) t.emplace_back(i, i, double(n));
  return detail::from_triplets(basis, basis, t);
}

// a_dst^dagger a_src, square on any basis kind.
inline Operator hop(const BasisPtr& basis, int src, int dst) {
  detail::check_mode(basis, src);
  detail::check_mode(basis, dst);
  if (src == dst) return number(basis, src);
  std::vector<Triplet> t;
  for (std::size_t c = 0; c < basis->dim(); ++c) {
    BasisState s = basis->state(c);
    int ns = s.occ[src];
    if (ns == 0) continue;
    int nd = s.occ[dst];
    s.occ[src] = ns - 1;
    s.occ[dst] = nd + 1;
    if (auto r = basis->find(s)) t.emplace_back(*r, c, std::sqrt(double(ns) * double(nd + 1)));
  }
  return detail::from_triplets(basis, basis, t);
}

inline Operator pauli_z(const BasisPtr& basis) {
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < basis->dim(); ++i)
    t.emplace_back(i, i, double(pauli_z_value(basis->state(i).sigma)));
  return detail::from_triplets(basis, basis, t);
}

// |e><e| tensored with the photon identity.
inline Operator excited_projector(const BasisPtr& basis) {
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < basis->dim(); ++i)
    if (basis->state(i).sigma == Level::e) t.emplace_back(i, i, 1.0);
  return detail::from_triplets(basis, basis, t);
}

// sigma^+ = |e><g|. Raises the excitation by one, so on a shell basis the
// codomain is shell(N+1).
inline Operator atom_raise(const BasisPtr& basis) {
  auto target = detail::shifted_basis(basis, +1, false);
  std::vector<Triplet> t;
  for (std::size_t c = 0; c < basis->dim(); ++c) {
    BasisState s = basis->state(c);
    if (s.sigma != Level::g) continue;
    s.sigma = Level::e;
    if (auto r = target->find(s)) t.emplace_back(*r, c, 1.0);
  }
  return detail::from_triplets(target, basis, t);
}

inline Operator atom_lower(const BasisPtr& basis) {
  auto target = detail::shifted_basis(basis, -1, false);
  std::vector<Triplet> t;
  for (std::size_t c = 0; c < basis->dim(); ++c) {
    BasisState s = basis->state(c);
    if (s.sigma != Level::e) continue;
    s.sigma = Level::g;
    if (auto r = target->find(s)) t.emplace_back(*r, c, 1.0);
  }
  return detail::from_triplets(target, basis, t);
}

// sigma^+ a_j, the excitation-conserving Jaynes-Cummings term. Square on
// shell and truncated bases.
inline Operator jc_lowering(const BasisPtr& basis, int j) {
  detail::check_mode(basis, j);
  if (basis->kind() == BasisKind::photon_blocks)
    throw std::invalid_argument("Jaynes-Cummings terms change the photon count of a photon-block basis");
  std::vector<Triplet> t;
  for (std::size_t c = 0; c < basis->dim(); ++c) {
    BasisState s = basis->state(c);
    int n = s.occ[j];
    if (s.sigma != Level::g || n == 0) continue;
    s.sigma = Level::e;
    s.occ[j] = n - 1;
    if (auto r = basis->find(s)) t.emplace_back(*r, c, std::sqrt(double(n)));
  }
  return detail::from_triplets(basis, basis, t);
}

struct StateVector {
  BasisPtr basis;
  Vector amp;

  double norm() const { return amp.norm(); }
  std::size_t dim() const { return static_cast<std::size_t>(amp.size()); }
  Complex amplitude(const BasisState& s) const {
    auto i = basis->find(s);
    return i ? amp(static_cast<Eigen::Index>(*i)) : Complex{};
  }
  void normalize() {
    double n = amp.norm();
    if (n == 0.0) throw NumericalError("cannot normalize a zero state");
    amp /= n;
  }
  bool operator==(const StateVector& o) const {
    return same_basis(basis, o.basis) && amp.size() == o.amp.size() && amp == o.amp;
  }
};

inline StateVector apply(const Operator& op, const StateVector& psi) {
  require_same_basis(op.domain, psi.basis, "operator application");
  return {op.codomain, op.matrix * psi.amp};
}

inline Complex inner(const StateVector& a, const StateVector& b) {
  require_same_basis(a.basis, b.basis, "inner product");
  return a.amp.dot(b.amp);
}

inline Complex expectation(const Operator& op, const StateVector& psi) {
  require_same_basis(op.domain, psi.basis, "expectation value");
  require_same_basis(op.codomain, psi.basis, "expectation value");
  return psi.amp.dot(op.matrix * psi.amp);
}

inline StateVector fock_state(const BasisPtr& basis, const BasisState& s) {
  auto i = basis->find(s);
  if (!i) throw std::invalid_argument("state " + to_string(s) + " is not in the basis");
  Vector v = Vector::Zero(static_cast<Eigen::Index>(basis->dim()));
  v(static_cast<Eigen::Index>(*i)) = 1.0;
  return {basis, std::move(v)};
}

inline StateVector fock_state(const BasisPtr& basis, Level sigma, int n0, int n1, int n2) {
  return fock_state(basis, BasisState{sigma, {n0, n1, n2}});
}

struct CoherentState {
  StateVector state;
  double truncation_loss = 0.0;  // weight beyond the truncation, before renormalization
};

// |g; alpha in mode j, vacuum elsewhere>, truncated to the basis and renormalized.
inline CoherentState coherent_state(const BasisPtr& basis, Complex alpha, int j,
                                    double max_loss = 1e-6) {
  detail::check_mode(basis, j);
  if (basis->kind() != BasisKind::truncated)
    throw std::invalid_argument("coherent states need a truncated basis");
  Vector v = Vector::Zero(static_cast<Eigen::Index>(basis->dim()));
  Complex c = std::exp(-0.5 * std::norm(alpha));
  double kept = 0.0;
  BasisState s{Level::g, std::vector<int>(basis->modes(), 0)};
  for (int n = 0;; ++n) {
    s.occ[j] = n;
    auto i = basis->find(s);
    if (!i) break;
    if (n > 0) c *= alpha / std::sqrt(double(n));
    v(static_cast<Eigen::Index>(*i)) = c;
    kept += std::norm(c);
  }
  double loss = std::max(0.0, 1.0 - kept);
  if (loss > max_loss)
    throw NumericalError("coherent state truncation loss " + std::to_string(loss) +
                         " exceeds threshold " + std::to_string(max_loss));
  StateVector psi{basis, std::move(v)};
  psi.normalize();
  return {std::move(psi), loss};
}

// Smallest truncation that keeps a coherent state's lost weight below `max_loss`.
inline int coherent_truncation(double mean_photons, double max_loss = 1e-6) {
  double p = std::exp(-mean_photons);
  double kept = p;
  int n = 0;
  while (1.0 - kept > max_loss) {
    ++n;
    p *= mean_photons / n;
    kept += p;
  }
  return n;
}

struct DensityMatrix {
  BasisPtr basis;
  DenseMatrix rho;

  static DensityMatrix from_pure(const StateVector& psi) {
    return {psi.basis, psi.amp * psi.amp.adjoint()};
  }

  Complex trace() const { return rho.trace(); }
  double hermiticity_residual() const { return (rho - rho.adjoint()).cwiseAbs().maxCoeff(); }
  double purity() const { return (rho * rho).trace().real(); }
  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(rho, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }
  Complex element(const BasisState& row, const BasisState& col) const {
    return rho(static_cast<Eigen::Index>(basis->index(row)),
               static_cast<Eigen::Index>(basis->index(col)));
  }
};

// Reduced 2x2 atom density matrix, ordered (g, e).
inline Eigen::Matrix2cd reduced_atom_state(const StateVector& psi) {
  Eigen::Matrix2cd r = Eigen::Matrix2cd::Zero();
  const auto& b = *psi.basis;
  for (std::size_t i = 0; i < b.dim(); ++i) {
    const auto& s = b.state(i);
    Complex ai = psi.amp(static_cast<Eigen::Index>(i));
    int row = s.sigma == Level::e ? 1 : 0;
    r(row, row) += std::norm(ai);
    if (s.sigma == Level::g) {
      BasisState partner{Level::e, s.occ};
      if (auto k = b.find(partner)) r(0, 1) += ai * std::conj(psi.amp(static_cast<Eigen::Index>(*k)));
    }
  }
  r(1, 0) = std::conj(r(0, 1));
  return r;
}

}  // namespace fsl
