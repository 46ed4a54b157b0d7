// Copyright 2026 The qmem Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Brute-force oracle: one mode pair (A, Ã) on a truncated two-oscillator Fock
// space. The basis is |n_A, n_Ã>, 0 <= n < dim, flattened as n_A * dim + n_Ã.
// The lab-frame oscillators are a = (A - Ã)/sqrt(2), ã = (A + Ã)/sqrt(2).
//
// "Interior" means n_A < dim - 1 and n_Ã < dim - 1: the only place where the
// truncation breaks the canonical commutators is the top level, so operator
// identities are asserted on interior columns.

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "qmem/errors.hpp"
#include "qmem/expm_action.hpp"
#include "qmem/su11.hpp"

namespace qmem {

struct FockBudget {
  double state_tail = 1e-10;        // max discarded norm^2 tanh(Theta)^(2 dim)
  double propagation = 1e-10;       // max amplitude on the truncation boundary during evolution
  double squeeze_headroom = 1e-13;  // tanh(|theta|)^D target for the padded squeezer space
  double degenerate_gap = 0.05;     // min |Theta| for checks that divide by sinh(Theta)
};

template <typename Real = double>
class FockWorkspace {
 public:
  using Scalar = std::complex<Real>;
  using Matrix = Eigen::SparseMatrix<Scalar>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  FockWorkspace(Eigen::Index dim, Real omega, Real gamma, FockBudget budget = {})
      : dim_(dim), omega_(omega), gamma_(gamma), budget_(budget) {
    if (dim_ < 4) throw DomainError("FockWorkspace: dim must be >= 4");
    if (!(omega_ > Real(0)) || !(gamma_ >= Real(0))) {
      throw DomainError("FockWorkspace: need omega > 0 and gamma >= 0");
    }
    build();
  }

  Eigen::Index dim() const { return dim_; }
  Eigen::Index size() const { return dim_ * dim_; }
  Real omega() const { return omega_; }
  Real gamma() const { return gamma_; }
  const FockBudget& budget() const { return budget_; }

  Eigen::Index index(Eigen::Index n_a, Eigen::Index n_at) const { return n_a * dim_ + n_at; }
  Eigen::Index n_big(Eigen::Index i) const { return i / dim_; }
  Eigen::Index n_tilde(Eigen::Index i) const { return i % dim_; }
  bool interior(Eigen::Index i) const { return n_big(i) < dim_ - 1 && n_tilde(i) < dim_ - 1; }
  bool boundary(Eigen::Index i) const { return n_big(i) == dim_ - 1 || n_tilde(i) == dim_ - 1; }

  const Matrix& identity() const { return identity_; }
  const Matrix& a() const { return a_; }
  const Matrix& a_dag() const { return a_dag_; }
  const Matrix& at() const { return at_; }
  const Matrix& at_dag() const { return at_dag_; }
  const Matrix& big_a() const { return big_a_; }
  const Matrix& big_a_dag() const { return big_a_dag_; }
  const Matrix& big_at() const { return big_at_; }
  const Matrix& big_at_dag() const { return big_at_dag_; }
  const Matrix& j_plus() const { return j_plus_; }
  const Matrix& j_minus() const { return j_minus_; }
  const Matrix& j3() const { return j3_; }
  /// C^2 = 1/4 + J3^2 - (J+ J- + J- J+)/2
  const Matrix& casimir_sq() const { return casimir_sq_; }
  const Matrix& h0() const { return h0_; }
  /// H_I = i gamma (A^dagger Ã^dagger - A Ã)
  const Matrix& h_int() const { return h_int_; }

  /// G(theta) = -i theta (A^dagger Ã^dagger - A Ã)
  Matrix g_generator(Real theta) const {
    return Matrix(Scalar(0, -theta) * (j_plus_ - j_minus_));
  }

  /// Exponent of S_a(theta) = exp(-theta/2 (a^2 - a^dagger^2)).
  Matrix squeeze_a_exponent(Real theta) const {
    return Matrix(Scalar(-theta / 2) * (Matrix(a_ * a_) - Matrix(a_dag_ * a_dag_)));
  }

  /// Exponent of S_ã(theta) = exp(-theta/2 (ã^2 - ã^dagger^2)).
  Matrix squeeze_at_exponent(Real theta) const {
    return Matrix(Scalar(-theta / 2) * (Matrix(at_ * at_) - Matrix(at_dag_ * at_dag_)));
  }

  /// S_A(Theta) = -(A^dagger A ln sinh^2 Theta - A A^dagger ln cosh^2 Theta).
  /// At Theta == 0 the first coefficient diverges; see oracle_entropy.
  Matrix entropy_operator(Real theta_eff) const {
    if (theta_eff == Real(0)) {
      throw DegenerateError("entropy_operator: ln sinh^2(0) is singular");
    }
    const Real ls = std::log(std::sinh(theta_eff) * std::sinh(theta_eff));
    const Real lc = std::log(std::cosh(theta_eff) * std::cosh(theta_eff));
    return Matrix(Scalar(-ls) * n_big_ + Scalar(lc) * anti_n_big_);
  }

  /// dS_A/dt at effective parameter Theta for damping gamma:
  /// -(A^dagger A 2 gamma coth Theta - A A^dagger 2 gamma tanh Theta).
  Matrix entropy_rate_operator(Real theta_eff, Real gamma) const {
    const Real coth = std::cosh(theta_eff) / std::sinh(theta_eff);
    const Real tanh = std::tanh(theta_eff);
    return Matrix(Scalar(-2 * gamma * coth) * n_big_ + Scalar(2 * gamma * tanh) * anti_n_big_);
  }

  const Matrix& number_big() const { return n_big_; }
  const Matrix& number_tilde() const { return n_tilde_; }
  /// A A^dagger as a truncated matrix product (vanishes on the top level).
  const Matrix& anti_number_big() const { return anti_n_big_; }

  Vector vacuum() const {
    Vector v = Vector::Zero(size());
    v[0] = Scalar(1);
    return v;
  }

  Vector project_interior(const Vector& v) const {
    Vector out = v;
    for (Eigen::Index i = 0; i < size(); ++i) {
      if (!interior(i)) out[i] = Scalar(0);
    }
    return out;
  }

  Real boundary_amplitude(const Vector& v) const {
    Real worst = Real(0);
    for (Eigen::Index i = 0; i < size(); ++i) {
      if (boundary(i)) worst = std::max(worst, std::abs(v[i]));
    }
    return worst;
  }

  /// max |M(i, j)| over interior columns j (or all columns).
  Real max_abs(const Matrix& m, bool interior_only = true) const {
    Real worst = Real(0);
    for (Eigen::Index col = 0; col < m.outerSize(); ++col) {
      if (interior_only && !interior(col)) continue;
      for (typename Matrix::InnerIterator it(m, col); it; ++it) {
        worst = std::max(worst, std::abs(it.value()));
      }
    }
    return worst;
  }

 private:
  Matrix embed(bool first_factor) const {
    std::vector<Eigen::Triplet<Scalar>> triplets;
    for (Eigen::Index n_a = 0; n_a < dim_; ++n_a) {
      for (Eigen::Index n_at = 0; n_at < dim_; ++n_at) {
        const Eigen::Index n = first_factor ? n_a : n_at;
        if (n == 0) continue;
        const Eigen::Index col = index(n_a, n_at);
        const Eigen::Index row = first_factor ? index(n_a - 1, n_at) : index(n_a, n_at - 1);
        triplets.emplace_back(row, col, Scalar(std::sqrt(Real(n))));
      }
    }
    Matrix m(size(), size());
    m.setFromTriplets(triplets.begin(), triplets.end());
    return m;
  }

  void build() {
    identity_ = Matrix(size(), size());
    identity_.setIdentity();
    big_a_ = embed(true);
    big_at_ = embed(false);
    big_a_dag_ = big_a_.adjoint();
    big_at_dag_ = big_at_.adjoint();
    const Scalar r(Real(1) / std::sqrt(Real(2)));
    a_ = r * (big_a_ - big_at_);
    at_ = r * (big_a_ + big_at_);
    a_dag_ = a_.adjoint();
    at_dag_ = at_.adjoint();

    n_big_ = big_a_dag_ * big_a_;
    n_tilde_ = big_at_dag_ * big_at_;
    anti_n_big_ = big_a_ * big_a_dag_;
    j_plus_ = big_a_dag_ * big_at_dag_;
    j_minus_ = big_a_ * big_at_;
    j3_ = Scalar(Real(0.5)) * (n_big_ + n_tilde_ + identity_);
    casimir_sq_ = Scalar(Real(0.25)) * identity_ + Matrix(j3_ * j3_) -
                  Scalar(Real(0.5)) * (Matrix(j_plus_ * j_minus_) + Matrix(j_minus_ * j_plus_));
    h0_ = Scalar(omega_) * (n_big_ - n_tilde_);
    h_int_ = Scalar(0, gamma_) * (j_plus_ - j_minus_);

    if (max_abs(Matrix(h0_ - Matrix(h0_.adjoint())), false) != Real(0) ||
        max_abs(Matrix(h_int_ - Matrix(h_int_.adjoint())), false) != Real(0)) {
      throw std::logic_error("FockWorkspace: Hamiltonian matrices are not Hermitian");
    }
  }

  Eigen::Index dim_;
  Real omega_;
  Real gamma_;
  FockBudget budget_;
  Matrix identity_, a_, a_dag_, at_, at_dag_;
  Matrix big_a_, big_a_dag_, big_at_, big_at_dag_;
  Matrix n_big_, n_tilde_, anti_n_big_;
  Matrix j_plus_, j_minus_, j3_, casimir_sq_, h0_, h_int_;
};

namespace detail {

inline std::string sci(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.3e", value);
  return buffer;
}

}  // namespace detail

template <typename Real = double>
FockWorkspace<Real> build_workspace(Eigen::Index dim, Real omega, Real gamma, FockBudget budget = {}) {
  return FockWorkspace<Real>(dim, omega, gamma, budget);
}

// --- state construction -----------------------------------------------------

/// Norm^2 discarded by truncating sum_n tanh(Theta)^n / cosh(Theta) |n,n> at dim.
template <typename Real>
Real truncation_tail(Real theta_eff, Eigen::Index dim) {
  return std::pow(std::tanh(std::abs(theta_eff)), Real(2 * dim));
}

/// sum_n tanh(Theta)^n / cosh(Theta) |n, n>, renormalized after truncation.
template <typename Real>
typename FockWorkspace<Real>::Vector memory_vector_at(const FockWorkspace<Real>& ws, Real theta_eff) {
  using Scalar = typename FockWorkspace<Real>::Scalar;
  const Real tail = truncation_tail(theta_eff, ws.dim());
  if (tail > ws.budget().state_tail) {
    throw BudgetError("memory vector: truncation tail " + detail::sci(double(tail)) +
                      " exceeds budget at dim " + std::to_string(ws.dim()));
  }
  const Real lambda = std::tanh(theta_eff);
  typename FockWorkspace<Real>::Vector v = FockWorkspace<Real>::Vector::Zero(ws.size());
  Real amplitude = Real(1) / std::cosh(theta_eff);
  for (Eigen::Index n = 0; n < ws.dim(); ++n) {
    v[ws.index(n, n)] = Scalar(amplitude);
    amplitude *= lambda;
  }
  v.normalize();
  return v;
}

/// Memory vector for code theta at t = 0: parameter -tanh(theta).
template <typename Real>
typename FockWorkspace<Real>::Vector memory_vector(const FockWorkspace<Real>& ws, Real theta) {
  return memory_vector_at(ws, -theta);
}

namespace detail {

template <typename Real>
std::function<void(const typename FockWorkspace<Real>::Vector&)> boundary_monitor(
    const FockWorkspace<Real>& ws, const char* what) {
  return [&ws, what](const typename FockWorkspace<Real>::Vector& v) {
    const Real edge = ws.boundary_amplitude(v);
    if (edge > ws.budget().propagation) {
      throw BudgetError(std::string(what) + ": amplitude " + detail::sci(double(edge)) +
                        " reached the truncation boundary at dim " + std::to_string(ws.dim()));
    }
  };
}

}  // namespace detail

/// exp(-i G(theta)) |0,0>, computed as a series action on the vector.
template <typename Real>
typename FockWorkspace<Real>::Vector memory_vector_via_generator(const FockWorkspace<Real>& ws, Real theta) {
  using Scalar = typename FockWorkspace<Real>::Scalar;
  using Matrix = typename FockWorkspace<Real>::Matrix;
  const Matrix exponent = Scalar(0, -1) * ws.g_generator(theta);
  return expm_action(exponent, ws.vacuum(), {}, detail::boundary_monitor(ws, "memory_vector_via_generator"));
}

/// exp(-i t H_I) v. Refuses evolutions whose amplitude reaches the top Fock
/// level, where the truncated dynamics departs from the exact one.
template <typename Real>
typename FockWorkspace<Real>::Vector evolve_vector(const FockWorkspace<Real>& ws,
                                                   const typename FockWorkspace<Real>::Vector& v, Real t) {
  using Scalar = typename FockWorkspace<Real>::Scalar;
  using Matrix = typename FockWorkspace<Real>::Matrix;
  if (v.size() != ws.size()) throw MismatchError("evolve_vector: vector size does not match workspace");
  if (!(t >= Real(0))) throw DomainError("evolve_vector: t must be >= 0");
  auto monitor = detail::boundary_monitor(ws, "evolve_vector");
  monitor(v);
  if (t == Real(0)) return v;
  const Matrix exponent = Scalar(0, -t) * ws.h_int();
  return expm_action(exponent, v, {}, monitor);
}

// --- observables ------------------------------------------------------------

template <typename Real>
std::complex<Real> expectation(const typename FockWorkspace<Real>::Matrix& op,
                               const typename FockWorkspace<Real>::Vector& v) {
  return v.dot(op * v) / v.squaredNorm();
}

/// Real part of <u|v> for normalized u, v.
template <typename Real>
Real oracle_overlap(const typename FockWorkspace<Real>::Vector& u, const typename FockWorkspace<Real>::Vector& v) {
  if (u.size() != v.size()) throw MismatchError("oracle_overlap: dimension mismatch");
  return std::real(u.dot(v)) / (u.norm() * v.norm());
}

template <typename Real>
Real oracle_occupation(const FockWorkspace<Real>& ws, const typename FockWorkspace<Real>::Vector& v) {
  return std::real(expectation<Real>(ws.number_big(), v));
}

template <typename Real>
Variances<Real> oracle_variances(const FockWorkspace<Real>& ws, const typename FockWorkspace<Real>::Vector& v) {
  using Scalar = typename FockWorkspace<Real>::Scalar;
  using Matrix = typename FockWorkspace<Real>::Matrix;
  auto variance = [&v](const Matrix& q) {
    const Real mean = std::real(expectation<Real>(q, v));
    return (q * v).squaredNorm() / v.squaredNorm() - mean * mean;
  };
  auto x_of = [](const Matrix& low, const Matrix& high) { return Matrix(Scalar(0.5) * (low + high)); };
  auto y_of = [](const Matrix& low, const Matrix& high) { return Matrix(Scalar(0, -0.5) * (low - high)); };
  return {variance(x_of(ws.a(), ws.a_dag())), variance(y_of(ws.a(), ws.a_dag())),
          variance(x_of(ws.at(), ws.at_dag())), variance(y_of(ws.at(), ws.at_dag()))};
}

/// j = <(N_A - N_Ã)/2>, m = <J3 - 1/2>.
template <typename Real>
QuantumNumbers<Real> oracle_quantum_numbers(const FockWorkspace<Real>& ws,
                                            const typename FockWorkspace<Real>::Vector& v) {
  using Scalar = typename FockWorkspace<Real>::Scalar;
  using Matrix = typename FockWorkspace<Real>::Matrix;
  const Matrix j_op = Scalar(0.5) * (ws.number_big() - ws.number_tilde());
  const Matrix m_op = ws.j3() - Scalar(0.5) * ws.identity();
  return {std::real(expectation<Real>(j_op, v)), std::real(expectation<Real>(m_op, v))};
}

/// <S_A(Theta)>. At Theta == 0 the singular A^dagger A term is dropped, which
/// is exact only when A v = 0.
template <typename Real>
Real oracle_entropy(const FockWorkspace<Real>& ws, const typename FockWorkspace<Real>::Vector& v,
                    Real theta_eff) {
  if (theta_eff != Real(0)) return std::real(expectation<Real>(ws.entropy_operator(theta_eff), v));
  if ((ws.big_a() * v).norm() > Real(1e-12) * v.norm()) {
    throw DegenerateError("oracle_entropy: Theta = 0 but the vector is not annihilated by A");
  }
  return Real(0);
}

// --- identity checks --------------------------------------------------------

template <typename Real = double>
struct HoleResiduals {
  Real create_a;   // |(A^dagger / cosh - Ã / sinh) v| on the interior
  Real create_at;  // |(Ã^dagger / cosh - A / sinh) v| on the interior
};

template <typename Real>
HoleResiduals<Real> check_hole_relations(const FockWorkspace<Real>& ws,
                                         const typename FockWorkspace<Real>::Vector& v, Real theta_eff) {
  using Scalar = typename FockWorkspace<Real>::Scalar;
  using Matrix = typename FockWorkspace<Real>::Matrix;
  if (std::abs(theta_eff) < Real(ws.budget().degenerate_gap)) {
    throw DegenerateError("check_hole_relations: |Theta| below the degenerate gap");
  }
  const Scalar c(Real(1) / std::cosh(theta_eff));
  const Scalar s(Real(1) / std::sinh(theta_eff));
  const Matrix lhs_a = c * ws.big_a_dag() - s * ws.big_at();
  const Matrix lhs_at = c * ws.big_at_dag() - s * ws.big_a();
  return {ws.project_interior(lhs_a * v).norm(), ws.project_interior(lhs_at * v).norm()};
}

/// |exp(-i G(theta))|0,0> - S_a(theta) S_ã(-theta)|0,0>| on the dim window.
/// Both sides are computed in a padded space whose extra levels absorb the
/// spread of the single-mode squeezed intermediate state.
template <typename Real>
Real check_squeeze_factorization(const FockWorkspace<Real>& ws, Real theta) {
  using Scalar = typename FockWorkspace<Real>::Scalar;
  using Matrix = typename FockWorkspace<Real>::Matrix;
  using Vector = typename FockWorkspace<Real>::Vector;
  if (theta == Real(0)) return Real(0);
  const Real lambda = std::tanh(std::abs(theta));
  const auto needed = static_cast<Eigen::Index>(
      std::ceil(std::log(ws.budget().squeeze_headroom) / std::log(double(lambda))));
  const Eigen::Index padded_dim = std::max(ws.dim(), needed);
  if (padded_dim > 4 * ws.dim()) {
    throw BudgetError("check_squeeze_factorization: theta too large for dim " + std::to_string(ws.dim()));
  }
  const FockWorkspace<Real> padded(padded_dim, ws.omega(), ws.gamma(), ws.budget());

  const Matrix g = Scalar(0, -1) * padded.g_generator(theta);
  const Vector lhs = expm_action(g, padded.vacuum());
  const Vector rhs = expm_action(padded.squeeze_a_exponent(theta),
                                 expm_action(padded.squeeze_at_exponent(-theta), padded.vacuum()));

  Real sq = Real(0);
  for (Eigen::Index n_a = 0; n_a < ws.dim(); ++n_a) {
    for (Eigen::Index n_at = 0; n_at < ws.dim(); ++n_at) {
      const Eigen::Index i = padded.index(n_a, n_at);
      sq += std::norm(lhs[i] - rhs[i]);
    }
  }
  return std::sqrt(sq);
}

/// Central-difference check of d/dt |0(t)> = -(1/2)(dS/dt)|0(t)> on the
/// interior, at Theta(t) = gamma t - theta.
template <typename Real>
Real check_entropy_flow(const FockWorkspace<Real>& ws, Real theta, Real gamma, Real t, Real dt) {
  using Scalar = typename FockWorkspace<Real>::Scalar;
  using Vector = typename FockWorkspace<Real>::Vector;
  const Real theta_eff = gamma * t - theta;
  if (std::abs(theta_eff) < Real(ws.budget().degenerate_gap)) {
    throw DegenerateError("check_entropy_flow: |Theta| below the degenerate gap");
  }
  if (!(dt > Real(0))) throw DomainError("check_entropy_flow: dt must be > 0");
  const Vector now = memory_vector_at(ws, theta_eff);
  const Vector ahead = memory_vector_at(ws, theta_eff + gamma * dt);
  const Vector behind = memory_vector_at(ws, theta_eff - gamma * dt);
  const Vector derivative = (ahead - behind) / Scalar(2 * dt);
  const Vector flow = Scalar(0.5) * (ws.entropy_rate_operator(theta_eff, gamma) * now);
  return ws.project_interior(derivative + flow).norm();
}

template <typename Real = double>
struct AlgebraResiduals {
  Real ccr_a = 0;           // [a, a^dagger] - 1, interior
  Real ccr_at = 0;          // [ã, ã^dagger] - 1, interior
  Real ccr_big_a = 0;       // [A, A^dagger] - 1, interior
  Real ccr_big_at = 0;      // [Ã, Ã^dagger] - 1, interior
  Real cross = 0;           // [A, Ã^dagger] and [A, Ã], everywhere
  Real jplus_jminus = 0;    // [J+, J-] + 2 J3, interior
  Real j3_jplus = 0;        // [J3, J+] - J+, interior
  Real j3_jminus = 0;       // [J3, J-] + J-, interior
  Real casimir = 0;         // C^2 - (N_A - N_Ã)^2 / 4, interior
  Real h0_hint = 0;         // [H0, H_I], everywhere
  Real sector_closure = 0;  // off-diagonal part of H_I acting on diagonal states
  Real h0_on_sector = 0;    // H0 acting on diagonal states

  Real worst() const {
    return std::max({ccr_a, ccr_at, ccr_big_a, ccr_big_at, cross, jplus_jminus, j3_jplus, j3_jminus,
                     casimir, h0_hint, sector_closure, h0_on_sector});
  }
};

template <typename Real>
AlgebraResiduals<Real> check_algebra(const FockWorkspace<Real>& ws) {
  using Scalar = typename FockWorkspace<Real>::Scalar;
  using Matrix = typename FockWorkspace<Real>::Matrix;
  auto comm = [](const Matrix& x, const Matrix& y) { return Matrix(Matrix(x * y) - Matrix(y * x)); };
  const Matrix& id = ws.identity();
  AlgebraResiduals<Real> r;
  r.ccr_a = ws.max_abs(Matrix(comm(ws.a(), ws.a_dag()) - id));
  r.ccr_at = ws.max_abs(Matrix(comm(ws.at(), ws.at_dag()) - id));
  r.ccr_big_a = ws.max_abs(Matrix(comm(ws.big_a(), ws.big_a_dag()) - id));
  r.ccr_big_at = ws.max_abs(Matrix(comm(ws.big_at(), ws.big_at_dag()) - id));
  r.cross = std::max(ws.max_abs(comm(ws.big_a(), ws.big_at_dag()), false),
                     ws.max_abs(comm(ws.big_a(), ws.big_at()), false));
  r.jplus_jminus = ws.max_abs(Matrix(comm(ws.j_plus(), ws.j_minus()) + Scalar(2) * ws.j3()));
  r.j3_jplus = ws.max_abs(Matrix(comm(ws.j3(), ws.j_plus()) - ws.j_plus()));
  r.j3_jminus = ws.max_abs(Matrix(comm(ws.j3(), ws.j_minus()) + ws.j_minus()));
  const Matrix diff = ws.number_big() - ws.number_tilde();
  r.casimir = ws.max_abs(Matrix(ws.casimir_sq() - Scalar(0.25) * Matrix(diff * diff)));
  r.h0_hint = ws.max_abs(comm(ws.h0(), ws.h_int()), false);

  Real leak = Real(0);
  Real h0_sector = Real(0);
  for (Eigen::Index n = 0; n < ws.dim(); ++n) {
    const Eigen::Index col = ws.index(n, n);
    for (typename Matrix::InnerIterator it(ws.h_int(), col); it; ++it) {
      if (ws.n_big(it.row()) != ws.n_tilde(it.row())) leak = std::max(leak, std::abs(it.value()));
    }
    for (typename Matrix::InnerIterator it(ws.h0(), col); it; ++it) {
      h0_sector = std::max(h0_sector, std::abs(it.value()));
    }
  }
  r.sector_closure = leak;
  r.h0_on_sector = h0_sector;
  return r;
}

}  // namespace qmem
