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

// Closed-form engine for coded memory states.
//
// A memory state over K modes is a product of two-mode squeezed vacua, one
// per mode pair (A_k, Ã_k). Everything observable is a function of the
// effective squeeze parameter
//
//     Theta_k(t) = gamma_k * t - theta_k,
//
// with state parameter tanh(Theta_k): at t = 0 it is -tanh(theta_k), and the
// damped evolution shifts Theta_k linearly in time. Units: hbar = k_B = 1.

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qmem/errors.hpp"

namespace qmem {

template <typename Real>
using VectorX = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

template <typename Real = double>
struct ModeParams {
  std::size_t index = 0;
  Real omega = Real(1);  // energy E_k (hbar = 1)
  Real gamma = Real(0);  // damping rate

  friend bool operator==(const ModeParams&, const ModeParams&) = default;
};

/// Per-mode frequencies and damping rates, stored column-wise so that
/// Theta(t) is a single vector expression. Mode indices are the positions.
template <typename Real = double>
class ModeSet {
 public:
  ModeSet() = default;

  ModeSet(VectorX<Real> omega, VectorX<Real> gamma)
      : omega_(std::move(omega)), gamma_(std::move(gamma)) {
    if (omega_.size() != gamma_.size()) {
      throw MismatchError("ModeSet: omega and gamma lengths differ");
    }
    for (Eigen::Index k = 0; k < omega_.size(); ++k) {
      if (!(omega_[k] > Real(0)) || !std::isfinite(double(omega_[k]))) {
        throw DomainError("ModeSet: omega must be finite and > 0 (mode " + std::to_string(k) + ")");
      }
      if (!(gamma_[k] >= Real(0)) || !std::isfinite(double(gamma_[k]))) {
        throw DomainError("ModeSet: gamma must be finite and >= 0 (mode " + std::to_string(k) + ")");
      }
    }
  }

  static ModeSet uniform(std::size_t count, Real omega, Real gamma) {
    const auto n = static_cast<Eigen::Index>(count);
    return ModeSet(VectorX<Real>::Constant(n, omega), VectorX<Real>::Constant(n, gamma));
  }

  /// Accepts modes in any order; indices must be exactly {0, ..., K-1}.
  static ModeSet from_params(std::span<const ModeParams<Real>> params) {
    const auto n = static_cast<Eigen::Index>(params.size());
    VectorX<Real> omega(n);
    VectorX<Real> gamma(n);
    std::vector<bool> seen(params.size(), false);
    for (const auto& p : params) {
      if (p.index >= params.size() || seen[p.index]) {
        throw MismatchError("ModeSet: mode indices must be unique and contiguous from 0");
      }
      seen[p.index] = true;
      omega[static_cast<Eigen::Index>(p.index)] = p.omega;
      gamma[static_cast<Eigen::Index>(p.index)] = p.gamma;
    }
    return ModeSet(std::move(omega), std::move(gamma));
  }

  std::size_t size() const { return static_cast<std::size_t>(omega_.size()); }
  const VectorX<Real>& omega() const { return omega_; }
  const VectorX<Real>& gamma() const { return gamma_; }

  ModeParams<Real> operator[](std::size_t k) const {
    check_index(k);
    const auto i = static_cast<Eigen::Index>(k);
    return {k, omega_[i], gamma_[i]};
  }

  std::vector<ModeParams<Real>> params() const {
    std::vector<ModeParams<Real>> out;
    out.reserve(size());
    for (std::size_t k = 0; k < size(); ++k) out.push_back((*this)[k]);
    return out;
  }

  void check_index(std::size_t k) const {
    if (k >= size()) {
      throw IndexError("mode index " + std::to_string(k) + " out of range for K = " +
                       std::to_string(size()));
    }
  }

  friend bool operator==(const ModeSet& a, const ModeSet& b) {
    return a.omega_.size() == b.omega_.size() && a.omega_ == b.omega_ && a.gamma_ == b.gamma_;
  }

 private:
  VectorX<Real> omega_;
  VectorX<Real> gamma_;
};

/// The memory code: one non-negative squeeze parameter per mode. The
/// condensate count of mode k is sinh^2(theta_k).
template <typename Real = double>
class Code {
 public:
  Code() = default;

  explicit Code(VectorX<Real> thetas) : thetas_(std::move(thetas)) {
    for (Eigen::Index k = 0; k < thetas_.size(); ++k) {
      if (!(thetas_[k] >= Real(0)) || !std::isfinite(double(thetas_[k]))) {
        throw DomainError("Code: theta must be finite and >= 0 (mode " + std::to_string(k) + ")");
      }
    }
  }

  static Code empty(std::size_t count) {
    return Code(VectorX<Real>::Zero(static_cast<Eigen::Index>(count)));
  }

  static Code from_counts(const VectorX<Real>& counts) {
    VectorX<Real> thetas(counts.size());
    for (Eigen::Index k = 0; k < counts.size(); ++k) {
      if (!(counts[k] >= Real(0))) throw DomainError("Code: condensate count must be >= 0");
      thetas[k] = std::asinh(std::sqrt(counts[k]));
    }
    return Code(std::move(thetas));
  }

  std::size_t size() const { return static_cast<std::size_t>(thetas_.size()); }
  const VectorX<Real>& thetas() const { return thetas_; }
  Real operator[](std::size_t k) const { return thetas_[static_cast<Eigen::Index>(k)]; }

  VectorX<Real> counts() const { return thetas_.array().sinh().square().matrix(); }

  friend bool operator==(const Code& a, const Code& b) {
    return a.thetas_.size() == b.thetas_.size() && a.thetas_ == b.thetas_;
  }

 private:
  VectorX<Real> thetas_;
};

/// A coded vacuum evolved to time t >= 0. Theta(t) is derived, never stored.
template <typename Real = double>
class MemoryState {
 public:
  MemoryState(ModeSet<Real> modes, Code<Real> code, Real time = Real(0))
      : modes_(std::move(modes)), code_(std::move(code)), time_(time) {
    if (modes_.size() != code_.size()) {
      throw MismatchError("MemoryState: code length " + std::to_string(code_.size()) +
                          " does not match mode count " + std::to_string(modes_.size()));
    }
    if (!(time_ >= Real(0)) || !std::isfinite(double(time_))) {
      throw DomainError("MemoryState: time must be finite and >= 0");
    }
  }

  const ModeSet<Real>& modes() const { return modes_; }
  const Code<Real>& code() const { return code_; }
  Real time() const { return time_; }
  std::size_t size() const { return modes_.size(); }

  friend bool operator==(const MemoryState& a, const MemoryState& b) {
    return a.time_ == b.time_ && a.modes_ == b.modes_ && a.code_ == b.code_;
  }

 private:
  ModeSet<Real> modes_;
  Code<Real> code_;
  Real time_;
};

template <typename Real = double>
struct QuantumNumbers {
  Real j = Real(0);
  Real m = Real(0);
};

/// Quadrature variances of a = X + iY and ã = X̃ + iỸ, with [X, Y] = i/2.
template <typename Real = double>
struct Variances {
  Real dx2;
  Real dy2;
  Real dxt2;
  Real dyt2;
};

// --- construction -----------------------------------------------------------

/// Squeeze parameter whose occupation sinh^2(theta) is the Bose factor
/// 1/(exp(beta*energy) - 1).
template <typename Real>
Real theta_from_beta(Real beta, Real energy) {
  if (!(beta > Real(0)) || !(energy > Real(0))) {
    throw DomainError("theta_from_beta: beta and energy must be > 0");
  }
  const Real occupation = Real(1) / std::expm1(beta * energy);
  return std::asinh(std::sqrt(occupation));
}

template <typename Real>
Code<Real> code_from_beta(const ModeSet<Real>& modes, Real beta) {
  VectorX<Real> thetas(static_cast<Eigen::Index>(modes.size()));
  for (Eigen::Index k = 0; k < thetas.size(); ++k) {
    thetas[k] = theta_from_beta(beta, modes.omega()[k]);
  }
  return Code<Real>(std::move(thetas));
}

/// The empty vacuum |0>_0 over the given modes, at t = 0.
template <typename Real>
MemoryState<Real> empty_vacuum(const ModeSet<Real>& modes) {
  return MemoryState<Real>(modes, Code<Real>::empty(modes.size()), Real(0));
}

// --- per-mode observables ---------------------------------------------------

template <typename Real>
VectorX<Real> effective_thetas(const MemoryState<Real>& state) {
  return state.modes().gamma() * state.time() - state.code().thetas();
}

template <typename Real>
Real effective_theta(const MemoryState<Real>& state, std::size_t kappa) {
  state.modes().check_index(kappa);
  const auto k = static_cast<Eigen::Index>(kappa);
  return state.modes().gamma()[k] * state.time() - state.code().thetas()[k];
}

/// <A_k^dagger A_k> = sinh^2(Theta_k(t)); the Ã occupation is identical.
template <typename Real>
Real occupation(const MemoryState<Real>& state, std::size_t kappa) {
  const Real s = std::sinh(effective_theta(state, kappa));
  return s * s;
}

template <typename Real>
VectorX<Real> occupations(const MemoryState<Real>& state) {
  return effective_thetas(state).array().sinh().square().matrix();
}

template <typename Real>
Variances<Real> variances(const MemoryState<Real>& state, std::size_t kappa) {
  const Real big = std::exp(Real(2) * effective_theta(state, kappa)) / Real(4);
  const Real small = std::exp(Real(-2) * effective_theta(state, kappa)) / Real(4);
  return {small, big, big, small};
}

/// SU(1,1) labels of mode k: j = (N_A - N_Ã)/2 is identically zero on memory
/// states, m = (N_A + N_Ã)/2 is the common occupation.
template <typename Real>
QuantumNumbers<Real> quantum_numbers(const MemoryState<Real>& state, std::size_t kappa) {
  return {Real(0), occupation(state, kappa)};
}

// --- dynamics ---------------------------------------------------------------

/// Closed-form evolution. Rejects dt < 0: there is no reverse evolution.
template <typename Real>
MemoryState<Real> evolve(const MemoryState<Real>& state, Real dt) {
  if (!(dt >= Real(0)) || !std::isfinite(double(dt))) {
    throw DomainError("evolve: dt must be finite and >= 0");
  }
  return MemoryState<Real>(state.modes(), state.code(), state.time() + dt);
}

/// Re-print a code: the clock restarts at 0 with the given thetas.
template <typename Real>
MemoryState<Real> refresh(const MemoryState<Real>& state, const Code<Real>& code) {
  return MemoryState<Real>(state.modes(), code, Real(0));
}

/// tau = max over decaying modes of theta_k / gamma_k; nullopt when no mode
/// decays (the state is never forgotten).
template <typename Real>
std::optional<Real> forgetting_time(const MemoryState<Real>& state) {
  std::optional<Real> tau;
  const auto& gamma = state.modes().gamma();
  const auto& thetas = state.code().thetas();
  for (Eigen::Index k = 0; k < gamma.size(); ++k) {
    if (gamma[k] > Real(0)) {
      const Real tk = thetas[k] / gamma[k];
      if (!tau || tk > *tau) tau = tk;
    }
  }
  return tau;
}

// --- overlaps ---------------------------------------------------------------

/// ln cosh(x) = |x| + ln(1 + e^{-2|x|}) - ln 2, finite for every finite x.
template <typename Real>
Real log_cosh(Real x) {
  const Real ax = std::abs(x);
  return ax + std::log1p(std::exp(Real(-2) * ax)) - std::log(Real(2));
}

/// ln <a|b> = -sum_k ln cosh(Theta_k^a - Theta_k^b). Both states must share
/// the same mode list.
template <typename Real>
Real log_overlap(const MemoryState<Real>& a, const MemoryState<Real>& b) {
  if (!(a.modes() == b.modes())) {
    throw MismatchError("log_overlap: states do not share a mode list");
  }
  // Theta^a - Theta^b regrouped so that equal times cancel exactly.
  const VectorX<Real> gap =
      (b.code().thetas() - a.code().thetas()) + a.modes().gamma() * (a.time() - b.time());
  // Neumaier-compensated sum keeps the product law accurate for large K.
  Real sum = Real(0);
  Real carry = Real(0);
  for (Eigen::Index k = 0; k < gap.size(); ++k) {
    const Real term = log_cosh(gap[k]);
    const Real next = sum + term;
    carry += std::abs(sum) >= std::abs(term) ? (sum - next) + term : (term - next) + sum;
    sum = next;
  }
  return -(sum + carry);
}

template <typename Real>
Real overlap(const MemoryState<Real>& a, const MemoryState<Real>& b) {
  return std::exp(log_overlap(a, b));
}

}  // namespace qmem
