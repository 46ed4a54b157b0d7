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

// Thermodynamic observables of memory states: entropy expectation, per-mode
// effective inverse temperature, free energy and its stationarity, and a
// discrete first-law ledger dE_A = (1/beta) dS_A along a trajectory.

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qmem/errors.hpp"
#include "qmem/su11.hpp"

namespace qmem {

/// s(Theta) = cosh^2 ln cosh^2 - sinh^2 ln sinh^2, with s(0) = 0. Evaluated as
/// ln cosh^2 + n ln(1 + 1/n), n = sinh^2, which stays finite for large Theta.
template <typename Real>
Real mode_entropy(Real theta_eff) {
  if (theta_eff == Real(0)) return Real(0);
  const Real sh = std::sinh(theta_eff);
  const Real u = Real(1) / (sh * sh);
  const Real tail = (u == Real(0)) ? Real(1) : std::log1p(u) / u;
  return Real(2) * log_cosh(theta_eff) + tail;
}

/// ds/dTheta = sinh(2 Theta) ln coth^2(Theta); zero at Theta = 0. With
/// q = exp(-2|Theta|): sign(Theta) (1 - q^2) (ln(1+q) - ln(1-q)) / q.
template <typename Real>
Real mode_entropy_slope(Real theta_eff) {
  if (theta_eff == Real(0)) return Real(0);
  const Real q = std::exp(Real(-2) * std::abs(theta_eff));
  const Real ratio = (q == Real(0)) ? Real(2) : (std::log1p(q) - std::log1p(-q)) / q;
  return std::copysign((Real(1) - q * q) * ratio, theta_eff);
}

template <typename Real = double>
struct EntropyValues {
  Real total = Real(0);
  VectorX<Real> per_mode;
};

template <typename Real>
EntropyValues<Real> entropy(const MemoryState<Real>& state) {
  const VectorX<Real> theta = effective_thetas(state);
  EntropyValues<Real> out;
  out.per_mode.resize(theta.size());
  for (Eigen::Index k = 0; k < theta.size(); ++k) out.per_mode[k] = mode_entropy(theta[k]);
  out.total = out.per_mode.sum();
  return out;
}

/// Bose factor 1/(exp(beta E) - 1).
template <typename Real>
Real bose_occupation(Real beta, Real energy) {
  return Real(1) / std::expm1(beta * energy);
}

/// beta_k = -ln tanh^2(Theta_k) / E_k. Returns +inf when Theta_k = 0 (empty
/// mode, zero temperature).
template <typename Real>
Real effective_beta(const MemoryState<Real>& state, std::size_t kappa) {
  const Real theta_eff = effective_theta(state, kappa);
  if (theta_eff == Real(0)) return std::numeric_limits<Real>::infinity();
  const Real t = std::tanh(theta_eff);
  return -std::log(t * t) / state.modes().omega()[static_cast<Eigen::Index>(kappa)];
}

/// F_A = sum_k E_k sinh^2 Theta_k - S / beta.
template <typename Real>
Real free_energy(const MemoryState<Real>& state, Real beta) {
  if (!(beta > Real(0))) throw DomainError("free_energy: beta must be > 0");
  const Real energy = state.modes().omega().dot(occupations(state));
  return energy - entropy(state).total / beta;
}

/// dF_A/dTheta_k = E_k sinh(2 Theta_k) - (1/beta) ds_k/dTheta_k, per mode.
template <typename Real>
VectorX<Real> stationarity_residual(const MemoryState<Real>& state, Real beta) {
  if (!(beta > Real(0))) throw DomainError("stationarity_residual: beta must be > 0");
  const VectorX<Real> theta = effective_thetas(state);
  VectorX<Real> grad(theta.size());
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    grad[k] = state.modes().omega()[k] * std::sinh(Real(2) * theta[k]) - mode_entropy_slope(theta[k]) / beta;
  }
  return grad;
}

/// Least-squares single beta for beta E_k = -ln tanh^2 Theta_k over the modes
/// with Theta_k != 0. `rms_residual` is the RMS misfit in units of beta E.
template <typename Real = double>
struct BetaFit {
  Real beta;
  Real rms_residual;
  std::size_t modes_used;
};

template <typename Real>
std::optional<BetaFit<Real>> fit_global_beta(const MemoryState<Real>& state) {
  const VectorX<Real> theta = effective_thetas(state);
  Real num = Real(0);
  Real den = Real(0);
  std::size_t used = 0;
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    if (theta[k] == Real(0)) continue;
    const Real e = state.modes().omega()[k];
    const Real t = std::tanh(theta[k]);
    num += e * -std::log(t * t);
    den += e * e;
    ++used;
  }
  if (used == 0) return std::nullopt;
  const Real beta = num / den;
  Real sq = Real(0);
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    if (theta[k] == Real(0)) continue;
    const Real t = std::tanh(theta[k]);
    const Real miss = beta * state.modes().omega()[k] + std::log(t * t);
    sq += miss * miss;
  }
  return BetaFit<Real>{beta, std::sqrt(sq / Real(used)), used};
}

template <typename Real = double>
struct ThermoSnapshot {
  Real time;
  VectorX<Real> entropy_per_mode;
  Real entropy_total;
  Real energy;
  VectorX<Real> beta_per_mode;
  std::optional<BetaFit<Real>> global_beta;
};

template <typename Real>
ThermoSnapshot<Real> thermo_snapshot(const MemoryState<Real>& state) {
  const auto s = entropy(state);
  VectorX<Real> betas(static_cast<Eigen::Index>(state.size()));
  for (std::size_t k = 0; k < state.size(); ++k) betas[static_cast<Eigen::Index>(k)] = effective_beta(state, k);
  return {state.time(), s.per_mode, s.total, state.modes().omega().dot(occupations(state)), betas,
          fit_global_beta(state)};
}

namespace detail {

template <typename Real>
void check_grid(std::span<const Real> grid, const char* what) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= Real(0)) || !std::isfinite(double(grid[i]))) {
      throw DomainError(std::string(what) + ": grid times must be finite and >= 0");
    }
    if (i > 0 && !(grid[i] > grid[i - 1])) {
      throw DomainError(std::string(what) + ": grid must be strictly increasing");
    }
  }
}

}  // namespace detail

/// Total entropy at every grid time, for the state's code and modes.
template <typename Real>
std::vector<Real> entropy_trace(const MemoryState<Real>& state, std::span<const Real> grid) {
  detail::check_grid(grid, "entropy_trace");
  std::vector<Real> out;
  out.reserve(grid.size());
  for (Real t : grid) out.push_back(entropy(MemoryState<Real>(state.modes(), state.code(), t)).total);
  return out;
}

template <typename Real = double>
struct FirstLawStep {
  Real t_begin;
  Real t_end;
  Real delta_energy;
  Real delta_entropy;
  VectorX<Real> beta_mid;  // per mode, at the step midpoint
  Real heat;               // sum_k delta s_k / beta_k(mid)
  Real residual;           // delta_energy - heat
  bool flagged;            // some decaying mode crosses Theta = 0 in this step
};

template <typename Real = double>
struct FirstLawLedger {
  std::vector<Real> times;
  std::vector<FirstLawStep<Real>> steps;

  /// sum of |residual| over unflagged steps.
  Real total_abs_residual() const {
    Real sum = Real(0);
    for (const auto& s : steps) {
      if (!s.flagged) sum += std::abs(s.residual);
    }
    return sum;
  }
};

/// Per-mode ledger summed over modes. Steps where a decaying mode passes
/// through Theta = 0 are flagged and carry NaN heat/residual.
template <typename Real>
FirstLawLedger<Real> first_law_ledger(const MemoryState<Real>& state, std::span<const Real> grid) {
  detail::check_grid(grid, "first_law_ledger");
  const auto& modes = state.modes();
  const auto& code = state.code();
  FirstLawLedger<Real> ledger;
  ledger.times.assign(grid.begin(), grid.end());
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const MemoryState<Real> s0(modes, code, grid[i - 1]);
    const MemoryState<Real> s1(modes, code, grid[i]);
    const MemoryState<Real> mid(modes, code, (grid[i - 1] + grid[i]) / Real(2));
    const VectorX<Real> th0 = effective_thetas(s0);
    const VectorX<Real> th1 = effective_thetas(s1);

    FirstLawStep<Real> step{grid[i - 1], grid[i], Real(0), Real(0), VectorX<Real>(th0.size()), Real(0),
                            Real(0), false};
    for (Eigen::Index k = 0; k < th0.size(); ++k) {
      const Real e = modes.omega()[k];
      const Real ds = mode_entropy(th1[k]) - mode_entropy(th0[k]);
      step.delta_energy += e * (std::sinh(th1[k]) * std::sinh(th1[k]) - std::sinh(th0[k]) * std::sinh(th0[k]));
      step.delta_entropy += ds;
      step.beta_mid[k] = effective_beta(mid, static_cast<std::size_t>(k));
      if (modes.gamma()[k] > Real(0) && (th0[k] * th1[k] <= Real(0))) {
        step.flagged = true;
      } else if (ds != Real(0)) {
        step.heat += ds / step.beta_mid[k];
      }
    }
    if (step.flagged) {
      step.heat = std::numeric_limits<Real>::quiet_NaN();
      step.residual = std::numeric_limits<Real>::quiet_NaN();
    } else {
      step.residual = step.delta_energy - step.heat;
    }
    ledger.steps.push_back(std::move(step));
  }
  return ledger;
}

}  // namespace qmem
