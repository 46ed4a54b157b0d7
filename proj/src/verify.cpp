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

#include "qmem/verify.hpp"

#include <array>
#include <cmath>
#include <cstdio>

#include "qmem/fock.hpp"
#include "qmem/parallel.hpp"
#include "qmem/su11.hpp"
#include "qmem/thermo.hpp"

namespace qmem {

namespace {

using Ws = FockWorkspace<double>;
using State = MemoryState<double>;

constexpr std::array<double, 6> kThetas{0.1, 0.3, 0.5, 0.8, 1.0, 1.2};
constexpr std::array<double, 2> kGammas{0.25, 1.0};
constexpr std::array<double, 3> kSqueezeThetas{0.25, 0.5, 1.0};
constexpr std::array<double, 3> kFlowThetas{0.1, 0.5, 1.0};

std::string label(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buffer[96];
  std::snprintf(buffer, sizeof buffer, format, a, b, c);
  return buffer;
}

ResidualRow compare(std::string suite, std::string case_label, std::string quantity, double expected,
                    double observed, double tolerance) {
  const double residual = std::abs(observed - expected);
  return {std::move(suite), std::move(case_label), std::move(quantity), expected, observed, residual, tolerance,
          residual <= tolerance};
}

State single_mode(double gamma, double theta, double t) {
  VectorX<double> th(1);
  th[0] = theta;
  return State(ModeSet<double>::uniform(1, 1.0, gamma), Code<double>(th), t);
}

std::vector<ResidualRow> observables_case(const Ws& ws, double theta, double gamma, const char* t_name, double t,
                                          double scale) {
  const std::string suite = "observables";
  const std::string where = label("theta=%g gamma=%g t=", theta, gamma) + t_name;
  const State state = single_mode(gamma, theta, t);
  const State origin = single_mode(gamma, theta, 0.0);
  const double theta_eff = effective_theta(state, 0);

  const Ws::Vector v = memory_vector_at(ws, theta_eff);
  const Ws::Vector v0 = memory_vector(ws, theta);
  const auto var = variances(state, 0);
  const auto var_o = oracle_variances(ws, v);
  const auto qn = quantum_numbers(state, 0);
  const auto qn_o = oracle_quantum_numbers(ws, v);
  const double tol = kObservableTolerance * scale;

  std::vector<ResidualRow> rows{
      compare(suite, where, "occupation", occupation(state, 0), oracle_occupation(ws, v), tol),
      compare(suite, where, "vacuum_overlap", overlap(state, empty_vacuum(state.modes())),
              oracle_overlap<double>(v, ws.vacuum()), tol),
      compare(suite, where, "pair_overlap", overlap(state, origin), oracle_overlap<double>(v, v0), tol),
      compare(suite, where, "dx2", var.dx2, var_o.dx2, tol),
      compare(suite, where, "dy2", var.dy2, var_o.dy2, tol),
      compare(suite, where, "dxt2", var.dxt2, var_o.dxt2, tol),
      compare(suite, where, "dyt2", var.dyt2, var_o.dyt2, tol),
      compare(suite, where, "entropy", mode_entropy(theta_eff), oracle_entropy(ws, v, theta_eff), tol),
      compare(suite, where, "j", qn.j, qn_o.j, tol),
      compare(suite, where, "m", qn.m, qn_o.m, tol),
  };

  // The truncated dynamics is only trusted while the state stays off the top level.
  const double lambda = std::tanh(std::max(theta, std::abs(theta_eff)));
  if (t > 0.0 && std::pow(lambda, double(ws.dim())) <= ws.budget().propagation) {
    const Ws::Vector evolved = evolve_vector(ws, v0, t);
    const double distance = (evolved - v).norm();
    rows.push_back({suite, where, "evolved_state", 0.0, distance, distance, tol, distance <= tol});
  }
  return rows;
}

}  // namespace

std::vector<ResidualRow> verify_observables(const VerifyOptions& options) {
  struct Case {
    double theta, gamma;
    const char* t_name;
    double t;
  };
  std::vector<Case> cases;
  for (double gamma : kGammas) {
    for (double theta : kThetas) {
      const double tau = theta / gamma;
      cases.push_back({theta, gamma, "0", 0.0});
      cases.push_back({theta, gamma, "tau/2", tau / 2});
      cases.push_back({theta, gamma, "tau", tau});
      cases.push_back({theta, gamma, "2tau", 2 * tau});
    }
  }
  const Ws ws_slow(options.dim, 1.0, kGammas[0]);
  const Ws ws_fast(options.dim, 1.0, kGammas[1]);
  std::vector<std::vector<ResidualRow>> per_case(cases.size());
  parallel_for(cases.size(), options.threads, [&](std::size_t i) {
    const auto& c = cases[i];
    per_case[i] = observables_case(c.gamma == kGammas[0] ? ws_slow : ws_fast, c.theta, c.gamma, c.t_name, c.t,
                                   options.tolerance_scale);
  });
  std::vector<ResidualRow> rows;
  for (auto& block : per_case) rows.insert(rows.end(), block.begin(), block.end());
  return rows;
}

std::vector<ResidualRow> verify_algebra(const VerifyOptions& options) {
  const Ws ws(options.algebra_dim, 1.0, 1.0);
  const auto r = check_algebra(ws);
  const std::string where = "dim=" + std::to_string(options.algebra_dim);
  const double tol = kAlgebraTolerance * options.tolerance_scale;
  auto row = [&](const char* quantity, double residual) {
    return ResidualRow{"algebra", where, quantity, 0.0, residual, residual, tol, residual < tol};
  };
  return {row("ccr_a", r.ccr_a),
          row("ccr_at", r.ccr_at),
          row("ccr_big_a", r.ccr_big_a),
          row("ccr_big_at", r.ccr_big_at),
          row("cross_commutators", r.cross),
          row("jplus_jminus", r.jplus_jminus),
          row("j3_jplus", r.j3_jplus),
          row("j3_jminus", r.j3_jminus),
          row("casimir", r.casimir),
          row("h0_hint", r.h0_hint),
          row("sector_closure", r.sector_closure),
          row("h0_on_sector", r.h0_on_sector)};
}

std::vector<ResidualRow> verify_squeezing(const VerifyOptions& options) {
  const Ws ws(options.dim, 1.0, 1.0);
  std::vector<ResidualRow> rows(kSqueezeThetas.size());
  parallel_for(kSqueezeThetas.size(), options.threads, [&](std::size_t i) {
    const double theta = kSqueezeThetas[i];
    const double residual = check_squeeze_factorization(ws, theta);
    const double tol = kSqueezeTolerance * options.tolerance_scale;
    rows[i] = {"squeezing", label("theta=%g", theta), "state_residual", 0.0, residual, residual, tol,
               residual <= tol};
  });
  return rows;
}

std::vector<ResidualRow> verify_entropy_flow(const VerifyOptions& options) {
  const double gamma = 1.0;
  const Ws ws(options.dim, 1.0, gamma);
  const double tol = kEntropyFlowTolerance * options.tolerance_scale;
  std::vector<ResidualRow> rows;
  for (double theta_eff : kFlowThetas) {
    const std::string where = label("Theta=%g", theta_eff);
    // Theta(t) = gamma t - theta evaluated at t = 0 with theta = -Theta.
    const double coarse = check_entropy_flow(ws, -theta_eff, gamma, 0.0, kEntropyFlowStep);
    const double fine = check_entropy_flow(ws, -theta_eff, gamma, 0.0, kEntropyFlowStep / 2);
    rows.push_back({"entropy_flow", where, "residual_dt", 0.0, coarse, coarse, tol, coarse <= tol});
    rows.push_back({"entropy_flow", where, "residual_dt_half", 0.0, fine, fine, tol, fine <= tol});
    const double ratio = coarse / fine;
    rows.push_back({"entropy_flow", where, "halving_ratio", 4.0, ratio, std::abs(ratio - 4.0), 0.5,
                    ratio >= 3.5 && ratio <= 4.5});
  }
  return rows;
}

std::vector<ResidualRow> verify_hole_relations(const VerifyOptions& options) {
  const Ws ws(options.dim, 1.0, 1.0);
  std::vector<double> grid;
  for (int i = 0; i <= 11; ++i) {
    const double magnitude = 0.1 + 0.1 * i;
    grid.push_back(-magnitude);
    grid.push_back(magnitude);
  }
  const double tol = kHoleTolerance * options.tolerance_scale;
  std::vector<ResidualRow> rows;
  for (double theta_eff : grid) {
    const auto r = check_hole_relations(ws, memory_vector_at(ws, theta_eff), theta_eff);
    const std::string where = label("Theta=%g", theta_eff);
    rows.push_back({"hole_relations", where, "create_a", 0.0, r.create_a, r.create_a, tol, r.create_a <= tol});
    rows.push_back({"hole_relations", where, "create_at", 0.0, r.create_at, r.create_at, tol, r.create_at <= tol});
  }
  return rows;
}

std::vector<ResidualRow> verify_all(const VerifyOptions& options) {
  std::vector<ResidualRow> rows;
  for (auto* suite : {&verify_observables, &verify_algebra, &verify_squeezing, &verify_entropy_flow,
                      &verify_hole_relations}) {
    auto block = suite(options);
    rows.insert(rows.end(), block.begin(), block.end());
  }
  return rows;
}

}  // namespace qmem
