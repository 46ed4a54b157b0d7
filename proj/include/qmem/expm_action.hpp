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

// Action of a matrix exponential on a vector, exp(M) v, without forming
// exp(M). Truncated Taylor series with scaling: M is split into s pieces of
// 1-norm at most one, and each piece is summed until two successive terms
// fall below tolerance relative to the partial sum.

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "qmem/errors.hpp"

namespace qmem {

struct ExpmActionOptions {
  double tolerance = 1e-16;
  int max_terms = 100;
};

/// max_j sum_i |M(i, j)|
template <typename Scalar, int Options, typename StorageIndex>
double one_norm(const Eigen::SparseMatrix<Scalar, Options, StorageIndex>& m) {
  Eigen::VectorXd col_sums = Eigen::VectorXd::Zero(m.cols());
  for (Eigen::Index outer = 0; outer < m.outerSize(); ++outer) {
    for (typename Eigen::SparseMatrix<Scalar, Options, StorageIndex>::InnerIterator it(m, outer); it; ++it) {
      col_sums[it.col()] += std::abs(it.value());
    }
  }
  return col_sums.size() == 0 ? 0.0 : col_sums.maxCoeff();
}

/// Returns exp(M) v. `observer`, when set, is called with the running vector
/// after every scaling substep (used for truncation-boundary monitoring).
template <typename SparseMatrix, typename Vector>
Vector expm_action(const SparseMatrix& m, const Vector& v, const ExpmActionOptions& options = {},
                   const std::function<void(const Vector&)>& observer = {}) {
  const double norm = one_norm(m);
  const int steps = std::max(1, static_cast<int>(std::ceil(norm)));
  using Scalar = typename Vector::Scalar;
  const Scalar inv_steps = Scalar(1.0 / steps);

  Vector current = v;
  Vector term(v.size());
  for (int step = 0; step < steps; ++step) {
    Vector sum = current;
    term = current;
    int small_terms = 0;
    int k = 1;
    for (; k <= options.max_terms; ++k) {
      term = (m * term) * (inv_steps / Scalar(static_cast<double>(k)));
      sum += term;
      if (term.norm() <= options.tolerance * sum.norm()) {
        if (++small_terms == 2) break;
      } else {
        small_terms = 0;
      }
    }
    if (k > options.max_terms) {
      throw ConvergenceError("expm_action: Taylor series did not converge within " +
                             std::to_string(options.max_terms) + " terms");
    }
    current = std::move(sum);
    if (observer) observer(current);
  }
  return current;
}

}  // namespace qmem
