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

// Oracle verification grids: closed forms against the truncated Fock oracle.

#include <string>
#include <vector>

namespace qmem {

struct VerifyOptions {
  long dim = 64;          // oracle truncation for state-level checks
  long algebra_dim = 32;  // truncation for the operator-algebra checks
  unsigned threads = 1;
  double tolerance_scale = 1.0;  // multiplies every residual tolerance
};

struct ResidualRow {
  std::string suite;
  std::string label;
  std::string quantity;
  double expected;
  double observed;
  double residual;
  double tolerance;
  bool pass;
};

inline constexpr double kObservableTolerance = 1e-8;
inline constexpr double kAlgebraTolerance = 1e-12;
inline constexpr double kSqueezeTolerance = 1e-8;
inline constexpr double kEntropyFlowTolerance = 1e-6;
inline constexpr double kEntropyFlowStep = 1e-4;
inline constexpr double kHoleTolerance = 1e-8;

std::vector<ResidualRow> verify_observables(const VerifyOptions& options);
std::vector<ResidualRow> verify_algebra(const VerifyOptions& options);
std::vector<ResidualRow> verify_squeezing(const VerifyOptions& options);
std::vector<ResidualRow> verify_entropy_flow(const VerifyOptions& options);
std::vector<ResidualRow> verify_hole_relations(const VerifyOptions& options);

/// All of the above, in that order.
std::vector<ResidualRow> verify_all(const VerifyOptions& options);

}  // namespace qmem
