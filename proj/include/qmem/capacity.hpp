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

// Memory-capacity laboratory: a registry of printed memories over a shared
// mode list, pairwise fidelities, greedy capacity packing, forgetting curves
// and association graphs.

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qmem/su11.hpp"

namespace qmem {

using Modes = ModeSet<double>;
using MemoryCode = Code<double>;
using State = MemoryState<double>;

// --- registry -----------------------------------------------------------------

class RegistryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
/// schema_version missing from the supported set.
class RegistryVersionError : public RegistryError {
 public:
  using RegistryError::RegistryError;
};
/// Not a registry document (bad JSON, wrong types, unknown or missing keys).
class RegistryFormatError : public RegistryError {
 public:
  using RegistryError::RegistryError;
};
/// A code whose length disagrees with the registry's mode list.
class RegistryLengthError : public RegistryError {
 public:
  using RegistryError::RegistryError;
};

class DuplicateIdError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RegistryEntry {
  std::string id;
  MemoryCode code;
  double printed_at = 0.0;

  friend bool operator==(const RegistryEntry&, const RegistryEntry&) = default;
};

/// Immutable collection of coded memories. Printing returns a new registry;
/// existing entries are never touched.
class Registry {
 public:
  static constexpr int kSchemaVersion = 1;

  Registry() = default;
  explicit Registry(Modes modes) : modes_(std::move(modes)) {}

  const Modes& modes() const { return modes_; }
  const std::vector<RegistryEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  bool contains(const std::string& id) const;
  const RegistryEntry& at(const std::string& id) const;

  /// Entry i's state at absolute time t with every memory's clock at t.
  State state(std::size_t i, double t) const;

  friend bool operator==(const Registry&, const Registry&) = default;

 private:
  friend Registry print_memory(const Registry&, std::string, MemoryCode, double);

  Modes modes_;
  std::vector<RegistryEntry> entries_;
};

/// Appends a memory. Throws DuplicateIdError / MismatchError.
Registry print_memory(const Registry& registry, std::string id, MemoryCode code, double printed_at = 0.0);

/// Code derived per mode from the Bose factor at inverse temperature beta.
Registry print_memory_from_beta(const Registry& registry, std::string id, double beta, double printed_at = 0.0);

std::string registry_to_string(const Registry& registry);
Registry registry_from_string(const std::string& text);
void save_registry(const Registry& registry, const std::filesystem::path& path);
Registry load_registry(const std::filesystem::path& path);

// --- fidelities ---------------------------------------------------------------

enum class TimeMode {
  common,     // every memory evolved to the same time t
  staggered,  // memory i evolved for t - printed_at_i
};

struct FidelityMatrix {
  std::vector<std::string> ids;
  Eigen::MatrixXd values;
};

FidelityMatrix fidelity_matrix(const Registry& registry, double t, TimeMode mode = TimeMode::common,
                               unsigned threads = 1);

struct RecallScore {
  std::string id;
  double fidelity;
};

/// Fidelity of a fresh probe code (printed now) against every memory evolved
/// to time t; sorted by decreasing fidelity, ties by id.
std::vector<RecallScore> recall(const Registry& registry, const MemoryCode& probe, double t);

// --- capacity -----------------------------------------------------------------

/// Uniform code in [theta_min, theta_max]^K for candidate `index`. Coordinates
/// are drawn in mode order from a per-candidate stream, so the K-mode code is
/// a prefix of the (K+1)-mode code for the same seed and index.
MemoryCode sample_code(std::size_t mode_count, double theta_min, double theta_max, std::uint64_t seed,
                       std::uint64_t index);

/// Indices of candidates accepted by sequential greedy packing: a candidate is
/// kept iff its overlap with every kept code is < epsilon (codes at t = 0).
std::vector<std::size_t> greedy_pack(const Modes& modes, std::span<const MemoryCode> candidates, double epsilon);

/// Log-overlap statistics of a random pair of uniform codes.
struct OverlapDistribution {
  double per_mode_mean_log_cosh;  // E[ln cosh delta], delta = difference of two uniforms
  double per_mode_var_log_cosh;
  double mean_log_overlap;  // -K * mean
  double std_log_overlap;   // sqrt(K * var)
};

OverlapDistribution uniform_code_overlap_distribution(std::size_t mode_count, double theta_min, double theta_max);

struct CapacityConfig {
  Modes modes;
  double theta_min = 0.0;
  double theta_max = 2.0;
  double epsilon = 0.05;
  std::size_t candidate_count = 200;
  std::uint64_t seed = 0;
};

struct CapacityReport {
  std::size_t accepted = 0;
  std::vector<std::size_t> accepted_indices;
  std::vector<std::size_t> acceptance_curve;  // accepted count after each candidate
  OverlapDistribution theory{};
};

CapacityReport capacity_estimate(const CapacityConfig& config);

// --- forgetting ---------------------------------------------------------------

struct ForgettingPoint {
  double t;
  double log_self_overlap;    // ln <0(t)|0(0)>
  double log_vacuum_overlap;  // ln <0(t)|0>_0
  double total_occupation;    // sum_k sinh^2 Theta_k(t)
};

struct ForgettingCurve {
  std::vector<ForgettingPoint> points;
  std::optional<double> tau;
};

ForgettingCurve forgetting_curve(const MemoryCode& code, const Modes& modes, std::span<const double> grid);

// --- association --------------------------------------------------------------

struct AssociationEdge {
  std::size_t i;
  std::size_t j;
  double weight;
};

struct AssociationGraph {
  std::vector<std::string> ids;
  std::vector<AssociationEdge> edges;                // i < j, row-major order
  std::vector<std::vector<std::size_t>> clusters;   // connected components incl. singletons
};

AssociationGraph association_graph(const FidelityMatrix& fidelities, double threshold);
AssociationGraph association_graph(const Registry& registry, double t, double threshold,
                                   TimeMode mode = TimeMode::common, unsigned threads = 1);

}  // namespace qmem
