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

// Experiment descriptions and their artifacts. Running an experiment is a
// pure function of its config: the result is a list of named file contents
// (CSV tables and a JSON summary) that the CLI writes out.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "qmem/capacity.hpp"

namespace qmem {

inline constexpr std::string_view kVersion = "0.1.0";
inline constexpr int kArtifactSchemaVersion = 1;

/// Invalid experiment description (unknown key, wrong type, bad value).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind { fidelity_matrix, capacity_sweep, forgetting_curve, association_graph, thermo_trace };

std::string_view to_string(ExperimentKind kind);
std::optional<ExperimentKind> parse_kind(std::string_view text);

struct TimeGrid {
  double start = 0.0;
  double stop = 1.0;
  std::size_t points = 101;

  std::vector<double> values() const;
};

struct CodeSpec {
  enum class Source { explicit_list, sampled, bose, registry };
  Source source = Source::explicit_list;
  std::vector<RegistryEntry> entries;  // explicit_list
  std::size_t count = 0;               // sampled
  double theta_min = 0.0;
  double theta_max = 2.0;
  std::uint64_t seed = 0;
  double beta = 1.0;  // bose
  std::filesystem::path registry_path;
};

struct CapacitySweepSpec {
  std::vector<std::size_t> mode_counts{1, 2, 4, 8, 16};
  std::size_t candidates = 200;
  double theta_min = 0.0;
  double theta_max = 2.0;
  std::uint64_t seed = 0;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::forgetting_curve;
  Modes modes;
  bool uniform_modes = false;  // modes given as {count, omega, gamma}
  CodeSpec codes;
  TimeGrid time_grid;
  double eval_time = 0.0;
  double epsilon = 0.05;
  double threshold = 0.5;
  TimeMode time_mode = TimeMode::common;
  CapacitySweepSpec capacity;
  std::string output_dir;

  /// Canonical JSON echo of the resolved config (embedded in every artifact).
  nlohmann::json echo() const;
};

/// Parses a config document; unknown keys are rejected at every level.
/// Relative registry paths resolve against `base_dir`.
ExperimentConfig parse_experiment_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Registry of the memories described by the config's code spec.
Registry build_registry(const ExperimentConfig& config);

struct Artifact {
  std::string name;
  std::string content;
};

std::vector<Artifact> run_experiment(const ExperimentConfig& config, unsigned threads = 1);

// --- formatting helpers shared with the CLI -------------------------------

/// Shortest round-trip decimal, '.' separator, independent of locale.
std::string format_number(double value);

/// RFC 4180 quoting with LF line endings; header row first.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  CsvTable& row(std::vector<std::string> cells);
  std::string str() const;

 private:
  std::size_t width_;
  std::string text_;
};

std::string dump_json(const nlohmann::json& doc);

}  // namespace qmem
