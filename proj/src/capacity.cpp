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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "qmem/capacity.hpp"
#include "qmem/parallel.hpp"

namespace qmem {

FidelityMatrix fidelity_matrix(const Registry& registry, double t, TimeMode mode, unsigned threads) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("fidelity_matrix: t must be finite and >= 0");
  const std::size_t n = registry.size();
  std::vector<State> states;
  states.reserve(n);
  FidelityMatrix out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& entry = registry.entries()[i];
    double elapsed = t;
    if (mode == TimeMode::staggered) {
      elapsed = t - entry.printed_at;
      if (elapsed < 0.0) {
        throw DomainError("fidelity_matrix: entry '" + entry.id + "' is printed after t");
      }
    }
    states.push_back(registry.state(i, elapsed));
    out.ids.push_back(entry.id);
  }
  const auto count = static_cast<Eigen::Index>(n);
  out.values = Eigen::MatrixXd::Identity(count, count);
  parallel_for(n, threads, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double f = overlap(states[i], states[j]);
      out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = f;
      out.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = f;
    }
  });
  return out;
}

std::vector<RecallScore> recall(const Registry& registry, const MemoryCode& probe, double t) {
  const State cue(registry.modes(), probe, 0.0);
  std::vector<RecallScore> scores;
  for (std::size_t i = 0; i < registry.size(); ++i) {
    scores.push_back({registry.entries()[i].id, overlap(registry.state(i, t), cue)});
  }
  std::stable_sort(scores.begin(), scores.end(), [](const RecallScore& a, const RecallScore& b) {
    return a.fidelity != b.fidelity ? a.fidelity > b.fidelity : a.id < b.id;
  });
  return scores;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

void check_range(double theta_min, double theta_max) {
  if (!(theta_min >= 0.0) || !(theta_max > theta_min) || !std::isfinite(theta_max)) {
    throw DomainError("theta range must satisfy 0 <= theta_min < theta_max (finite)");
  }
}

}  // namespace

MemoryCode sample_code(std::size_t mode_count, double theta_min, double theta_max, std::uint64_t seed,
                       std::uint64_t index) {
  check_range(theta_min, theta_max);
  std::mt19937_64 engine(splitmix64(seed ^ splitmix64(index)));
  VectorX<double> thetas(static_cast<Eigen::Index>(mode_count));
  for (Eigen::Index k = 0; k < thetas.size(); ++k) {
    // 53-bit mantissa mapping; std::uniform_real_distribution is not portable bit-for-bit.
    const double u = static_cast<double>(engine() >> 11) * 0x1.0p-53;
    thetas[k] = theta_min + u * (theta_max - theta_min);
  }
  return MemoryCode(std::move(thetas));
}

std::vector<std::size_t> greedy_pack(const Modes& modes, std::span<const MemoryCode> candidates, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("greedy_pack: epsilon must lie in (0, 1)");
  const double log_epsilon = std::log(epsilon);
  std::vector<State> kept;
  std::vector<std::size_t> indices;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const State candidate(modes, candidates[i], 0.0);
    const bool distinct = std::all_of(kept.begin(), kept.end(), [&](const State& other) {
      return log_overlap(candidate, other) < log_epsilon;
    });
    if (distinct) {
      kept.push_back(candidate);
      indices.push_back(i);
    }
  }
  return indices;
}

OverlapDistribution uniform_code_overlap_distribution(std::size_t mode_count, double theta_min, double theta_max) {
  check_range(theta_min, theta_max);
  // delta = difference of two uniforms on an interval of width w has density
  // (w - |delta|) / w^2 on [-w, w]; integrate the even integrand over [0, w].
  const double w = theta_max - theta_min;
  constexpr int intervals = 4096;
  const double h = w / intervals;
  double m1 = 0.0;
  double m2 = 0.0;
  for (int i = 0; i <= intervals; ++i) {
    const double x = i * h;
    const double weight = (i == 0 || i == intervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    const double density = 2.0 * (w - x) / (w * w);
    const double lc = log_cosh(x);
    m1 += weight * density * lc;
    m2 += weight * density * lc * lc;
  }
  m1 *= h / 3.0;
  m2 *= h / 3.0;
  const double var = std::max(0.0, m2 - m1 * m1);
  const double k = static_cast<double>(mode_count);
  return {m1, var, -k * m1, std::sqrt(k * var)};
}

CapacityReport capacity_estimate(const CapacityConfig& config) {
  if (!(config.epsilon > 0.0 && config.epsilon < 1.0)) {
    throw DomainError("capacity_estimate: epsilon must lie in (0, 1)");
  }
  if (config.candidate_count < 1) throw DomainError("capacity_estimate: candidate_count must be >= 1");
  check_range(config.theta_min, config.theta_max);

  const std::size_t k = config.modes.size();
  std::vector<MemoryCode> candidates;
  candidates.reserve(config.candidate_count);
  for (std::size_t i = 0; i < config.candidate_count; ++i) {
    candidates.push_back(sample_code(k, config.theta_min, config.theta_max, config.seed, i));
  }

  CapacityReport report;
  report.accepted_indices = greedy_pack(config.modes, candidates, config.epsilon);
  report.accepted = report.accepted_indices.size();
  report.acceptance_curve.resize(config.candidate_count);
  std::size_t seen = 0;
  for (std::size_t i = 0; i < config.candidate_count; ++i) {
    if (seen < report.accepted_indices.size() && report.accepted_indices[seen] == i) ++seen;
    report.acceptance_curve[i] = seen;
  }
  report.theory = uniform_code_overlap_distribution(k, config.theta_min, config.theta_max);
  return report;
}

ForgettingCurve forgetting_curve(const MemoryCode& code, const Modes& modes, std::span<const double> grid) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0) || (i > 0 && !(grid[i] > grid[i - 1]))) {
      throw DomainError("forgetting_curve: grid must be non-negative and strictly increasing");
    }
  }
  const State printed(modes, code, 0.0);
  const State vacuum = empty_vacuum(modes);
  ForgettingCurve curve;
  curve.tau = forgetting_time(printed);
  for (double t : grid) {
    const State now(modes, code, t);
    curve.points.push_back({t, log_overlap(now, printed), log_overlap(now, vacuum), occupations(now).sum()});
  }
  return curve;
}

AssociationGraph association_graph(const FidelityMatrix& fidelities, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw DomainError("association_graph: threshold must lie in (0, 1)");
  const std::size_t n = fidelities.ids.size();
  AssociationGraph graph;
  graph.ids = fidelities.ids;

  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&parent](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double w = fidelities.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (w >= threshold) {
        graph.edges.push_back({i, j, w});
        const auto ri = find(i);
        const auto rj = find(j);
        if (ri != rj) parent[std::max(ri, rj)] = std::min(ri, rj);
      }
    }
  }
  std::vector<std::optional<std::size_t>> slot(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto root = find(i);
    if (!slot[root]) {
      slot[root] = graph.clusters.size();
      graph.clusters.emplace_back();
    }
    graph.clusters[*slot[root]].push_back(i);
  }
  return graph;
}

AssociationGraph association_graph(const Registry& registry, double t, double threshold, TimeMode mode,
                                   unsigned threads) {
  return association_graph(fidelity_matrix(registry, t, mode, threads), threshold);
}

}  // namespace qmem
