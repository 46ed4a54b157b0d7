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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "qmem/capacity.hpp"

namespace qmem {
namespace {

using Vec = VectorX<double>;

MemoryCode code(std::initializer_list<double> values) {
  Vec v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return MemoryCode(v);
}

// Independent closed form: product of 1 / cosh over per-mode gaps.
double direct_overlap(const MemoryCode& a, const MemoryCode& b) {
  double f = 1.0;
  for (Eigen::Index k = 0; k < a.thetas().size(); ++k) f /= std::cosh(a.thetas()[k] - b.thetas()[k]);
  return f;
}

Registry three_memories() {
  Registry r(Modes::uniform(3, 1.0, 0.5));
  r = print_memory(r, "a", code({0.2, 1.0, 0.4}));
  r = print_memory(r, "b", code({1.1, 0.3, 0.9}));
  r = print_memory(r, "c", code({0.0, 0.0, 1.7}));
  return r;
}

// --- printing ---------------------------------------------------------------------

TEST(PrintMemory, ReadBackIsIdentical) {
  const auto c = code({0.25, 1.5});
  const Registry r = print_memory(Registry(Modes::uniform(2, 1.0, 1.0)), "x", c, 0.5);
  EXPECT_EQ(r.at("x").code, c);
  EXPECT_EQ(r.at("x").printed_at, 0.5);
}

TEST(PrintMemory, LeavesEarlierEntriesAndOverlapsUntouched) {
  const Registry before = three_memories();
  const Registry snapshot = before;
  const auto f_before = fidelity_matrix(before, 0.7);
  const Registry after = print_memory(before, "d", code({0.5, 0.5, 0.5}));
  EXPECT_EQ(before, snapshot);
  ASSERT_EQ(after.size(), 4u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(after.entries()[i], before.entries()[i]);
  const auto f_after = fidelity_matrix(after, 0.7);
  EXPECT_EQ(f_after.values.topLeftCorner(3, 3), f_before.values);
}

TEST(PrintMemory, BoseSpecWithLogTwo) {
  const Modes modes(Vec::Constant(4, 0.5), Vec::Constant(4, 1.0));
  const double beta = std::log(2.0) / 0.5;
  const Registry r = print_memory_from_beta(Registry(modes), "bose", beta);
  for (Eigen::Index k = 0; k < 4; ++k) EXPECT_NEAR(r.at("bose").code[k], std::asinh(1.0), 1e-14);
}

TEST(PrintMemory, Errors) {
  const Registry r = three_memories();
  EXPECT_THROW(print_memory(r, "a", code({0.0, 0.0, 0.0})), DuplicateIdError);
  EXPECT_THROW(print_memory(r, "z", code({0.0, 0.0})), MismatchError);
  EXPECT_THROW(print_memory(r, "", code({0.0, 0.0, 0.0})), DomainError);
  EXPECT_THROW(print_memory(r, "z", code({0.0, 0.0, 0.0}), -1.0), DomainError);
  EXPECT_THROW(r.at("missing"), IndexError);
}

// --- fidelity matrix -----------------------------------------------------------------

TEST(FidelityMatrix, StructureAndValues) {
  const Registry r = three_memories();
  const auto f = fidelity_matrix(r, 0.0, TimeMode::common, 2);
  ASSERT_EQ(f.values.rows(), 3);
  for (Eigen::Index i = 0; i < 3; ++i) {
    EXPECT_EQ(f.values(i, i), 1.0);
    for (Eigen::Index j = 0; j < 3; ++j) {
      EXPECT_EQ(f.values(i, j), f.values(j, i));
      EXPECT_GT(f.values(i, j), 0.0);
      EXPECT_LE(f.values(i, j), 1.0);
      EXPECT_NEAR(f.values(i, j), direct_overlap(r.entries()[i].code, r.entries()[j].code), 1e-14);
    }
  }
}

TEST(FidelityMatrix, IdenticalCodesGiveOne) {
  Registry r(Modes::uniform(2, 1.0, 1.0));
  r = print_memory(r, "a", code({0.3, 0.8}));
  r = print_memory(r, "b", code({0.3, 0.8}));
  EXPECT_EQ(fidelity_matrix(r, 2.0).values(0, 1), 1.0);
}

TEST(FidelityMatrix, ArccoshTwoGapGivesOneHalf) {
  Registry r(Modes::uniform(1, 1.0, 1.0));
  r = print_memory(r, "a", code({0.1}));
  r = print_memory(r, "b", code({0.1 + std::acosh(2.0)}));
  EXPECT_NEAR(fidelity_matrix(r, 0.0).values(0, 1), 0.5, 1e-15);
}

TEST(FidelityMatrix, DoublingModesSquaresEntries) {
  Registry single(Modes::uniform(2, 1.0, 1.0));
  Registry doubled(Modes::uniform(4, 1.0, 1.0));
  single = print_memory(single, "a", code({0.2, 0.9}));
  single = print_memory(single, "b", code({1.0, 0.1}));
  doubled = print_memory(doubled, "a", code({0.2, 0.9, 0.2, 0.9}));
  doubled = print_memory(doubled, "b", code({1.0, 0.1, 1.0, 0.1}));
  const double f1 = fidelity_matrix(single, 0.0).values(0, 1);
  const double f2 = fidelity_matrix(doubled, 0.0).values(0, 1);
  EXPECT_NEAR(f2, f1 * f1, 1e-15);
}

TEST(FidelityMatrix, CommonTimeShiftLeavesEntriesExactlyUnchanged) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> theta(0.0, 2.0), gamma(0.1, 3.0), time(0.0, 50.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index k = 1 + trial % 6;
    Vec g(k);
    for (Eigen::Index i = 0; i < k; ++i) g[i] = gamma(rng);
    Registry r(Modes(Vec::Ones(k), g));
    for (int m = 0; m < 5; ++m) {
      Vec th(k);
      for (Eigen::Index i = 0; i < k; ++i) th[i] = theta(rng);
      r = print_memory(r, "m" + std::to_string(m), MemoryCode(th));
    }
    const auto f1 = fidelity_matrix(r, time(rng));
    const auto f2 = fidelity_matrix(r, time(rng));
    EXPECT_EQ(f1.values, f2.values);
  }
}

TEST(FidelityMatrix, StaggeredUsesElapsedTimes) {
  Registry r(Modes::uniform(1, 1.0, 1.0));
  r = print_memory(r, "early", code({0.5}), 0.0);
  r = print_memory(r, "late", code({0.5}), 1.0);
  // Same code, but the early memory has decayed one unit longer.
  EXPECT_NEAR(fidelity_matrix(r, 2.0, TimeMode::staggered).values(0, 1), 1.0 / std::cosh(1.0), 1e-15);
  EXPECT_EQ(fidelity_matrix(r, 2.0, TimeMode::common).values(0, 1), 1.0);
  EXPECT_THROW(fidelity_matrix(r, 0.5, TimeMode::staggered), DomainError);
}

TEST(FidelityMatrix, ParallelMatchesSerial) {
  Registry r(Modes::uniform(8, 1.0, 1.0));
  for (std::uint64_t i = 0; i < 40; ++i) r = print_memory(r, "m" + std::to_string(i), sample_code(8, 0, 2, 3, i));
  EXPECT_EQ(fidelity_matrix(r, 1.0, TimeMode::common, 1).values, fidelity_matrix(r, 1.0, TimeMode::common, 4).values);
}

// --- recall ------------------------------------------------------------------------------

TEST(Recall, RanksByFidelity) {
  const Registry r = three_memories();
  const auto scores = recall(r, code({1.0, 0.35, 0.9}), 0.0);
  ASSERT_EQ(scores.size(), 3u);
  EXPECT_EQ(scores[0].id, "b");
  for (std::size_t i = 1; i < scores.size(); ++i) EXPECT_GE(scores[i - 1].fidelity, scores[i].fidelity);
  EXPECT_NEAR(scores[0].fidelity, direct_overlap(r.at("b").code, code({1.0, 0.35, 0.9})), 1e-14);
}

// --- capacity ------------------------------------------------------------------------------

TEST(SampleCode, DeterministicPrefixAndRange) {
  for (std::uint64_t i = 0; i < 50; ++i) {
    const auto small = sample_code(3, 0.5, 1.5, 9, i);
    const auto large = sample_code(7, 0.5, 1.5, 9, i);
    EXPECT_EQ(small, sample_code(3, 0.5, 1.5, 9, i));
    for (Eigen::Index k = 0; k < 3; ++k) EXPECT_EQ(small[k], large[k]);
    for (Eigen::Index k = 0; k < 7; ++k) {
      EXPECT_GE(large[k], 0.5);
      EXPECT_LT(large[k], 1.5);
    }
  }
  EXPECT_NE(sample_code(4, 0, 2, 1, 0), sample_code(4, 0, 2, 2, 0));
  EXPECT_THROW(sample_code(2, 1.0, 1.0, 0, 0), DomainError);
}

// Exhaustive maximum packing of a one-mode grid, compared with greedy packing
// of the sorted grid (optimal on a line).
TEST(GreedyPack, SingleModeGridMatchesExhaustivePacking) {
  const Modes modes = Modes::uniform(1, 1.0, 1.0);
  for (double step_scale : {0.3, 0.45, 0.7, 1.1, 1.3}) {
    for (double epsilon : {0.05, 0.2, 0.5}) {
      const double step = step_scale * std::acosh(2.0);
      std::vector<MemoryCode> grid;
      for (int i = 0; i < 12; ++i) grid.push_back(code({i * step}));
      const auto greedy = greedy_pack(modes, grid, epsilon);

      std::size_t best = 0;
      for (unsigned mask = 1; mask < (1u << grid.size()); ++mask) {
        bool ok = true;
        for (std::size_t i = 0; i < grid.size() && ok; ++i) {
          for (std::size_t j = i + 1; j < grid.size() && ok; ++j) {
            if ((mask >> i & 1u) && (mask >> j & 1u)) ok = direct_overlap(grid[i], grid[j]) < epsilon;
          }
        }
        if (ok) best = std::max<std::size_t>(best, static_cast<std::size_t>(__builtin_popcount(mask)));
      }
      EXPECT_EQ(greedy.size(), best) << "step " << step << " epsilon " << epsilon;
    }
  }
}

TEST(GreedyPack, AcceptedSetIsPairwiseDistinguishable) {
  const Modes modes = Modes::uniform(6, 1.0, 1.0);
  std::vector<MemoryCode> candidates;
  for (std::uint64_t i = 0; i < 150; ++i) candidates.push_back(sample_code(6, 0, 2, 5, i));
  const auto kept = greedy_pack(modes, candidates, 0.1);
  for (std::size_t a = 0; a < kept.size(); ++a) {
    for (std::size_t b = a + 1; b < kept.size(); ++b) {
      EXPECT_LT(direct_overlap(candidates[kept[a]], candidates[kept[b]]), 0.1);
    }
  }
  // Every rejected candidate collides with an earlier accepted one.
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (std::find(kept.begin(), kept.end(), i) != kept.end()) continue;
    bool collides = false;
    for (auto j : kept) collides = collides || (j < i && direct_overlap(candidates[i], candidates[j]) >= 0.1);
    EXPECT_TRUE(collides);
  }
}

TEST(CapacityEstimate, EpsilonNearOneAcceptsAll) {
  CapacityConfig c;
  c.modes = Modes::uniform(2, 1.0, 1.0);
  c.epsilon = 1.0 - 1e-15;
  c.candidate_count = 100;
  EXPECT_EQ(capacity_estimate(c).accepted, 100u);
}

TEST(CapacityEstimate, NonDecreasingInModeCount) {
  for (std::uint64_t seed : {0u, 1u, 2u, 3u}) {
    std::size_t previous = 0;
    for (std::size_t k : {1, 2, 4, 8, 16}) {
      CapacityConfig c;
      c.modes = Modes::uniform(k, 1.0, 1.0);
      c.seed = seed;
      const auto report = capacity_estimate(c);
      EXPECT_GE(report.accepted, previous) << "K=" << k << " seed " << seed;
      previous = report.accepted;
    }
  }
}

TEST(CapacityEstimate, PureFunctionOfConfig) {
  CapacityConfig c;
  c.modes = Modes::uniform(8, 1.0, 1.0);
  c.seed = 42;
  const auto a = capacity_estimate(c);
  const auto b = capacity_estimate(c);
  EXPECT_EQ(a.accepted_indices, b.accepted_indices);
  EXPECT_EQ(a.acceptance_curve, b.acceptance_curve);
  ASSERT_EQ(a.acceptance_curve.size(), c.candidate_count);
  EXPECT_EQ(a.acceptance_curve.back(), a.accepted);
  EXPECT_EQ(a.accepted_indices.front(), 0u);
}

TEST(CapacityEstimate, Preconditions) {
  CapacityConfig c;
  c.modes = Modes::uniform(1, 1.0, 1.0);
  c.epsilon = 1.0;
  EXPECT_THROW(capacity_estimate(c), DomainError);
  c.epsilon = 0.05;
  c.candidate_count = 0;
  EXPECT_THROW(capacity_estimate(c), DomainError);
  c.candidate_count = 5;
  c.theta_min = c.theta_max = 1.0;
  EXPECT_THROW(capacity_estimate(c), DomainError);
}

// Midpoint double integral over the square as the reference.
TEST(OverlapDistribution, MatchesDirectIntegration) {
  const double lo = 0.5, hi = 2.5;
  const int n = 1500;
  const double h = (hi - lo) / n;
  double m1 = 0.0, m2 = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double lc = std::log(std::cosh((i - j) * h));
      m1 += lc;
      m2 += lc * lc;
    }
  }
  m1 /= double(n) * n;
  m2 /= double(n) * n;
  const auto d = uniform_code_overlap_distribution(9, lo, hi);
  EXPECT_NEAR(d.per_mode_mean_log_cosh, m1, 1e-5);
  EXPECT_NEAR(d.per_mode_var_log_cosh, m2 - m1 * m1, 1e-5);
  EXPECT_NEAR(d.mean_log_overlap, -9 * m1, 1e-4);
  EXPECT_NEAR(d.std_log_overlap, std::sqrt(9 * (m2 - m1 * m1)), 1e-4);
}

// --- forgetting ------------------------------------------------------------------------------

TEST(ForgettingCurve, VacuumOverlapPeaksAtTau) {
  const Modes modes = Modes::uniform(1, 1.0, 0.5);
  std::vector<double> grid;
  for (int i = 0; i <= 400; ++i) grid.push_back(0.01 * i);  // tau = 0.8 / 0.5 = 1.6
  const auto curve = forgetting_curve(code({0.8}), modes, grid);
  ASSERT_TRUE(curve.tau.has_value());
  EXPECT_NEAR(*curve.tau, 1.6, 1e-15);
  const auto peak = std::max_element(curve.points.begin(), curve.points.end(), [](const auto& a, const auto& b) {
    return a.log_vacuum_overlap < b.log_vacuum_overlap;
  });
  EXPECT_NEAR(peak->t, 1.6, 1e-12);
  EXPECT_NEAR(peak->log_vacuum_overlap, 0.0, 1e-15);
}

TEST(ForgettingCurve, InitialOccupation) {
  const Modes modes = Modes::uniform(3, 1.0, 1.0);
  const std::vector<double> grid{0.0, 1.0};
  const auto curve = forgetting_curve(code({0.3, 0.7, 1.2}), modes, grid);
  const double expected = std::pow(std::sinh(0.3), 2) + std::pow(std::sinh(0.7), 2) + std::pow(std::sinh(1.2), 2);
  EXPECT_NEAR(curve.points[0].total_occupation, expected, 1e-14);
  EXPECT_EQ(curve.points[0].log_self_overlap, 0.0);
}

TEST(ForgettingCurve, SelfOverlapLogSlopeTendsToTotalDamping) {
  const Modes modes(Vec::Ones(3), (Vec(3) << 0.5, 1.0, 2.0).finished());
  const std::vector<double> grid{30.0, 31.0};
  const auto curve = forgetting_curve(code({0.4, 1.1, 0.2}), modes, grid);
  const double slope = curve.points[1].log_self_overlap - curve.points[0].log_self_overlap;
  EXPECT_NEAR(slope, -3.5, 1e-12);
}

TEST(ForgettingCurve, RejectsUnorderedGrid) {
  const std::vector<double> grid{0.0, 2.0, 1.0};
  EXPECT_THROW(forgetting_curve(code({0.5}), Modes::uniform(1, 1.0, 1.0), grid), DomainError);
}

// --- association ------------------------------------------------------------------------------

TEST(AssociationGraph, ThresholdAboveEveryEntryGivesNoEdges) {
  const auto f = fidelity_matrix(three_memories(), 0.0);
  const double top = (f.values - Eigen::MatrixXd::Identity(3, 3)).maxCoeff();
  const auto g = association_graph(f, std::min(0.999, top + 1e-6));
  EXPECT_TRUE(g.edges.empty());
  EXPECT_EQ(g.clusters.size(), 3u);
}

TEST(AssociationGraph, DuplicateCodesAreJoinedWithUnitWeight) {
  Registry r(Modes::uniform(2, 1.0, 1.0));
  r = print_memory(r, "a", code({0.3, 0.8}));
  r = print_memory(r, "far", code({2.0, 0.0}));
  r = print_memory(r, "a2", code({0.3, 0.8}));
  const auto g = association_graph(r, 0.0, 0.9);
  ASSERT_EQ(g.edges.size(), 1u);
  EXPECT_EQ(g.edges[0].i, 0u);
  EXPECT_EQ(g.edges[0].j, 2u);
  EXPECT_EQ(g.edges[0].weight, 1.0);
  ASSERT_EQ(g.clusters.size(), 2u);
  EXPECT_EQ(g.clusters[0], (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(g.clusters[1], (std::vector<std::size_t>{1}));
}

TEST(AssociationGraph, FewerModesAddEdges) {
  // Same per-mode gaps, repeated across more modes: overlaps shrink as powers.
  std::vector<std::size_t> counts;
  for (std::size_t k : {1, 2, 4, 8}) {
    Registry r(Modes::uniform(k, 1.0, 1.0));
    for (int m = 0; m < 6; ++m) r = print_memory(r, "m" + std::to_string(m), MemoryCode(Vec::Constant(k, 0.3 * m)));
    const auto g = association_graph(r, 0.0, 0.5);
    if (!counts.empty()) EXPECT_LE(g.edges.size(), counts.back());
    counts.push_back(g.edges.size());
  }
  EXPECT_GT(counts.front(), counts.back());
}

TEST(AssociationGraph, ThresholdDomain) {
  const auto f = fidelity_matrix(three_memories(), 0.0);
  EXPECT_THROW(association_graph(f, 0.0), DomainError);
  EXPECT_THROW(association_graph(f, 1.0), DomainError);
}

}  // namespace
}  // namespace qmem
