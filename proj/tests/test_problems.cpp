/**
 * Copyright 2026 The BBS Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "bbs/problems.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

namespace {

using bbs::BitString;

double eval(const bbs::CostFunction& c, std::initializer_list<int> bits) { return c(BitString(bits)); }

bbs::KnapsackInstance small_knapsack() { return {{3, 4}, {2, 3}, 4}; }

bbs::DeconflictionInstance empty_deconfliction(std::size_t n, std::size_t k) {
  bbs::DeconflictionInstance d;
  d.aircraft = n;
  d.maneuvers = k;
  d.conflicts.assign(n * k * n * k, 0);
  return d;
}

/// Every string of m bits, in lexicographic order.
std::vector<BitString> all_strings(std::size_t m) {
  std::vector<BitString> out;
  for (std::uint64_t k = 0; k < (std::uint64_t{1} << m); ++k) out.push_back(BitString::from_integer(k, m));
  return out;
}

// --------------------------------------------------------------- knapsack

TEST(Knapsack, FeasibleAndInfeasible) {
  auto c = bbs::make_cost_function(small_knapsack());
  EXPECT_EQ(c.sense(), bbs::Sense::maximize);
  EXPECT_EQ(eval(c, {1, 0}), 3.0);
  EXPECT_EQ(eval(c, {1, 1}), -1.0);
  EXPECT_EQ(eval(c, {0, 0}), 0.0);
}

TEST(Knapsack, BruteForceOptimum) {
  auto r = bbs::brute_force(bbs::make_cost_function(small_knapsack()));
  EXPECT_EQ(r.optimum, 4.0);
  EXPECT_EQ(r.argopt, (BitString{0, 1}));
}

TEST(Knapsack, SeparationOnGeneratedInstances) {
  bbs::Rng rng(1);
  for (std::size_t m : {4u, 8u, 12u}) {
    const auto inst = bbs::gen_knapsack(m, rng);
    double min_feasible = 1e300, max_infeasible = -1e300;
    for (const auto& x : all_strings(m)) {
      std::int64_t w = 0;
      for (std::size_t i = 0; i < m; ++i) w += x[i] * inst.weights[i];
      const double c = bbs::knapsack_cost(inst, x.view());
      if (w <= inst.capacity) {
        min_feasible = std::min(min_feasible, c);
      } else {
        max_infeasible = std::max(max_infeasible, c);
      }
    }
    EXPECT_GE(min_feasible, 0.0);
    EXPECT_LT(max_infeasible, 0.0);
  }
}

TEST(Knapsack, GeneratorRangesAndDeterminism) {
  bbs::Rng a(5), b(5);
  const auto x = bbs::gen_knapsack(20, a);
  const auto y = bbs::gen_knapsack(20, b);
  EXPECT_EQ(x.values, y.values);
  EXPECT_EQ(x.weights, y.weights);
  EXPECT_EQ(x.capacity, y.capacity);
  for (std::size_t i = 0; i < 20; ++i) {
    EXPECT_GE(x.values[i], 1);
    EXPECT_LE(x.values[i], 100);
    EXPECT_GE(x.weights[i], 1);
    EXPECT_LE(x.weights[i], 100);
  }
  const auto total = std::accumulate(x.weights.begin(), x.weights.end(), std::int64_t{0});
  EXPECT_EQ(x.capacity, std::llround(0.5 * static_cast<double>(total)));
}

TEST(Knapsack, ValidationRejectsBadInstances) {
  EXPECT_THROW(bbs::make_cost_function(bbs::KnapsackInstance{{1, 2}, {1}, 3}), std::invalid_argument);
  EXPECT_THROW(bbs::make_cost_function(bbs::KnapsackInstance{{1}, {0}, 3}), std::invalid_argument);
  auto c = bbs::make_cost_function(small_knapsack());
  EXPECT_THROW(c(BitString{1, 0, 1}), std::invalid_argument);
}

// ---------------------------------------------------------- deconfliction

TEST(Deconfliction, CostExamples) {
  auto d = empty_deconfliction(2, 2);
  auto c = bbs::make_cost_function(d);
  EXPECT_EQ(eval(c, {1, 0, 1, 0}), -2.0);
  EXPECT_EQ(eval(c, {1, 1, 1, 0}), 3.0);
  d.set_conflict(0, 0, 1, 0, 1);
  auto c2 = bbs::make_cost_function(d);
  EXPECT_EQ(eval(c2, {1, 0, 1, 0}), 4.0);
}

TEST(Deconfliction, BruteForceWithoutConflicts) {
  auto r = bbs::brute_force(bbs::make_cost_function(empty_deconfliction(2, 2)));
  EXPECT_EQ(r.optimum, -2.0);
  EXPECT_EQ(r.argopt, (BitString{1, 0, 1, 0}));
  EXPECT_EQ(r.maximum, 5.0);
}

TEST(Deconfliction, NoConflictsKeepsEveryoneOnCourse) {
  bbs::Rng rng(2);
  for (std::size_t n : {2u, 3u, 5u}) {
    auto r = bbs::brute_force(bbs::make_cost_function(bbs::gen_deconfliction(n, 2, 0.0, rng)));
    EXPECT_EQ(r.optimum, -static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_EQ(r.argopt[2 * i], 1);
      EXPECT_EQ(r.argopt[2 * i + 1], 0);
    }
  }
}

TEST(Deconfliction, FullConflictsFavourLeavingAircraftUnassigned) {
  // With every cross-aircraft pair in conflict the ordered double count makes
  // any one-maneuver-each assignment cost (N+1)*N*(N-1) - H3 >= 21, while
  // leaving aircraft unassigned costs at most N*K+1 = 7.
  bbs::Rng rng(3);
  const auto inst = bbs::gen_deconfliction(3, 2, 1.0, rng);
  const auto r = bbs::brute_force(bbs::make_cost_function(inst));
  EXPECT_EQ(r.optimum, 6.0);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 3; ++i) assigned += (r.argopt[2 * i] + r.argopt[2 * i + 1]) == 1;
  EXPECT_LT(assigned, 3u);
  // the best valid assignment keeps everyone on course
  EXPECT_EQ(bbs::deconfliction_cost(inst, BitString{1, 0, 1, 0, 1, 0}.view()), 21.0);
}

TEST(Deconfliction, H1DominanceWithoutConflicts) {
  for (auto [n, k] : {std::pair<std::size_t, std::size_t>{2, 2}, {3, 2}, {2, 3}, {4, 3}, {6, 2}}) {
    const auto inst = empty_deconfliction(n, k);
    double worst_valid = -1e300, best_invalid = 1e300;
    for (const auto& x : all_strings(n * k)) {
      bool valid = true;
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t chosen = 0;
        for (std::size_t j = 0; j < k; ++j) chosen += x[i * k + j];
        valid = valid && chosen == 1;
      }
      const double c = bbs::deconfliction_cost(inst, x.view());
      if (valid) {
        worst_valid = std::max(worst_valid, c);
      } else {
        best_invalid = std::min(best_invalid, c);
      }
    }
    EXPECT_GT(best_invalid, worst_valid) << "N=" << n << " K=" << k;
  }
}

TEST(Deconfliction, GeneratorIsSymmetricAndDeterministic) {
  bbs::Rng a(4), b(4);
  const auto x = bbs::gen_deconfliction(5, 2, 0.3, a);
  const auto y = bbs::gen_deconfliction(5, 2, 0.3, b);
  EXPECT_EQ(x.conflicts, y.conflicts);
  EXPECT_NO_THROW(x.validate());
  EXPECT_EQ(x.size(), 10u);
}

TEST(Deconfliction, ValidationRejectsAsymmetry) {
  auto d = empty_deconfliction(2, 2);
  d.conflicts[0 * 4 + 2] = 1;
  EXPECT_THROW(d.validate(), std::invalid_argument);
  auto e = empty_deconfliction(2, 2);
  e.set_conflict(0, 0, 0, 1, 1);
  EXPECT_THROW(e.validate(), std::invalid_argument);
}

// -------------------------------------------------------------------- tsp

TEST(Tsp, BitLengths) {
  EXPECT_EQ(bbs::tsp_bits(5), 5u);
  EXPECT_EQ(bbs::tsp_bits(7), 10u);
  EXPECT_EQ(bbs::tsp_bits(10), 19u);
  EXPECT_EQ(bbs::tsp_bits(13), 29u);
  EXPECT_EQ(bbs::tsp_points_for_bits(10), std::optional<std::size_t>(7));
  EXPECT_FALSE(bbs::tsp_points_for_bits(12).has_value());
}

TEST(Tsp, DecodeExamples) {
  EXPECT_EQ(bbs::decode_permutation(BitString(5).view(), 5), (std::vector<std::size_t>{1, 2, 3, 4}));
  EXPECT_EQ(bbs::decode_permutation(BitString::from_integer(25, 5).view(), 5), (std::vector<std::size_t>{1, 2, 4, 3}));
}

/// Independent decoder: the k-th permutation in lexicographic order.
std::vector<std::size_t> kth_permutation(std::uint64_t k, std::size_t len) {
  std::vector<std::size_t> p(len);
  std::iota(p.begin(), p.end(), std::size_t{1});
  for (std::uint64_t i = 0; i < k; ++i) std::next_permutation(p.begin(), p.end());
  return p;
}

TEST(Tsp, DecodeIsSurjective) {
  for (std::size_t n = 3; n <= 6; ++n) {
    const auto m = bbs::tsp_bits(n);
    std::set<std::vector<std::size_t>> seen;
    std::uint64_t fact = 1;
    for (std::size_t i = 2; i < n; ++i) fact *= i;
    for (const auto& x : all_strings(m)) {
      const auto p = bbs::decode_permutation(x.view(), n);
      EXPECT_EQ(p, kth_permutation(x.to_integer() % fact, n - 1));
      seen.insert(p);
    }
    EXPECT_EQ(seen.size(), fact) << "n=" << n;
  }
}

TEST(Tsp, UnitSquare) {
  auto c = bbs::make_cost_function(bbs::TspInstance{{{0, 0}, {0, 1}, {1, 1}, {1, 0}}});
  ASSERT_EQ(c.size(), 3u);
  EXPECT_NEAR(eval(c, {0, 0, 0}), 4.0, 1e-15);
  // Lehmer code 2 over {1,2,3} is (2,1,3)
  EXPECT_NEAR(eval(c, {0, 1, 0}), 2.0 + 2.0 * std::sqrt(2.0), 1e-15);
}

TEST(Tsp, CostDependsOnlyOnResidue) {
  bbs::Rng rng(6);
  const auto inst = bbs::gen_tsp(5, rng);
  for (std::uint64_t k = 0; k < 8; ++k) {
    EXPECT_EQ(bbs::tsp_cost(inst, BitString::from_integer(k, 5).view()),
              bbs::tsp_cost(inst, BitString::from_integer(k + 24, 5).view()));
  }
}

TEST(Tsp, TourLengthIsCyclicallyInvariant) {
  bbs::Rng rng(7);
  const auto inst = bbs::gen_tsp(6, rng);
  const std::vector<std::size_t> order{3, 1, 5, 2, 4};
  const double base = bbs::tour_length(inst, order);
  std::vector<std::size_t> cycle{0};
  cycle.insert(cycle.end(), order.begin(), order.end());
  for (std::size_t r = 1; r < cycle.size(); ++r) {
    // relabel so that cycle[r] becomes point 0
    bbs::TspInstance rotated;
    std::vector<std::size_t> label(6);
    std::vector<std::size_t> seq;
    for (std::size_t i = 0; i < cycle.size(); ++i) {
      const auto p = cycle[(r + i) % cycle.size()];
      label[p] = i;
      rotated.points.push_back(inst.points[p]);
    }
    for (std::size_t i = 1; i < cycle.size(); ++i) seq.push_back(i);
    EXPECT_NEAR(bbs::tour_length(rotated, seq), base, 1e-12);
  }
}

TEST(Tsp, GeneratorUnitSquare) {
  bbs::Rng a(8), b(8);
  const auto x = bbs::gen_tsp(10, a);
  EXPECT_EQ(x.points, bbs::gen_tsp(10, b).points);
  for (const auto& p : x.points) {
    EXPECT_GE(p.x, 0.0);
    EXPECT_LE(p.x, 1.0);
    EXPECT_GE(p.y, 0.0);
    EXPECT_LE(p.y, 1.0);
  }
}

// ------------------------------------------------------- brute force, json

TEST(BruteForce, ConstantCost) {
  bbs::CostFunction c(4, bbs::Sense::minimize, [](std::span<const std::uint8_t>) { return 3.5; });
  auto r = bbs::brute_force(c);
  EXPECT_EQ(r.optimum, 3.5);
  EXPECT_EQ(r.maximum, 3.5);
  EXPECT_EQ(r.argopt, BitString(4));
}

TEST(BruteForce, LimitEnforced) {
  bbs::CostFunction c(25, bbs::Sense::minimize, [](std::span<const std::uint8_t>) { return 0.0; });
  EXPECT_THROW(bbs::brute_force(c), std::invalid_argument);
}

TEST(GenerateInstance, SizeRules) {
  bbs::Rng rng(9);
  EXPECT_EQ(bbs::size_of(bbs::generate_instance(bbs::ProblemKind::tsp, 10, rng)), 10u);
  EXPECT_EQ(bbs::size_of(bbs::generate_instance(bbs::ProblemKind::deconfliction, 10, rng)), 10u);
  EXPECT_THROW(bbs::generate_instance(bbs::ProblemKind::tsp, 12, rng), std::invalid_argument);
  EXPECT_THROW(bbs::generate_instance(bbs::ProblemKind::deconfliction, 11, rng), std::invalid_argument);
}

TEST(Json, RoundTripIsLossless) {
  bbs::Rng rng(10);
  for (auto kind : {bbs::ProblemKind::knapsack, bbs::ProblemKind::deconfliction, bbs::ProblemKind::tsp}) {
    const auto inst = bbs::generate_instance(kind, 10, rng);
    const auto j = bbs::instance_to_json(inst);
    const auto back = bbs::instance_from_json(nlohmann::json::parse(j.dump()));
    EXPECT_EQ(bbs::instance_to_json(back), j);
    const auto c1 = bbs::make_cost_function(inst);
    const auto c2 = bbs::make_cost_function(back);
    for (std::uint64_t k = 0; k < 1024; k += 37) {
      const auto x = BitString::from_integer(k, 10);
      EXPECT_EQ(c1(x), c2(x));
    }
  }
}

TEST(Json, KindInferredWhenAbsent) {
  auto j = nlohmann::json::parse(R"({"N": 2, "K": 2, "conflicts": [[1, 1, 2, 1], [2, 1, 1, 1]]})");
  const auto inst = bbs::instance_from_json(j);
  ASSERT_EQ(bbs::kind_of(inst), bbs::ProblemKind::deconfliction);
  EXPECT_EQ(bbs::deconfliction_cost(std::get<bbs::DeconflictionInstance>(inst), BitString{1, 0, 1, 0}.view()), 4.0);
  EXPECT_THROW(bbs::instance_from_json(nlohmann::json::parse(R"({"foo": 1})")), std::invalid_argument);
}

}  // namespace
