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

#include "bbs/interferometer.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <vector>

namespace {

using bbs::CircuitLayout;
using bbs::OccupationPattern;

constexpr double kPi = std::numbers::pi;

std::vector<double> random_angles(std::size_t n, bbs::Rng& rng) {
  std::vector<double> t(n);
  for (auto& x : t) x = 2.0 * kPi * bbs::uniform01(rng);
  return t;
}

// ---------------------------------------------------------------- oracles

double naive_permanent(const Eigen::MatrixXd& a) {
  const auto n = a.rows();
  if (n == 0) return 1.0;
  std::vector<int> p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  double s = 0.0;
  do {
    double prod = 1.0;
    for (Eigen::Index i = 0; i < n; ++i) prod *= a(i, p[static_cast<std::size_t>(i)]);
    s += prod;
  } while (std::next_permutation(p.begin(), p.end()));
  return s;
}

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

/// P(out | in) = |Perm(U[out rows, in cols])|^2 / (prod out! prod in!).
double permanent_probability(const Eigen::MatrixXd& u, const std::vector<int>& in, const std::vector<int>& out) {
  std::vector<Eigen::Index> rows, cols;
  double norm = 1.0;
  for (std::size_t i = 0; i < in.size(); ++i) {
    for (int c = 0; c < in[i]; ++c) cols.push_back(static_cast<Eigen::Index>(i));
    for (int c = 0; c < out[i]; ++c) rows.push_back(static_cast<Eigen::Index>(i));
    norm *= factorial(in[i]) * factorial(out[i]);
  }
  Eigen::MatrixXd sub(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c)
      sub(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = u(rows[r], cols[c]);
  const double p = naive_permanent(sub);
  return p * p / norm;
}

void all_patterns(std::size_t m, int n, std::vector<int>& cur, std::size_t i, std::vector<std::vector<int>>& out) {
  if (i + 1 == m) {
    cur[i] = n;
    out.push_back(cur);
    return;
  }
  for (int c = 0; c <= n; ++c) {
    cur[i] = c;
    all_patterns(m, n - c, cur, i + 1, out);
  }
}

/// Click-pattern distribution by enumerating every occupation outcome with
/// the permanent formula.
std::map<std::uint64_t, double> oracle_threshold(const Eigen::MatrixXd& u, const std::vector<int>& in) {
  const int n = std::accumulate(in.begin(), in.end(), 0);
  std::vector<std::vector<int>> outs;
  std::vector<int> cur(in.size());
  all_patterns(in.size(), n, cur, 0, outs);
  std::map<std::uint64_t, double> dist;
  for (const auto& o : outs) {
    std::uint64_t mask = 0;
    for (std::size_t i = 0; i < o.size(); ++i)
      if (o[i] > 0) mask |= std::uint64_t{1} << i;
    dist[mask] += permanent_probability(u, in, o);
  }
  return dist;
}

template <class Sampler>
double empirical_tv(const Sampler& s, const std::map<std::uint64_t, double>& oracle, std::size_t draws,
                    std::uint64_t seed) {
  bbs::Rng rng(seed);
  std::map<std::uint64_t, double> counts;
  std::vector<std::uint8_t> bits(s.modes());
  for (std::size_t k = 0; k < draws; ++k) {
    s.draw_threshold(rng, bits);
    std::uint64_t mask = 0;
    for (std::size_t i = 0; i < bits.size(); ++i)
      if (bits[i]) mask |= std::uint64_t{1} << i;
    counts[mask] += 1.0 / static_cast<double>(draws);
  }
  double tv = 0.0;
  for (const auto& [mask, p] : oracle) tv += std::abs(p - (counts.contains(mask) ? counts[mask] : 0.0));
  for (const auto& [mask, q] : counts)
    if (!oracle.contains(mask)) tv += q;
  return tv / 2.0;
}

// ----------------------------------------------------------------- layout

TEST(Layout, ThreeModesOneLoop) {
  auto l = CircuitLayout::build(3, {1});
  ASSERT_EQ(l.coupler_count(), 2u);
  EXPECT_EQ(l.couplers()[0], (bbs::Coupler{0, 1}));
  EXPECT_EQ(l.couplers()[1], (bbs::Coupler{1, 2}));
}

TEST(Layout, CouplerCounts) {
  EXPECT_EQ(CircuitLayout::build(10, {1, 3, 9}).coupler_count(), 17u);
  EXPECT_EQ(CircuitLayout::build(30, {1, 3, 9}).coupler_count(), 77u);
}

TEST(Layout, LoopsInListedOrder) {
  auto l = CircuitLayout::build(5, {3, 1});
  EXPECT_EQ(l.couplers().front(), (bbs::Coupler{0, 3}));
  EXPECT_EQ(l.couplers()[2], (bbs::Coupler{0, 1}));
}

TEST(Layout, RejectsBadInput) {
  EXPECT_THROW(CircuitLayout::build(1, {1}), std::invalid_argument);
  EXPECT_THROW(CircuitLayout::build(4, {}), std::invalid_argument);
  EXPECT_THROW(CircuitLayout::build(4, {4}), std::invalid_argument);
  EXPECT_THROW(CircuitLayout::build(4, {0}), std::invalid_argument);
}

TEST(Layout, DefaultLoopsFitTheCircuit) {
  EXPECT_EQ(bbs::default_loop_lengths(30), (std::vector<std::size_t>{1, 3, 9}));
  EXPECT_EQ(bbs::default_loop_lengths(8), (std::vector<std::size_t>{1, 3}));
  EXPECT_EQ(bbs::default_loop_lengths(2), (std::vector<std::size_t>{1}));
}

// --------------------------------------------------------------- unitaries

TEST(Unitary, CouplerExamples) {
  EXPECT_TRUE(bbs::coupler_unitary(0.0).isApprox(Eigen::Matrix2d::Identity()));
  Eigen::Matrix2d quarter;
  quarter << 0, -1, 1, 0;
  EXPECT_TRUE(bbs::coupler_unitary(kPi / 2).isApprox(quarter, 1e-15));
  const auto h = bbs::coupler_unitary(kPi / 4);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(std::abs(h.data()[i]), 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(Unitary, ZeroAnglesGiveIdentity) {
  auto l = CircuitLayout::build(6, {1, 3});
  std::vector<double> zeros(l.coupler_count(), 0.0);
  EXPECT_TRUE(bbs::circuit_unitary(l, zeros).isApprox(Eigen::MatrixXd::Identity(6, 6)));
}

TEST(Unitary, QuarterTurnsMoveFirstModeToLast) {
  auto l = CircuitLayout::build(3, {1});
  const auto u = bbs::circuit_unitary(l, std::vector<double>{kPi / 2, kPi / 2});
  EXPECT_NEAR(std::abs(u(2, 0)), 1.0, 1e-15);
  EXPECT_NEAR(u(0, 0), 0.0, 1e-15);
  EXPECT_NEAR(u(1, 0), 0.0, 1e-15);
}

TEST(Unitary, OrthogonalForRandomAngles) {
  bbs::Rng rng(11);
  for (std::size_t m : {2u, 5u, 10u, 30u}) {
    auto l = CircuitLayout::build(m, bbs::default_loop_lengths(m));
    const auto u = bbs::circuit_unitary(l, random_angles(l.coupler_count(), rng));
    for (Eigen::Index j = 0; j < u.cols(); ++j) EXPECT_NEAR(u.col(j).norm(), 1.0, 1e-12);
    EXPECT_TRUE((u.transpose() * u).isApprox(Eigen::MatrixXd::Identity(u.rows(), u.cols()), 1e-12));
  }
}

TEST(Unitary, WrongAngleCountThrows) {
  auto l = CircuitLayout::build(3, {1});
  EXPECT_THROW(bbs::circuit_unitary(l, std::vector<double>{0.1}), std::invalid_argument);
}

// -------------------------------------------------------------- fock basis

TEST(FockBasis, Dimension) {
  EXPECT_EQ(bbs::fock_dimension(2, 1), 2u);
  EXPECT_EQ(bbs::fock_dimension(4, 2), 10u);
  EXPECT_EQ(bbs::fock_dimension(16, 8), 490314u);
  EXPECT_EQ(bbs::FockBasis(5, 3).dimension(), 35u);
}

TEST(FockBasis, RankInvertsPattern) {
  bbs::FockBasis b(5, 3);
  for (std::size_t i = 0; i < b.dimension(); ++i) EXPECT_EQ(b.rank(b.pattern(i)), i);
  EXPECT_EQ(b.pattern(0).counts, (std::vector<int>{0, 0, 0, 0, 3}));
  EXPECT_EQ(b.pattern(b.dimension() - 1).counts, (std::vector<int>{3, 0, 0, 0, 0}));
  for (std::size_t i = 1; i < b.dimension(); ++i) EXPECT_LT(b.pattern(i - 1), b.pattern(i));
}

TEST(FockBasis, DimensionLimit) {
  EXPECT_THROW(bbs::FockBasis(16, 8, 1000), bbs::DimensionLimitError);
  try {
    bbs::FockBasis(16, 8, 1000);
  } catch (const bbs::DimensionLimitError& e) {
    EXPECT_EQ(e.dimension(), 490314u);
  }
}

TEST(Input, AlternatingPhotons) {
  EXPECT_EQ(bbs::alternating_input(5).counts, (std::vector<int>{1, 0, 1, 0, 1}));
  EXPECT_EQ(bbs::alternating_input(6).photons(), 3);
}

// ------------------------------------------------------------------ evolve

TEST(Evolve, SinglePhotonIdentity) {
  auto l = CircuitLayout::build(2, {1});
  auto s = bbs::evolve(OccupationPattern{{1, 0}}, l, std::vector<double>{0.0});
  EXPECT_DOUBLE_EQ(s.amplitude(OccupationPattern{{1, 0}}), 1.0);
}

TEST(Evolve, SinglePhotonSplit) {
  auto l = CircuitLayout::build(2, {1});
  auto s = bbs::evolve(OccupationPattern{{1, 0}}, l, std::vector<double>{kPi / 4});
  EXPECT_NEAR(s.probability(OccupationPattern{{1, 0}}), 0.5, 1e-15);
  EXPECT_NEAR(s.probability(OccupationPattern{{0, 1}}), 0.5, 1e-15);
}

TEST(Evolve, SinglePhotonSinSquared) {
  auto l = CircuitLayout::build(2, {1});
  for (double t : {0.1, 0.7, 2.0, 4.5}) {
    auto s = bbs::evolve(OccupationPattern{{1, 0}}, l, std::vector<double>{t});
    EXPECT_NEAR(s.probability(OccupationPattern{{0, 1}}), std::sin(t) * std::sin(t), 1e-14);
  }
}

TEST(Evolve, HongOuMandel) {
  auto l = CircuitLayout::build(2, {1});
  auto s = bbs::evolve(OccupationPattern{{1, 1}}, l, std::vector<double>{kPi / 4});
  EXPECT_NEAR(s.probability(OccupationPattern{{2, 0}}), 0.5, 1e-14);
  EXPECT_NEAR(s.probability(OccupationPattern{{0, 2}}), 0.5, 1e-14);
  EXPECT_NEAR(s.probability(OccupationPattern{{1, 1}}), 0.0, 1e-14);
}

TEST(Evolve, NormalizedAndMatchesPermanentOracle) {
  bbs::Rng rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    auto l = CircuitLayout::build(4, {1, 3});
    const auto th = random_angles(l.coupler_count(), rng);
    const std::vector<int> in{1, 0, 1, 0};
    const auto state = bbs::evolve(OccupationPattern{in}, l, th);
    const auto u = bbs::circuit_unitary(l, th);
    const auto dist = bbs::output_distribution(state);
    double total = 0.0;
    for (const auto& o : dist) {
      EXPECT_NEAR(o.probability, permanent_probability(u, in, o.pattern.counts), 1e-8);
      total += o.probability;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(Evolve, HigherOccupationsMatchOracle) {
  // bunched inputs exercise the beamsplitter blocks with s >= 2
  bbs::Rng rng(6);
  auto l = CircuitLayout::build(3, {1, 2});
  const auto th = random_angles(l.coupler_count(), rng);
  const std::vector<int> in{2, 0, 1};
  const auto state = bbs::evolve(OccupationPattern{in}, l, th);
  const auto u = bbs::circuit_unitary(l, th);
  for (const auto& o : bbs::output_distribution(state)) {
    EXPECT_NEAR(o.probability, permanent_probability(u, in, o.pattern.counts), 1e-10);
  }
}

TEST(Evolve, ThresholdMarginalSumsToOne) {
  bbs::Rng rng(7);
  auto l = CircuitLayout::build(8, {1, 3});
  const auto state = bbs::evolve(bbs::alternating_input(8), l, random_angles(l.coupler_count(), rng));
  double total = 0.0;
  for (const auto& [mask, p] : bbs::threshold_distribution(state)) total += p;
  EXPECT_NEAR(total, 1.0, 1e-12);
}

// ---------------------------------------------------------------- samplers

TEST(Sampler, ThresholdOfPattern) {
  EXPECT_EQ((OccupationPattern{{2, 0, 1}}.threshold()), (bbs::BitString{1, 0, 1}));
}

TEST(Sampler, HongOuMandelCoincidencesSuppressed) {
  auto l = CircuitLayout::build(2, {1});
  const std::vector<double> th{kPi / 4};
  bbs::StatevectorSampler sv(bbs::evolve(OccupationPattern{{1, 1}}, l, th));
  bbs::PermanentSampler ps(bbs::circuit_unitary(l, th), OccupationPattern{{1, 1}});
  bbs::Rng rng(8);
  int sv_hits = 0, ps_hits = 0;
  for (auto& x : bbs::sample_threshold(sv, rng, 100000)) sv_hits += x == bbs::BitString{1, 1};
  for (auto& x : bbs::sample_threshold(ps, rng, 100000)) ps_hits += x == bbs::BitString{1, 1};
  EXPECT_LE(sv_hits, 500);
  EXPECT_LE(ps_hits, 500);
}

TEST(Sampler, StatevectorMatchesOracle) {
  bbs::Rng rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t m = 3 + trial % 4;
    auto l = CircuitLayout::build(m, bbs::default_loop_lengths(m));
    const auto th = random_angles(l.coupler_count(), rng);
    const auto in = bbs::alternating_input(m);
    bbs::StatevectorSampler s(bbs::evolve(in, l, th));
    EXPECT_LT(empirical_tv(s, oracle_threshold(bbs::circuit_unitary(l, th), in.counts), 100000, 100 + trial), 0.02);
  }
}

TEST(Sampler, PermanentMatchesStatevector) {
  bbs::Rng rng(10);
  for (int trial = 0; trial < 4; ++trial) {
    const std::size_t m = 4 + trial;
    auto l = CircuitLayout::build(m, bbs::default_loop_lengths(m));
    const auto th = random_angles(l.coupler_count(), rng);
    const auto in = bbs::alternating_input(m);
    std::map<std::uint64_t, double> exact;
    for (const auto& [mask, p] : bbs::threshold_distribution(bbs::evolve(in, l, th))) exact[mask] = p;
    bbs::PermanentSampler s(bbs::circuit_unitary(l, th), in);
    EXPECT_LT(empirical_tv(s, exact, 50000, 200 + trial), 0.03);
  }
}

TEST(Sampler, ReproducibleUnderSeed) {
  auto l = CircuitLayout::build(6, {1, 3});
  bbs::Rng r0(12);
  const auto th = random_angles(l.coupler_count(), r0);
  bbs::StatevectorSampler s(bbs::evolve(bbs::alternating_input(6), l, th));
  bbs::Rng a(99), b(99);
  EXPECT_EQ(bbs::sample_threshold(s, a, 200), bbs::sample_threshold(s, b, 200));
  bbs::PermanentSampler p(bbs::circuit_unitary(l, th), bbs::alternating_input(6));
  bbs::Rng c(99), d(99);
  EXPECT_EQ(bbs::sample_threshold(p, c, 200), bbs::sample_threshold(p, d, 200));
}

TEST(Json, DistributionExport) {
  auto l = CircuitLayout::build(2, {1});
  const auto dist = bbs::output_distribution(bbs::evolve(OccupationPattern{{1, 0}}, l, std::vector<double>{kPi / 4}));
  const auto j = bbs::distribution_to_json(dist);
  ASSERT_EQ(j.size(), 2u);
  EXPECT_EQ(j[0]["pattern"], nlohmann::json({0, 1}));
  EXPECT_NEAR(j[0]["probability"].get<double>(), 0.5, 1e-15);
}

}  // namespace
