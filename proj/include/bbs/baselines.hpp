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
#pragma once

// Classical comparators that spend a fixed number of cost calls R. Calls are
// counted one per candidate evaluation, with no cache.

#include "bbs/bitstring.hpp"
#include "bbs/problems.hpp"
#include "bbs/rng.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <unordered_set>
#include <vector>

namespace bbs {

struct BaselineResult {
  BitString best_bits;
  double best_cost = 0.0;  // native sense
  std::uint64_t calls = 0;
  std::uint64_t unique_evals = 0;
  std::uint64_t seed = 0;
};

namespace detail {

/// Counts calls, tracks distinct strings and the best seen, minimization sense.
class CountingCost {
 public:
  explicit CountingCost(const CostFunction& cost) : cost_(cost) {}

  double operator()(const BitString& x) {
    ++calls_;
    const double native = cost_(x);
    if (!std::isfinite(native)) throw std::runtime_error("cost function returned a non-finite value");
    const double c = to_minimization(cost_.sense(), native);
    if (x.size() <= 64) seen_.insert(x.to_integer());
    if (calls_ == 1 || c < best_) {
      best_ = c;
      best_bits_ = x;
    }
    return c;
  }

  std::uint64_t calls() const noexcept { return calls_; }

  BaselineResult result(std::uint64_t seed) const {
    return {best_bits_, to_minimization(cost_.sense(), best_), calls_, seen_.size(), seed};
  }

 private:
  const CostFunction& cost_;
  std::uint64_t calls_ = 0;
  double best_ = 0.0;
  BitString best_bits_;
  std::unordered_set<std::uint64_t> seen_;
};

template <class URBG>
BitString random_bits(std::size_t m, URBG& rng) {
  BitString x(m);
  for (std::size_t i = 0; i < m; ++i) x[i] = static_cast<std::uint8_t>(rng() >> 63);
  return x;
}

}  // namespace detail

/// Called when a climb ends at a local optimum, before the restart.
using RestartObserver = std::function<void(const BitString& local_optimum, double cost)>;

/// First-improvement hill climbing with random restarts. From a random
/// string, untried bit positions are flipped in random order; the first
/// improving flip is taken and every position becomes untried again. When
/// no position improves, the climb restarts. Stops after exactly R calls or
/// earlier only if R is reached mid-restart.
template <class URBG>
BaselineResult hill_climb(const CostFunction& cost, std::uint64_t budget, URBG& rng, std::uint64_t seed = 0,
                          const RestartObserver& on_restart = {}) {
  if (budget < 1) throw std::invalid_argument("hill_climb: budget must be >= 1");
  const std::size_t m = cost.size();
  detail::CountingCost eval(cost);
  std::vector<std::size_t> untried;
  while (eval.calls() < budget) {
    BitString x = detail::random_bits(m, rng);
    double current = eval(x);
    untried.resize(m);
    for (std::size_t i = 0; i < m; ++i) untried[i] = i;
    while (!untried.empty() && eval.calls() < budget) {
      const auto pick = static_cast<std::size_t>(uniform_below(rng, untried.size()));
      const std::size_t bit = untried[pick];
      x.flip(bit);
      const double c = eval(x);
      if (c < current) {
        current = c;
        untried.resize(m);
        for (std::size_t i = 0; i < m; ++i) untried[i] = i;
      } else {
        x.flip(bit);
        untried[pick] = untried.back();
        untried.pop_back();
      }
    }
    if (untried.empty() && on_restart) on_restart(x, to_minimization(cost.sense(), current));
  }
  return eval.result(seed);
}

/// Exponential cooling from t_max to t_min.
struct AnnealSchedule {
  double t_max = 25000.0;
  double t_min = 2.5;

  void validate() const {
    if (!(t_max > t_min && t_min > 0.0)) throw std::invalid_argument("AnnealSchedule: need t_max > t_min > 0");
  }
  /// Temperature at move `step` of `steps`.
  double temperature(std::uint64_t step, std::uint64_t steps) const {
    if (steps == 0) return t_max;
    return t_max * std::exp(-std::log(t_max / t_min) * static_cast<double>(step) / static_cast<double>(steps));
  }
};

/// Metropolis annealing over single-bit flips from a random start. Spends
/// exactly R calls: one for the start and R - 1 moves.
template <class URBG>
BaselineResult simulated_anneal(const CostFunction& cost, std::uint64_t budget, const AnnealSchedule& schedule,
                                URBG& rng, std::uint64_t seed = 0) {
  if (budget < 1) throw std::invalid_argument("simulated_anneal: budget must be >= 1");
  schedule.validate();
  const std::size_t m = cost.size();
  detail::CountingCost eval(cost);
  BitString x = detail::random_bits(m, rng);
  double energy = eval(x);
  const std::uint64_t moves = budget - 1;
  for (std::uint64_t step = 0; step < moves; ++step) {
    const double t = schedule.temperature(step, moves);
    const auto bit = static_cast<std::size_t>(uniform_below(rng, m));
    x.flip(bit);
    const double e = eval(x);
    const double delta = e - energy;
    if (delta > 0.0 && std::exp(-delta / t) < uniform01(rng)) {
      x.flip(bit);
    } else {
      energy = e;
    }
  }
  return eval.result(seed);
}

inline nlohmann::json to_json(const BaselineResult& r, std::uint64_t budget) {
  nlohmann::json bits = nlohmann::json::array();
  for (auto b : r.best_bits.view()) bits.push_back(static_cast<int>(b));
  return {{"best_bits", bits}, {"best_cost", r.best_cost}, {"calls", r.calls},
          {"unique_evals", r.unique_evals}, {"budget_bound", budget}, {"seed", r.seed}};
}

}  // namespace bbs
