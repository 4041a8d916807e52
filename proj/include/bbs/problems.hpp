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

// Benchmark problem families behind a uniform size-m cost function handle:
// 0/1 knapsack, tactical aircraft deconfliction and a permutation-encoded TSP.

#include "bbs/bitstring.hpp"
#include "bbs/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace bbs {

enum class ProblemKind { knapsack, deconfliction, tsp };

inline std::string to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::knapsack: return "knapsack";
    case ProblemKind::deconfliction: return "deconfliction";
    case ProblemKind::tsp: return "tsp";
  }
  return "unknown";
}

inline ProblemKind parse_problem_kind(std::string_view s) {
  if (s == "knapsack") return ProblemKind::knapsack;
  if (s == "deconfliction") return ProblemKind::deconfliction;
  if (s == "tsp") return ProblemKind::tsp;
  throw std::invalid_argument("unknown problem kind '" + std::string(s) + "'");
}

/// Type-erased cost function C: {0,1}^m -> R with its optimization sense.
class CostFunction {
 public:
  using Eval = std::function<double(std::span<const std::uint8_t>)>;

  CostFunction(std::size_t size, Sense sense, Eval eval, ProblemKind kind = ProblemKind::knapsack)
      : size_(size), sense_(sense), eval_(std::move(eval)), kind_(kind) {}

  std::size_t size() const noexcept { return size_; }
  Sense sense() const noexcept { return sense_; }
  ProblemKind kind() const noexcept { return kind_; }

  double operator()(std::span<const std::uint8_t> x) const {
    if (x.size() != size_) {
      throw std::invalid_argument("cost function expects " + std::to_string(size_) + " bits, got " +
                                  std::to_string(x.size()));
    }
    return eval_(x);
  }
  double operator()(const BitString& x) const { return (*this)(x.view()); }

 private:
  std::size_t size_;
  Sense sense_;
  Eval eval_;
  ProblemKind kind_;
};

// ---------------------------------------------------------------- knapsack

struct KnapsackInstance {
  std::vector<std::int64_t> values;
  std::vector<std::int64_t> weights;
  std::int64_t capacity = 0;

  std::size_t size() const noexcept { return values.size(); }
  std::int64_t total_value() const noexcept { return std::accumulate(values.begin(), values.end(), std::int64_t{0}); }

  void validate() const {
    if (values.empty() || values.size() != weights.size()) {
      throw std::invalid_argument("knapsack: values and weights must be non-empty and equally long");
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (values[i] <= 0 || weights[i] <= 0) throw std::invalid_argument("knapsack: values and weights must be positive");
    }
    if (capacity < 1) throw std::invalid_argument("knapsack: capacity must be positive");
  }
};

/// Total value when within capacity, otherwise value - V - 1 (always negative).
inline double knapsack_cost(const KnapsackInstance& inst, std::span<const std::uint8_t> x) {
  std::int64_t value = 0;
  std::int64_t weight = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i]) {
      value += inst.values[i];
      weight += inst.weights[i];
    }
  }
  if (weight <= inst.capacity) return static_cast<double>(value);
  return static_cast<double>(value - inst.total_value() - 1);
}

struct KnapsackGenConfig {
  std::int64_t value_min = 1;
  std::int64_t value_max = 100;
  std::int64_t weight_min = 1;
  std::int64_t weight_max = 100;
  double capacity_ratio = 0.5;
};

template <class URBG>
KnapsackInstance gen_knapsack(std::size_t n, URBG& rng, const KnapsackGenConfig& cfg = {}) {
  if (n < 1) throw std::invalid_argument("gen_knapsack: need at least one item");
  if (cfg.value_min < 1 || cfg.value_max < cfg.value_min || cfg.weight_min < 1 || cfg.weight_max < cfg.weight_min) {
    throw std::invalid_argument("gen_knapsack: invalid value/weight ranges");
  }
  if (!(cfg.capacity_ratio > 0.0)) throw std::invalid_argument("gen_knapsack: capacity_ratio must be positive");
  KnapsackInstance inst;
  inst.values.resize(n);
  inst.weights.resize(n);
  const auto vspan = static_cast<std::uint64_t>(cfg.value_max - cfg.value_min + 1);
  const auto wspan = static_cast<std::uint64_t>(cfg.weight_max - cfg.weight_min + 1);
  for (std::size_t i = 0; i < n; ++i) {
    inst.values[i] = cfg.value_min + static_cast<std::int64_t>(uniform_below(rng, vspan));
    inst.weights[i] = cfg.weight_min + static_cast<std::int64_t>(uniform_below(rng, wspan));
  }
  const std::int64_t total_w = std::accumulate(inst.weights.begin(), inst.weights.end(), std::int64_t{0});
  const std::int64_t min_w = *std::min_element(inst.weights.begin(), inst.weights.end());
  inst.capacity = std::max(min_w, static_cast<std::int64_t>(std::llround(cfg.capacity_ratio * static_cast<double>(total_w))));
  return inst;
}

// ----------------------------------------------------------- deconfliction

/// N aircraft with K maneuvers each; bit (i*K + j) selects maneuver j of
/// aircraft i (0-based). Maneuver 0 is "stay on course".
struct DeconflictionInstance {
  std::size_t aircraft = 0;
  std::size_t maneuvers = 0;
  // conflicts[u * m + v] with u = i*K + j, v = i'*K + j', m = N*K
  std::vector<std::uint8_t> conflicts;

  std::size_t size() const noexcept { return aircraft * maneuvers; }
  std::uint8_t conflict(std::size_t i, std::size_t j, std::size_t i2, std::size_t j2) const noexcept {
    const std::size_t m = size();
    return conflicts[(i * maneuvers + j) * m + (i2 * maneuvers + j2)];
  }
  void set_conflict(std::size_t i, std::size_t j, std::size_t i2, std::size_t j2, std::uint8_t v) {
    const std::size_t m = size();
    conflicts[(i * maneuvers + j) * m + (i2 * maneuvers + j2)] = v;
    conflicts[(i2 * maneuvers + j2) * m + (i * maneuvers + j)] = v;
  }

  void validate() const {
    if (aircraft < 1 || maneuvers < 1) throw std::invalid_argument("deconfliction: N and K must be positive");
    const std::size_t m = size();
    if (conflicts.size() != m * m) throw std::invalid_argument("deconfliction: conflict tensor has wrong size");
    for (std::size_t u = 0; u < m; ++u) {
      for (std::size_t v = 0; v < m; ++v) {
        const auto c = conflicts[u * m + v];
        if (c > 1) throw std::invalid_argument("deconfliction: conflict entries must be 0 or 1");
        if (c != conflicts[v * m + u]) throw std::invalid_argument("deconfliction: conflict tensor must be symmetric");
        if (c && u / maneuvers == v / maneuvers) {
          throw std::invalid_argument("deconfliction: an aircraft cannot conflict with itself");
        }
      }
    }
  }
};

/// (N*K + 1) * H1 + (N + 1) * H2 - H3 with H1 the one-maneuver-per-aircraft
/// violation indicator, H2 the conflict count over ordered pairs and H3 the
/// number of aircraft keeping their course.
inline double deconfliction_cost(const DeconflictionInstance& inst, std::span<const std::uint8_t> x) {
  const std::size_t n = inst.aircraft;
  const std::size_t k = inst.maneuvers;
  const std::size_t m = n * k;
  int h1 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t chosen = 0;
    for (std::size_t j = 0; j < k; ++j) chosen += x[i * k + j];
    if (chosen != 1) {
      h1 = 1;
      break;
    }
  }
  std::int64_t h2 = 0;
  for (std::size_t u = 0; u < m; ++u) {
    if (!x[u]) continue;
    const std::uint8_t* row = inst.conflicts.data() + u * m;
    for (std::size_t v = 0; v < m; ++v) h2 += row[v] & x[v];
  }
  std::int64_t h3 = 0;
  for (std::size_t i = 0; i < n; ++i) h3 += x[i * k];
  return static_cast<double>(static_cast<std::int64_t>(m + 1) * h1 + static_cast<std::int64_t>(n + 1) * h2 - h3);
}

/// Symmetric conflict tensor whose independent cross-aircraft entries are
/// Bernoulli(q); same-aircraft blocks are zero.
template <class URBG>
DeconflictionInstance gen_deconfliction(std::size_t aircraft, std::size_t maneuvers, double q, URBG& rng) {
  if (aircraft < 1) throw std::invalid_argument("gen_deconfliction: N must be >= 1");
  if (maneuvers < 2) throw std::invalid_argument("gen_deconfliction: K must be >= 2");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("gen_deconfliction: q must lie in [0, 1]");
  DeconflictionInstance inst;
  inst.aircraft = aircraft;
  inst.maneuvers = maneuvers;
  const std::size_t m = aircraft * maneuvers;
  inst.conflicts.assign(m * m, 0);
  for (std::size_t u = 0; u < m; ++u) {
    for (std::size_t v = u + 1; v < m; ++v) {
      if (u / maneuvers == v / maneuvers) continue;
      const std::uint8_t c = uniform01(rng) < q ? 1 : 0;
      inst.conflicts[u * m + v] = c;
      inst.conflicts[v * m + u] = c;
    }
  }
  return inst;
}

// --------------------------------------------------------------------- tsp

inline std::uint64_t factorial_u64(std::size_t n) {
  if (n > 20) throw std::overflow_error("factorial_u64: n > 20");
  std::uint64_t f = 1;
  for (std::size_t i = 2; i <= n; ++i) f *= i;
  return f;
}

/// ceil(log2((n-1)!)), the bit length of the permutation encoding.
inline std::size_t tsp_bits(std::size_t n) {
  if (n < 3) throw std::invalid_argument("tsp_bits: need at least 3 points");
  const std::uint64_t f = factorial_u64(n - 1);
  std::size_t m = 0;
  while (m < 64 && (std::uint64_t{1} << m) < f) ++m;
  return m;
}

/// Point count n with tsp_bits(n) == m, if any.
inline std::optional<std::size_t> tsp_points_for_bits(std::size_t m) {
  for (std::size_t n = 3; n <= 21; ++n) {
    if (tsp_bits(n) == m) return n;
    if (tsp_bits(n) > m) break;
  }
  return std::nullopt;
}

/// Reads the bits as a big-endian integer k, reduces k mod (n-1)! and decodes
/// it in the factorial number system against the ascending list of unused
/// labels 1..n-1.
inline std::vector<std::size_t> decode_permutation(std::span<const std::uint8_t> bits, std::size_t n) {
  if (n < 3 || n > 21) throw std::invalid_argument("decode_permutation: n must lie in [3, 21]");
  if (bits.size() > 64) throw std::invalid_argument("decode_permutation: more than 64 bits");
  std::uint64_t k = 0;
  for (auto b : bits) k = (k << 1) | b;
  const std::size_t len = n - 1;
  k %= factorial_u64(len);
  std::vector<std::size_t> unused(len);
  std::iota(unused.begin(), unused.end(), std::size_t{1});
  std::vector<std::size_t> perm;
  perm.reserve(len);
  for (std::size_t pos = 0; pos < len; ++pos) {
    const std::uint64_t place = factorial_u64(len - 1 - pos);
    const auto digit = static_cast<std::size_t>(k / place);
    k %= place;
    perm.push_back(unused[digit]);
    unused.erase(unused.begin() + static_cast<std::ptrdiff_t>(digit));
  }
  return perm;
}

struct Point {
  double x;
  double y;
  friend bool operator==(const Point&, const Point&) = default;
};

struct TspInstance {
  std::vector<Point> points;

  std::size_t point_count() const noexcept { return points.size(); }
  std::size_t size() const { return tsp_bits(points.size()); }

  void validate() const {
    if (points.size() < 3 || points.size() > 21) throw std::invalid_argument("tsp: point count must lie in [3, 21]");
  }
};

inline double tour_length(const TspInstance& inst, std::span<const std::size_t> order) {
  auto dist = [&](std::size_t a, std::size_t b) {
    return std::hypot(inst.points[a].x - inst.points[b].x, inst.points[a].y - inst.points[b].y);
  };
  double total = 0.0;
  std::size_t prev = 0;
  for (auto p : order) {
    total += dist(prev, p);
    prev = p;
  }
  return total + dist(prev, 0);
}

/// Length of the closed tour y_0 -> decoded order -> y_0.
inline double tsp_cost(const TspInstance& inst, std::span<const std::uint8_t> x) {
  const auto perm = decode_permutation(x, inst.points.size());
  return tour_length(inst, perm);
}

template <class URBG>
TspInstance gen_tsp(std::size_t n, URBG& rng) {
  if (n < 3 || n > 21) throw std::invalid_argument("gen_tsp: n must lie in [3, 21]");
  TspInstance inst;
  inst.points.resize(n);
  for (auto& p : inst.points) {
    p.x = uniform01(rng);
    p.y = uniform01(rng);
  }
  return inst;
}

// ------------------------------------------------------------ uniform view

using Instance = std::variant<KnapsackInstance, DeconflictionInstance, TspInstance>;

inline ProblemKind kind_of(const Instance& inst) {
  return static_cast<ProblemKind>(inst.index());
}

inline std::size_t size_of(const Instance& inst) {
  return std::visit([](const auto& i) { return i.size(); }, inst);
}

inline Sense sense_of(ProblemKind kind) { return kind == ProblemKind::knapsack ? Sense::maximize : Sense::minimize; }

/// True when the kind's costs are integers (exact optimality comparisons).
inline bool integer_valued(ProblemKind kind) { return kind != ProblemKind::tsp; }

/// Builds the cost function handle. The instance is shared, not copied per call.
inline CostFunction make_cost_function(Instance inst) {
  std::visit([](const auto& i) { i.validate(); }, inst);
  const auto kind = kind_of(inst);
  const auto size = size_of(inst);
  auto shared = std::make_shared<const Instance>(std::move(inst));
  switch (kind) {
    case ProblemKind::knapsack:
      return CostFunction(size, Sense::maximize,
                          [shared](std::span<const std::uint8_t> x) {
                            return knapsack_cost(std::get<KnapsackInstance>(*shared), x);
                          },
                          kind);
    case ProblemKind::deconfliction:
      return CostFunction(size, Sense::minimize,
                          [shared](std::span<const std::uint8_t> x) {
                            return deconfliction_cost(std::get<DeconflictionInstance>(*shared), x);
                          },
                          kind);
    case ProblemKind::tsp:
      return CostFunction(size, Sense::minimize,
                          [shared](std::span<const std::uint8_t> x) {
                            return tsp_cost(std::get<TspInstance>(*shared), x);
                          },
                          kind);
  }
  throw std::logic_error("unreachable");
}

struct GeneratorConfig {
  KnapsackGenConfig knapsack;
  double conflict_probability = 0.3;
  std::size_t maneuvers = 2;
};

/// Generates an instance whose bit length is `size`. TSP sizes must equal
/// ceil(log2((n-1)!)) for some n; deconfliction sizes must be multiples of K.
template <class URBG>
Instance generate_instance(ProblemKind kind, std::size_t size, URBG& rng, const GeneratorConfig& cfg = {}) {
  switch (kind) {
    case ProblemKind::knapsack: return gen_knapsack(size, rng, cfg.knapsack);
    case ProblemKind::deconfliction:
      if (cfg.maneuvers < 2 || size % cfg.maneuvers != 0 || size == 0) {
        throw std::invalid_argument("deconfliction size " + std::to_string(size) + " is not a positive multiple of K=" +
                                    std::to_string(cfg.maneuvers));
      }
      return gen_deconfliction(size / cfg.maneuvers, cfg.maneuvers, cfg.conflict_probability, rng);
    case ProblemKind::tsp: {
      const auto n = tsp_points_for_bits(size);
      if (!n) throw std::invalid_argument("no TSP point count encodes to " + std::to_string(size) + " bits");
      return gen_tsp(*n, rng);
    }
  }
  throw std::logic_error("unreachable");
}

// ------------------------------------------------------------- brute force

struct BruteForceResult {
  double optimum;    // extremum in the problem's sense
  BitString argopt;  // lexicographically smallest optimal string
  double maximum;    // global maximum of C over {0,1}^m
  double minimum;
};

inline constexpr std::size_t kDefaultEnumerationLimit = 24;

inline BruteForceResult brute_force(const CostFunction& cost, std::size_t limit = kDefaultEnumerationLimit) {
  const std::size_t m = cost.size();
  if (m > limit || m > 62) {
    throw std::invalid_argument("brute_force: size " + std::to_string(m) + " exceeds enumeration limit " +
                                std::to_string(limit));
  }
  BitString x(m);
  BruteForceResult res{0.0, BitString(m), -std::numeric_limits<double>::infinity(),
                       std::numeric_limits<double>::infinity()};
  const std::uint64_t count = std::uint64_t{1} << m;
  bool first = true;
  for (std::uint64_t k = 0; k < count; ++k) {
    // big-endian increment keeps lexicographic order
    if (k > 0) {
      std::size_t i = m;
      while (i > 0) {
        --i;
        if (x[i] == 0) {
          x[i] = 1;
          break;
        }
        x[i] = 0;
      }
    }
    const double c = cost(x);
    if (first || better(cost.sense(), c, res.optimum)) {
      res.optimum = c;
      res.argopt = x;
      first = false;
    }
    res.maximum = std::max(res.maximum, c);
    res.minimum = std::min(res.minimum, c);
  }
  return res;
}

// -------------------------------------------------------------------- json

inline nlohmann::json instance_to_json(const Instance& inst) {
  nlohmann::json j;
  std::visit(
      [&](const auto& i) {
        using T = std::decay_t<decltype(i)>;
        if constexpr (std::is_same_v<T, KnapsackInstance>) {
          j = {{"kind", "knapsack"}, {"values", i.values}, {"weights", i.weights}, {"capacity", i.capacity}};
        } else if constexpr (std::is_same_v<T, DeconflictionInstance>) {
          // 1-based (aircraft, maneuver, aircraft', maneuver') quadruples
          nlohmann::json ones = nlohmann::json::array();
          for (std::size_t a = 0; a < i.aircraft; ++a)
            for (std::size_t b = 0; b < i.maneuvers; ++b)
              for (std::size_t c = 0; c < i.aircraft; ++c)
                for (std::size_t d = 0; d < i.maneuvers; ++d)
                  if (i.conflict(a, b, c, d)) ones.push_back({a + 1, b + 1, c + 1, d + 1});
          j = {{"kind", "deconfliction"}, {"N", i.aircraft}, {"K", i.maneuvers}, {"conflicts", ones}};
        } else {
          nlohmann::json pts = nlohmann::json::array();
          for (const auto& p : i.points) pts.push_back({p.x, p.y});
          j = {{"kind", "tsp"}, {"points", pts}};
        }
      },
      inst);
  return j;
}

/// Parses an instance file. The "kind" key is optional; without it the kind
/// is inferred from the keys present.
inline Instance instance_from_json(const nlohmann::json& j) {
  ProblemKind kind;
  if (j.contains("kind")) {
    kind = parse_problem_kind(j.at("kind").get<std::string>());
  } else if (j.contains("values")) {
    kind = ProblemKind::knapsack;
  } else if (j.contains("conflicts")) {
    kind = ProblemKind::deconfliction;
  } else if (j.contains("points")) {
    kind = ProblemKind::tsp;
  } else {
    throw std::invalid_argument("instance JSON: cannot determine problem kind");
  }
  switch (kind) {
    case ProblemKind::knapsack: {
      KnapsackInstance k;
      k.values = j.at("values").get<std::vector<std::int64_t>>();
      k.weights = j.at("weights").get<std::vector<std::int64_t>>();
      k.capacity = j.at("capacity").get<std::int64_t>();
      k.validate();
      return k;
    }
    case ProblemKind::deconfliction: {
      DeconflictionInstance d;
      d.aircraft = j.at("N").get<std::size_t>();
      d.maneuvers = j.at("K").get<std::size_t>();
      d.conflicts.assign(d.size() * d.size(), 0);
      for (const auto& q : j.at("conflicts")) {
        const auto v = q.get<std::vector<std::size_t>>();
        if (v.size() != 4) throw std::invalid_argument("deconfliction: conflict entries need 4 indices");
        if (v[0] < 1 || v[0] > d.aircraft || v[2] < 1 || v[2] > d.aircraft || v[1] < 1 || v[1] > d.maneuvers ||
            v[3] < 1 || v[3] > d.maneuvers) {
          throw std::invalid_argument("deconfliction: conflict index out of range");
        }
        const std::size_t m = d.size();
        d.conflicts[((v[0] - 1) * d.maneuvers + v[1] - 1) * m + (v[2] - 1) * d.maneuvers + v[3] - 1] = 1;
      }
      d.validate();
      return d;
    }
    case ProblemKind::tsp: {
      TspInstance t;
      for (const auto& p : j.at("points")) {
        const auto xy = p.get<std::vector<double>>();
        if (xy.size() != 2) throw std::invalid_argument("tsp: points must be [x, y] pairs");
        t.points.push_back({xy[0], xy[1]});
      }
      t.validate();
      return t;
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace bbs
