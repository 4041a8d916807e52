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

// Budget-matched experiment suites: every algorithm sees the same instances
// and the same number of cost calls, the BBS budget bound for the size.

#include "bbs/baselines.hpp"
#include "bbs/engine.hpp"
#include "bbs/problems.hpp"
#include "bbs/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace bbs {

enum class Algorithm { bbs, sa, hc };
enum class Ablation { full, no_theta, no_all };

inline std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::bbs: return "bbs";
    case Algorithm::sa: return "sa";
    case Algorithm::hc: return "hc";
  }
  return "unknown";
}

inline Algorithm parse_algorithm(std::string_view s) {
  if (s == "bbs") return Algorithm::bbs;
  if (s == "sa") return Algorithm::sa;
  if (s == "hc") return Algorithm::hc;
  throw std::invalid_argument("unknown algorithm '" + std::string(s) + "'");
}

inline std::string to_string(Ablation a) {
  switch (a) {
    case Ablation::full: return "full";
    case Ablation::no_theta: return "no_theta";
    case Ablation::no_all: return "no_all";
  }
  return "unknown";
}

inline Ablation parse_ablation(std::string_view s) {
  if (s == "full") return Ablation::full;
  if (s == "no_theta") return Ablation::no_theta;
  if (s == "no_all") return Ablation::no_all;
  throw std::invalid_argument("unknown ablation '" + std::string(s) + "'");
}

/// Zeroes the learning rates an ablation freezes.
inline BbsConfig ablated(BbsConfig cfg, Ablation a) {
  if (a == Ablation::no_theta || a == Ablation::no_all) cfg.lr_theta = 0.0;
  if (a == Ablation::no_all) cfg.lr_alpha = 0.0;
  return cfg;
}

struct AlgorithmSpec {
  Algorithm algorithm = Algorithm::bbs;
  Ablation ablation = Ablation::full;

  std::string label() const {
    if (algorithm == Algorithm::bbs && ablation != Ablation::full) return "bbs_" + to_string(ablation);
    return to_string(algorithm);
  }
};

struct ExperimentSuite {
  ProblemKind kind = ProblemKind::knapsack;
  std::vector<std::size_t> sizes;
  std::size_t instances = 100;
  std::vector<AlgorithmSpec> algorithms;
  BbsConfig bbs;
  GeneratorConfig generator;
  AnnealSchedule anneal;
  std::uint64_t seed_base = 0;
  std::size_t jobs = 1;
  bool keep_traces = false;
  std::size_t enumeration_limit = kDefaultEnumerationLimit;
};

inline constexpr double kTspRelativeTolerance = 1e-9;

/// Raised for the degenerate denominators of relative_error.
class DegenerateMetricError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// |(C_opt - C_alg) / C_opt| for knapsack and TSP; for deconfliction
/// |(C_alg - C_opt) / (C_max - C_opt)|.
inline double relative_error(ProblemKind kind, double c_alg, double c_opt, double c_max = 0.0) {
  if (c_alg == c_opt) return 0.0;
  if (kind == ProblemKind::deconfliction) {
    if (c_max == c_opt) throw DegenerateMetricError("relative_error: C_max equals C_opt");
    return std::abs((c_alg - c_opt) / (c_max - c_opt));
  }
  if (c_opt == 0.0) throw DegenerateMetricError("relative_error: C_opt is zero");
  return std::abs((c_opt - c_alg) / c_opt);
}

/// Exact equality for integer-valued costs, 1e-9 relative for TSP.
inline bool is_optimal(ProblemKind kind, double c_alg, double c_opt) {
  if (integer_valued(kind)) return c_alg == c_opt;
  return std::abs(c_alg - c_opt) <= kTspRelativeTolerance * std::max(std::abs(c_opt), 1e-300);
}

struct InstanceRecord {
  std::size_t instance_id = 0;
  ProblemKind kind = ProblemKind::knapsack;
  std::size_t size = 0;
  std::string algorithm;
  double c_alg = 0.0;
  double c_opt = 0.0;
  double delta = 1.0;
  bool optimal_found = false;
  std::uint64_t calls = 0;
  std::uint64_t seed = 0;
  std::string error;  // empty when the run completed

  friend bool operator==(const InstanceRecord&, const InstanceRecord&) = default;
};

struct MetricsRow {
  ProblemKind kind = ProblemKind::knapsack;
  std::size_t size = 0;
  std::string algorithm;
  double percent_optimal = 0.0;
  double avg_percent_error = 0.0;
  std::vector<InstanceRecord> records;

  friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

struct CombinedRow {
  ProblemKind kind = ProblemKind::knapsack;
  std::size_t size = 0;
  std::vector<std::string> algorithms;
  double percent_optimal = 0.0;

  friend bool operator==(const CombinedRow&, const CombinedRow&) = default;
};

struct TraceEntry {
  std::size_t size;
  std::size_t instance_id;
  std::string algorithm;
  TrainingTrace trace;
};

struct SuiteResult {
  std::vector<MetricsRow> rows;
  std::vector<CombinedRow> combined;
  std::map<std::size_t, std::uint64_t> budgets;  // per size
  std::vector<TraceEntry> traces;
};

inline MetricsRow aggregate(ProblemKind kind, std::size_t size, std::string algorithm,
                            std::vector<InstanceRecord> records) {
  MetricsRow row{kind, size, std::move(algorithm), 0.0, 0.0, std::move(records)};
  if (row.records.empty()) return row;
  std::size_t hits = 0;
  double delta_sum = 0.0;
  for (const auto& r : row.records) {
    hits += r.optimal_found ? 1 : 0;
    delta_sum += r.delta;
  }
  const auto n = static_cast<double>(row.records.size());
  row.percent_optimal = 100.0 * static_cast<double>(hits) / n;
  row.avg_percent_error = 100.0 * delta_sum / n;
  return row;
}

/// Percentage of instances on which at least one of the rows hit the optimum.
inline double overlap_analysis(const std::vector<const MetricsRow*>& rows) {
  if (rows.empty()) throw std::invalid_argument("overlap_analysis: no result sets");
  const auto& first = rows.front()->records;
  for (const auto* r : rows) {
    if (r->records.size() != first.size()) throw std::invalid_argument("overlap_analysis: instance sets differ");
    for (std::size_t i = 0; i < first.size(); ++i) {
      if (r->records[i].instance_id != first[i].instance_id) {
        throw std::invalid_argument("overlap_analysis: instance sets differ");
      }
    }
  }
  if (first.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < first.size(); ++i) {
    bool any = false;
    for (const auto* r : rows) any = any || r->records[i].optimal_found;
    hits += any ? 1 : 0;
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(first.size());
}

inline double overlap_analysis(const MetricsRow& a, const MetricsRow& b) { return overlap_analysis({&a, &b}); }

namespace detail {

struct InstanceOutcome {
  std::vector<InstanceRecord> records;  // one per algorithm
  std::vector<TraceEntry> traces;
};

inline InstanceOutcome run_instance(const ExperimentSuite& suite, std::size_t size, std::size_t id,
                                    std::uint64_t budget) {
  InstanceOutcome out;
  const auto kind_tag = static_cast<std::uint64_t>(suite.kind);
  std::optional<CostFunction> cost;
  std::optional<BruteForceResult> oracle;
  std::string setup_error;
  try {
    Rng gen_rng(derive_seed(suite.seed_base, {kind_tag, size, id}));
    cost.emplace(make_cost_function(generate_instance(suite.kind, size, gen_rng, suite.generator)));
    oracle.emplace(brute_force(*cost, suite.enumeration_limit));
  } catch (const std::exception& e) {
    setup_error = e.what();
  }

  for (std::size_t a = 0; a < suite.algorithms.size(); ++a) {
    const auto& spec = suite.algorithms[a];
    InstanceRecord rec;
    rec.instance_id = id;
    rec.kind = suite.kind;
    rec.size = size;
    rec.algorithm = spec.label();
    rec.seed = derive_seed(suite.seed_base, {kind_tag, size, id, a + 1});
    if (!setup_error.empty()) {
      rec.error = setup_error;
      rec.delta = 1.0;
      out.records.push_back(std::move(rec));
      continue;
    }
    rec.c_opt = oracle->optimum;
    try {
      switch (spec.algorithm) {
        case Algorithm::bbs: {
          auto cfg = ablated(suite.bbs, spec.ablation);
          cfg.seed = rec.seed;
          auto res = run_bbs(*cost, cfg);
          rec.c_alg = res.best_cost;
          rec.calls = res.calls;
          if (suite.keep_traces) out.traces.push_back({size, id, rec.algorithm, std::move(res.trace)});
          break;
        }
        case Algorithm::sa: {
          Rng rng(rec.seed);
          auto res = simulated_anneal(*cost, budget, suite.anneal, rng, rec.seed);
          rec.c_alg = res.best_cost;
          rec.calls = res.calls;
          break;
        }
        case Algorithm::hc: {
          Rng rng(rec.seed);
          auto res = hill_climb(*cost, budget, rng, rec.seed);
          rec.c_alg = res.best_cost;
          rec.calls = res.calls;
          break;
        }
      }
      rec.optimal_found = is_optimal(suite.kind, rec.c_alg, rec.c_opt);
      rec.delta = rec.optimal_found ? 0.0 : relative_error(suite.kind, rec.c_alg, rec.c_opt, oracle->maximum);
    } catch (const std::exception& e) {
      rec.error = e.what();
      rec.delta = 1.0;
      rec.optimal_found = false;
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

}  // namespace detail

/// Generates the instances, solves each exactly, runs every algorithm with
/// the matched budget and aggregates per (size, algorithm). Work is spread
/// over `jobs` threads; results are folded in instance order.
inline SuiteResult run_suite(const ExperimentSuite& suite) {
  if (suite.algorithms.empty()) throw std::invalid_argument("run_suite: no algorithms");
  suite.bbs.validate();
  suite.anneal.validate();
  SuiteResult result;

  struct Task {
    std::size_t size_index;
    std::size_t id;
  };
  std::vector<Task> tasks;
  for (std::size_t s = 0; s < suite.sizes.size(); ++s) {
    result.budgets[suite.sizes[s]] = budget_bound(suite.sizes[s], suite.bbs);
    for (std::size_t i = 0; i < suite.instances; ++i) tasks.push_back({s, i});
  }

  std::vector<detail::InstanceOutcome> outcomes(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < tasks.size(); t = next++) {
      const auto size = suite.sizes[tasks[t].size_index];
      outcomes[t] = detail::run_instance(suite, size, tasks[t].id, result.budgets.at(size));
    }
  };
  const std::size_t jobs = std::max<std::size_t>(1, std::min(suite.jobs, tasks.size()));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::size_t t = 0;
  for (std::size_t s = 0; s < suite.sizes.size(); ++s) {
    std::vector<std::vector<InstanceRecord>> per_alg(suite.algorithms.size());
    for (std::size_t i = 0; i < suite.instances; ++i, ++t) {
      for (std::size_t a = 0; a < suite.algorithms.size(); ++a) per_alg[a].push_back(outcomes[t].records[a]);
      for (auto& tr : outcomes[t].traces) result.traces.push_back(std::move(tr));
    }
    const std::size_t first_row = result.rows.size();
    for (std::size_t a = 0; a < suite.algorithms.size(); ++a) {
      result.rows.push_back(aggregate(suite.kind, suite.sizes[s], suite.algorithms[a].label(), std::move(per_alg[a])));
    }
    if (suite.algorithms.size() >= 2) {
      CombinedRow c{suite.kind, suite.sizes[s], {}, 0.0};
      std::vector<const MetricsRow*> rows;
      for (std::size_t r = first_row; r < result.rows.size(); ++r) {
        rows.push_back(&result.rows[r]);
        c.algorithms.push_back(result.rows[r].algorithm);
      }
      c.percent_optimal = overlap_analysis(rows);
      result.combined.push_back(std::move(c));
    }
  }
  return result;
}

/// One-sided exact sign test p-value for "a tends to be smaller than b" over
/// paired samples; ties are dropped. Returns 1 when every pair ties.
inline double paired_sign_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("paired_sign_test: length mismatch");
  std::size_t wins = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == b[i]) continue;
    ++n;
    if (a[i] < b[i]) ++wins;
  }
  if (n == 0) return 1.0;
  // P(X >= wins), X ~ Binomial(n, 1/2)
  double p = 0.0;
  for (std::size_t k = wins; k <= n; ++k) {
    p += std::exp(std::lgamma(static_cast<double>(n) + 1) - std::lgamma(static_cast<double>(k) + 1) -
                  std::lgamma(static_cast<double>(n - k) + 1) - static_cast<double>(n) * std::log(2.0));
  }
  return std::min(1.0, p);
}

// ------------------------------------------------------------------ report

inline void to_json(nlohmann::json& j, const InstanceRecord& r) {
  j = {{"instance_id", r.instance_id}, {"kind", to_string(r.kind)}, {"size", r.size},
       {"algorithm", r.algorithm},     {"C_alg", r.c_alg},            {"C_opt", r.c_opt},
       {"delta", r.delta},             {"optimal_found", r.optimal_found}, {"calls", r.calls},
       {"seed", r.seed},               {"error", r.error}};
}

inline void from_json(const nlohmann::json& j, InstanceRecord& r) {
  r.instance_id = j.at("instance_id").get<std::size_t>();
  r.kind = parse_problem_kind(j.at("kind").get<std::string>());
  r.size = j.at("size").get<std::size_t>();
  r.algorithm = j.at("algorithm").get<std::string>();
  r.c_alg = j.at("C_alg").get<double>();
  r.c_opt = j.at("C_opt").get<double>();
  r.delta = j.at("delta").get<double>();
  r.optimal_found = j.at("optimal_found").get<bool>();
  r.calls = j.at("calls").get<std::uint64_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.error = j.at("error").get<std::string>();
}

inline void to_json(nlohmann::json& j, const MetricsRow& r) {
  j = {{"kind", to_string(r.kind)},
       {"size", r.size},
       {"algorithm", r.algorithm},
       {"percent_optimal", r.percent_optimal},
       {"avg_percent_error", r.avg_percent_error},
       {"records", r.records}};
}

inline void from_json(const nlohmann::json& j, MetricsRow& r) {
  r.kind = parse_problem_kind(j.at("kind").get<std::string>());
  r.size = j.at("size").get<std::size_t>();
  r.algorithm = j.at("algorithm").get<std::string>();
  r.percent_optimal = j.at("percent_optimal").get<double>();
  r.avg_percent_error = j.at("avg_percent_error").get<double>();
  r.records = j.at("records").get<std::vector<InstanceRecord>>();
}

inline void to_json(nlohmann::json& j, const CombinedRow& r) {
  j = {{"kind", to_string(r.kind)},
       {"size", r.size},
       {"algorithms", r.algorithms},
       {"combined_percent_optimal", r.percent_optimal}};
}

inline void from_json(const nlohmann::json& j, CombinedRow& r) {
  r.kind = parse_problem_kind(j.at("kind").get<std::string>());
  r.size = j.at("size").get<std::size_t>();
  r.algorithms = j.at("algorithms").get<std::vector<std::string>>();
  r.percent_optimal = j.at("combined_percent_optimal").get<double>();
}

inline nlohmann::json summary_json(const SuiteResult& res) {
  nlohmann::json budgets = nlohmann::json::object();
  for (const auto& [size, b] : res.budgets) budgets[std::to_string(size)] = b;
  return {{"rows", res.rows},
          {"combined", res.combined},
          {"budgets", budgets},
          {"tsp_relative_tolerance", kTspRelativeTolerance},
          {"scaled_down", std::none_of(res.budgets.begin(), res.budgets.end(),
                                       [](const auto& kv) { return kv.first >= 25; })}};
}

inline std::vector<MetricsRow> parse_summary_rows(const nlohmann::json& j) {
  return j.at("rows").get<std::vector<MetricsRow>>();
}

inline void write_results_csv(const std::vector<MetricsRow>& rows, std::ostream& os) {
  os << "instance_id,kind,size,algorithm,C_alg,C_opt,delta,optimal_found,calls,seed\n";
  for (const auto& row : rows) {
    for (const auto& r : row.records) {
      os << r.instance_id << ',' << to_string(r.kind) << ',' << r.size << ',' << r.algorithm << ','
         << format_double(r.c_alg) << ',' << format_double(r.c_opt) << ',' << format_double(r.delta) << ','
         << (r.optimal_found ? 1 : 0) << ',' << r.calls << ',' << r.seed << '\n';
    }
  }
}

/// Writes results.csv, summary.json and, when traces were kept,
/// traces/trace_<size>_<instance>_<algorithm>.csv under `dir`.
inline void emit_report(const SuiteResult& res, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
  auto open = [](const fs::path& p) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + p.string() + " for writing");
    return f;
  };
  {
    auto f = open(dir / "results.csv");
    write_results_csv(res.rows, f);
  }
  {
    auto f = open(dir / "summary.json");
    f << summary_json(res).dump(2) << '\n';
  }
  if (!res.traces.empty()) {
    fs::create_directories(dir / "traces", ec);
    if (ec) throw std::runtime_error("cannot create trace directory: " + ec.message());
    for (const auto& t : res.traces) {
      auto f = open(dir / "traces" /
                    ("trace_" + std::to_string(t.size) + "_" + std::to_string(t.instance_id) + "_" + t.algorithm + ".csv"));
      t.trace.write_csv(f);
    }
  }
}

/// Percent optimal and average percent error per algorithm and size, plus the
/// combined column when several algorithms ran.
inline void print_table(const SuiteResult& res, std::ostream& os) {
  os << std::left << std::setw(14) << "kind" << std::setw(6) << "size" << std::setw(16) << "algorithm" << std::right
     << std::setw(11) << "% optimal" << std::setw(14) << "avg % error" << std::setw(12) << "calls<=" << '\n';
  for (const auto& r : res.rows) {
    os << std::left << std::setw(14) << to_string(r.kind) << std::setw(6) << r.size << std::setw(16) << r.algorithm
       << std::right << std::fixed << std::setprecision(1) << std::setw(11) << r.percent_optimal << std::setprecision(2)
       << std::setw(14) << r.avg_percent_error << std::setw(12) << res.budgets.at(r.size) << '\n';
  }
  for (const auto& c : res.combined) {
    os << std::left << std::setw(14) << to_string(c.kind) << std::setw(6) << c.size << std::setw(16) << "combined"
       << std::right << std::fixed << std::setprecision(1) << std::setw(11) << c.percent_optimal << '\n';
  }
  os.unsetf(std::ios::floatfield);
}

}  // namespace bbs
