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

// JSON run configuration shared by the command-line tools.
//
// Layering, lowest to highest precedence: built-in defaults, the hardware
// emulation preset (when enabled), values present in the config file, then
// command-line flags. Unknown keys are rejected at every level.
//
// {
//   "seed": 0,
//   "output": "out",
//   "hardware_emulation": false,
//   "bbs": {"updates", "samples", "lr_theta", "lr_alpha", "shift", "loop_lengths",
//           "tile_size", "backend", "gradient_scale", "common_random_numbers",
//           "max_fock_dimension"},
//   "suite": {"kind", "sizes", "instances", "algorithms", "ablations", "jobs",
//             "keep_traces", "enumeration_limit"},
//   "generator": {"value_min", "value_max", "weight_min", "weight_max",
//                 "capacity_ratio", "conflict_probability", "maneuvers"},
//   "anneal": {"t_max", "t_min"}
// }

#include "bbs/bench.hpp"

#include <nlohmann/json.hpp>

#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace bbs {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::string output = "out";
  bool hardware_emulation = false;
  BbsConfig bbs;
  ExperimentSuite suite;
  std::vector<Algorithm> algorithms{Algorithm::bbs, Algorithm::sa, Algorithm::hc};
  std::vector<Ablation> ablations{Ablation::full};

  /// Algorithm list of the suite: one BBS entry per ablation, then the baselines.
  std::vector<AlgorithmSpec> algorithm_specs() const {
    std::vector<AlgorithmSpec> out;
    for (auto a : algorithms) {
      if (a == Algorithm::bbs) {
        for (auto ab : ablations) out.push_back({Algorithm::bbs, ab});
      } else {
        out.push_back({a, Ablation::full});
      }
    }
    return out;
  }

  /// The suite with the shared fields filled in.
  ExperimentSuite materialize() const {
    ExperimentSuite s = suite;
    s.bbs = bbs;
    s.seed_base = seed;
    s.algorithms = algorithm_specs();
    return s;
  }

  void validate() const {
    try {
      bbs.validate();
      suite.anneal.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    if (suite.instances < 1) throw ConfigError("suite.instances must be >= 1");
    if (suite.jobs < 1) throw ConfigError("suite.jobs must be >= 1");
    if (algorithms.empty()) throw ConfigError("suite.algorithms must not be empty");
    if (ablations.empty()) throw ConfigError("suite.ablations must not be empty");
    const auto& g = suite.generator;
    if (g.maneuvers < 2) throw ConfigError("generator.maneuvers must be >= 2");
    if (!(g.conflict_probability >= 0.0 && g.conflict_probability <= 1.0)) {
      throw ConfigError("generator.conflict_probability must lie in [0, 1]");
    }
    if (g.knapsack.value_min < 1 || g.knapsack.value_max < g.knapsack.value_min || g.knapsack.weight_min < 1 ||
        g.knapsack.weight_max < g.knapsack.weight_min) {
      throw ConfigError("generator value and weight ranges must be positive and ordered");
    }
    if (!(g.knapsack.capacity_ratio > 0.0)) throw ConfigError("generator.capacity_ratio must be positive");
  }
};

namespace detail {

inline void reject_unknown(const nlohmann::json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : obj.items()) {
    if (!allowed.contains(k)) throw ConfigError("unknown key '" + k + "' in " + where);
  }
}

template <class T>
void read(const nlohmann::json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

}  // namespace detail

/// Overlays the values present in `j` onto `cfg`.
inline void apply_config_json(RunConfig& cfg, const nlohmann::json& j) {
  using detail::read;
  detail::reject_unknown(j, "config", {"seed", "output", "hardware_emulation", "bbs", "suite", "generator", "anneal"});
  read(j, "seed", cfg.seed, "config");
  read(j, "output", cfg.output, "config");
  read(j, "hardware_emulation", cfg.hardware_emulation, "config");

  if (j.contains("bbs")) {
    const auto& b = j.at("bbs");
    detail::reject_unknown(b, "bbs",
                           {"updates", "samples", "lr_theta", "lr_alpha", "shift", "loop_lengths", "tile_size",
                            "backend", "gradient_scale", "common_random_numbers", "max_fock_dimension"});
    read(b, "updates", cfg.bbs.updates, "bbs");
    read(b, "samples", cfg.bbs.samples, "bbs");
    read(b, "lr_theta", cfg.bbs.lr_theta, "bbs");
    read(b, "lr_alpha", cfg.bbs.lr_alpha, "bbs");
    read(b, "shift", cfg.bbs.shift, "bbs");
    read(b, "loop_lengths", cfg.bbs.loop_lengths, "bbs");
    read(b, "tile_size", cfg.bbs.tile_size, "bbs");
    read(b, "gradient_scale", cfg.bbs.gradient_scale, "bbs");
    read(b, "common_random_numbers", cfg.bbs.common_random_numbers, "bbs");
    read(b, "max_fock_dimension", cfg.bbs.max_fock_dimension, "bbs");
    if (b.contains("backend")) {
      std::string s;
      read(b, "backend", s, "bbs");
      try {
        cfg.bbs.backend = parse_sampler_backend(s);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
    }
  }

  if (j.contains("suite")) {
    const auto& s = j.at("suite");
    detail::reject_unknown(s, "suite",
                           {"kind", "sizes", "instances", "algorithms", "ablations", "jobs", "keep_traces",
                            "enumeration_limit"});
    try {
      if (s.contains("kind")) cfg.suite.kind = parse_problem_kind(s.at("kind").get<std::string>());
      if (s.contains("algorithms")) {
        cfg.algorithms.clear();
        for (const auto& a : s.at("algorithms")) cfg.algorithms.push_back(parse_algorithm(a.get<std::string>()));
      }
      if (s.contains("ablations")) {
        cfg.ablations.clear();
        for (const auto& a : s.at("ablations")) cfg.ablations.push_back(parse_ablation(a.get<std::string>()));
      }
    } catch (const nlohmann::json::exception&) {
      throw ConfigError("suite.kind, suite.algorithms and suite.ablations must be strings");
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    read(s, "sizes", cfg.suite.sizes, "suite");
    read(s, "instances", cfg.suite.instances, "suite");
    read(s, "jobs", cfg.suite.jobs, "suite");
    read(s, "keep_traces", cfg.suite.keep_traces, "suite");
    read(s, "enumeration_limit", cfg.suite.enumeration_limit, "suite");
  }

  if (j.contains("generator")) {
    const auto& g = j.at("generator");
    detail::reject_unknown(g, "generator",
                           {"value_min", "value_max", "weight_min", "weight_max", "capacity_ratio",
                            "conflict_probability", "maneuvers"});
    auto& k = cfg.suite.generator.knapsack;
    read(g, "value_min", k.value_min, "generator");
    read(g, "value_max", k.value_max, "generator");
    read(g, "weight_min", k.weight_min, "generator");
    read(g, "weight_max", k.weight_max, "generator");
    read(g, "capacity_ratio", k.capacity_ratio, "generator");
    read(g, "conflict_probability", cfg.suite.generator.conflict_probability, "generator");
    read(g, "maneuvers", cfg.suite.generator.maneuvers, "generator");
  }

  if (j.contains("anneal")) {
    const auto& a = j.at("anneal");
    detail::reject_unknown(a, "anneal", {"t_max", "t_min"});
    read(a, "t_max", cfg.suite.anneal.t_max, "anneal");
    read(a, "t_min", cfg.suite.anneal.t_min, "anneal");
  }
}

/// Replaces the BBS settings with the hardware emulation preset and uses 10
/// instances per size.
inline void apply_hardware_preset(RunConfig& cfg) {
  const auto hw = BbsConfig::hardware_emulation();
  cfg.hardware_emulation = true;
  cfg.bbs.updates = hw.updates;
  cfg.bbs.samples = hw.samples;
  cfg.bbs.loop_lengths = hw.loop_lengths;
  cfg.bbs.tile_size = hw.tile_size;
  cfg.suite.instances = 10;
}

/// Defaults, then the preset if the file or `force_hardware` asks for it,
/// then the file's own values.
inline RunConfig load_run_config(const nlohmann::json& file, bool force_hardware = false) {
  RunConfig cfg;
  bool hw = force_hardware;
  if (file.is_object() && file.contains("hardware_emulation") && file.at("hardware_emulation").is_boolean()) {
    hw = hw || file.at("hardware_emulation").get<bool>();
  }
  if (hw) apply_hardware_preset(cfg);
  if (!file.is_null()) apply_config_json(cfg, file);
  if (hw) cfg.hardware_emulation = true;
  return cfg;
}

inline nlohmann::json to_json(const RunConfig& cfg) {
  std::vector<std::string> algs;
  for (auto a : cfg.algorithms) algs.push_back(to_string(a));
  std::vector<std::string> abls;
  for (auto a : cfg.ablations) abls.push_back(to_string(a));
  const auto& g = cfg.suite.generator;
  return {{"seed", cfg.seed},
          {"output", cfg.output},
          {"hardware_emulation", cfg.hardware_emulation},
          {"bbs",
           {{"updates", cfg.bbs.updates},
            {"samples", cfg.bbs.samples},
            {"lr_theta", cfg.bbs.lr_theta},
            {"lr_alpha", cfg.bbs.lr_alpha},
            {"shift", cfg.bbs.shift},
            {"loop_lengths", cfg.bbs.loop_lengths},
            {"tile_size", cfg.bbs.tile_size},
            {"backend", to_string(cfg.bbs.backend)},
            {"gradient_scale", cfg.bbs.gradient_scale},
            {"common_random_numbers", cfg.bbs.common_random_numbers},
            {"max_fock_dimension", cfg.bbs.max_fock_dimension}}},
          {"suite",
           {{"kind", to_string(cfg.suite.kind)},
            {"sizes", cfg.suite.sizes},
            {"instances", cfg.suite.instances},
            {"algorithms", algs},
            {"ablations", abls},
            {"jobs", cfg.suite.jobs},
            {"keep_traces", cfg.suite.keep_traces},
            {"enumeration_limit", cfg.suite.enumeration_limit}}},
          {"generator",
           {{"value_min", g.knapsack.value_min},
            {"value_max", g.knapsack.value_max},
            {"weight_min", g.knapsack.weight_min},
            {"weight_max", g.knapsack.weight_max},
            {"capacity_ratio", g.knapsack.capacity_ratio},
            {"conflict_probability", g.conflict_probability},
            {"maneuvers", g.maneuvers}}},
          {"anneal", {{"t_max", cfg.suite.anneal.t_max}, {"t_min", cfg.suite.anneal.t_min}}}};
}

/// Adjusts `cfg` for a problem of `m` bits and returns the warnings to show:
/// a tile size of m or more falls back to one circuit, and loops that do not
/// fit a block are dropped for that block.
inline std::vector<std::string> fit_to_size(BbsConfig& cfg, std::size_t m) {
  std::vector<std::string> warnings;
  if (cfg.tile_size != 0 && cfg.tile_size >= m) {
    if (cfg.tile_size > m) {
      warnings.push_back("tile_size " + std::to_string(cfg.tile_size) + " exceeds problem size " + std::to_string(m) +
                         "; running untiled");
    }
    cfg.tile_size = 0;
  }
  if (cfg.loop_lengths.empty()) return warnings;
  if (cfg.tile_size == 0) {
    std::vector<std::size_t> kept;
    for (auto l : cfg.loop_lengths) {
      if (l < m) {
        kept.push_back(l);
      } else {
        warnings.push_back("loop length " + std::to_string(l) + " does not fit " + std::to_string(m) + " modes; dropped");
      }
    }
    if (kept.empty()) throw ConfigError("no loop length fits a circuit of " + std::to_string(m) + " modes");
    cfg.loop_lengths = std::move(kept);
    return warnings;
  }
  const auto plan = make_tiles(m, cfg.tile_size, cfg.loop_lengths);
  for (const auto& t : plan.tiles) {
    for (auto l : cfg.loop_lengths) {
      if (l >= t.size) {
        warnings.push_back("loop length " + std::to_string(l) + " dropped for the " + std::to_string(t.size) +
                           "-mode tile at bit " + std::to_string(t.offset + 1));
      }
    }
  }
  return warnings;
}

}  // namespace bbs
