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

// bbs: generate instances, solve them, run benchmark suites and export
// training traces.

#include "bbs/bbs.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  bool hardware = false;
};

/// Flags that may override BBS settings from the config file.
struct BbsFlags {
  std::optional<std::size_t> updates;
  std::optional<std::size_t> samples;
  std::optional<double> lr_theta;
  std::optional<double> lr_alpha;
  std::optional<double> shift;
  std::vector<std::size_t> loops;
  std::optional<std::size_t> tile_size;
  std::optional<std::string> backend;
  bool crn = false;

  void add_to(CLI::App* app) {
    app->add_option("--n,--updates", updates, "BBS update steps N");
    app->add_option("--s,--samples", samples, "samples per expectation S");
    app->add_option("--lr-theta", lr_theta, "angle learning rate");
    app->add_option("--lr-alpha", lr_alpha, "flip-parameter learning rate");
    app->add_option("--shift", shift, "shift-rule angle phi, in (0, pi)");
    app->add_option("--loops", loops, "delay loop lengths")->delimiter(',');
    app->add_option("--tile-size", tile_size, "modes per tile (0: untiled)");
    app->add_option("--backend", backend, "statevector or permanent");
    app->add_flag("--crn", crn, "share flip draws between the two sides of each flip gradient");
  }

  void apply(bbs::BbsConfig& c) const {
    if (updates) c.updates = *updates;
    if (samples) c.samples = *samples;
    if (lr_theta) c.lr_theta = *lr_theta;
    if (lr_alpha) c.lr_alpha = *lr_alpha;
    if (shift) c.shift = *shift;
    if (!loops.empty()) c.loop_lengths = loops;
    if (tile_size) c.tile_size = *tile_size;
    if (backend) c.backend = bbs::parse_sampler_backend(*backend);
    if (crn) c.common_random_numbers = true;
  }
};

json read_json_file(const fs::path& p) {
  std::ifstream f(p);
  if (!f) throw std::runtime_error("cannot open " + p.string());
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(p.string() + ": " + e.what());
  }
}

void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + p.string() + " for writing");
  f << text;
}

/// Defaults, preset, config file, BBS_SEED when the file has no seed, then --seed.
bbs::RunConfig base_config(const Common& c) {
  json file = c.config_path.empty() ? json(nullptr) : read_json_file(c.config_path);
  auto cfg = bbs::load_run_config(file, c.hardware);
  const bool file_seed = file.is_object() && file.contains("seed");
  if (!file_seed) {
    if (const char* env = std::getenv("BBS_SEED")) {
      try {
        cfg.seed = std::stoull(env);
      } catch (const std::exception&) {
        throw bbs::ConfigError(std::string("BBS_SEED is not an unsigned integer: ") + env);
      }
    }
  }
  if (c.seed) cfg.seed = *c.seed;
  return cfg;
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_path, "JSON config file")->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "random seed (default: config file, then BBS_SEED, then 0)");
  app->add_flag("--hardware-emulation", c.hardware, "one loop of length 1 on 8-mode tiles, N=50, S=20");
}

void print_dry_run(std::size_t m, const bbs::BbsConfig& cfg, std::ostream& os) {
  const auto plan = bbs::plan_for(m, cfg);
  os << "size " << m << ": budget_bound " << bbs::budget_bound(plan, cfg.updates, cfg.samples) << ", tiles";
  for (const auto& t : plan.tiles) {
    const auto photons = bbs::alternating_input(t.size).photons();
    os << " [" << t.size << " modes, " << t.layout.coupler_count() << " couplers, fock_dimension "
       << bbs::fock_dimension(t.size, static_cast<std::size_t>(photons)) << "]";
  }
  os << '\n';
}

// ---------------------------------------------------------------------- gen

struct GenArgs {
  std::string kind;
  std::size_t size = 0;
  std::size_t count = 1;
  std::optional<std::size_t> points;
  std::optional<std::size_t> aircraft;
  std::optional<std::size_t> maneuvers;
  std::optional<double> conflict_probability;
  std::string out = ".";
};

int cmd_gen(const Common& common, GenArgs& a) {
  auto cfg = base_config(common);
  auto kind = bbs::parse_problem_kind(a.kind);
  if (a.maneuvers) cfg.suite.generator.maneuvers = *a.maneuvers;
  if (a.conflict_probability) cfg.suite.generator.conflict_probability = *a.conflict_probability;
  cfg.validate();
  std::size_t size = a.size;
  if (kind == bbs::ProblemKind::tsp && a.points) size = bbs::tsp_bits(*a.points);
  if (kind == bbs::ProblemKind::deconfliction && a.aircraft) size = *a.aircraft * cfg.suite.generator.maneuvers;
  if (size == 0) throw bbs::ConfigError("gen: give a size (or --points / --aircraft)");
  fs::create_directories(a.out);
  for (std::size_t i = 0; i < a.count; ++i) {
    bbs::Rng rng(bbs::derive_seed(cfg.seed, {static_cast<std::uint64_t>(kind), size, i}));
    const auto inst = bbs::generate_instance(kind, size, rng, cfg.suite.generator);
    const auto path = fs::path(a.out) / (bbs::to_string(kind) + "_" + std::to_string(size) + "_" + std::to_string(i) + ".json");
    write_text(path, bbs::instance_to_json(inst).dump(2) + "\n");
    std::cout << path.string() << '\n';
  }
  return 0;
}

// -------------------------------------------------------------------- solve

struct SolveArgs {
  std::string instance;
  std::string alg = "bbs";
  std::string ablate = "full";
  std::optional<std::uint64_t> budget;
  std::string out;
  std::string trace;
  bool dry_run = false;
  BbsFlags flags;
};

int cmd_solve(const Common& common, SolveArgs& a) {
  auto cfg = base_config(common);
  a.flags.apply(cfg.bbs);
  cfg.validate();
  const auto inst = bbs::instance_from_json(read_json_file(a.instance));
  const auto cost = bbs::make_cost_function(inst);
  const auto m = cost.size();
  for (const auto& w : bbs::fit_to_size(cfg.bbs, m)) std::cerr << "warning: " << w << '\n';
  const auto alg = bbs::parse_algorithm(a.alg);
  auto bbs_cfg = bbs::ablated(cfg.bbs, bbs::parse_ablation(a.ablate));
  bbs_cfg.seed = cfg.seed;
  const auto bound = bbs::budget_bound(m, bbs_cfg);
  if (a.dry_run) {
    print_dry_run(m, bbs_cfg, std::cout);
    return 0;
  }

  json result;
  std::optional<bbs::TrainingTrace> trace;
  switch (alg) {
    case bbs::Algorithm::bbs: {
      auto res = bbs::run_bbs(cost, bbs_cfg);
      result = bbs::to_json(res);
      trace = std::move(res.trace);
      break;
    }
    case bbs::Algorithm::sa: {
      bbs::Rng rng(cfg.seed);
      result = bbs::to_json(bbs::simulated_anneal(cost, a.budget.value_or(bound), cfg.suite.anneal, rng, cfg.seed),
                            a.budget.value_or(bound));
      break;
    }
    case bbs::Algorithm::hc: {
      bbs::Rng rng(cfg.seed);
      result = bbs::to_json(bbs::hill_climb(cost, a.budget.value_or(bound), rng, cfg.seed), a.budget.value_or(bound));
      break;
    }
  }
  result["algorithm"] = bbs::AlgorithmSpec{alg, bbs::parse_ablation(a.ablate)}.label();
  result["kind"] = bbs::to_string(cost.kind());
  if (!a.out.empty()) write_text(a.out, result.dump(2) + "\n");
  if (!a.trace.empty()) {
    if (!trace) throw bbs::ConfigError("--trace is only available for --alg bbs");
    std::ostringstream os;
    trace->write_csv(os);
    write_text(a.trace, os.str());
  }
  std::cout << result.dump(2) << '\n';
  return 0;
}

// -------------------------------------------------------------------- bench

struct BenchArgs {
  std::optional<std::string> kind;
  std::vector<std::size_t> sizes;
  std::optional<std::size_t> instances;
  std::vector<std::string> algs;
  std::vector<std::string> ablations;
  std::optional<std::size_t> jobs;
  std::optional<std::string> out;
  bool traces = false;
  bool dry_run = false;
  BbsFlags flags;
};

int cmd_bench(const Common& common, BenchArgs& a, bool ablation_mode) {
  auto cfg = base_config(common);
  if (ablation_mode) {
    cfg.algorithms = {bbs::Algorithm::bbs};
    cfg.ablations = {bbs::Ablation::full, bbs::Ablation::no_theta, bbs::Ablation::no_all};
  }
  a.flags.apply(cfg.bbs);
  if (a.kind) cfg.suite.kind = bbs::parse_problem_kind(*a.kind);
  if (!a.sizes.empty()) cfg.suite.sizes = a.sizes;
  if (a.instances) cfg.suite.instances = *a.instances;
  if (!a.algs.empty()) {
    cfg.algorithms.clear();
    for (const auto& s : a.algs) cfg.algorithms.push_back(bbs::parse_algorithm(s));
  }
  if (!a.ablations.empty()) {
    cfg.ablations.clear();
    for (const auto& s : a.ablations) cfg.ablations.push_back(bbs::parse_ablation(s));
  }
  if (a.jobs) cfg.suite.jobs = *a.jobs;
  if (a.out) cfg.output = *a.out;
  if (a.traces) cfg.suite.keep_traces = true;
  cfg.validate();
  if (cfg.suite.sizes.empty()) throw bbs::ConfigError("bench: no sizes given (--sizes or suite.sizes)");
  for (auto m : cfg.suite.sizes) {
    auto copy = cfg.bbs;
    for (const auto& w : bbs::fit_to_size(copy, m)) std::cerr << "warning: " << w << '\n';
  }
  if (a.dry_run) {
    for (auto m : cfg.suite.sizes) print_dry_run(m, cfg.bbs, std::cout);
    return 0;
  }
  const auto suite = cfg.materialize();
  const auto res = bbs::run_suite(suite);
  bbs::emit_report(res, cfg.output);
  write_text(fs::path(cfg.output) / "config.json", bbs::to_json(cfg).dump(2) + "\n");
  bbs::print_table(res, std::cout);
  std::size_t failures = 0;
  for (const auto& row : res.rows) {
    for (const auto& r : row.records) {
      if (!r.error.empty()) {
        ++failures;
        std::cerr << "instance " << r.instance_id << " size " << r.size << " " << r.algorithm << ": " << r.error << '\n';
      }
    }
  }
  if (failures) std::cerr << failures << " run(s) failed and were scored with delta 1\n";
  std::cout << "wrote " << (fs::path(cfg.output) / "summary.json").string() << '\n';
  return 0;
}

// -------------------------------------------------------------------- trace

struct TraceArgs {
  std::string run_dir;
  std::string out;
};

/// Concatenates traces/trace_<size>_<id>_<alg>.csv into one long table.
int cmd_trace(TraceArgs& a) {
  const auto dir = fs::path(a.run_dir) / "traces";
  if (!fs::is_directory(dir)) throw std::runtime_error(dir.string() + " not found (run bench with --traces)");
  const std::regex name(R"(trace_(\d+)_(\d+)_(\w+)\.csv)");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (std::regex_match(e.path().filename().string(), name)) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::ostringstream os;
  os << "size,instance_id,algorithm,step,loss,best_cost\n";
  for (const auto& p : files) {
    std::smatch mt;
    const auto fname = p.filename().string();
    std::regex_match(fname, mt, name);
    std::ifstream f(p);
    std::string line;
    std::getline(f, line);  // header
    while (std::getline(f, line)) {
      if (line.empty()) continue;
      std::size_t cut = 0;
      for (int k = 0; k < 3 && cut != std::string::npos; ++k) cut = line.find(',', cut + (k ? 1 : 0));
      os << mt[1] << ',' << mt[2] << ',' << mt[3] << ',' << line.substr(0, cut) << '\n';
    }
  }
  if (a.out.empty()) {
    std::cout << os.str();
  } else {
    write_text(a.out, os.str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bosonic Binary Solver: variational optimization with a simulated time-bin boson sampler"};
  app.require_subcommand(1);
  Common common;

  auto* gen = app.add_subcommand("gen", "write random problem instances as JSON");
  GenArgs gen_args;
  add_common(gen, common);
  gen->add_option("kind", gen_args.kind, "knapsack, deconfliction or tsp")->required();
  gen->add_option("size", gen_args.size, "bit length m");
  gen->add_option("count", gen_args.count, "number of instances");
  gen->add_option("--points", gen_args.points, "TSP point count n (sets m)");
  gen->add_option("--aircraft", gen_args.aircraft, "deconfliction aircraft N (sets m = N K)");
  gen->add_option("--maneuvers", gen_args.maneuvers, "deconfliction maneuvers per aircraft K");
  gen->add_option("--conflict-probability", gen_args.conflict_probability, "deconfliction Bernoulli bias");
  gen->add_option("--out", gen_args.out, "output directory");

  auto* solve = app.add_subcommand("solve", "run one algorithm on an instance file");
  SolveArgs solve_args;
  add_common(solve, common);
  solve->add_option("instance", solve_args.instance, "instance JSON")->required()->check(CLI::ExistingFile);
  solve->add_option("--alg", solve_args.alg, "bbs, sa or hc");
  solve->add_option("--ablate", solve_args.ablate, "full, no_theta or no_all");
  solve->add_option("--budget", solve_args.budget, "baseline call budget (default: the BBS budget bound)");
  solve->add_option("--out", solve_args.out, "write the result JSON here");
  solve->add_option("--trace", solve_args.trace, "write the BBS training trace CSV here");
  solve->add_flag("--dry-run", solve_args.dry_run, "print the budget bound and Fock dimensions only");
  solve_args.flags.add_to(solve);

  BenchArgs bench_args;
  auto setup_bench = [&](CLI::App* b) {
    add_common(b, common);
    b->add_option("--kind", bench_args.kind, "problem kind");
    b->add_option("--sizes", bench_args.sizes, "bit lengths")->delimiter(',');
    b->add_option("--instances", bench_args.instances, "instances per size");
    b->add_option("--alg", bench_args.algs, "algorithms (bbs, sa, hc)")->delimiter(',');
    b->add_option("--ablate", bench_args.ablations, "BBS ablations (full, no_theta, no_all)")->delimiter(',');
    b->add_option("--jobs", bench_args.jobs, "concurrent instance runs");
    b->add_option("--out", bench_args.out, "output directory");
    b->add_flag("--traces", bench_args.traces, "write per-run training traces");
    b->add_flag("--dry-run", bench_args.dry_run, "print budget bounds and Fock dimensions only");
    bench_args.flags.add_to(b);
  };
  auto* bench = app.add_subcommand("bench", "run a budget-matched comparison suite");
  setup_bench(bench);
  auto* ablate = app.add_subcommand("ablate", "bench with the full, no_theta and no_all BBS variants");
  setup_bench(ablate);

  auto* trace = app.add_subcommand("trace", "collect the training traces of a bench run into one CSV");
  TraceArgs trace_args;
  trace->add_option("run_dir", trace_args.run_dir, "bench output directory")->required();
  trace->add_option("--out", trace_args.out, "output CSV (default: stdout)");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*gen) return cmd_gen(common, gen_args);
    if (*solve) return cmd_solve(common, solve_args);
    if (*bench) return cmd_bench(common, bench_args, false);
    if (*ablate) return cmd_bench(common, bench_args, true);
    if (*trace) return cmd_trace(trace_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
