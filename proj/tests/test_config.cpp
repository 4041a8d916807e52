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

#include "bbs/config.hpp"

#include <gtest/gtest.h>

namespace {

using nlohmann::json;

TEST(Config, DefaultsValidate) {
  const auto cfg = bbs::load_run_config(json(nullptr));
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(cfg.bbs.updates, 200u);
  EXPECT_EQ(cfg.bbs.samples, 50u);
  EXPECT_EQ(cfg.suite.instances, 100u);
}

TEST(Config, FileValuesApply) {
  const auto cfg = bbs::load_run_config(json::parse(R"({
    "seed": 9,
    "bbs": {"updates": 10, "loop_lengths": [1, 3], "backend": "permanent"},
    "suite": {"kind": "tsp", "sizes": [10], "algorithms": ["bbs", "sa"], "ablations": ["full", "no_all"]},
    "generator": {"conflict_probability": 0.5},
    "anneal": {"t_max": 100.0}
  })"));
  EXPECT_EQ(cfg.seed, 9u);
  EXPECT_EQ(cfg.bbs.updates, 10u);
  EXPECT_EQ(cfg.bbs.backend, bbs::SamplerBackend::permanent);
  EXPECT_EQ(cfg.suite.kind, bbs::ProblemKind::tsp);
  EXPECT_EQ(cfg.suite.generator.conflict_probability, 0.5);
  EXPECT_EQ(cfg.suite.anneal.t_max, 100.0);
  const auto suite = cfg.materialize();
  ASSERT_EQ(suite.algorithms.size(), 3u);
  EXPECT_EQ(suite.algorithms[1].label(), "bbs_no_all");
  EXPECT_EQ(suite.algorithms[2].label(), "sa");
  EXPECT_EQ(suite.seed_base, 9u);
}

TEST(Config, UnknownKeysRejected) {
  EXPECT_THROW(bbs::load_run_config(json::parse(R"({"sead": 1})")), bbs::ConfigError);
  EXPECT_THROW(bbs::load_run_config(json::parse(R"({"bbs": {"update": 1}})")), bbs::ConfigError);
  EXPECT_THROW(bbs::load_run_config(json::parse(R"({"suite": {"kind": "maxcut"}})")), bbs::ConfigError);
  EXPECT_THROW(bbs::load_run_config(json::parse(R"({"bbs": {"updates": "many"}})")), bbs::ConfigError);
}

TEST(Config, ImpossibleValuesRejected) {
  auto cfg = bbs::load_run_config(json::parse(R"({"bbs": {"shift": 4.0}})"));
  EXPECT_THROW(cfg.validate(), bbs::ConfigError);
  cfg = bbs::load_run_config(json::parse(R"({"anneal": {"t_max": 1.0, "t_min": 2.0}})"));
  EXPECT_THROW(cfg.validate(), bbs::ConfigError);
  cfg = bbs::load_run_config(json::parse(R"({"generator": {"maneuvers": 1}})"));
  EXPECT_THROW(cfg.validate(), bbs::ConfigError);
}

TEST(Config, HardwarePresetThenFileValues) {
  auto cfg = bbs::load_run_config(json(nullptr), true);
  EXPECT_EQ(cfg.bbs.updates, 50u);
  EXPECT_EQ(cfg.bbs.samples, 20u);
  EXPECT_EQ(cfg.bbs.tile_size, 8u);
  EXPECT_EQ(cfg.bbs.loop_lengths, (std::vector<std::size_t>{1}));
  EXPECT_EQ(cfg.suite.instances, 10u);
  cfg = bbs::load_run_config(json::parse(R"({"hardware_emulation": true, "bbs": {"samples": 5}})"));
  EXPECT_EQ(cfg.bbs.updates, 50u);
  EXPECT_EQ(cfg.bbs.samples, 5u);
}

TEST(Config, RoundTrip) {
  auto cfg = bbs::load_run_config(json::parse(R"({"seed": 3, "bbs": {"tile_size": 4}})"));
  const auto again = bbs::load_run_config(bbs::to_json(cfg));
  EXPECT_EQ(bbs::to_json(again), bbs::to_json(cfg));
}

TEST(FitToSize, ClampsTileSize) {
  bbs::BbsConfig c;
  c.tile_size = 20;
  const auto w = bbs::fit_to_size(c, 12);
  EXPECT_EQ(c.tile_size, 0u);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_NE(w[0].find("tile_size 20"), std::string::npos);
}

TEST(FitToSize, DropsLoopsPerTile) {
  bbs::BbsConfig c;
  c.tile_size = 8;
  c.loop_lengths = {1, 3};
  const auto w = bbs::fit_to_size(c, 10);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_NE(w[0].find("loop length 3"), std::string::npos);
  bbs::BbsConfig u;
  u.loop_lengths = {1, 9};
  EXPECT_EQ(bbs::fit_to_size(u, 6).size(), 1u);
  EXPECT_EQ(u.loop_lengths, (std::vector<std::size_t>{1}));
}

}  // namespace
