// Copyright 2026 The HCRMP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// hcrmp train|eval [flags]
//
// Settings are resolved in order: built-in defaults, then --config file,
// then explicit command-line flags.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hcrmp/harness.hpp"

namespace {

struct FlagSet {
  std::string config;
  std::string scenario, density, hint_mode, out, checkpoint, corpus;
  long long seed = 0, steps = 0, episodes = 0;
  bool sync = false;
  bool verbose = false;
};

void add_common(CLI::App* cmd, FlagSet& f) {
  cmd->add_option("--config", f.config, "flat key = value config file");
  cmd->add_option("--scenario", f.scenario, "overtaking | merging | trilemma | occluded_pedestrian");
  cmd->add_option("--density", f.density, "low | medium | high");
  cmd->add_option("--seed", f.seed, "run seed");
  cmd->add_option("--hint-mode", f.hint_mode, "mock | faulty:<nan|negative|overscale|timeout> | remote | none-uniform");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--checkpoint", f.checkpoint, "checkpoint file");
  cmd->add_option("--corpus", f.corpus, "knowledge corpus (one fragment per line)");
  cmd->add_flag("--sync-test-mode", f.sync, "deterministic inline hinting with tick deadlines");
  cmd->add_flag("-v,--verbose", f.verbose, "log hint repairs and progress");
}

hcrmp::RunConfig resolve(CLI::App* cmd, const FlagSet& f, hcrmp::RunMode mode) {
  hcrmp::RunConfig cfg;
  cfg.mode = mode;
  if (!f.config.empty())
    for (const auto& [k, v] : hcrmp::read_config_file(f.config)) hcrmp::apply_setting(cfg, k, v);
  cfg.mode = mode;
  auto given = [&](const char* name) { return cmd->count(name) > 0; };
  if (given("--scenario")) hcrmp::apply_setting(cfg, "scenario", f.scenario);
  if (given("--density")) hcrmp::apply_setting(cfg, "density", f.density);
  if (given("--seed")) hcrmp::apply_setting(cfg, "seed", std::to_string(f.seed));
  if (given("--steps")) hcrmp::apply_setting(cfg, "steps", std::to_string(f.steps));
  if (given("--episodes")) hcrmp::apply_setting(cfg, "episodes", std::to_string(f.episodes));
  if (given("--hint-mode")) hcrmp::apply_setting(cfg, "hint-mode", f.hint_mode);
  if (given("--out")) hcrmp::apply_setting(cfg, "out", f.out);
  if (given("--checkpoint")) hcrmp::apply_setting(cfg, "checkpoint", f.checkpoint);
  if (given("--corpus")) hcrmp::apply_setting(cfg, "corpus", f.corpus);
  if (given("--sync-test-mode")) cfg.sync_test_mode = true;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LLM-hinted multi-critic PPO motion planner on a 2D driving micro-simulator"};
  app.require_subcommand(1);

  FlagSet train_flags, eval_flags;
  auto* train = app.add_subcommand("train", "train a policy");
  add_common(train, train_flags);
  train->add_option("--steps", train_flags.steps, "total environment steps");
  train->add_option("--episodes", train_flags.episodes, "unused in train");

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  add_common(eval, eval_flags);
  eval->add_option("--episodes", eval_flags.episodes, "episodes to run (default 100)");
  eval->add_option("--steps", eval_flags.steps, "unused in eval");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      if (train_flags.verbose) hcrmp::log_threshold() = hcrmp::LogLevel::debug;
      const auto cfg = resolve(train, train_flags, hcrmp::RunMode::train);
      const auto s = hcrmp::run_train(cfg);
      nlohmann::ordered_json j;
      j["steps"] = s.steps;
      j["updates"] = s.updates;
      j["episodes"] = s.episodes;
      j["final_trailing_sr"] = s.final_trailing_sr;
      j["trailing_mean_return"] = s.trailing_mean_return;
      j["baseline_mean_return"] = s.baseline_mean_return;
      std::cout << j.dump() << '\n';
    } else {
      if (eval_flags.verbose) hcrmp::log_threshold() = hcrmp::LogLevel::debug;
      const auto cfg = resolve(eval, eval_flags, hcrmp::RunMode::eval);
      const auto s = hcrmp::run_eval(cfg);
      std::cout << hcrmp::eval_summary_json(cfg, s).dump() << '\n';
    }
  } catch (const hcrmp::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "fatal: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
