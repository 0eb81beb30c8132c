// Copyright 2026 The pivot-adapt Authors
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


// pivot-adapt <stage> [--config PATH] [--seed N] [--out DIR] [--mode MODE]
//                     [--ppo-clip paper|standard] [--set section.key=value]...

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pivot/config.h"
#include "pivot/errors.h"
#include "pivot/harness.h"

int main(int argc, char** argv) {
  pivot::TuneAllocator();
  CLI::App app{"Train and evaluate pivoting policies adapted across object shapes."};
  std::string stage, config, out, mode, ppo_clip;
  std::uint64_t seed = 0;
  std::vector<std::string> sets;
  app.add_option("stage", stage,
                 "train-unitary | gen-dataset | train-encoder | train-adapt | eval | plot")
      ->required();
  app.add_option("--config", config, "INI config file");
  auto* seed_opt = app.add_option("--seed", seed, "run seed");
  app.add_option("--out", out, "output directory");
  app.add_option("--mode", mode, "full | no_state | no_action | finetune | nn_projection");
  app.add_option("--ppo-clip", ppo_clip, "paper | standard");
  app.add_option("--set", sets, "override one key, e.g. --set sac.episodes=100");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return pivot::kExitConfig;
  }

  try {
    pivot::RunConfig cfg;
    if (!config.empty()) pivot::ApplyConfigFile(config, cfg);
    cfg.stage = pivot::ParseStage(stage);
    if (*seed_opt) cfg.seed = seed;
    if (!out.empty()) cfg.out = out;
    if (!mode.empty()) pivot::SetConfigValue(cfg, "adapt.mode", mode);
    if (!ppo_clip.empty()) pivot::SetConfigValue(cfg, "adapt.ppo_clip", ppo_clip);
    for (const std::string& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw pivot::ConfigError("--set: expected key=value, got '" + kv + "'");
      pivot::SetConfigValue(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    pivot::RunStage(cfg, std::cout);
  } catch (...) {
    return pivot::ExitCodeFor(std::current_exception(), std::cerr);
  }
  return pivot::kExitOk;
}
