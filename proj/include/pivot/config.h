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


// Run configuration for the pivot-adapt CLI. Files are INI-style
// (sections of key = value); command-line flags override file values.

#ifndef PIVOT_CONFIG_H_
#define PIVOT_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pivot/adapt.h"
#include "pivot/encoder.h"
#include "pivot/env.h"
#include "pivot/sac.h"

namespace pivot {

enum class Stage { kTrainUnitary, kGenDataset, kTrainEncoder, kTrainAdapt, kEval, kPlot };
const char* StageName(Stage s);
// Throws ConfigError for unknown names.
Stage ParseStage(const std::string& name);

struct DatasetConfig {
  int objects_per_class = kObjectsPerClass;
  int augmentations = kAugmentationsPerObject;
};

struct EvalConfig {
  int runs = 3;
  int trials = 3;            // per pool object and run
  int unitary_trials = 20;   // frozen policy on the unitary object
  // "unitary" is the frozen policy with identity transforms; the rest are
  // adaptation modes with a trained adapter checkpoint.
  std::vector<std::string> modes = {"unitary", "full", "no_action", "no_state"};
};

struct RunConfig {
  Stage stage = Stage::kTrainUnitary;
  std::uint64_t seed = 7;
  std::filesystem::path out = "runs/default";
  // Inputs default to the stage outputs under `out`.
  std::filesystem::path unitary_checkpoint, dataset_dir, encoder_checkpoint;
  EnvConfig env;
  SacConfig sac;
  DatasetConfig dataset;
  EncoderConfig encoder;
  AdaptConfig adapt;
  EvalConfig eval;
};

// Applies an INI file on top of `cfg`. Throws MissingArtifact when the file
// is absent, ConfigError("<section>.<key>: ...") for unknown keys or bad
// values.
void ApplyConfigFile(const std::filesystem::path& path, RunConfig& cfg);
// Sets one "section.key" from text. Same errors as ApplyConfigFile.
void SetConfigValue(RunConfig& cfg, const std::string& key, const std::string& value);

// Every configurable key as "section.key = value" lines in a fixed order.
std::string CanonicalConfig(const RunConfig& cfg);
// SHA-256 of CanonicalConfig without the stage and output paths.
std::string ConfigHash(const RunConfig& cfg);

// SHA-256 over run.seed plus the sections `stage` reads, so a cached
// artifact stays valid when unrelated sections change.
std::string StageConfigHash(const RunConfig& cfg, Stage stage);

// Validates every section; explicitly given input paths must exist.
void ValidateRunConfig(const RunConfig& cfg);

}  // namespace pivot

#endif  // PIVOT_CONFIG_H_
