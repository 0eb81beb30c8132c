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


// Pipeline stages, artifact layout and evaluation protocol behind the
// pivot-adapt CLI.
//
// Layout under the output directory:
//   unitary/policy.ckpt, unitary/curve.csv
//   dataset/manifest.json + PGMs
//   encoder/encoder.ckpt, encoder/metrics.csv, encoder/pca.csv
//   adapt/<mode>/adapter.ckpt, adapt/<mode>/curve.csv, adapt/<mode>/traces.csv
//   eval/objects.csv, eval/summary.csv, eval/unitary_object.csv
//   plots/*.svg
//   run/<stage>.json

#ifndef PIVOT_HARNESS_H_
#define PIVOT_HARNESS_H_

#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "pivot/adapt.h"
#include "pivot/checkpoint.h"
#include "pivot/config.h"
#include "pivot/csv.h"
#include "pivot/encoder.h"
#include "pivot/sac.h"
#include "pivot/shapes.h"

namespace pivot {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitMissingArtifact = 3;
inline constexpr int kExitRuntime = 4;

// Keeps large freed blocks in the heap instead of returning them to the OS.
// Call once at program start.
void TuneAllocator();

// Sub-streams of the run seed. Unitary training seeds TrainUnitary directly.
namespace seed_stream {
inline constexpr std::uint64_t kDataset = 10;
inline constexpr std::uint64_t kEncoderInit = 11;
inline constexpr std::uint64_t kEncoderTrain = 12;
inline constexpr std::uint64_t kPool = 20;
inline constexpr std::uint64_t kAdapterInit = 21;
inline constexpr std::uint64_t kAdaptTrain = 22;
inline constexpr std::uint64_t kTrace = 24;
inline constexpr std::uint64_t kEval = 30;
}  // namespace seed_stream

std::filesystem::path UnitaryCheckpointPath(const RunConfig& cfg);
std::filesystem::path DatasetPath(const RunConfig& cfg);
std::filesystem::path EncoderCheckpointPath(const RunConfig& cfg);
std::filesystem::path AdaptDir(const RunConfig& cfg, AdaptMode mode);

Checkpoint PolicyCheckpoint(const Policy& policy, const RunConfig& cfg);
Checkpoint EncoderCheckpoint(EncoderNet& net, const RunConfig& cfg);
Checkpoint AdapterCheckpoint(Adapter& adapter, const RunConfig& cfg);

// Each throws MissingArtifact("missing artifact: <what> (run <stage> first)").
Policy LoadUnitaryPolicy(const RunConfig& cfg);
EncoderNet LoadEncoder(const RunConfig& cfg);
Dataset LoadDatasetArtifact(const RunConfig& cfg);
Adapter LoadAdapter(const RunConfig& cfg, AdaptMode mode, const Policy& unitary);

// The 40-object evaluation pool and its mean-mode encoder features.
std::vector<ObjectSpec> EvaluationPool(std::uint64_t seed);
std::vector<Vector> PoolFeatures(const EncoderNet& encoder, const std::vector<ObjectSpec>& pool);

CsvTable UnitaryCurveCsv(const std::vector<CurveRow>& curve);
CsvTable EncoderMetricsCsv(const std::vector<EncoderMetricsRow>& rows);
CsvTable PcaCsv(const PcaResult& pca, const std::vector<int>& labels);
CsvTable AdaptCurveCsv(const std::vector<AdaptCurveRow>& rows);
CsvTable TracesCsv(const ProjectedTraces& traces);

struct ObjectResult {
  std::string mode;
  int run = 0;
  int object = 0;
  ObjectClass object_class = ObjectClass::kBox;
  Eigen::Vector3d size = Eigen::Vector3d::Zero();
  int successes = 0;
  int trials = 0;
};

struct ModeResult {
  std::string mode;
  std::vector<double> run_rates;  // one per run
  double mean = 0.0;              // mean of run_rates
  int successes = 0, trials = 0;  // totals over objects and runs
  double Aggregate() const { return trials ? static_cast<double>(successes) / trials : 0.0; }
};

struct ResultsTable {
  std::vector<ObjectResult> objects;
  std::vector<ModeResult> modes;
  CsvTable ObjectsCsv() const;
  CsvTable SummaryCsv() const;
};

// successes(mode, run) returns one success count per pool object.
ResultsTable Tabulate(const std::vector<std::string>& modes, const std::vector<ObjectSpec>& pool,
                      int runs, int trials,
                      const std::function<std::vector<int>(std::size_t, int)>& successes);

// Deterministic rollouts of every mode over `runs` evaluation seeds.
// The mode named "unitary" runs its adapter with identity transforms forced.
ResultsTable EvaluateModes(const std::vector<std::string>& modes,
                           const std::vector<const Adapter*>& adapters,
                           const std::vector<ObjectSpec>& pool,
                           const std::vector<Vector>& features, const EnvConfig& env_cfg,
                           int runs, int trials, std::uint64_t seed);

// The train/holdout split train-encoder used for this config and dataset.
DatasetSplit EncoderSplit(const RunConfig& cfg, const Dataset& ds);

nlohmann::json RunRecord(const RunConfig& cfg, double wall_seconds);
// out/run/<stage>.json, or out/run/train-adapt-<mode>.json.
std::filesystem::path RunRecordPath(const RunConfig& cfg);
std::string GitDescribe();

// Runs cfg.stage and writes its run record. Throws on failure.
void RunStage(const RunConfig& cfg, std::ostream& log);

// Maps an exception to the CLI exit code and prints "error: ..." to err.
int ExitCodeFor(std::exception_ptr e, std::ostream& err);

}  // namespace pivot

#endif  // PIVOT_HARNESS_H_
