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


#include "pivot/harness.h"

#include <malloc.h>

#include <chrono>
#include <cstdio>
#include <ostream>

#include "pivot/errors.h"
#include "pivot/plot.h"

#ifndef PIVOT_SOURCE_DIR
#define PIVOT_SOURCE_DIR "."
#endif

namespace pivot {
namespace fs = std::filesystem;
namespace {

std::vector<const Parameter*> Const(const std::vector<Parameter*>& ps) {
  return {ps.begin(), ps.end()};
}

std::vector<Parameter*> AdapterParameters(Adapter& a) {
  std::vector<Parameter*> ps = a.state_net().net().Parameters();
  for (Parameter* p : a.action_net().net().Parameters()) ps.push_back(p);
  if (a.mode() == AdaptMode::kFinetune) {
    for (Parameter* p : a.finetuned().net().Parameters()) ps.push_back(p);
  }
  return ps;
}

nlohmann::json Meta(const RunConfig& cfg) {
  return {{"config_hash", ConfigHash(cfg)}, {"created_by", "pivot-adapt"},
          {"stage", StageName(cfg.stage)}};
}

fs::path Or(const fs::path& given, const fs::path& fallback) {
  return given.empty() ? fallback : given;
}

void Say(std::ostream& log, const std::string& line) { log << line << '\n' << std::flush; }

std::string Fmt(const char* fmt, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, a, b, c, d);
  return buf;
}

void WriteText(const fs::path& path, const std::string& text) { WriteFileBytes(path, text); }

void TrainUnitaryStage(const RunConfig& cfg, std::ostream& log) {
  TrainResult res = TrainUnitary(cfg.sac, cfg.env, cfg.seed, [&](const CurveRow& r) {
    Say(log, Fmt("episode %.0f  return %.2f  success %.2f  alpha %.4f", r.episodes,
                 r.mean_return, r.success_rate, r.alpha));
  });
  SaveCheckpoint(PolicyCheckpoint(res.policy, cfg), UnitaryCheckpointPath(cfg));
  WriteCsv(UnitaryCurveCsv(res.curve), cfg.out / "unitary" / "curve.csv");
}

void GenDatasetStage(const RunConfig& cfg, std::ostream& log) {
  SeededRng rng = SeededRng(cfg.seed).Split(seed_stream::kDataset);
  const Dataset ds = BuildDataset(rng, cfg.dataset.objects_per_class, cfg.dataset.augmentations);
  ExportDataset(ds, DatasetPath(cfg));
  Say(log, "wrote " + std::to_string(ds.entries.size()) + " entries to " + DatasetPath(cfg).string());
}

void TrainEncoderStage(const RunConfig& cfg, std::ostream& log) {
  const Dataset ds = LoadDatasetArtifact(cfg);
  const SeededRng root(cfg.seed);
  SeededRng init = root.Split(seed_stream::kEncoderInit);
  SeededRng train = root.Split(seed_stream::kEncoderTrain);
  EncoderNet net(init);
  EncoderConfig ecfg = cfg.encoder;
  const EncoderTrainResult res = TrainEncoder(net, ds, ecfg, train);
  QuantizeToFloat(net.trunk());
  QuantizeToFloat(net.head());
  for (const EncoderMetricsRow& r : res.metrics) {
    Say(log, Fmt("epoch %.0f  loss %.4f  holdout accuracy %.3f  size rmse %.4f", r.epoch,
                 r.train_loss, r.holdout_accuracy, r.holdout_size_rmse));
  }
  SaveCheckpoint(EncoderCheckpoint(net, cfg), EncoderCheckpointPath(cfg));
  const fs::path dir = cfg.out / "encoder";
  WriteCsv(EncoderMetricsCsv(res.metrics), dir / "metrics.csv");
  std::vector<Vector> feats;
  std::vector<int> labels;
  for (int i : res.split.holdout) {
    const DatasetEntry& e = ds.entries[static_cast<std::size_t>(i)];
    feats.push_back(net.Encode(e.image, nullptr, EncodeMode::kMean));
    labels.push_back(static_cast<int>(e.object_class));
  }
  if (feats.size() >= 3) WriteCsv(PcaCsv(FeaturePca(feats), labels), dir / "pca.csv");
}

void TrainAdaptStage(const RunConfig& cfg, std::ostream& log) {
  const Policy unitary = LoadUnitaryPolicy(cfg);
  const EncoderNet encoder = LoadEncoder(cfg);
  const std::string unitary_sha = FileSha256(UnitaryCheckpointPath(cfg));
  const std::string encoder_sha = FileSha256(EncoderCheckpointPath(cfg));
  const std::vector<ObjectSpec> pool = EvaluationPool(cfg.seed);
  const std::vector<Vector> features = PoolFeatures(encoder, pool);
  const SeededRng root(cfg.seed);
  SeededRng init = root.Split(seed_stream::kAdapterInit);
  SeededRng train = root.Split(seed_stream::kAdaptTrain);
  SeededRng trace = root.Split(seed_stream::kTrace);
  Adapter adapter(unitary, cfg.adapt.mode, init);
  const AdaptResult res =
      RunAlgorithm1(adapter, pool, features, cfg.env, cfg.adapt, train, [&](const AdaptCurveRow& r) {
        Say(log, Fmt("iteration %.0f  return %.2f  success %.3f  T_s %.3f", r.iteration,
                     r.mean_return, r.pool_success_rate, r.mean_ts_diag));
      });
  const fs::path dir = AdaptDir(cfg, cfg.adapt.mode);
  SaveCheckpoint(AdapterCheckpoint(adapter, cfg), dir / "adapter.ckpt");
  WriteCsv(AdaptCurveCsv(res.curve), dir / "curve.csv");
  WriteCsv(TracesCsv(TraceTrajectories(adapter, pool, features, cfg.env, trace)),
           dir / "traces.csv");
  if (FileSha256(UnitaryCheckpointPath(cfg)) != unitary_sha ||
      FileSha256(EncoderCheckpointPath(cfg)) != encoder_sha) {
    throw std::runtime_error("frozen checkpoints changed during adaptation");
  }
}

void EvalStage(const RunConfig& cfg, std::ostream& log) {
  const Policy unitary = LoadUnitaryPolicy(cfg);
  const EncoderNet encoder = LoadEncoder(cfg);
  const std::vector<ObjectSpec> pool = EvaluationPool(cfg.seed);
  const std::vector<Vector> features = PoolFeatures(encoder, pool);
  std::vector<Adapter> adapters;
  adapters.reserve(cfg.eval.modes.size());
  std::vector<const Adapter*> ptrs;
  for (const std::string& m : cfg.eval.modes) {
    if (m == "unitary") {
      SeededRng rng(0);
      adapters.emplace_back(unitary, AdaptMode::kFull, rng);
    } else {
      adapters.push_back(LoadAdapter(cfg, ParseAdaptMode(m), unitary));
    }
    ptrs.push_back(&adapters.back());
  }
  const ResultsTable table = EvaluateModes(cfg.eval.modes, ptrs, pool, features, cfg.env,
                                           cfg.eval.runs, cfg.eval.trials, cfg.seed);
  const fs::path dir = cfg.out / "eval";
  WriteCsv(table.ObjectsCsv(), dir / "objects.csv");
  WriteCsv(table.SummaryCsv(), dir / "summary.csv");
  for (const ModeResult& m : table.modes) {
    Say(log, m.mode + ": " + Fmt("%.3f", m.mean));
  }

  PivotEnv env(cfg.env);
  SeededRng rng = SeededRng(cfg.seed).Split(seed_stream::kEval).Split(1000);
  const EvalResult u = Evaluate(env, UnitaryObject(),
                                [&](const Observation& s) { return unitary.Deterministic(s); },
                                cfg.eval.unitary_trials, rng);
  CsvTable t{{"trials", "success_rate", "mean_return"}, {}};
  t.AddRow({std::to_string(cfg.eval.unitary_trials), CsvNumber(u.success_rate),
            CsvNumber(u.mean_return)});
  WriteCsv(t, dir / "unitary_object.csv");
  Say(log, "unitary object: " + Fmt("%.3f", u.success_rate));
}

void PlotStage(const RunConfig& cfg, std::ostream& log) {
  const fs::path plots = cfg.out / "plots";
  int emitted = 0;
  auto emit = [&](const std::string& name, const std::string& svg) {
    WriteText(plots / name, svg);
    Say(log, "wrote " + (plots / name).string());
    ++emitted;
  };
  auto line = [&](const fs::path& csv, const std::string& title, const std::string& x,
                  const std::vector<std::string>& ys, const std::string& name) {
    if (!fs::exists(csv)) return;
    const CsvTable t = ReadCsv(csv);
    LinePlot p{title, x, "value", {}};
    for (const std::string& y : ys) p.series.push_back({y, t.Numbers(x), t.Numbers(y)});
    emit(name, RenderLinePlot(p));
  };
  line(cfg.out / "unitary" / "curve.csv", "Unitary policy training", "episodes",
       {"success_rate"}, "unitary_success.svg");
  line(cfg.out / "unitary" / "curve.csv", "Unitary policy return", "episodes", {"mean_return"},
       "unitary_return.svg");
  line(cfg.out / "encoder" / "metrics.csv", "Encoder holdout", "epoch",
       {"holdout_accuracy", "holdout_size_rmse"}, "encoder_metrics.svg");
  const fs::path pca = cfg.out / "encoder" / "pca.csv";
  if (fs::exists(pca)) {
    const CsvTable t = ReadCsv(pca);
    const std::vector<double> x = t.Numbers("pc1"), y = t.Numbers("pc2");
    const int cls = t.Column("class");
    std::vector<ScatterPoint> pts;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      pts.push_back({x[i], y[i], static_cast<int>(ClassFromName(t.rows[i][static_cast<std::size_t>(cls)]))});
    }
    std::vector<std::string> names;
    for (int c = 0; c < kNumClasses; ++c) names.push_back(ClassName(static_cast<ObjectClass>(c)));
    emit("encoder_pca.svg", RenderScatter("Holdout features (PCA)", "PC1", "PC2", pts, names));
  }
  for (AdaptMode m : {AdaptMode::kFull, AdaptMode::kNoState, AdaptMode::kNoAction,
                      AdaptMode::kFinetune, AdaptMode::kNnProjection}) {
    const fs::path dir = AdaptDir(cfg, m);
    const std::string mode = AdaptModeName(m);
    line(dir / "curve.csv", "Adaptation (" + mode + ")", "iteration",
         {"mean_return"}, "adapt_" + mode + "_return.svg");
    line(dir / "curve.csv", "Adaptation (" + mode + ")", "iteration",
         {"pool_success_rate"}, "adapt_" + mode + "_success.svg");
    if (fs::exists(dir / "traces.csv")) {
      const CsvTable t = ReadCsv(dir / "traces.csv");
      const std::vector<double> obj = t.Numbers("object"), rx = t.Numbers("raw_x"),
                                rz = t.Numbers("raw_z"), px = t.Numbers("proj_x"),
                                pz = t.Numbers("proj_z");
      ProjectedTraces tr;
      for (std::size_t i = 0; i < obj.size(); ++i) {
        const auto k = static_cast<std::size_t>(obj[i]);
        if (tr.raw.size() <= k) tr.raw.resize(k + 1), tr.projected.resize(k + 1);
        tr.raw[k].emplace_back(rx[i], rz[i]);
        tr.projected[k].emplace_back(px[i], pz[i]);
      }
      emit("adapt_" + mode + "_traces.svg",
           RenderTraces("Object trajectories (" + mode + ")", tr.raw, tr.projected));
    }
  }
  if (emitted == 0) {
    throw MissingArtifact("missing artifact: metrics CSVs under " + cfg.out.string() +
                          " (run a training stage first)");
  }
}

}  // namespace

void TuneAllocator() {
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
}

fs::path UnitaryCheckpointPath(const RunConfig& cfg) {
  return Or(cfg.unitary_checkpoint, cfg.out / "unitary" / "policy.ckpt");
}
fs::path DatasetPath(const RunConfig& cfg) { return Or(cfg.dataset_dir, cfg.out / "dataset"); }
fs::path EncoderCheckpointPath(const RunConfig& cfg) {
  return Or(cfg.encoder_checkpoint, cfg.out / "encoder" / "encoder.ckpt");
}
fs::path AdaptDir(const RunConfig& cfg, AdaptMode mode) {
  return cfg.out / "adapt" / AdaptModeName(mode);
}

Checkpoint PolicyCheckpoint(const Policy& policy, const RunConfig& cfg) {
  nlohmann::json meta = Meta(cfg);
  meta["hidden"] = cfg.sac.policy_hidden;
  return MakeCheckpoint("unitary_policy", cfg.seed, policy.net().Parameters(), meta);
}

Checkpoint EncoderCheckpoint(EncoderNet& net, const RunConfig& cfg) {
  return MakeCheckpoint("encoder", cfg.seed, Const(net.Parameters()), Meta(cfg));
}

Checkpoint AdapterCheckpoint(Adapter& adapter, const RunConfig& cfg) {
  nlohmann::json meta = Meta(cfg);
  meta["mode"] = AdaptModeName(adapter.mode());
  meta["ppo_clip"] = ClipFormName(cfg.adapt.clip_form);
  return MakeCheckpoint("adapter", cfg.seed, Const(AdapterParameters(adapter)), meta);
}

Policy LoadUnitaryPolicy(const RunConfig& cfg) {
  const fs::path p = UnitaryCheckpointPath(cfg);
  if (!fs::exists(p)) {
    throw MissingArtifact("missing artifact: unitary policy (run train-unitary first)");
  }
  const Checkpoint ck = LoadCheckpoint(p);
  if (ck.module != "unitary_policy") throw ParseError(p.string() + " is not a unitary policy");
  std::vector<int> hidden = cfg.sac.policy_hidden;
  if (ck.metadata.contains("hidden")) hidden = ck.metadata["hidden"].get<std::vector<int>>();
  SeededRng rng(0);
  Policy policy(rng, hidden);
  RestoreParameters(ck, policy.net().Parameters());
  return policy;
}

EncoderNet LoadEncoder(const RunConfig& cfg) {
  const fs::path p = EncoderCheckpointPath(cfg);
  if (!fs::exists(p)) throw MissingArtifact("missing artifact: encoder (run train-encoder first)");
  const Checkpoint ck = LoadCheckpoint(p);
  if (ck.module != "encoder") throw ParseError(p.string() + " is not an encoder");
  SeededRng rng(0);
  EncoderNet net(rng);
  RestoreParameters(ck, net.Parameters());
  return net;
}

Dataset LoadDatasetArtifact(const RunConfig& cfg) {
  const fs::path p = DatasetPath(cfg);
  if (!fs::exists(p / "manifest.json")) {
    throw MissingArtifact("missing artifact: dataset (run gen-dataset first)");
  }
  return LoadDataset(p);
}

Adapter LoadAdapter(const RunConfig& cfg, AdaptMode mode, const Policy& unitary) {
  const fs::path p = AdaptDir(cfg, mode) / "adapter.ckpt";
  if (!fs::exists(p)) {
    throw MissingArtifact(std::string("missing artifact: adapter for mode ") + AdaptModeName(mode) +
                          " (run train-adapt --mode " + AdaptModeName(mode) + " first)");
  }
  const Checkpoint ck = LoadCheckpoint(p);
  if (ck.module != "adapter" || ck.metadata.value("mode", "") != AdaptModeName(mode)) {
    throw ParseError(p.string() + " is not a " + AdaptModeName(mode) + " adapter");
  }
  SeededRng rng(0);
  Adapter adapter(unitary, mode, rng);
  RestoreParameters(ck, AdapterParameters(adapter));
  return adapter;
}

std::vector<ObjectSpec> EvaluationPool(std::uint64_t seed) {
  SeededRng rng = SeededRng(seed).Split(seed_stream::kPool);
  return SampleObjectPool(rng);
}

std::vector<Vector> PoolFeatures(const EncoderNet& encoder, const std::vector<ObjectSpec>& pool) {
  std::vector<Vector> out;
  out.reserve(pool.size());
  for (const ObjectSpec& s : pool) out.push_back(encoder.Encode(RenderDepth(s), nullptr, EncodeMode::kMean));
  return out;
}

CsvTable UnitaryCurveCsv(const std::vector<CurveRow>& curve) {
  CsvTable t{{"episodes", "env_steps", "mean_return", "success_rate", "loss_q", "loss_pi", "alpha"}, {}};
  for (const CurveRow& r : curve) {
    t.AddRow({std::to_string(r.episodes), std::to_string(r.env_steps), CsvNumber(r.mean_return),
              CsvNumber(r.success_rate), CsvNumber(r.loss_q), CsvNumber(r.loss_pi),
              CsvNumber(r.alpha)});
  }
  return t;
}

CsvTable EncoderMetricsCsv(const std::vector<EncoderMetricsRow>& rows) {
  CsvTable t{{"epoch", "train_loss", "holdout_accuracy", "holdout_size_rmse", "kl"}, {}};
  for (const EncoderMetricsRow& r : rows) {
    t.AddRow({std::to_string(r.epoch), CsvNumber(r.train_loss), CsvNumber(r.holdout_accuracy),
              CsvNumber(r.holdout_size_rmse), CsvNumber(r.kl)});
  }
  return t;
}

CsvTable PcaCsv(const PcaResult& pca, const std::vector<int>& labels) {
  CsvTable t{{"pc1", "pc2", "class"}, {}};
  for (Eigen::Index i = 0; i < pca.coords.rows(); ++i) {
    t.AddRow({CsvNumber(pca.coords(i, 0)), CsvNumber(pca.coords(i, 1)),
              ClassName(static_cast<ObjectClass>(labels[static_cast<std::size_t>(i)]))});
  }
  return t;
}

CsvTable AdaptCurveCsv(const std::vector<AdaptCurveRow>& rows) {
  CsvTable t{{"iteration", "mean_return", "pool_success_rate", "mean_T_s_diag", "mean_T_a_diag",
              "state_loss", "action_loss"},
             {}};
  for (const AdaptCurveRow& r : rows) {
    t.AddRow({std::to_string(r.iteration), CsvNumber(r.mean_return),
              CsvNumber(r.pool_success_rate), CsvNumber(r.mean_ts_diag),
              CsvNumber(r.mean_ta_diag), CsvNumber(r.state_loss), CsvNumber(r.action_loss)});
  }
  return t;
}

CsvTable TracesCsv(const ProjectedTraces& traces) {
  CsvTable t{{"object", "step", "raw_x", "raw_z", "proj_x", "proj_z"}, {}};
  for (std::size_t k = 0; k < traces.raw.size(); ++k) {
    for (std::size_t i = 0; i < traces.raw[k].size(); ++i) {
      t.AddRow({std::to_string(k), std::to_string(i), CsvNumber(traces.raw[k][i].x()),
                CsvNumber(traces.raw[k][i].y()), CsvNumber(traces.projected[k][i].x()),
                CsvNumber(traces.projected[k][i].y())});
    }
  }
  return t;
}

CsvTable ResultsTable::ObjectsCsv() const {
  CsvTable t{{"mode", "run", "object", "class", "l_x", "l_y", "l_z", "successes", "trials"}, {}};
  for (const ObjectResult& r : objects) {
    t.AddRow({r.mode, std::to_string(r.run), std::to_string(r.object), ClassName(r.object_class),
              CsvNumber(r.size.x()), CsvNumber(r.size.y()), CsvNumber(r.size.z()),
              std::to_string(r.successes), std::to_string(r.trials)});
  }
  return t;
}

CsvTable ResultsTable::SummaryCsv() const {
  const std::size_t runs = modes.empty() ? 0 : modes.front().run_rates.size();
  CsvTable t{{"mode"}, {}};
  for (std::size_t r = 0; r < runs; ++r) t.header.push_back("run" + std::to_string(r));
  for (const char* c : {"mean", "successes", "trials"}) t.header.push_back(c);
  for (const ModeResult& m : modes) {
    std::vector<std::string> row{m.mode};
    for (double v : m.run_rates) row.push_back(CsvNumber(v));
    row.push_back(CsvNumber(m.mean));
    row.push_back(std::to_string(m.successes));
    row.push_back(std::to_string(m.trials));
    t.AddRow(std::move(row));
  }
  return t;
}

ResultsTable Tabulate(const std::vector<std::string>& modes, const std::vector<ObjectSpec>& pool,
                      int runs, int trials,
                      const std::function<std::vector<int>(std::size_t, int)>& successes) {
  if (runs <= 0 || trials <= 0) throw InvalidInput("Tabulate: runs and trials must be positive");
  ResultsTable table;
  for (std::size_t m = 0; m < modes.size(); ++m) {
    ModeResult mr{modes[m], {}, 0.0, 0, 0};
    for (int r = 0; r < runs; ++r) {
      const std::vector<int> s = successes(m, r);
      if (s.size() != pool.size()) throw InvalidInput("Tabulate: one count per pool object");
      int run_succ = 0;
      for (std::size_t i = 0; i < pool.size(); ++i) {
        if (s[i] < 0 || s[i] > trials) throw InvalidInput("Tabulate: success count out of range");
        table.objects.push_back({modes[m], r, static_cast<int>(i), pool[i].object_class,
                                 pool[i].size, s[i], trials});
        run_succ += s[i];
      }
      const int run_trials = trials * static_cast<int>(pool.size());
      mr.run_rates.push_back(run_trials ? static_cast<double>(run_succ) / run_trials : 0.0);
      mr.successes += run_succ;
      mr.trials += run_trials;
    }
    double sum = 0.0;
    for (double v : mr.run_rates) sum += v;
    mr.mean = sum / runs;
    table.modes.push_back(std::move(mr));
  }
  return table;
}

ResultsTable EvaluateModes(const std::vector<std::string>& modes,
                           const std::vector<const Adapter*>& adapters,
                           const std::vector<ObjectSpec>& pool,
                           const std::vector<Vector>& features, const EnvConfig& env_cfg,
                           int runs, int trials, std::uint64_t seed) {
  if (modes.size() != adapters.size()) throw InvalidInput("EvaluateModes: one adapter per mode");
  return Tabulate(modes, pool, runs, trials, [&](std::size_t m, int run) {
    if (adapters[m] == nullptr) throw InvalidInput("EvaluateModes: mode '" + modes[m] + "' has no adapter");
    const Adapter& a = *adapters[m];
    const bool identity = modes[m] == "unitary";
    SeededRng rng = SeededRng(seed).Split(seed_stream::kEval).Split(static_cast<std::uint64_t>(run));
    return EvaluatePool(a, pool, features, env_cfg, trials, rng, identity).successes;
  });
}

DatasetSplit EncoderSplit(const RunConfig& cfg, const Dataset& ds) {
  SeededRng train = SeededRng(cfg.seed).Split(seed_stream::kEncoderTrain);
  return SplitBySource(ds, cfg.encoder.holdout_fraction, train);
}

fs::path RunRecordPath(const RunConfig& cfg) {
  std::string name = StageName(cfg.stage);
  if (cfg.stage == Stage::kTrainAdapt) name += std::string("-") + AdaptModeName(cfg.adapt.mode);
  return cfg.out / "run" / (name + ".json");
}

nlohmann::json RunRecord(const RunConfig& cfg, double wall_seconds) {
  return {{"stage", StageName(cfg.stage)},
          {"seed", cfg.seed},
          {"config_hash", ConfigHash(cfg)},
          {"stage_config_hash", StageConfigHash(cfg, cfg.stage)},
          {"config", CanonicalConfig(cfg)},
          {"git_describe", GitDescribe()},
          {"wall_clock_seconds", wall_seconds}};
}

std::string GitDescribe() {
  const std::string cmd =
      std::string("git -C \"") + PIVOT_SOURCE_DIR + "\" describe --always --dirty 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return "unknown";
  std::string out;
  char buf[128];
  while (std::fgets(buf, sizeof buf, pipe)) out += buf;
  pclose(pipe);
  while (!out.empty() && (out.back() == '\n' || out.back() == '\r')) out.pop_back();
  return out.empty() ? "unknown" : out;
}

void RunStage(const RunConfig& cfg, std::ostream& log) {
  ValidateRunConfig(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  switch (cfg.stage) {
    case Stage::kTrainUnitary: TrainUnitaryStage(cfg, log); break;
    case Stage::kGenDataset: GenDatasetStage(cfg, log); break;
    case Stage::kTrainEncoder: TrainEncoderStage(cfg, log); break;
    case Stage::kTrainAdapt: TrainAdaptStage(cfg, log); break;
    case Stage::kEval: EvalStage(cfg, log); break;
    case Stage::kPlot: PlotStage(cfg, log); break;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  WriteText(RunRecordPath(cfg), RunRecord(cfg, secs).dump(2) + "\n");
}

int ExitCodeFor(std::exception_ptr e, std::ostream& err) {
  try {
    std::rethrow_exception(e);
  } catch (const ConfigError& x) {
    err << "error: " << x.what() << '\n';
    return kExitConfig;
  } catch (const MissingArtifact& x) {
    err << "error: " << x.what() << '\n';
    return kExitMissingArtifact;
  } catch (const std::exception& x) {
    err << "error: " << x.what() << '\n';
    return kExitRuntime;
  } catch (...) {
    err << "error: unknown failure\n";
    return kExitRuntime;
  }
}

}  // namespace pivot
