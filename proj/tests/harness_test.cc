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

#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>
#include <utility>

#include <gtest/gtest.h>

#include "pivot/errors.h"
#include "pivot/plot.h"

namespace pivot {
namespace {
namespace fs = std::filesystem;

fs::path TempDir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("pivot_harness_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int CountOf(const std::string& hay, const std::string& needle) {
  int n = 0;
  for (std::size_t at = hay.find(needle); at != std::string::npos; at = hay.find(needle, at + 1)) ++n;
  return n;
}

TEST(CheckpointTest, RoundTripIsByteIdentical) {
  SeededRng rng(1);
  Policy pi(rng, {8, 8});
  const fs::path dir = TempDir("ckpt");
  SaveCheckpoint(MakeCheckpoint("unitary_policy", 42, std::as_const(pi.net()).Parameters(), {{"k", "v"}}), dir / "a.ckpt");
  const Checkpoint loaded = LoadCheckpoint(dir / "a.ckpt");
  SaveCheckpoint(loaded, dir / "b.ckpt");
  EXPECT_EQ(ReadFileBytes(dir / "a.ckpt"), ReadFileBytes(dir / "b.ckpt"));
  EXPECT_EQ(ReadFileBytes(dir / "a.ckpt").substr(0, 8), "PIVOTCK1");
  EXPECT_EQ(loaded.seed, 42u);
  EXPECT_EQ(loaded.metadata["k"], "v");

  Policy other(rng, {8, 8});
  RestoreParameters(loaded, other.net().Parameters());
  QuantizeToFloat(pi.net());
  for (std::size_t i = 0; i < pi.net().Parameters().size(); ++i) {
    EXPECT_EQ(other.net().Parameters()[i]->value, pi.net().Parameters()[i]->value);
  }
}

TEST(CheckpointTest, DetectsCorruption) {
  SeededRng rng(2);
  Policy pi(rng, {4});
  std::string bytes = SerializeCheckpoint(MakeCheckpoint("m", 1, std::as_const(pi.net()).Parameters()));
  std::string flipped = bytes;
  flipped.back() ^= 1;
  EXPECT_THROW(ParseCheckpoint(flipped), ParseError);
  EXPECT_THROW(ParseCheckpoint("NOTACKPT" + bytes.substr(8)), ParseError);
  EXPECT_THROW(ParseCheckpoint(bytes.substr(0, bytes.size() - 4)), ParseError);
  EXPECT_THROW(LoadCheckpoint("/nonexistent/x.ckpt"), MissingArtifact);
}

TEST(CheckpointTest, RestoreRejectsShapeMismatch) {
  SeededRng rng(3);
  Policy a(rng, {8}), b(rng, {9});
  const Checkpoint ck = MakeCheckpoint("m", 1, std::as_const(a.net()).Parameters());
  EXPECT_THROW(RestoreParameters(ck, b.net().Parameters()), ParseError);
}

TEST(CsvTest, RoundTripAndNumbers) {
  CsvTable t{{"a", "b"}, {}};
  t.AddRow({"1", CsvNumber(0.1)});
  t.AddRow({"2", CsvNumber(-3.5e-7)});
  const CsvTable back = ParseCsv(FormatCsv(t));
  EXPECT_EQ(back.header, t.header);
  EXPECT_EQ(back.rows, t.rows);
  EXPECT_DOUBLE_EQ(back.Numbers("b")[1], -3.5e-7);
  EXPECT_THROW(t.AddRow({"x"}), InvalidInput);
  EXPECT_THROW(back.Column("zz"), InvalidInput);
}

TEST(CsvTest, ParseErrorsCarryLineNumbers) {
  try {
    ParseCsv("a,b\n1,2\n3\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
  }
  const CsvTable t = ParseCsv("a,b\n1,2\nx,4\n");
  try {
    t.Numbers("a");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
  }
  EXPECT_THROW(ParseCsv(""), ParseError);
  EXPECT_TRUE(ParseCsv("a,b\n").rows.empty());
}

TEST(ConfigTest, FileThenFlagsOverride) {
  const fs::path dir = TempDir("cfg");
  std::ofstream(dir / "c.ini") << "[run]\nseed = 11\n[sac]\nepisodes = 12\n[adapt]\nmode = no_state\n";
  RunConfig cfg;
  ApplyConfigFile(dir / "c.ini", cfg);
  EXPECT_EQ(cfg.seed, 11u);
  EXPECT_EQ(cfg.sac.episodes, 12);
  EXPECT_EQ(cfg.adapt.mode, AdaptMode::kNoState);
  SetConfigValue(cfg, "sac.episodes", "13");
  EXPECT_EQ(cfg.sac.episodes, 13);
}

TEST(ConfigTest, ErrorsNameTheField) {
  const fs::path dir = TempDir("cfg_bad");
  std::ofstream(dir / "bad.ini") << "[sac]\nepisodez = 3\n";
  RunConfig cfg;
  try {
    ApplyConfigFile(dir / "bad.ini", cfg);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("sac.episodez", 0), 0u);
  }
  EXPECT_THROW(SetConfigValue(cfg, "sac.gamma", "high"), ConfigError);
  EXPECT_THROW(SetConfigValue(cfg, "adapt.mode", "pearl"), ConfigError);
  EXPECT_THROW(ApplyConfigFile(dir / "missing.ini", cfg), MissingArtifact);
  cfg = RunConfig{};
  cfg.sac.gamma = 2.0;
  EXPECT_THROW(ValidateRunConfig(cfg), ConfigError);
  cfg = RunConfig{};
  cfg.unitary_checkpoint = dir / "nope.ckpt";
  EXPECT_THROW(ValidateRunConfig(cfg), ConfigError);
}

TEST(ConfigTest, HashesTrackRelevantKeys) {
  RunConfig a, b;
  EXPECT_EQ(ConfigHash(a), ConfigHash(b));
  b.out = "elsewhere";
  b.stage = Stage::kEval;
  EXPECT_EQ(ConfigHash(a), ConfigHash(b));
  b.adapt.iterations = 3;
  EXPECT_NE(ConfigHash(a), ConfigHash(b));
  EXPECT_EQ(StageConfigHash(a, Stage::kTrainUnitary), StageConfigHash(b, Stage::kTrainUnitary));
  EXPECT_NE(StageConfigHash(a, Stage::kTrainAdapt), StageConfigHash(b, Stage::kTrainAdapt));
  b.seed = 8;
  EXPECT_NE(StageConfigHash(a, Stage::kTrainUnitary), StageConfigHash(b, Stage::kTrainUnitary));
}

TEST(PlotTest, TwoPointSeriesIsOnePolyline) {
  const std::string svg = RenderLinePlot({"t", "x", "y", {{"s", {0, 1}, {0, 1}}}});
  EXPECT_EQ(CountOf(svg, "<polyline"), 1);
  const std::smatch m = [&] {
    std::smatch out;
    std::regex_search(svg, out, std::regex("points=\"([^\"]*)\""));
    return out;
  }();
  ASSERT_FALSE(m.empty());
  EXPECT_EQ(CountOf(m[1].str(), ","), 2);
  EXPECT_EQ(CountOf(m[1].str(), " "), 1);
}

TEST(PlotTest, EmptySeriesStillDrawsAxes) {
  const std::string svg = RenderLinePlot({"t", "x", "y", {{"s", {}, {}}}});
  EXPECT_EQ(CountOf(svg, "<polyline"), 0);
  EXPECT_EQ(CountOf(svg, "class=\"axes\""), 1);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_THROW(RenderLinePlot({"t", "x", "y", {{"s", {1}, {}}}}), InvalidInput);
}

TEST(PlotTest, ScatterUsesOneColorPerGroup) {
  std::vector<ScatterPoint> pts;
  for (int g = 0; g < 4; ++g) pts.push_back({1.0 * g, 2.0 * g, g});
  const std::string svg = RenderScatter("t", "x", "y", pts, {"a", "b", "c", "d"});
  for (int g = 0; g < 4; ++g) EXPECT_EQ(CountOf(svg, std::string("fill=\"") + PlotColor(g) + "\" fill-opacity"), 1);
}

TEST(ResultsTest, AllSuccessStubGivesFullMarks) {
  SeededRng rng(4);
  const std::vector<ObjectSpec> pool = SampleObjectPool(rng);
  const ResultsTable t = Tabulate({"stub"}, pool, 1, 1, [&](std::size_t, int) {
    return std::vector<int>(pool.size(), 1);
  });
  EXPECT_EQ(t.modes[0].successes, 40);
  EXPECT_EQ(t.modes[0].trials, 40);
  EXPECT_EQ(t.modes[0].mean, 1.0);
}

TEST(ResultsTest, AggregatesAreConsistent) {
  SeededRng rng(5);
  const std::vector<ObjectSpec> pool = SampleObjectPool(rng);
  const int trials = 3;
  const ResultsTable t = Tabulate({"a", "b"}, pool, 3, trials, [&](std::size_t m, int run) {
    std::vector<int> s(pool.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = static_cast<int>((i * 7 + m * 3 + static_cast<std::size_t>(run)) % 4);
    for (int& v : s) v = std::min(v, trials);
    return s;
  });
  for (const ModeResult& m : t.modes) {
    double weighted = 0.0;
    int w = 0;
    for (const ObjectResult& o : t.objects) {
      if (o.mode != m.mode) continue;
      EXPECT_LE(o.successes, o.trials);
      weighted += static_cast<double>(o.successes) / o.trials * o.trials;
      w += o.trials;
    }
    EXPECT_DOUBLE_EQ(m.Aggregate(), weighted / w);
    const auto [lo, hi] = std::minmax_element(m.run_rates.begin(), m.run_rates.end());
    EXPECT_GE(m.mean, *lo);
    EXPECT_LE(m.mean, *hi);
  }
  EXPECT_THROW(Tabulate({"a"}, pool, 1, 1, [&](std::size_t, int) { return std::vector<int>(pool.size(), 2); }),
               InvalidInput);
  const CsvTable summary = t.SummaryCsv();
  EXPECT_EQ(summary.header.front(), "mode");
  EXPECT_EQ(summary.rows.size(), 2u);
}

TEST(ExitCodeTest, MapsErrorKinds) {
  std::ostringstream err;
  EXPECT_EQ(ExitCodeFor(std::make_exception_ptr(ConfigError("x")), err), kExitConfig);
  EXPECT_EQ(ExitCodeFor(std::make_exception_ptr(MissingArtifact("x")), err), kExitMissingArtifact);
  EXPECT_EQ(ExitCodeFor(std::make_exception_ptr(std::runtime_error("x")), err), kExitRuntime);
  EXPECT_EQ(ExitCodeFor(std::make_exception_ptr(InvalidInput("x")), err), kExitRuntime);
}

int RunCli(const std::string& args, std::string* output = nullptr) {
  const fs::path log = fs::temp_directory_path() / "pivot_harness_test_cli.log";
  const int status = std::system((std::string(PIVOT_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1").c_str());
  if (output) *output = ReadFileBytes(log);
  return WEXITSTATUS(status);
}

TEST(CliTest, ExitCodesAndMissingArtifactMessage) {
  const fs::path dir = TempDir("cli");
  std::string out;
  EXPECT_EQ(RunCli("eval --out " + dir.string(), &out), kExitMissingArtifact);
  EXPECT_NE(out.find("missing artifact: unitary policy (run train-unitary first)"), std::string::npos);
  EXPECT_EQ(RunCli("train-adapt --out " + dir.string() + " --mode pearl"), kExitConfig);
  EXPECT_EQ(RunCli("nonsense"), kExitConfig);
  EXPECT_EQ(RunCli("plot --out " + dir.string()), kExitMissingArtifact);
}

TEST(CliTest, RepeatedRunsGiveIdenticalCsvBytes) {
  const fs::path a = TempDir("cli_a"), b = TempDir("cli_b");
  const std::string common =
      " --seed 3 --set dataset.objects_per_class=3 --set dataset.augmentations=2"
      " --set encoder.epochs=2 --set encoder.batch_size=8 --set encoder.holdout_fraction=0.25";
  for (const fs::path& d : {a, b}) {
    ASSERT_EQ(RunCli("gen-dataset --out " + d.string() + common), 0);
    ASSERT_EQ(RunCli("train-encoder --out " + d.string() + common), 0);
    ASSERT_EQ(RunCli("plot --out " + d.string() + common), 0);
  }
  EXPECT_EQ(ReadFileBytes(a / "encoder" / "metrics.csv"), ReadFileBytes(b / "encoder" / "metrics.csv"));
  EXPECT_EQ(ReadFileBytes(a / "encoder" / "pca.csv"), ReadFileBytes(b / "encoder" / "pca.csv"));
  EXPECT_EQ(ReadFileBytes(a / "encoder" / "encoder.ckpt"), ReadFileBytes(b / "encoder" / "encoder.ckpt"));
  EXPECT_TRUE(fs::exists(a / "plots" / "encoder_pca.svg"));
  const auto run = nlohmann::json::parse(ReadFileBytes(a / "run" / "train-encoder.json"));
  for (const char* key : {"config_hash", "seed", "git_describe", "wall_clock_seconds"}) {
    EXPECT_TRUE(run.contains(key)) << key;
  }

  RunConfig cfg;
  cfg.out = a;
  cfg.seed = 3;
  cfg.encoder.holdout_fraction = 0.25;
  const Dataset ds = LoadDatasetArtifact(cfg);
  EXPECT_EQ(EncoderSplit(cfg, ds).holdout.size(), ReadCsv(a / "encoder" / "pca.csv").rows.size());
  const EncoderNet e1 = LoadEncoder(cfg), e2 = LoadEncoder(cfg);
  const DepthImage img = RenderDepth(UnitaryObject());
  EXPECT_EQ(e1.Encode(img, nullptr, EncodeMode::kMean), e2.Encode(img, nullptr, EncodeMode::kMean));
}

}  // namespace
}  // namespace pivot
