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


#include "pivot/config.h"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cstdio>
#include <functional>
#include <sstream>

#include "pivot/checkpoint.h"
#include "pivot/errors.h"

namespace pivot {
namespace {

struct Entry {
  std::string key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
  bool hashed = true;
};

std::string Format(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T>
T ParseNumber(const std::string& key, const std::string& text) {
  T v{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError(key + ": expected a number, got '" + text + "'");
  }
  return v;
}

bool ParseBool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

std::vector<std::string> SplitList(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

template <class Ref>
Entry Real(std::string key, Ref ref) {
  return {key, [ref](const RunConfig& c) { return Format(ref(const_cast<RunConfig&>(c))); },
          [ref, key](RunConfig& c, const std::string& v) { ref(c) = ParseNumber<double>(key, v); }};
}

template <class Ref>
Entry Int(std::string key, Ref ref) {
  return {key,
          [ref](const RunConfig& c) { return std::to_string(ref(const_cast<RunConfig&>(c))); },
          [ref, key](RunConfig& c, const std::string& v) {
            ref(c) = ParseNumber<std::remove_reference_t<decltype(ref(c))>>(key, v);
          }};
}

template <class Ref>
Entry Bool(std::string key, Ref ref) {
  return {key, [ref](const RunConfig& c) { return ref(const_cast<RunConfig&>(c)) ? "true" : "false"; },
          [ref, key](RunConfig& c, const std::string& v) { ref(c) = ParseBool(key, v); }};
}

template <class Ref>
Entry Path(std::string key, Ref ref) {
  return {key, [ref](const RunConfig& c) { return ref(const_cast<RunConfig&>(c)).string(); },
          [ref](RunConfig& c, const std::string& v) { ref(c) = v; }, false};
}

template <class Ref>
Entry IntList(std::string key, Ref ref) {
  return {key,
          [ref](const RunConfig& c) {
            std::string s;
            for (int v : ref(const_cast<RunConfig&>(c))) s += (s.empty() ? "" : ",") + std::to_string(v);
            return s;
          },
          [ref, key](RunConfig& c, const std::string& v) {
            std::vector<int> out;
            for (const std::string& item : SplitList(v)) out.push_back(ParseNumber<int>(key, item));
            ref(c) = out;
          }};
}

#define PIVOT_REF(expr) [](RunConfig& c) -> auto& { return c.expr; }

const std::vector<Entry>& Registry() {
  static const std::vector<Entry> entries = [] {
    std::vector<Entry> e;
    e.push_back(Int("run.seed", PIVOT_REF(seed)));
    e.push_back(Path("run.out", PIVOT_REF(out)));
    e.push_back(Path("run.unitary_checkpoint", PIVOT_REF(unitary_checkpoint)));
    e.push_back(Path("run.dataset_dir", PIVOT_REF(dataset_dir)));
    e.push_back(Path("run.encoder_checkpoint", PIVOT_REF(encoder_checkpoint)));

    e.push_back(Real("sim.dt", PIVOT_REF(env.sim.dt)));
    e.push_back(Int("sim.substeps", PIVOT_REF(env.sim.substeps)));
    e.push_back(Real("sim.gravity", PIVOT_REF(env.sim.gravity)));
    e.push_back(Real("sim.contact_stiffness", PIVOT_REF(env.sim.contact_stiffness)));
    e.push_back(Real("sim.contact_damping_ratio", PIVOT_REF(env.sim.contact_damping_ratio)));
    e.push_back(Real("sim.gripper_radius", PIVOT_REF(env.sim.gripper_radius)));
    e.push_back(Real("sim.gripper_mass", PIVOT_REF(env.sim.gripper_mass)));
    e.push_back(Real("sim.gripper_stiffness", PIVOT_REF(env.sim.gripper_stiffness)));
    e.push_back(Real("sim.gripper_damping_ratio", PIVOT_REF(env.sim.gripper_damping_ratio)));
    e.push_back(Real("sim.force_limit", PIVOT_REF(env.sim.force_limit)));
    e.push_back(Real("sim.max_step_displacement", PIVOT_REF(env.sim.max_step_displacement)));
    e.push_back(Real("sim.max_step_rotation", PIVOT_REF(env.sim.max_step_rotation)));

    e.push_back(Int("env.horizon", PIVOT_REF(env.horizon)));
    e.push_back(Real("env.position_noise_std", PIVOT_REF(env.position_noise_std)));
    e.push_back(Real("env.force_noise_std", PIVOT_REF(env.force_noise_std)));
    e.push_back(Real("env.force_cap", PIVOT_REF(env.force_cap)));
    e.push_back(Real("env.force_obs_limit", PIVOT_REF(env.force_obs_limit)));
    e.push_back(Real("env.max_initial_offset", PIVOT_REF(env.max_initial_offset)));
    e.push_back({"env.wall_offset_mode",
                 [](const RunConfig& c) {
                   return std::string(c.env.wall_offset_mode == WallOffsetMode::kPerStep
                                          ? "per_step" : "per_episode");
                 },
                 [](RunConfig& c, const std::string& v) {
                   if (v == "per_step") {
                     c.env.wall_offset_mode = WallOffsetMode::kPerStep;
                   } else if (v == "per_episode") {
                     c.env.wall_offset_mode = WallOffsetMode::kPerEpisode;
                   } else {
                     throw ConfigError("env.wall_offset_mode: expected per_step or per_episode, got '" + v + "'");
                   }
                 }});
    e.push_back(Real("env.settle_time", PIVOT_REF(env.settle_time)));
    e.push_back(Real("env.success_angle_tol", PIVOT_REF(env.success_angle_tol)));
    e.push_back(Real("env.success_rate_tol", PIVOT_REF(env.success_rate_tol)));
    e.push_back(Int("env.success_hold_steps", PIVOT_REF(env.success_hold_steps)));
    e.push_back(Bool("env.terminate_on_success", PIVOT_REF(env.terminate_on_success)));

    e.push_back(Int("sac.batch_size", PIVOT_REF(sac.batch_size)));
    e.push_back(Real("sac.lr_q", PIVOT_REF(sac.lr_q)));
    e.push_back(Real("sac.lr_pi", PIVOT_REF(sac.lr_pi)));
    e.push_back(Real("sac.lr_alpha", PIVOT_REF(sac.lr_alpha)));
    e.push_back(Real("sac.gamma", PIVOT_REF(sac.gamma)));
    e.push_back(Real("sac.tau", PIVOT_REF(sac.tau)));
    e.push_back(Real("sac.target_entropy", PIVOT_REF(sac.target_entropy)));
    e.push_back(IntList("sac.policy_hidden", PIVOT_REF(sac.policy_hidden)));
    e.push_back(IntList("sac.q_hidden", PIVOT_REF(sac.q_hidden)));
    e.push_back(Int("sac.replay_capacity", PIVOT_REF(sac.replay_capacity)));
    e.push_back(Int("sac.warmup_steps", PIVOT_REF(sac.warmup_steps)));
    e.push_back(Int("sac.episodes", PIVOT_REF(sac.episodes)));
    e.push_back(Real("sac.updates_per_step", PIVOT_REF(sac.updates_per_step)));
    e.push_back(Int("sac.eval_every", PIVOT_REF(sac.eval_every)));
    e.push_back(Int("sac.eval_episodes", PIVOT_REF(sac.eval_episodes)));

    e.push_back(Int("dataset.objects_per_class", PIVOT_REF(dataset.objects_per_class)));
    e.push_back(Int("dataset.augmentations", PIVOT_REF(dataset.augmentations)));

    e.push_back(Real("encoder.beta", PIVOT_REF(encoder.beta)));
    e.push_back(Real("encoder.shape_weight", PIVOT_REF(encoder.shape_weight)));
    e.push_back(Real("encoder.lr", PIVOT_REF(encoder.lr)));
    e.push_back(Int("encoder.batch_size", PIVOT_REF(encoder.batch_size)));
    e.push_back(Int("encoder.epochs", PIVOT_REF(encoder.epochs)));
    e.push_back(Real("encoder.holdout_fraction", PIVOT_REF(encoder.holdout_fraction)));

    e.push_back({"adapt.mode",
                 [](const RunConfig& c) { return std::string(AdaptModeName(c.adapt.mode)); },
                 [](RunConfig& c, const std::string& v) {
                   try {
                     c.adapt.mode = ParseAdaptMode(v);
                   } catch (const InvalidInput& err) {
                     throw ConfigError(std::string("adapt.mode: ") + err.what());
                   }
                 }});
    e.push_back({"adapt.ppo_clip",
                 [](const RunConfig& c) { return std::string(ClipFormName(c.adapt.clip_form)); },
                 [](RunConfig& c, const std::string& v) {
                   try {
                     c.adapt.clip_form = ParseClipForm(v);
                   } catch (const InvalidInput& err) {
                     throw ConfigError(std::string("adapt.ppo_clip: ") + err.what());
                   }
                 }});
    e.push_back(Int("adapt.iterations", PIVOT_REF(adapt.iterations)));
    e.push_back(Int("adapt.episodes_per_iteration", PIVOT_REF(adapt.episodes_per_iteration)));
    e.push_back(Int("adapt.epochs", PIVOT_REF(adapt.epochs)));
    e.push_back(Real("adapt.gamma", PIVOT_REF(adapt.gamma)));
    e.push_back(Real("adapt.clip_state", PIVOT_REF(adapt.clip_state)));
    e.push_back(Real("adapt.clip_action", PIVOT_REF(adapt.clip_action)));
    e.push_back(Real("adapt.lr_state", PIVOT_REF(adapt.lr_state)));
    e.push_back(Real("adapt.lr_action", PIVOT_REF(adapt.lr_action)));
    e.push_back(Int("adapt.eval_trials", PIVOT_REF(adapt.eval_trials)));

    e.push_back(Int("eval.runs", PIVOT_REF(eval.runs)));
    e.push_back(Int("eval.trials", PIVOT_REF(eval.trials)));
    e.push_back(Int("eval.unitary_trials", PIVOT_REF(eval.unitary_trials)));
    e.push_back({"eval.modes",
                 [](const RunConfig& c) {
                   std::string s;
                   for (const std::string& m : c.eval.modes) s += (s.empty() ? "" : ",") + m;
                   return s;
                 },
                 [](RunConfig& c, const std::string& v) { c.eval.modes = SplitList(v); }});
    return e;
  }();
  return entries;
}

#undef PIVOT_REF

}  // namespace

const char* StageName(Stage s) {
  switch (s) {
    case Stage::kTrainUnitary: return "train-unitary";
    case Stage::kGenDataset: return "gen-dataset";
    case Stage::kTrainEncoder: return "train-encoder";
    case Stage::kTrainAdapt: return "train-adapt";
    case Stage::kEval: return "eval";
    case Stage::kPlot: return "plot";
  }
  return "?";
}

Stage ParseStage(const std::string& name) {
  for (Stage s : {Stage::kTrainUnitary, Stage::kGenDataset, Stage::kTrainEncoder,
                  Stage::kTrainAdapt, Stage::kEval, Stage::kPlot}) {
    if (name == StageName(s)) return s;
  }
  throw ConfigError("stage: unknown stage '" + name + "'");
}

void SetConfigValue(RunConfig& cfg, const std::string& key, const std::string& value) {
  for (const Entry& e : Registry()) {
    if (e.key == key) {
      e.set(cfg, value);
      return;
    }
  }
  throw ConfigError(key + ": unknown key");
}

void ApplyConfigFile(const std::filesystem::path& path, RunConfig& cfg) {
  if (!std::filesystem::exists(path)) {
    throw MissingArtifact("missing artifact: config file " + path.string());
  }
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(path.string() + ": " + e.message() + " (line " +
                      std::to_string(e.line()) + ")");
  }
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError(section + ": key outside a section");
    for (const auto& [key, value] : body) {
      SetConfigValue(cfg, section + "." + key, value.get_value<std::string>());
    }
  }
}

std::string CanonicalConfig(const RunConfig& cfg) {
  std::string out = std::string("stage = ") + StageName(cfg.stage) + "\n";
  for (const Entry& e : Registry()) out += e.key + " = " + e.get(cfg) + "\n";
  return out;
}

std::string ConfigHash(const RunConfig& cfg) {
  std::string text;
  for (const Entry& e : Registry()) {
    if (e.hashed) text += e.key + " = " + e.get(cfg) + "\n";
  }
  return Sha256Hex(text);
}

std::string StageConfigHash(const RunConfig& cfg, Stage stage) {
  std::vector<std::string> sections;
  switch (stage) {
    case Stage::kTrainUnitary: sections = {"sim.", "env.", "sac."}; break;
    case Stage::kGenDataset: sections = {"dataset."}; break;
    case Stage::kTrainEncoder: sections = {"dataset.", "encoder."}; break;
    case Stage::kTrainAdapt: sections = {"sim.", "env.", "sac.", "dataset.", "encoder.", "adapt."}; break;
    case Stage::kEval:
    case Stage::kPlot: sections = {"sim.", "env.", "sac.", "dataset.", "encoder.", "adapt.", "eval."}; break;
  }
  std::string text = "run.seed = " + std::to_string(cfg.seed) + "\n";
  for (const Entry& e : Registry()) {
    for (const std::string& prefix : sections) {
      if (e.key.rfind(prefix, 0) == 0) text += e.key + " = " + e.get(cfg) + "\n";
    }
  }
  return Sha256Hex(text);
}

void ValidateRunConfig(const RunConfig& cfg) {
  ValidateEnvConfig(cfg.env);
  ValidateSacConfig(cfg.sac);
  ValidateEncoderConfig(cfg.encoder);
  ValidateAdaptConfig(cfg.adapt);
  if (cfg.dataset.objects_per_class <= 0) throw ConfigError("dataset.objects_per_class must be positive");
  if (cfg.dataset.augmentations <= 0) throw ConfigError("dataset.augmentations must be positive");
  if (cfg.eval.runs <= 0) throw ConfigError("eval.runs must be positive");
  if (cfg.eval.trials <= 0) throw ConfigError("eval.trials must be positive");
  if (cfg.eval.unitary_trials <= 0) throw ConfigError("eval.unitary_trials must be positive");
  for (const std::string& m : cfg.eval.modes) {
    if (m == "unitary") continue;
    try {
      ParseAdaptMode(m);
    } catch (const InvalidInput& e) {
      throw ConfigError(std::string("eval.modes: ") + e.what());
    }
  }
  if (cfg.out.empty()) throw ConfigError("run.out must not be empty");
  const std::pair<const char*, const std::filesystem::path*> inputs[] = {
      {"run.unitary_checkpoint", &cfg.unitary_checkpoint},
      {"run.dataset_dir", &cfg.dataset_dir},
      {"run.encoder_checkpoint", &cfg.encoder_checkpoint}};
  for (const auto& [key, p] : inputs) {
    if (!p->empty() && !std::filesystem::exists(*p)) {
      throw ConfigError(std::string(key) + ": path does not exist: " + p->string());
    }
  }
}

}  // namespace pivot
