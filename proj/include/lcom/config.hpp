#pragma once

// JSON run configuration shared by the CLI subcommands.
//
//   {
//     "scenes": ["scenes"],                 files or directories of *.scene
//     "arms": [{"name": "dynamic", "mode": "dynamic-both",
//               "profile": "hu-segmentation",
//               "detector": {"kind": "confidence", "params": {...},
//                            "confidence": {...}, "bridge": {...}},
//               "planning_noise": {...}}],
//     "planner": {"depth": 3, "exploration_c": 10000, "simulations": 1000,
//                 "time_budget_s": 0},
//     "reward": {...}, "limits": {...},
//     "seeds": [1, 2, 3], "output_dir": "out"
//   }
//
// Every field is optional except "scenes". Relative scene paths resolve
// against the config file's directory.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lcom/detector.hpp"
#include "lcom/episode.hpp"
#include "lcom/errors.hpp"
#include "lcom/planner.hpp"
#include "lcom/scene.hpp"
#include "lcom/search_pomdp.hpp"

namespace lcom {

inline constexpr const char* kEndpointEnv = "LCOM_DETECTOR_ENDPOINT";

struct RunConfig {
  std::vector<std::string> scenes;
  std::vector<ArmSpec> arms{ArmSpec{}};
  PlannerConfig planner;
  RewardConfig reward;
  EpisodeLimits limits;
  std::vector<std::uint64_t> seeds{1};
  std::string output_dir = "out";

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

namespace cfg_detail {

using nlohmann::json;

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
  throw ParseError("config: " + path + ": " + what);
}

inline const json* member(const json& obj, const std::string& path, const char* key) {
  if (!obj.is_object()) fail(path, "expected an object");
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

inline void reject_unknown(const json& obj, const std::string& path,
                           std::initializer_list<const char*> known) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return it.key() == k; })) {
      fail(path.empty() ? it.key() : path + "." + it.key(), "unknown field");
    }
  }
}

inline std::string join(const std::string& path, const char* key) {
  return path.empty() ? std::string(key) : path + "." + key;
}

inline void read(const json& obj, const std::string& path, const char* key, double& out) {
  if (const json* v = member(obj, path, key)) {
    if (!v->is_number()) fail(join(path, key), "expected a number");
    out = v->get<double>();
  }
}

inline void read(const json& obj, const std::string& path, const char* key, int& out) {
  if (const json* v = member(obj, path, key)) {
    if (!v->is_number_integer()) fail(join(path, key), "expected an integer");
    out = v->get<int>();
  }
}

inline void read(const json& obj, const std::string& path, const char* key, std::size_t& out) {
  if (const json* v = member(obj, path, key)) {
    if (!v->is_number_unsigned()) fail(join(path, key), "expected a non-negative integer");
    out = v->get<std::size_t>();
  }
}

inline void read(const json& obj, const std::string& path, const char* key, bool& out) {
  if (const json* v = member(obj, path, key)) {
    if (!v->is_boolean()) fail(join(path, key), "expected true or false");
    out = v->get<bool>();
  }
}

inline void read(const json& obj, const std::string& path, const char* key, std::string& out) {
  if (const json* v = member(obj, path, key)) {
    if (!v->is_string()) fail(join(path, key), "expected a string");
    out = v->get<std::string>();
  }
}

inline NoiseParams read_noise(const json& j, const std::string& path, NoiseParams p) {
  reject_unknown(j, path, {"sigma", "tpr", "tnr", "smoothing"});
  read(j, path, "sigma", p.sigma);
  read(j, path, "tpr", p.tpr);
  read(j, path, "tnr", p.tnr);
  read(j, path, "smoothing", p.smoothing);
  try {
    validate(p);
  } catch (const ContractViolation& e) {
    fail(path, e.what());
  }
  return p;
}

inline json noise_json(const NoiseParams& p) {
  return {{"sigma", p.sigma}, {"tpr", p.tpr}, {"tnr", p.tnr}, {"smoothing", p.smoothing}};
}

inline DetectorSpec read_detector(const json& j, const std::string& path) {
  reject_unknown(j, path, {"kind", "params", "confidence", "bridge"});
  DetectorSpec d;
  std::string kind = std::string(to_string(d.kind));
  read(j, path, "kind", kind);
  const auto k = parse_detector_kind(kind);
  if (!k) fail(join(path, "kind"), "unknown detector kind '" + kind + "'");
  d.kind = *k;
  if (d.kind == DetectorKind::Perfect) d.params = perfect_sensor_params();
  if (const json* p = member(j, path, "params")) d.params = read_noise(*p, join(path, "params"), d.params);
  if (const json* c = member(j, path, "confidence")) {
    const std::string cp = join(path, "confidence");
    reject_unknown(*c, cp, {"p_high_given_A", "p_high_given_notA", "high_value", "low_value"});
    read(*c, cp, "p_high_given_A", d.confidence.p_high_given_A);
    read(*c, cp, "p_high_given_notA", d.confidence.p_high_given_notA);
    read(*c, cp, "high_value", d.confidence.high_value);
    read(*c, cp, "low_value", d.confidence.low_value);
  }
  if (const json* b = member(j, path, "bridge")) {
    const std::string bp = join(path, "bridge");
    reject_unknown(*b, bp, {"endpoint", "timeout_ms", "camera"});
    read(*b, bp, "endpoint", d.bridge.endpoint);
    read(*b, bp, "timeout_ms", d.bridge.timeout_ms);
    if (const json* cam = member(*b, bp, "camera")) {
      const std::string cp = join(bp, "camera");
      reject_unknown(*cam, cp, {"fx", "fy", "cx", "cy", "mount_yaw_deg"});
      auto& in = d.bridge.camera.intrinsics;
      read(*cam, cp, "fx", in.fx);
      read(*cam, cp, "fy", in.fy);
      read(*cam, cp, "cx", in.cx);
      read(*cam, cp, "cy", in.cy);
      read(*cam, cp, "mount_yaw_deg", d.bridge.camera.mount_yaw_deg);
    }
  }
  return d;
}

inline json detector_json(const DetectorSpec& d) {
  const auto& c = d.confidence;
  const auto& in = d.bridge.camera.intrinsics;
  return {{"kind", std::string(to_string(d.kind))},
          {"params", noise_json(d.params)},
          {"confidence",
           {{"p_high_given_A", c.p_high_given_A},
            {"p_high_given_notA", c.p_high_given_notA},
            {"high_value", c.high_value},
            {"low_value", c.low_value}}},
          {"bridge",
           {{"endpoint", d.bridge.endpoint},
            {"timeout_ms", d.bridge.timeout_ms},
            {"camera",
             {{"fx", in.fx},
              {"fy", in.fy},
              {"cx", in.cx},
              {"cy", in.cy},
              {"mount_yaw_deg", d.bridge.camera.mount_yaw_deg}}}}}};
}

inline ArmSpec read_arm(const json& j, const std::string& path) {
  reject_unknown(j, path, {"name", "mode", "profile", "detector", "planning_noise"});
  ArmSpec arm;
  std::string mode = std::string(to_string(arm.mode));
  std::string profile = arm.profile.name;
  read(j, path, "mode", mode);
  read(j, path, "profile", profile);
  const auto m = parse_lcom_mode(mode);
  if (!m) fail(join(path, "mode"), "unknown mode '" + mode + "'");
  arm.mode = *m;
  const auto prof = builtin_profile(profile);
  if (!prof) fail(join(path, "profile"), "unknown detector profile '" + profile + "'");
  arm.profile = *prof;
  if (const json* d = member(j, path, "detector")) arm.detector = read_detector(*d, join(path, "detector"));
  arm.name = std::string(to_string(arm.mode));
  read(j, path, "name", arm.name);
  if (const json* p = member(j, path, "planning_noise")) {
    arm.planning_noise = read_noise(*p, join(path, "planning_noise"), planning_noise_for(arm));
  }
  try {
    validate(arm.detector);
  } catch (const ContractViolation& e) {
    fail(join(path, "detector"), e.what());
  }
  return arm;
}

inline json arm_json(const ArmSpec& a) {
  json j = {{"name", a.name},
            {"mode", std::string(to_string(a.mode))},
            {"profile", a.profile.name},
            {"detector", detector_json(a.detector)}};
  if (a.planning_noise) j["planning_noise"] = noise_json(*a.planning_noise);
  return j;
}

}  // namespace cfg_detail

/// Parses a config document. `base_dir` anchors relative scene paths.
inline RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir = {}) {
  using cfg_detail::fail;
  using cfg_detail::member;
  using cfg_detail::read;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) fail("<root>", "expected an object");
  cfg_detail::reject_unknown(
      j, "", {"scenes", "arms", "planner", "reward", "limits", "seeds", "output_dir"});

  RunConfig cfg;
  const auto* scenes = member(j, "", "scenes");
  if (!scenes) fail("scenes", "missing");
  if (!scenes->is_array()) fail("scenes", "expected an array of paths");
  for (std::size_t i = 0; i < scenes->size(); ++i) {
    const auto& s = (*scenes)[i];
    if (!s.is_string()) fail("scenes[" + std::to_string(i) + "]", "expected a string");
    std::filesystem::path p = s.get<std::string>();
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    cfg.scenes.push_back(p.lexically_normal().string());
  }
  if (cfg.scenes.empty()) fail("scenes", "at least one scene is required");

  if (const auto* arms = member(j, "", "arms")) {
    if (!arms->is_array() || arms->empty()) fail("arms", "expected a non-empty array");
    cfg.arms.clear();
    for (std::size_t i = 0; i < arms->size(); ++i) {
      cfg.arms.push_back(cfg_detail::read_arm((*arms)[i], "arms[" + std::to_string(i) + "]"));
    }
  }

  if (const auto* p = member(j, "", "planner")) {
    cfg_detail::reject_unknown(*p, "planner",
                               {"depth", "exploration_c", "simulations", "time_budget_s"});
    read(*p, "planner", "depth", cfg.planner.depth);
    read(*p, "planner", "exploration_c", cfg.planner.exploration_c);
    read(*p, "planner", "simulations", cfg.planner.simulations);
    read(*p, "planner", "time_budget_s", cfg.planner.time_budget_s);
    try {
      validate(cfg.planner);
    } catch (const ContractViolation& e) {
      fail("planner", e.what());
    }
  }
  if (const auto* r = member(j, "", "reward")) {
    cfg_detail::reject_unknown(*r, "reward",
                               {"move_cost", "look_cost", "find_success", "find_failure", "discount"});
    read(*r, "reward", "move_cost", cfg.reward.move_cost);
    read(*r, "reward", "look_cost", cfg.reward.look_cost);
    read(*r, "reward", "find_success", cfg.reward.find_success);
    read(*r, "reward", "find_failure", cfg.reward.find_failure);
    read(*r, "reward", "discount", cfg.reward.discount);
    try {
      validate(cfg.reward);
    } catch (const ContractViolation& e) {
      fail("reward", e.what());
    }
  }
  if (const auto* l = member(j, "", "limits")) {
    cfg_detail::reject_unknown(*l, "limits", {"max_steps", "find_budget", "max_seconds"});
    read(*l, "limits", "max_steps", cfg.limits.max_steps);
    read(*l, "limits", "find_budget", cfg.limits.find_budget);
    read(*l, "limits", "max_seconds", cfg.limits.max_seconds);
    if (cfg.limits.max_steps < 1) fail("limits.max_steps", "must be >= 1");
    if (cfg.limits.find_budget < 1) fail("limits.find_budget", "must be >= 1");
  }
  if (const auto* s = member(j, "", "seeds")) {
    if (!s->is_array() || s->empty()) fail("seeds", "expected a non-empty array");
    cfg.seeds.clear();
    for (std::size_t i = 0; i < s->size(); ++i) {
      if (!(*s)[i].is_number_unsigned()) fail("seeds[" + std::to_string(i) + "]", "expected a non-negative integer");
      cfg.seeds.push_back((*s)[i].get<std::uint64_t>());
    }
  }
  read(j, "", "output_dir", cfg.output_dir);
  return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), std::filesystem::path(path).parent_path());
}

inline std::string dump_run_config(const RunConfig& c) {
  nlohmann::json arms = nlohmann::json::array();
  for (const auto& a : c.arms) arms.push_back(cfg_detail::arm_json(a));
  const nlohmann::json j = {
      {"scenes", c.scenes},
      {"arms", arms},
      {"planner",
       {{"depth", c.planner.depth},
        {"exploration_c", c.planner.exploration_c},
        {"simulations", c.planner.simulations},
        {"time_budget_s", c.planner.time_budget_s}}},
      {"reward",
       {{"move_cost", c.reward.move_cost},
        {"look_cost", c.reward.look_cost},
        {"find_success", c.reward.find_success},
        {"find_failure", c.reward.find_failure},
        {"discount", c.reward.discount}}},
      {"limits",
       {{"max_steps", c.limits.max_steps},
        {"find_budget", c.limits.find_budget},
        {"max_seconds", c.limits.max_seconds}}},
      {"seeds", c.seeds},
      {"output_dir", c.output_dir}};
  return j.dump(2) + "\n";
}

/// Points every bridge arm at `endpoint` (from the environment when unset).
inline void apply_endpoint_override(RunConfig& cfg, std::optional<std::string> endpoint = std::nullopt) {
  if (!endpoint) {
    const char* env = std::getenv(kEndpointEnv);
    if (!env || !*env) return;
    endpoint = env;
  }
  for (auto& a : cfg.arms) {
    if (a.detector.kind == DetectorKind::Bridge) a.detector.bridge.endpoint = *endpoint;
  }
}

/// Expands directories to their *.scene files (sorted) and loads everything.
inline std::vector<Scene> load_scenes(const std::vector<std::string>& paths) {
  std::vector<Scene> out;
  for (const auto& p : paths) {
    if (std::filesystem::is_directory(p)) {
      std::vector<std::filesystem::path> files;
      for (const auto& e : std::filesystem::directory_iterator(p)) {
        if (e.is_regular_file() && e.path().extension() == ".scene") files.push_back(e.path());
      }
      std::sort(files.begin(), files.end());
      if (files.empty()) throw ParseError("scene directory '" + p + "' contains no .scene files");
      for (const auto& f : files) out.push_back(load_scene_file(f.string()));
    } else {
      out.push_back(load_scene_file(p));
    }
  }
  if (out.empty()) throw ParseError("no scenes to run");
  return out;
}

}  // namespace lcom
