#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lcom/belief.hpp"
#include "lcom/bridge.hpp"
#include "lcom/detector.hpp"
#include "lcom/observation_model.hpp"
#include "lcom/planner.hpp"
#include "lcom/rng.hpp"
#include "lcom/scene.hpp"
#include "lcom/search_pomdp.hpp"

namespace lcom {

/// One experimental condition: which detector produces observations and how
/// the belief update turns its confidence into noise parameters.
struct ArmSpec {
  std::string name = "static";
  DetectorSpec detector;
  LcomMode mode = LcomMode::Static;
  DetectorProfile profile = hu_segmentation_profile();
  // Planning noise; defaults to the profile's static parameters, or to the
  // detector's own parameters for the perfect detector.
  std::optional<NoiseParams> planning_noise;

  friend bool operator==(const ArmSpec&, const ArmSpec&) = default;
};

inline NoiseParams planning_noise_for(const ArmSpec& arm) {
  if (arm.planning_noise) return *arm.planning_noise;
  if (arm.detector.kind == DetectorKind::Perfect) return arm.detector.params;
  return arm.profile.static_params;
}

/// Noise used to update the belief after a Look that reported `confidence`.
inline NoiseParams update_noise_for(const ArmSpec& arm, double confidence) {
  if (arm.detector.kind == DetectorKind::Perfect) return arm.detector.params;
  return noise_for(arm.mode, arm.profile, confidence);
}

struct EpisodeLimits {
  int max_steps = 100;
  int find_budget = 10;
  double max_seconds = 0.0;  // 0 disables the wall-clock cap

  friend bool operator==(const EpisodeLimits&, const EpisodeLimits&) = default;
};

struct StepRecord {
  int step = 0;
  Action action;
  RobotPose pose;  // after the action
  SensorObservation observation;
  std::optional<NoiseParams> params;  // set for Look steps only
  double reward = 0.0;
  double belief_entropy = 0.0;
  double elapsed_s = 0.0;
};

enum class StopReason { Found, StepCap, FindBudget, TimeCap };

inline std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::Found: return "found";
    case StopReason::StepCap: return "step-cap";
    case StopReason::FindBudget: return "find-budget";
    case StopReason::TimeCap: return "time-cap";
  }
  return "?";
}

struct EpisodeOutcome {
  bool success = false;
  int actions = 0;
  int finds_used = 0;
  double discounted_return = 0.0;
  StopReason reason = StopReason::StepCap;
  double elapsed_s = 0.0;
};

struct EpisodeLog {
  std::string scene;
  std::string arm;
  std::uint64_t seed = 0;
  std::vector<StepRecord> steps;
  EpisodeOutcome outcome;
  std::optional<Belief> final_belief;
};

/// Everything but the wall-clock columns.
inline bool same_trace(const EpisodeLog& a, const EpisodeLog& b) {
  if (a.scene != b.scene || a.arm != b.arm || a.seed != b.seed) return false;
  if (a.steps.size() != b.steps.size()) return false;
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    const auto& x = a.steps[i];
    const auto& y = b.steps[i];
    if (x.step != y.step || !(x.action == y.action) || !(x.pose == y.pose) ||
        !(x.observation == y.observation) || x.params != y.params || x.reward != y.reward ||
        x.belief_entropy != y.belief_entropy) {
      return false;
    }
  }
  const auto& p = a.outcome;
  const auto& q = b.outcome;
  return p.success == q.success && p.actions == q.actions && p.finds_used == q.finds_used &&
         p.discounted_return == q.discounted_return && p.reason == q.reason &&
         a.final_belief == b.final_belief;
}

/// Overrides the planner, e.g. to replay a fixed action script.
using Policy = std::function<Action(const Belief&, const RobotPose&, int step)>;

struct EpisodeOptions {
  Policy policy;
  std::string image_prefix = "sim://";
};

/// Runs one search episode: plan, act, observe, update, until the object is
/// found or a limit is hit. Deterministic in `seed` when planning is
/// count-budgeted. Bridge transport failures propagate as
/// bridge::TransportError.
inline EpisodeLog run_episode(const Scene& scene, const ArmSpec& arm, PlannerConfig planner_cfg,
                              const RewardConfig& rewards, const EpisodeLimits& limits,
                              std::uint64_t seed, const EpisodeOptions& opts = {}) {
  validate(arm.detector);
  validate(rewards);
  if (limits.max_steps < 1 || limits.find_budget < 1) {
    throw ContractViolation("episode limits must be positive");
  }
  if (has_errors(validate_scene(scene))) {
    throw ContractViolation("run_episode: scene '" + scene.name + "' failed validation");
  }
  planner_cfg.planning_noise = planning_noise_for(arm);
  planner_cfg.discount = rewards.discount;

  std::unique_ptr<bridge::DetectorClient> client;
  if (arm.detector.kind == DetectorKind::Bridge) {
    client = std::make_unique<bridge::DetectorClient>(arm.detector.bridge.endpoint);
  }

  EpisodeLog log;
  log.scene = scene.name;
  log.arm = arm.name;
  log.seed = seed;

  Rng sensor_rng(mix_seed(seed, 0x5e45));
  SearchState state{scene.robot_start, scene.object_cell, false};
  Belief belief = uniform_init(scene.grid);

  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  double discount = 1.0;
  auto& out = log.outcome;
  out.reason = StopReason::StepCap;

  for (int step = 0; step < limits.max_steps; ++step) {
    if (limits.max_seconds > 0.0 && elapsed() >= limits.max_seconds) {
      out.reason = StopReason::TimeCap;
      break;
    }
    Action action;
    if (opts.policy) {
      action = opts.policy(belief, state.robot, step);
    } else {
      PlannerConfig step_cfg = planner_cfg;
      step_cfg.rng_seed = mix_seed(seed, static_cast<std::uint64_t>(step) + 1);
      PoUctPlanner planner(scene.grid, scene.fan, step_cfg, rewards);
      action = planner.plan(belief, state.robot).action;
    }

    const RobotPose before = state.robot;
    const double r = reward(state, action, rewards);
    state = transition(scene.grid, state, action);

    StepRecord rec;
    rec.step = step;
    rec.action = action;
    rec.pose = state.robot;
    rec.reward = r;

    switch (action.kind) {
      case ActionKind::Move: break;
      case ActionKind::Look: {
        const CellSet view = fan_region(scene.grid, before, scene.fan);
        SensorObservation z;
        if (client) {
          bridge::DetectionRequest req;
          req.lang = scene.language;
          req.rgb = opts.image_prefix + scene.name + "/" + std::to_string(before.x) + "_" +
                    std::to_string(before.y) + "_" + std::string(to_string(before.orientation)) +
                    "/" + std::to_string(step);
          req.intrinsics = arm.detector.bridge.camera.intrinsics;
          const auto resp =
              client->query(req, std::chrono::milliseconds(arm.detector.bridge.timeout_ms));
          z = bridge::project_detection(resp, arm.detector.bridge.camera, before, scene.grid,
                                        scene.fan);
        } else {
          z = simulate_detection(arm.detector, scene.object_cell, view, sensor_rng).observation;
        }
        const NoiseParams p = update_noise_for(arm, z.confidence);
        belief = update(belief, action, z, before, view, p);
        rec.observation = z;
        rec.params = p;
        break;
      }
      case ActionKind::Find:
        ++out.finds_used;
        if (!state.found) belief = update(belief, action, {}, before, {}, {});
        break;
    }

    rec.belief_entropy = belief.entropy();
    rec.elapsed_s = elapsed();
    out.discounted_return += discount * r;
    discount *= rewards.discount;
    log.steps.push_back(rec);
    out.actions = step + 1;

    if (state.found) {
      out.success = true;
      out.reason = StopReason::Found;
      break;
    }
    if (action.kind == ActionKind::Find && out.finds_used >= limits.find_budget) {
      out.reason = StopReason::FindBudget;
      break;
    }
  }
  out.elapsed_s = elapsed();
  log.final_belief = belief;
  return log;
}

}  // namespace lcom
