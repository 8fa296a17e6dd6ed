#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "lcom/errors.hpp"
#include "lcom/grid_world.hpp"
#include "lcom/scene.hpp"

namespace lcom {

/// Fewest actions that can possibly find the object: the cheapest route (in
/// Moves) to any pose whose view contains it, plus one Look and one Find.
inline int oracle_actions(const Scene& scene) {
  const auto dist = move_distances(scene.grid, scene.robot_start);
  int best = -1;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist[i] < 0 || (best >= 0 && dist[i] >= best)) continue;
    const RobotPose p = pose_at(scene.grid, i);
    if (fan_region(scene.grid, p, scene.fan).contains(scene.object_cell)) best = dist[i];
  }
  if (best < 0) throw ContractViolation("oracle_actions: object cannot be observed from any pose");
  return best + 2;
}

struct TaskResult {
  bool success = false;
  int actions = 0;  // p_i
  int oracle = 0;   // l_i
};

inline void check_results(const std::vector<TaskResult>& results, const char* what) {
  if (results.empty()) throw ContractViolation(std::string(what) + ": empty result set");
  for (const auto& r : results) {
    if (r.actions < 1 || r.oracle < 1) {
      throw ContractViolation(std::string(what) + ": path lengths must be >= 1");
    }
  }
}

/// (1/N) sum S_i * l_i / max(p_i, l_i)
inline double spl(const std::vector<TaskResult>& results) {
  check_results(results, "spl");
  double total = 0.0;
  for (const auto& r : results) {
    if (!r.success) continue;
    total += static_cast<double>(r.oracle) / static_cast<double>(std::max(r.actions, r.oracle));
  }
  return total / static_cast<double>(results.size());
}

inline double completion_rate(const std::vector<TaskResult>& results) {
  if (results.empty()) throw ContractViolation("completion_rate: empty result set");
  const auto n = std::count_if(results.begin(), results.end(), [](auto& r) { return r.success; });
  return static_cast<double>(n) / static_cast<double>(results.size());
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;  // standard error of the mean; 0 for a single sample
};

inline MeanSe mean_se(const std::vector<double>& xs) {
  if (xs.empty()) throw ContractViolation("mean_se: no samples");
  double m = 0.0;
  for (double x : xs) m += x;
  m /= static_cast<double>(xs.size());
  if (xs.size() == 1) return {m, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  const double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  return {m, sd / std::sqrt(static_cast<double>(xs.size()))};
}

/// One benchmark episode.
struct EpisodeRow {
  std::string scene;
  std::string arm;
  std::uint64_t seed = 0;
  TaskResult task;
  double discounted_return = 0.0;
  double wall_s = 0.0;
};

/// Per-arm aggregate. Completion rate and SPL are computed per seed over all
/// scenes, then reported as mean and standard error across seeds.
struct ArmSummary {
  std::string arm;
  std::size_t episodes = 0;
  std::size_t seeds = 0;
  MeanSe completion;
  MeanSe spl;
  double mean_actions = 0.0;
  double mean_oracle = 0.0;
  double mean_wall_s = 0.0;
};

inline std::vector<ArmSummary> summarize(const std::vector<EpisodeRow>& rows) {
  std::vector<std::string> order;
  std::map<std::string, std::map<std::uint64_t, std::vector<TaskResult>>> by_arm;
  std::map<std::string, std::vector<const EpisodeRow*>> flat;
  for (const auto& r : rows) {
    if (!by_arm.contains(r.arm)) order.push_back(r.arm);
    by_arm[r.arm][r.seed].push_back(r.task);
    flat[r.arm].push_back(&r);
  }
  std::vector<ArmSummary> out;
  for (const auto& arm : order) {
    ArmSummary s;
    s.arm = arm;
    std::vector<double> cr;
    std::vector<double> sp;
    for (const auto& [seed, tasks] : by_arm[arm]) {
      cr.push_back(completion_rate(tasks));
      sp.push_back(lcom::spl(tasks));
    }
    s.seeds = cr.size();
    s.completion = mean_se(cr);
    s.spl = mean_se(sp);
    for (const EpisodeRow* r : flat[arm]) {
      s.mean_actions += r->task.actions;
      s.mean_oracle += r->task.oracle;
      s.mean_wall_s += r->wall_s;
    }
    s.episodes = flat[arm].size();
    s.mean_actions /= static_cast<double>(s.episodes);
    s.mean_oracle /= static_cast<double>(s.episodes);
    s.mean_wall_s /= static_cast<double>(s.episodes);
    out.push_back(s);
  }
  return out;
}

}  // namespace lcom
