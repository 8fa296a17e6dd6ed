#pragma once

// Online PO-UCT over the object-search POMDP.
//
// Each tree node stands for an action/observation history and carries the
// exact posterior for that history under the fixed planning noise model, so
// the Find action at a node always targets that node's most likely cell. The
// branching factor is six: Move x4, Look, Find(argmax).

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <unordered_map>
#include <vector>

#include "lcom/belief.hpp"
#include "lcom/errors.hpp"
#include "lcom/grid_world.hpp"
#include "lcom/observation_model.hpp"
#include "lcom/rng.hpp"
#include "lcom/search_pomdp.hpp"

namespace lcom {

struct PlannerConfig {
  int depth = 3;
  double exploration_c = 10000.0;
  std::size_t simulations = 1000;
  // When positive, search runs for this many wall-clock seconds instead of a
  // fixed simulation count. Results are then not reproducible.
  double time_budget_s = 0.0;
  double discount = 0.9;
  NoiseParams planning_noise = hu_segmentation_profile().static_params;
  std::uint64_t rng_seed = 0;

  friend bool operator==(const PlannerConfig&, const PlannerConfig&) = default;
};

inline void validate(const PlannerConfig& cfg) {
  if (cfg.depth < 1) throw ContractViolation("planner depth must be >= 1");
  if (!(cfg.exploration_c >= 0.0)) throw ContractViolation("exploration_c must be >= 0");
  if (cfg.time_budget_s <= 0.0 && cfg.simulations == 0) {
    throw ContractViolation("planner budget must be positive");
  }
  if (!(cfg.discount > 0.0 && cfg.discount < 1.0)) {
    throw ContractViolation("planner discount must lie in (0, 1)");
  }
  validate(cfg.planning_noise);
}

inline constexpr std::size_t kNumCandidates = 6;
inline constexpr std::size_t kLookIndex = 4;
inline constexpr std::size_t kFindIndex = 5;

/// Move N/E/S/W, Look, Find(map_estimate(b)), in that fixed order.
inline std::array<Action, kNumCandidates> candidate_actions(const Belief& b) {
  return {Action::move(Direction::North), Action::move(Direction::East),
          Action::move(Direction::South), Action::move(Direction::West), Action::look(),
          Action::find(map_estimate(b))};
}

struct ActionStats {
  std::size_t visits = 0;
  double value = 0.0;  // running mean of sampled discounted returns
};

struct SearchTreeNode {
  RobotPose robot;
  Belief belief;
  CellSet view;
  Cell find_target;
  std::size_t visits = 0;
  std::array<ActionStats, kNumCandidates> stats{};
  std::unordered_map<std::int64_t, std::size_t> children;
};

struct PlanResult {
  Action action;
  std::array<ActionStats, kNumCandidates> root_stats{};
  std::array<Action, kNumCandidates> root_actions{};
  std::size_t simulations = 0;
  std::size_t tree_size = 0;
};

class PoUctPlanner {
public:
  PoUctPlanner(const OccupancyGrid& grid, const FanParams& fan, PlannerConfig cfg,
               RewardConfig rewards = {})
      : grid_(grid), fan_(fan), cfg_(std::move(cfg)), rewards_(rewards) {
    validate(cfg_);
    validate(fan_);
  }

  PlanResult plan(const Belief& belief, const RobotPose& robot) {
    if (!(belief.total() > 0.0)) throw ContractViolation("plan: belief has no support");
    if (!valid_pose(grid_, robot)) throw ContractViolation("plan: robot pose is not valid");

    nodes_.clear();
    rng_.seed(cfg_.rng_seed);
    make_node(robot, belief);
    build_sampler(belief);

    const auto start = std::chrono::steady_clock::now();
    std::size_t sims = 0;
    for (;;) {
      if (cfg_.time_budget_s > 0.0) {
        const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
        if (dt.count() >= cfg_.time_budget_s && sims > 0) break;
      } else if (sims >= cfg_.simulations) {
        break;
      }
      simulate(sample_object(), 0, 0);
      ++sims;
    }

    const auto& root = nodes_.front();
    PlanResult result;
    result.root_stats = root.stats;
    result.root_actions = actions_of(root);
    result.simulations = sims;
    result.tree_size = nodes_.size();
    std::size_t best = kNumCandidates;
    for (std::size_t i = 0; i < kNumCandidates; ++i) {
      if (root.stats[i].visits == 0) continue;
      if (best == kNumCandidates || root.stats[i].value > root.stats[best].value) best = i;
    }
    result.action = result.root_actions[best];
    return result;
  }

private:
  std::array<Action, kNumCandidates> actions_of(const SearchTreeNode& n) const {
    auto acts = candidate_actions(n.belief);
    acts[kFindIndex] = Action::find(n.find_target);
    return acts;
  }

  std::size_t make_node(const RobotPose& robot, Belief belief) {
    SearchTreeNode n{robot, std::move(belief), fan_region(grid_, robot, fan_), {}, 0, {}, {}};
    n.find_target = map_estimate(n.belief);
    nodes_.push_back(std::move(n));
    return nodes_.size() - 1;
  }

  void build_sampler(const Belief& b) {
    cumulative_.resize(b.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
      acc += b[i];
      cumulative_[i] = acc;
    }
    total_mass_ = acc;
  }

  Cell sample_object() {
    const double u = uniform01(rng_) * total_mass_;
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    auto i = static_cast<std::size_t>(it - cumulative_.begin());
    if (i >= cumulative_.size()) i = cumulative_.size() - 1;
    // Skip zero-mass cells that share a cumulative value with their successor.
    while (nodes_.front().belief[i] <= 0.0 && i + 1 < cumulative_.size()) ++i;
    return nodes_.front().belief.cell_at(i);
  }

  std::size_t select_action(const SearchTreeNode& n) const {
    for (std::size_t i = 0; i < kNumCandidates; ++i) {
      if (n.stats[i].visits == 0) return i;
    }
    const double log_n = std::log(static_cast<double>(n.visits));
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < kNumCandidates; ++i) {
      const auto& s = n.stats[i];
      const double score =
          s.value + cfg_.exploration_c * std::sqrt(log_n / static_cast<double>(s.visits));
      if (score > best_score) {
        best_score = score;
        best = i;
      }
    }
    return best;
  }

  double rollout(int depth) {
    double total = 0.0;
    double discount = 1.0;
    for (int d = depth; d < cfg_.depth; ++d) {
      const std::size_t pick = uniform_index(rng_, kLookIndex + 1);
      total += discount * (pick == kLookIndex ? rewards_.look_cost : rewards_.move_cost);
      discount *= cfg_.discount;
    }
    return total;
  }

  double simulate(Cell object, std::size_t node_id, int depth) {
    if (depth >= cfg_.depth) return 0.0;
    const std::size_t ai = select_action(nodes_[node_id]);
    const Action action = actions_of(nodes_[node_id])[ai];
    const SearchState state{nodes_[node_id].robot, object, false};
    const double r = reward(state, action, rewards_);
    const SearchState next = transition(grid_, state, action);

    double ret = r;
    // Nodes at the horizon would never be descended into, so they are not built.
    if (!next.found && depth + 1 < cfg_.depth) {
      SensorObservation z;
      if (action.kind == ActionKind::Look) {
        z = sample_observation(object, nodes_[node_id].view, cfg_.planning_noise, rng_);
      }
      const std::int64_t key = child_key(ai, z);
      const auto it = nodes_[node_id].children.find(key);
      if (it == nodes_[node_id].children.end()) {
        const std::size_t child = expand(node_id, action, z, next.robot);
        nodes_[node_id].children.emplace(key, child);
        ret += cfg_.discount * rollout(depth + 1);
      } else {
        ret += cfg_.discount * simulate(object, it->second, depth + 1);
      }
    }

    auto& n = nodes_[node_id];
    ++n.visits;
    auto& s = n.stats[ai];
    ++s.visits;
    s.value += (ret - s.value) / static_cast<double>(s.visits);
    return ret;
  }

  std::size_t expand(std::size_t parent, const Action& action, const SensorObservation& z,
                     const RobotPose& robot) {
    const auto& p = nodes_[parent];
    Belief next = update(p.belief, action, z, p.robot, p.view, cfg_.planning_noise);
    return make_node(robot, std::move(next));
  }

  std::int64_t child_key(std::size_t action_index, const SensorObservation& z) const {
    const std::int64_t obs =
        z.is_null() ? 0 : 1 + static_cast<std::int64_t>(grid_.index(*z.detection));
    return static_cast<std::int64_t>(action_index) *
               (static_cast<std::int64_t>(grid_.cell_count()) + 1) +
           obs;
  }

  const OccupancyGrid& grid_;
  FanParams fan_;
  PlannerConfig cfg_;
  RewardConfig rewards_;
  Rng rng_;
  std::deque<SearchTreeNode> nodes_;
  std::vector<double> cumulative_;
  double total_mass_ = 0.0;
};

inline Action plan(const Belief& b, const RobotPose& robot, const OccupancyGrid& grid,
                   const FanParams& fan, const PlannerConfig& cfg, const RewardConfig& rewards = {}) {
  PoUctPlanner planner(grid, fan, cfg, rewards);
  return planner.plan(b, robot).action;
}

}  // namespace lcom
