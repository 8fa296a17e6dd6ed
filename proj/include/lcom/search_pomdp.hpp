#pragma once

#include <string>

#include "lcom/errors.hpp"
#include "lcom/grid_world.hpp"

namespace lcom {

enum class ActionKind { Move, Look, Find };

struct Action {
  ActionKind kind = ActionKind::Look;
  Direction dir = Direction::North;  // Move only
  Cell target{};                     // Find only

  static Action move(Direction d) { return {ActionKind::Move, d, {}}; }
  static Action look() { return {ActionKind::Look, Direction::North, {}}; }
  static Action find(Cell c) { return {ActionKind::Find, Direction::North, c}; }

  friend bool operator==(const Action& a, const Action& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
      case ActionKind::Move: return a.dir == b.dir;
      case ActionKind::Look: return true;
      case ActionKind::Find: return a.target == b.target;
    }
    return false;
  }
};

inline std::string to_string(const Action& a) {
  switch (a.kind) {
    case ActionKind::Move: return "Move(" + std::string(to_string(a.dir)) + ")";
    case ActionKind::Look: return "Look";
    case ActionKind::Find:
      return "Find(" + std::to_string(a.target.x) + "," + std::to_string(a.target.y) + ")";
  }
  return "?";
}

struct SearchState {
  RobotPose robot;
  Cell object_cell;
  bool found = false;

  friend bool operator==(const SearchState&, const SearchState&) = default;
};

struct RewardConfig {
  double move_cost = -2.0;
  double look_cost = -1.0;
  double find_success = 1000.0;
  double find_failure = -1000.0;
  double discount = 0.9;

  friend bool operator==(const RewardConfig&, const RewardConfig&) = default;
};

inline void validate(const RewardConfig& cfg) {
  if (!(cfg.discount > 0.0 && cfg.discount < 1.0)) {
    throw ContractViolation("reward discount must lie in (0, 1)");
  }
  if (!(cfg.find_success > 0.0 && cfg.find_failure < 0.0)) {
    throw ContractViolation("reward requires find_success > 0 > find_failure");
  }
}

inline bool is_terminal(const SearchState& s) { return s.found; }

inline SearchState transition(const OccupancyGrid& grid, const SearchState& s, const Action& a) {
  if (s.found) throw ContractViolation("transition called on a terminal state");
  SearchState next = s;
  switch (a.kind) {
    case ActionKind::Move: next.robot = apply_move(grid, s.robot, a.dir); break;
    case ActionKind::Look: break;
    case ActionKind::Find:
      if (!grid.in_bounds(a.target)) throw ContractViolation("Find target out of bounds");
      next.found = (a.target == s.object_cell);
      break;
  }
  return next;
}

/// Depends only on the object cell and the action, never on the robot pose.
inline double reward(const SearchState& s, const Action& a, const RewardConfig& cfg) {
  switch (a.kind) {
    case ActionKind::Move: return cfg.move_cost;
    case ActionKind::Look: return cfg.look_cost;
    case ActionKind::Find: return a.target == s.object_cell ? cfg.find_success : cfg.find_failure;
  }
  return 0.0;
}

}  // namespace lcom
