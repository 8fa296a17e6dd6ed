#pragma once

// Scene files are line-oriented "key: value" headers followed by a map block:
//
//   # comments and blank lines are ignored before `map:`
//   name: kitchen_03
//   language: the red cup on the table
//   object: 5 7                 (x y)
//   start: 0 0 NORTH            (x y orientation)
//   fan: 90 4 on                (fov_degrees range_cells occlusion on|off)
//   cell_size: 0.25             (meters per cell side)
//   map:
//   ....#...
//   ........
//
// `name`, `fan` and `cell_size` are optional. Everything after `map:` is the
// occupancy grid.

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "lcom/errors.hpp"
#include "lcom/grid_world.hpp"

namespace lcom {

struct Scene {
  std::string name;
  OccupancyGrid grid;
  Cell object_cell;
  std::string language;
  RobotPose robot_start;
  FanParams fan;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const std::size_t j = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > j) out.push_back(s.substr(j, i - j));
  }
  return out;
}

template <typename T>
T parse_number(std::string_view s, const std::string& where) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError(where + ": expected a number, got '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace detail

inline Scene parse_scene(std::string_view text, std::string default_name = "scene") {
  std::istringstream in{std::string(text)};
  std::string line;
  std::string name = std::move(default_name);
  std::string language;
  std::optional<Cell> object;
  std::optional<RobotPose> start;
  FanParams fan;
  double cell_size = 0.25;
  bool saw_map = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto colon = t.find(':');
    const std::string where = "scene line " + std::to_string(lineno);
    if (colon == std::string_view::npos) throw ParseError(where + ": expected 'key: value'");
    const auto key = detail::trim(t.substr(0, colon));
    const auto value = detail::trim(t.substr(colon + 1));
    const auto parts = detail::split_ws(value);
    if (key == "map") {
      saw_map = true;
      break;
    } else if (key == "name") {
      name = std::string(value);
    } else if (key == "language") {
      language = std::string(value);
    } else if (key == "object") {
      if (parts.size() != 2) throw ParseError(where + ": object needs 'x y'");
      object = Cell{detail::parse_number<int>(parts[0], where),
                    detail::parse_number<int>(parts[1], where)};
    } else if (key == "start") {
      if (parts.size() != 3) throw ParseError(where + ": start needs 'x y ORIENTATION'");
      const auto dir = parse_direction(parts[2]);
      if (!dir) throw ParseError(where + ": unknown orientation '" + std::string(parts[2]) + "'");
      start = RobotPose{detail::parse_number<int>(parts[0], where),
                        detail::parse_number<int>(parts[1], where), *dir};
    } else if (key == "fan") {
      if (parts.size() != 3) throw ParseError(where + ": fan needs 'fov range on|off'");
      fan.fov_degrees = detail::parse_number<double>(parts[0], where);
      fan.range_cells = detail::parse_number<int>(parts[1], where);
      if (parts[2] == "on") fan.occlusion_enabled = true;
      else if (parts[2] == "off") fan.occlusion_enabled = false;
      else throw ParseError(where + ": occlusion must be 'on' or 'off'");
    } else if (key == "cell_size") {
      cell_size = detail::parse_number<double>(value, where);
    } else {
      throw ParseError(where + ": unknown key '" + std::string(key) + "'");
    }
  }
  if (!saw_map) throw ParseError("scene: missing 'map:' block");
  std::string map_text;
  while (std::getline(in, line)) map_text += line + '\n';
  if (language.empty()) throw ParseError("scene: missing or empty 'language'");
  if (!object) throw ParseError("scene: missing 'object'");
  if (!start) throw ParseError("scene: missing 'start'");
  try {
    validate(fan);
  } catch (const ContractViolation& e) {
    throw ParseError(std::string("scene: ") + e.what());
  }
  OccupancyGrid grid = load_grid(map_text, cell_size);
  if (!grid.in_bounds(*object)) throw ParseError("scene: object cell out of bounds");
  if (!grid.in_bounds(start->cell())) throw ParseError("scene: start cell out of bounds");
  return Scene{std::move(name), std::move(grid), *object, std::move(language), *start, fan};
}

inline Scene load_scene_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open scene file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  std::string stem = path;
  if (const auto slash = stem.find_last_of('/'); slash != std::string::npos) stem.erase(0, slash + 1);
  if (const auto dot = stem.rfind('.'); dot != std::string::npos) stem.erase(dot);
  try {
    return parse_scene(ss.str(), stem);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline std::string to_text(const Scene& s) {
  std::ostringstream out;
  out << "name: " << s.name << '\n'
      << "language: " << s.language << '\n'
      << "object: " << s.object_cell.x << ' ' << s.object_cell.y << '\n'
      << "start: " << s.robot_start.x << ' ' << s.robot_start.y << ' '
      << to_string(s.robot_start.orientation) << '\n'
      << "fan: " << s.fan.fov_degrees << ' ' << s.fan.range_cells << ' '
      << (s.fan.occlusion_enabled ? "on" : "off") << '\n'
      << "cell_size: " << s.grid.cell_size_m() << '\n'
      << "map:\n"
      << s.grid.to_text();
  return out.str();
}

enum class Severity { Warning, Error };

struct Finding {
  Severity severity;
  std::string code;
  std::string message;
};

inline bool has_errors(const std::vector<Finding>& findings) {
  for (const auto& f : findings) {
    if (f.severity == Severity::Error) return true;
  }
  return false;
}

/// Every robot pose reachable from the start whose view contains the object.
inline std::vector<RobotPose> observing_poses(const Scene& s) {
  std::vector<RobotPose> out;
  const auto dist = move_distances(s.grid, s.robot_start);
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist[i] < 0) continue;
    const RobotPose p = pose_at(s.grid, i);
    if (fan_region(s.grid, p, s.fan).contains(s.object_cell)) out.push_back(p);
  }
  return out;
}

inline std::vector<Finding> validate_scene(const Scene& s) {
  std::vector<Finding> out;
  if (s.language.empty()) out.push_back({Severity::Error, "empty-language", "language is empty"});
  const bool start_ok = s.grid.is_free(s.robot_start.cell());
  if (!start_ok) {
    out.push_back({Severity::Error, "start-occupied", "robot start is not a free cell"});
  }
  if (!s.grid.is_free(s.object_cell)) {
    out.push_back({Severity::Error, "object-occupied", "object cell is not a free cell"});
  }
  if (!has_errors(out)) {
    if (observing_poses(s).empty()) {
      out.push_back({Severity::Error, "unreachable", "no reachable pose can see the object"});
    } else if (fan_region(s.grid, s.robot_start, s.fan).contains(s.object_cell)) {
      out.push_back({Severity::Warning, "visible-at-start",
                     "object is inside the sensing region at the start pose"});
    }
  }
  return out;
}

}  // namespace lcom
