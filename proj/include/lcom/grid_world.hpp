#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstdlib>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "lcom/errors.hpp"

namespace lcom {

/// Grid cell index. x is the column, y the row; row 0 is the first line of a
/// text map, so NORTH points toward decreasing y.
struct Cell {
  int x = 0;
  int y = 0;

  friend bool operator==(const Cell&, const Cell&) = default;
  // Lexicographic (y, x), i.e. row-major order.
  friend std::strong_ordering operator<=>(const Cell& a, const Cell& b) {
    if (auto c = a.y <=> b.y; c != 0) return c;
    return a.x <=> b.x;
  }
};

enum class Direction { North = 0, East = 1, South = 2, West = 3 };

inline constexpr std::array<Direction, 4> kDirections{Direction::North, Direction::East,
                                                      Direction::South, Direction::West};

inline Cell step_of(Direction d) {
  switch (d) {
    case Direction::North: return {0, -1};
    case Direction::East: return {1, 0};
    case Direction::South: return {0, 1};
    case Direction::West: return {-1, 0};
  }
  return {0, 0};
}

inline Direction opposite(Direction d) {
  return static_cast<Direction>((static_cast<int>(d) + 2) % 4);
}

inline Direction rotate_cw(Direction d) {
  return static_cast<Direction>((static_cast<int>(d) + 1) % 4);
}

inline std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::North: return "NORTH";
    case Direction::East: return "EAST";
    case Direction::South: return "SOUTH";
    case Direction::West: return "WEST";
  }
  return "?";
}

inline std::optional<Direction> parse_direction(std::string_view s) {
  for (auto d : kDirections) {
    if (to_string(d) == s) return d;
  }
  if (s.size() == 1) {
    switch (s[0]) {
      case 'N': return Direction::North;
      case 'E': return Direction::East;
      case 'S': return Direction::South;
      case 'W': return Direction::West;
      default: break;
    }
  }
  return std::nullopt;
}

class OccupancyGrid {
public:
  OccupancyGrid(int width, int height, std::vector<bool> occupied, double cell_size_m = 0.25)
      : width_(width), height_(height), occupied_(std::move(occupied)), cell_size_m_(cell_size_m) {
    if (width_ < 1 || height_ < 1) throw ContractViolation("grid dimensions must be >= 1");
    if (occupied_.size() != static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_)) {
      throw ContractViolation("occupancy vector does not match grid dimensions");
    }
    if (!(cell_size_m_ > 0.0)) throw ContractViolation("cell_size_m must be positive");
    if (free_count() == 0) throw ContractViolation("grid has no free cell");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  double cell_size_m() const { return cell_size_m_; }
  std::size_t cell_count() const { return occupied_.size(); }

  bool in_bounds(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }
  bool occupied(Cell c) const { return occupied_[index(c)]; }
  bool is_free(Cell c) const { return in_bounds(c) && !occupied(c); }

  std::size_t index(Cell c) const {
    return static_cast<std::size_t>(c.y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(c.x);
  }
  Cell cell_at(std::size_t i) const {
    return {static_cast<int>(i % static_cast<std::size_t>(width_)),
            static_cast<int>(i / static_cast<std::size_t>(width_))};
  }

  std::size_t free_count() const {
    return static_cast<std::size_t>(std::count(occupied_.begin(), occupied_.end(), false));
  }

  std::vector<Cell> free_cells() const {
    std::vector<Cell> out;
    for (std::size_t i = 0; i < occupied_.size(); ++i) {
      if (!occupied_[i]) out.push_back(cell_at(i));
    }
    return out;
  }

  std::string to_text() const {
    std::string out;
    for (int y = 0; y < height_; ++y) {
      for (int x = 0; x < width_; ++x) out += occupied({x, y}) ? '#' : '.';
      out += '\n';
    }
    return out;
  }

  friend bool operator==(const OccupancyGrid&, const OccupancyGrid&) = default;

private:
  int width_;
  int height_;
  std::vector<bool> occupied_;
  double cell_size_m_;
};

/// Parses rows of '.' (free) and '#' (occupied). A trailing newline and
/// carriage returns are ignored.
inline OccupancyGrid load_grid(std::string_view text, double cell_size_m = 0.25) {
  std::vector<std::string> rows;
  std::string line;
  std::istringstream in{std::string(text)};
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    rows.push_back(line);
  }
  while (!rows.empty() && rows.back().empty()) rows.pop_back();
  if (rows.empty()) throw ParseError("map: empty text");

  const auto width = rows.front().size();
  if (width == 0) throw ParseError("map: row 0 is empty");
  std::vector<bool> occ;
  occ.reserve(width * rows.size());
  bool any_free = false;
  for (std::size_t y = 0; y < rows.size(); ++y) {
    if (rows[y].size() != width) {
      throw ParseError("map: row " + std::to_string(y) + " has length " +
                       std::to_string(rows[y].size()) + ", expected " + std::to_string(width));
    }
    for (std::size_t x = 0; x < width; ++x) {
      const char ch = rows[y][x];
      if (ch == '.') {
        occ.push_back(false);
        any_free = true;
      } else if (ch == '#') {
        occ.push_back(true);
      } else {
        throw ParseError("map: unknown character '" + std::string(1, ch) + "' at row " +
                         std::to_string(y) + ", column " + std::to_string(x));
      }
    }
  }
  if (!any_free) throw ParseError("map: no free cell");
  if (!(cell_size_m > 0.0)) throw ParseError("map: cell size must be positive");
  return OccupancyGrid(static_cast<int>(width), static_cast<int>(rows.size()), std::move(occ),
                       cell_size_m);
}

struct RobotPose {
  int x = 0;
  int y = 0;
  Direction orientation = Direction::North;

  Cell cell() const { return {x, y}; }
  friend bool operator==(const RobotPose&, const RobotPose&) = default;
};

inline bool valid_pose(const OccupancyGrid& grid, const RobotPose& pose) {
  return grid.is_free(pose.cell());
}

/// Orientation always becomes `dir`; the position advances only onto an
/// in-bounds free cell.
inline RobotPose apply_move(const OccupancyGrid& grid, const RobotPose& pose, Direction dir) {
  const Cell d = step_of(dir);
  const Cell target{pose.x + d.x, pose.y + d.y};
  if (grid.is_free(target)) return {target.x, target.y, dir};
  return {pose.x, pose.y, dir};
}

struct FanParams {
  double fov_degrees = 90.0;
  int range_cells = 4;
  bool occlusion_enabled = true;

  friend bool operator==(const FanParams&, const FanParams&) = default;
};

inline void validate(const FanParams& fan) {
  if (!(fan.fov_degrees > 0.0 && fan.fov_degrees <= 180.0)) {
    throw ContractViolation("fan fov_degrees must lie in (0, 180]");
  }
  if (fan.range_cells < 1) throw ContractViolation("fan range_cells must be >= 1");
}

/// Sorted (row-major) set of cells.
class CellSet {
public:
  CellSet() = default;
  explicit CellSet(std::vector<Cell> cells) : cells_(std::move(cells)) {
    std::sort(cells_.begin(), cells_.end());
    cells_.erase(std::unique(cells_.begin(), cells_.end()), cells_.end());
  }

  bool contains(Cell c) const { return std::binary_search(cells_.begin(), cells_.end(), c); }
  std::size_t size() const { return cells_.size(); }
  bool empty() const { return cells_.empty(); }
  const Cell& operator[](std::size_t i) const { return cells_[i]; }
  auto begin() const { return cells_.begin(); }
  auto end() const { return cells_.end(); }
  const std::vector<Cell>& cells() const { return cells_; }

  std::optional<std::size_t> index_of(Cell c) const {
    auto it = std::lower_bound(cells_.begin(), cells_.end(), c);
    if (it == cells_.end() || *it != c) return std::nullopt;
    return static_cast<std::size_t>(it - cells_.begin());
  }

  friend bool operator==(const CellSet&, const CellSet&) = default;

private:
  std::vector<Cell> cells_;
};

namespace detail {

// Cells strictly between `from` and `to` on the discretized segment. Stepping
// along the major axis, the minor coordinate is rounded exactly; when the
// segment crosses a cell boundary at its midpoint both neighbours are
// reported, which keeps the ray symmetric under rotations and reflections.
inline std::vector<Cell> ray_interior(Cell from, Cell to) {
  std::vector<Cell> out;
  const int dx = to.x - from.x;
  const int dy = to.y - from.y;
  const int adx = std::abs(dx);
  const int ady = std::abs(dy);
  const int sx = dx < 0 ? -1 : 1;
  const int sy = dy < 0 ? -1 : 1;
  const bool x_major = adx >= ady;
  const int major = x_major ? adx : ady;
  const int minor = x_major ? ady : adx;
  for (int t = 1; t < major; ++t) {
    const int num = minor * t;
    const int base = num / major;
    const int rem2 = 2 * (num % major);
    auto emit = [&](int m) {
      if (x_major) out.push_back({from.x + sx * t, from.y + sy * m});
      else out.push_back({from.x + sx * m, from.y + sy * t});
    };
    if (rem2 < major) {
      emit(base);
    } else if (rem2 > major) {
      emit(base + 1);
    } else {
      emit(base);
      emit(base + 1);
    }
  }
  return out;
}

inline bool line_of_sight(const OccupancyGrid& grid, Cell from, Cell to) {
  for (const Cell& c : ray_interior(from, to)) {
    if (grid.occupied(c)) return false;
  }
  return true;
}

}  // namespace detail

/// True when `c` satisfies the fan's range and angle bounds from `pose`,
/// ignoring occupancy and occlusion.
inline bool in_fan_geometry(const RobotPose& pose, const FanParams& fan, Cell c) {
  const double dx = c.x - pose.x;
  const double dy = c.y - pose.y;
  const double dist = std::hypot(dx, dy);
  if (dist == 0.0 || dist > static_cast<double>(fan.range_cells) + 1e-9) return false;
  const Cell h = step_of(pose.orientation);
  const double cosang = std::clamp((dx * h.x + dy * h.y) / dist, -1.0, 1.0);
  const double angle_deg = std::acos(cosang) * 180.0 / std::numbers::pi;
  return angle_deg <= fan.fov_degrees / 2.0 + 1e-9;
}

/// The visible region V: free cells inside the fan and, when occlusion is on,
/// with an unobstructed ray from the robot. Never contains the robot's cell.
inline CellSet fan_region(const OccupancyGrid& grid, const RobotPose& pose, const FanParams& fan) {
  std::vector<Cell> cells;
  const int r = fan.range_cells;
  for (int y = std::max(0, pose.y - r); y <= std::min(grid.height() - 1, pose.y + r); ++y) {
    for (int x = std::max(0, pose.x - r); x <= std::min(grid.width() - 1, pose.x + r); ++x) {
      const Cell c{x, y};
      if (grid.occupied(c) || !in_fan_geometry(pose, fan, c)) continue;
      if (fan.occlusion_enabled && !detail::line_of_sight(grid, pose.cell(), c)) continue;
      cells.push_back(c);
    }
  }
  return CellSet(std::move(cells));
}

/// Minimum number of Move actions from `start` to every pose, indexed by
/// pose_index(); -1 marks unreachable poses.
inline std::size_t pose_index(const OccupancyGrid& grid, const RobotPose& p) {
  return grid.index(p.cell()) * 4 + static_cast<std::size_t>(p.orientation);
}

inline RobotPose pose_at(const OccupancyGrid& grid, std::size_t i) {
  const Cell c = grid.cell_at(i / 4);
  return {c.x, c.y, static_cast<Direction>(i % 4)};
}

inline std::vector<int> move_distances(const OccupancyGrid& grid, const RobotPose& start) {
  std::vector<int> dist(grid.cell_count() * 4, -1);
  std::vector<std::size_t> frontier{pose_index(grid, start)};
  dist[frontier.front()] = 0;
  for (std::size_t head = 0; head < frontier.size(); ++head) {
    const RobotPose p = pose_at(grid, frontier[head]);
    const int d = dist[frontier[head]];
    for (auto dir : kDirections) {
      const auto j = pose_index(grid, apply_move(grid, p, dir));
      if (dist[j] < 0) {
        dist[j] = d + 1;
        frontier.push_back(j);
      }
    }
  }
  return dist;
}

}  // namespace lcom
