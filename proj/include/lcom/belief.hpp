#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "lcom/errors.hpp"
#include "lcom/grid_world.hpp"
#include "lcom/observation_model.hpp"
#include "lcom/search_pomdp.hpp"

namespace lcom {

/// Distribution over the object's cell, stored densely in row-major order.
/// Occupied cells always hold zero.
///
/// Probabilities are linear, renormalized after each update. For a few
/// hundred cells that is far from underflow; past roughly 10^5 cells or very
/// long NULL streams a log-space representation would be needed.
class Belief {
public:
  Belief(int width, int height, std::vector<double> probs)
      : width_(width), height_(height), probs_(std::move(probs)) {
    if (probs_.size() != static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_)) {
      throw ContractViolation("belief size does not match grid dimensions");
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return probs_.size(); }

  double at(Cell c) const { return probs_[index(c)]; }
  double operator[](std::size_t i) const { return probs_[i]; }
  const std::vector<double>& values() const { return probs_; }
  Cell cell_at(std::size_t i) const {
    return {static_cast<int>(i % static_cast<std::size_t>(width_)),
            static_cast<int>(i / static_cast<std::size_t>(width_))};
  }
  std::size_t index(Cell c) const {
    return static_cast<std::size_t>(c.y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(c.x);
  }

  double total() const { return std::accumulate(probs_.begin(), probs_.end(), 0.0); }

  double entropy() const {
    double h = 0.0;
    for (double p : probs_) {
      if (p > 0.0) h -= p * std::log(p);
    }
    return h;
  }

  friend bool operator==(const Belief&, const Belief&) = default;

private:
  int width_;
  int height_;
  std::vector<double> probs_;
};

inline Belief uniform_init(const OccupancyGrid& grid) {
  const auto n = grid.free_count();
  if (n == 0) throw ContractViolation("uniform_init: grid has no free cell");
  std::vector<double> probs(grid.cell_count(), 0.0);
  const double p = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!grid.occupied(grid.cell_at(i))) probs[i] = p;
  }
  return Belief(grid.width(), grid.height(), std::move(probs));
}

inline Belief point_mass(const OccupancyGrid& grid, Cell c) {
  if (!grid.is_free(c)) throw ContractViolation("point_mass: cell is not free");
  std::vector<double> probs(grid.cell_count(), 0.0);
  probs[grid.index(c)] = 1.0;
  return Belief(grid.width(), grid.height(), std::move(probs));
}

/// Argmax cell; ties go to the first cell in (y, x) order.
inline Cell map_estimate(const Belief& b) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < b.size(); ++i) {
    if (b[i] > b[best]) best = i;
  }
  return b.cell_at(best);
}

namespace detail {

inline Belief normalized(const Belief& b, std::vector<double> unnorm, const std::string& what) {
  const double total = std::accumulate(unnorm.begin(), unnorm.end(), 0.0);
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw ImpossibleEvidence("belief update produced an all-zero posterior (" + what + ")");
  }
  for (auto& x : unnorm) x /= total;
  return Belief(b.width(), b.height(), std::move(unnorm));
}

inline std::string describe(const SensorObservation& z) {
  if (z.is_null()) return "z=NULL";
  return "z=(" + std::to_string(z.detection->x) + "," + std::to_string(z.detection->y) + ")";
}

}  // namespace detail

/// Likelihood of a Look observation for every candidate object cell. Cells
/// outside the view share one value, so this costs O(|V|^2 + cells) instead of
/// evaluating observation_likelihood per cell.
inline std::vector<double> look_likelihoods(const Belief& b, const SensorObservation& z,
                                            const CellSet& view, const NoiseParams& p) {
  std::vector<double> lik(b.size());
  const Cell outside_probe{-1, -1};
  const double outside = observation_likelihood(z, outside_probe, view, p);
  std::fill(lik.begin(), lik.end(), outside);
  for (const Cell& c : view) lik[b.index(c)] = observation_likelihood(z, c, view, p);
  return lik;
}

/// Exact Bayesian update after executing `a` from pose `robot`.
///   Look: multiply by the observation likelihood and renormalize.
///   Move: unchanged (static object, deterministic motion).
///   Find: a Find that did not end the episode zeroes its target cell.
inline Belief update(const Belief& b, const Action& a, const SensorObservation& z,
                     const RobotPose& robot, const CellSet& view, const NoiseParams& p) {
  (void)robot;
  switch (a.kind) {
    case ActionKind::Move: return b;
    case ActionKind::Find: {
      const Cell t = a.target;
      if (t.x < 0 || t.y < 0 || t.x >= b.width() || t.y >= b.height()) {
        throw ContractViolation("Find target out of bounds");
      }
      std::vector<double> next = b.values();
      next[b.index(t)] = 0.0;
      return detail::normalized(b, std::move(next), "failed " + to_string(a));
    }
    case ActionKind::Look: {
      const auto lik = look_likelihoods(b, z, view, p);
      std::vector<double> next(b.size());
      for (std::size_t i = 0; i < next.size(); ++i) next[i] = b[i] * lik[i];
      return detail::normalized(b, std::move(next), "Look " + detail::describe(z));
    }
  }
  return b;
}

inline std::string to_csv(const Belief& b, const OccupancyGrid& grid) {
  std::string out;
  char buf[40];
  for (int y = 0; y < b.height(); ++y) {
    for (int x = 0; x < b.width(); ++x) {
      if (x > 0) out += ',';
      if (grid.occupied({x, y})) {
        out += '#';
      } else {
        std::snprintf(buf, sizeof buf, "%.17g", b.at({x, y}));
        out += buf;
      }
    }
    out += '\n';
  }
  return out;
}

/// Snapshot with its wall layout ('#' entries are occupied cells).
struct BeliefSnapshot {
  Belief belief;
  std::vector<bool> occupied;
};

inline BeliefSnapshot belief_from_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    rows.push_back(std::move(fields));
  }
  if (rows.empty()) throw ParseError("belief csv: no rows");
  const auto width = rows.front().size();
  std::vector<double> probs;
  std::vector<bool> occ;
  for (std::size_t y = 0; y < rows.size(); ++y) {
    if (rows[y].size() != width) {
      throw ParseError("belief csv: row " + std::to_string(y) + " has " +
                       std::to_string(rows[y].size()) + " fields, expected " +
                       std::to_string(width));
    }
    for (std::size_t x = 0; x < width; ++x) {
      const std::string& f = rows[y][x];
      if (f == "#") {
        probs.push_back(0.0);
        occ.push_back(true);
        continue;
      }
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc{} || ptr != f.data() + f.size() || !(v >= 0.0) || !std::isfinite(v)) {
        throw ParseError("belief csv: bad value '" + f + "' at row " + std::to_string(y) +
                         ", column " + std::to_string(x));
      }
      probs.push_back(v);
      occ.push_back(false);
    }
  }
  return {Belief(static_cast<int>(width), static_cast<int>(rows.size()), std::move(probs)),
          std::move(occ)};
}

}  // namespace lcom
