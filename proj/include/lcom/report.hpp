#pragma once

// Output formats written by the CLI.
//
// Episode log (JSON): scene, arm, seed, outcome, and one entry per step with
// action, pose after the action, observation ("NULL" or [x, y]), confidence,
// the noise parameters used for the update (Look steps), reward, belief
// entropy and elapsed seconds.
//
// Bench CSV: a header plus one row per episode
//   scene,arm,seed,success,actions,oracle,discounted_return,wall_s
// then a blank line and the aggregate block
//   arm,episodes,seeds,completion,completion_se,spl,spl_se,mean_actions,mean_oracle,mean_wall_s

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lcom/belief.hpp"
#include "lcom/episode.hpp"
#include "lcom/errors.hpp"
#include "lcom/metrics.hpp"

namespace lcom {

inline nlohmann::json to_json(const EpisodeLog& log) {
  using nlohmann::json;
  json steps = json::array();
  for (const auto& s : log.steps) {
    json j = {{"step", s.step},
              {"action", to_string(s.action)},
              {"pose", {s.pose.x, s.pose.y, std::string(to_string(s.pose.orientation))}},
              {"reward", s.reward},
              {"entropy", s.belief_entropy},
              {"elapsed_s", s.elapsed_s}};
    if (s.action.kind == ActionKind::Look) {
      j["observation"] = s.observation.is_null()
                             ? json("NULL")
                             : json::array({s.observation.detection->x, s.observation.detection->y});
      j["confidence"] = s.observation.confidence;
    }
    if (s.params) {
      j["params"] = {{"sigma", s.params->sigma},
                     {"tpr", s.params->tpr},
                     {"tnr", s.params->tnr},
                     {"smoothing", s.params->smoothing}};
    }
    steps.push_back(std::move(j));
  }
  const auto& o = log.outcome;
  return {{"scene", log.scene},
          {"arm", log.arm},
          {"seed", log.seed},
          {"outcome",
           {{"success", o.success},
            {"actions", o.actions},
            {"finds_used", o.finds_used},
            {"discounted_return", o.discounted_return},
            {"stop", std::string(to_string(o.reason))},
            {"elapsed_s", o.elapsed_s}}},
          {"steps", std::move(steps)}};
}

/// Writes through a temporary file and renames, so readers never see a
/// partial file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

inline std::string bench_csv(const std::vector<EpisodeRow>& rows) {
  std::string out = "scene,arm,seed,success,actions,oracle,discounted_return,wall_s\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%s,%llu,%d,%d,%d,%.6f,%.6f\n", r.scene.c_str(), r.arm.c_str(),
                  static_cast<unsigned long long>(r.seed), r.task.success ? 1 : 0, r.task.actions,
                  r.task.oracle, r.discounted_return, r.wall_s);
    out += buf;
  }
  out += "\narm,episodes,seeds,completion,completion_se,spl,spl_se,mean_actions,mean_oracle,mean_wall_s\n";
  for (const auto& s : summarize(rows)) {
    std::snprintf(buf, sizeof buf, "%s,%zu,%zu,%.6f,%.6f,%.6f,%.6f,%.4f,%.4f,%.6f\n", s.arm.c_str(),
                  s.episodes, s.seeds, s.completion.mean, s.completion.se, s.spl.mean, s.spl.se,
                  s.mean_actions, s.mean_oracle, s.mean_wall_s);
    out += buf;
  }
  return out;
}

inline constexpr std::string_view kHeatGlyphs = " .:-=+*%@";

/// ASCII heatmap: glyph density scales with b(c)/max b, '#' marks occupied
/// cells, followed by an "argmax x y p" line.
inline std::string render_belief(const BeliefSnapshot& snap) {
  const Belief& b = snap.belief;
  double peak = 0.0;
  for (double v : b.values()) peak = std::max(peak, v);
  std::string out;
  for (int y = 0; y < b.height(); ++y) {
    for (int x = 0; x < b.width(); ++x) {
      const std::size_t i = b.index({x, y});
      if (snap.occupied[i]) {
        out += '#';
        continue;
      }
      const double f = peak > 0.0 ? b[i] / peak : 0.0;
      auto g = static_cast<std::size_t>(f * static_cast<double>(kHeatGlyphs.size() - 1) + 0.5);
      if (b[i] > 0.0 && g == 0) g = 1;
      out += kHeatGlyphs[g];
    }
    out += '\n';
  }
  if (peak > 0.0) {
    const Cell m = map_estimate(b);
    char buf[96];
    std::snprintf(buf, sizeof buf, "argmax %d %d %.6g\n", m.x, m.y, b.at(m));
    out += buf;
  } else {
    out += "argmax none\n";
  }
  return out;
}

}  // namespace lcom
