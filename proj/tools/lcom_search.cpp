// lcom_search: run, benchmark, oracle and render subcommands.
//
//   lcom_search run    --config C.json [--out DIR] [--seeds 1,2] [--mode NAME]
//   lcom_search bench  --config C.json [--out DIR] [--seeds 1,2] [--mode NAME]
//   lcom_search oracle --config C.json
//   lcom_search render --belief FILE.csv
//
// LCOM_DETECTOR_ENDPOINT replaces the endpoint of every bridge arm.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lcom/config.hpp"
#include "lcom/episode.hpp"
#include "lcom/log.hpp"
#include "lcom/metrics.hpp"
#include "lcom/report.hpp"

namespace fs = std::filesystem;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::vector<std::uint64_t> seeds;
  std::string mode;
};

lcom::RunConfig resolve(const Common& c) {
  lcom::RunConfig cfg = lcom::load_run_config(c.config);
  if (!c.out.empty()) cfg.output_dir = c.out;
  if (!c.seeds.empty()) cfg.seeds = c.seeds;
  if (!c.mode.empty()) {
    const auto m = lcom::parse_lcom_mode(c.mode);
    if (!m) throw lcom::ParseError("unknown --mode '" + c.mode + "'");
    for (auto& a : cfg.arms) {
      if (a.name == lcom::to_string(a.mode)) a.name = std::string(lcom::to_string(*m));
      a.mode = *m;
    }
  }
  lcom::apply_endpoint_override(cfg);
  return cfg;
}

std::string episode_stem(const lcom::EpisodeLog& log, bool with_arm) {
  std::string s = log.scene;
  if (with_arm) s += "__" + log.arm;
  return s + "__seed" + std::to_string(log.seed);
}

int cmd_run(const Common& c) {
  const auto cfg = resolve(c);
  const auto scenes = lcom::load_scenes(cfg.scenes);
  const fs::path out = cfg.output_dir;
  const bool with_arm = cfg.arms.size() > 1;
  for (const auto& arm : cfg.arms) {
    for (const auto& scene : scenes) {
      for (auto seed : cfg.seeds) {
        const auto log = lcom::run_episode(scene, arm, cfg.planner, cfg.reward, cfg.limits, seed);
        const std::string stem = episode_stem(log, with_arm);
        lcom::write_file_atomic(out / (stem + ".json"), lcom::to_json(log).dump(2) + "\n");
        lcom::write_file_atomic(out / (stem + ".belief.csv"),
                                lcom::to_csv(*log.final_belief, scene.grid));
        std::cout << stem << ": " << (log.outcome.success ? "found" : "not found") << " after "
                  << log.outcome.actions << " actions ("
                  << lcom::to_string(log.outcome.reason) << ")\n";
      }
    }
  }
  return 0;
}

int cmd_bench(const Common& c) {
  const auto cfg = resolve(c);
  const auto scenes = lcom::load_scenes(cfg.scenes);
  std::vector<int> oracle;
  for (const auto& s : scenes) oracle.push_back(lcom::oracle_actions(s));

  std::vector<lcom::EpisodeRow> rows;
  for (const auto& arm : cfg.arms) {
    for (std::size_t i = 0; i < scenes.size(); ++i) {
      for (auto seed : cfg.seeds) {
        const auto log = lcom::run_episode(scenes[i], arm, cfg.planner, cfg.reward, cfg.limits, seed);
        rows.push_back({scenes[i].name, arm.name, seed,
                        {log.outcome.success, log.outcome.actions, oracle[i]},
                        log.outcome.discounted_return, log.outcome.elapsed_s});
        std::cerr << arm.name << " " << scenes[i].name << " seed " << seed << ": "
                  << (log.outcome.success ? "S" : "F") << " " << log.outcome.actions << "/"
                  << oracle[i] << "\n";
      }
    }
  }
  const std::string csv = lcom::bench_csv(rows);
  lcom::write_file_atomic(fs::path(cfg.output_dir) / "bench.csv", csv);
  for (const auto& s : lcom::summarize(rows)) {
    std::printf("%-20s completion %.3f ± %.3f  SPL %.3f ± %.3f  actions %.2f  oracle %.2f\n",
                s.arm.c_str(), s.completion.mean, s.completion.se, s.spl.mean, s.spl.se,
                s.mean_actions, s.mean_oracle);
  }
  return 0;
}

int cmd_oracle(const Common& c) {
  const auto cfg = resolve(c);
  int status = 0;
  for (const auto& s : lcom::load_scenes(cfg.scenes)) {
    const auto findings = lcom::validate_scene(s);
    for (const auto& f : findings) {
      std::cerr << s.name << ": " << (f.severity == lcom::Severity::Error ? "error" : "warning")
                << " " << f.code << ": " << f.message << "\n";
    }
    if (lcom::has_errors(findings)) {
      status = 1;
      continue;
    }
    std::cout << s.name << " " << lcom::oracle_actions(s) << "\n";
  }
  return status;
}

int cmd_render(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw lcom::ParseError("cannot open belief file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  std::cout << lcom::render_belief(lcom::belief_from_csv(ss.str()));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Language-conditioned object search on grid scenes"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "log progress details");

  Common common;
  auto add_common = [&](CLI::App* sub, bool full) {
    sub->add_option("--config", common.config, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
    if (!full) return;
    sub->add_option("--out", common.out, "output directory");
    sub->add_option("--seeds", common.seeds, "comma-separated seeds")->delimiter(',');
    sub->add_option("--mode", common.mode, "LCOM mode applied to every arm");
  };
  auto* run = app.add_subcommand("run", "run episodes and write one log per scene and seed");
  add_common(run, true);
  auto* bench = app.add_subcommand("bench", "run every arm and write bench.csv with aggregates");
  add_common(bench, true);
  auto* oracle = app.add_subcommand("oracle", "print the shortest-action oracle for each scene");
  add_common(oracle, false);
  auto* render = app.add_subcommand("render", "draw a belief CSV as a text heatmap");
  std::string belief_path;
  render->add_option("--belief", belief_path, "belief CSV written by run")->required();

  CLI11_PARSE(app, argc, argv);
  if (verbose) lcom::log::set_level(lcom::log::Level::Debug);

  try {
    if (*run) return cmd_run(common);
    if (*bench) return cmd_bench(common);
    if (*oracle) return cmd_oracle(common);
    if (*render) return cmd_render(belief_path);
  } catch (const lcom::bridge::TransportError& e) {
    std::cerr << "detector transport error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
