#include <cmath>
#include <filesystem>

#include <gtest/gtest.h>

#include "lcom/config.hpp"
#include "lcom/episode.hpp"

using namespace lcom;

namespace {

Scene small_scene(Cell object, RobotPose start) {
  return Scene{"small", load_grid(".....\n.....\n..#..\n.....\n....."), object, "the red cup", start,
               FanParams{}};
}

ArmSpec perfect_arm() {
  ArmSpec a;
  a.name = "perfect";
  a.detector.kind = DetectorKind::Perfect;
  a.detector.params = perfect_sensor_params();
  return a;
}

ArmSpec confidence_arm(LcomMode mode) {
  ArmSpec a;
  a.name = std::string(to_string(mode));
  a.detector.kind = DetectorKind::Confidence;
  a.mode = mode;
  return a;
}

PlannerConfig planner(std::size_t sims) {
  PlannerConfig c;
  c.simulations = sims;
  return c;
}

std::string scene_path(int i) {
  char name[32];
  std::snprintf(name, sizeof name, "scene_%02d.scene", i);
  return std::string(LCOM_SOURCE_DIR) + "/scenes/" + name;
}

}  // namespace

TEST(Episode, PerfectSensorFindsVisibleObjectQuickly) {
  const auto s = small_scene({2, 0}, {2, 3, Direction::North});
  ASSERT_FALSE(fan_region(s.grid, s.robot_start, s.fan).contains({2, 0}));  // behind the pillar
  const auto t = small_scene({0, 1}, {2, 3, Direction::North});
  ASSERT_TRUE(fan_region(t.grid, t.robot_start, t.fan).contains({0, 1}));
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto log = run_episode(t, perfect_arm(), planner(1000), {}, {}, seed);
    EXPECT_TRUE(log.outcome.success);
    EXPECT_LE(log.outcome.actions, 3);
    EXPECT_EQ(log.steps.front().action, Action::look());
    EXPECT_EQ(log.steps.back().action, Action::find({0, 1}));
    EXPECT_EQ(log.outcome.reason, StopReason::Found);
  }
}

TEST(Episode, BlindDetectorFails) {
  const auto s = load_scene_file(scene_path(0));
  ArmSpec arm;
  arm.detector.kind = DetectorKind::Static;
  arm.detector.params.tpr = 0.0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto log = run_episode(s, arm, planner(300), {}, {}, seed);
    EXPECT_FALSE(log.outcome.success);
    for (const auto& st : log.steps) {
      if (st.action.kind == ActionKind::Look && !st.observation.is_null()) {
        EXPECT_NE(*st.observation.detection, s.object_cell);
      }
    }
  }
}

TEST(Episode, ReplayIsDeterministic) {
  const auto s = load_scene_file(scene_path(3));
  for (auto arm : {perfect_arm(), confidence_arm(LcomMode::DynamicBoth)}) {
    const auto a = run_episode(s, arm, planner(200), {}, {}, 17);
    const auto b = run_episode(s, arm, planner(200), {}, {}, 17);
    EXPECT_TRUE(same_trace(a, b));
    const auto c = run_episode(s, arm, planner(200), {}, {}, 18);
    EXPECT_FALSE(same_trace(a, c));
  }
}

TEST(Episode, RewardAccounting) {
  const auto s = load_scene_file(scene_path(1));
  const RewardConfig rw;
  const auto log = run_episode(s, confidence_arm(LcomMode::Static), planner(200), rw, {}, 5);
  double ret = 0.0, disc = 1.0;
  int finds = 0;
  for (const auto& st : log.steps) {
    const double expect = st.action.kind == ActionKind::Move   ? rw.move_cost
                          : st.action.kind == ActionKind::Look ? rw.look_cost
                          : st.action.target == s.object_cell  ? rw.find_success
                                                               : rw.find_failure;
    EXPECT_EQ(st.reward, expect);
    ret += disc * st.reward;
    disc *= rw.discount;
    finds += st.action.kind == ActionKind::Find;
    EXPECT_EQ(st.params.has_value(), st.action.kind == ActionKind::Look);
  }
  EXPECT_NEAR(log.outcome.discounted_return, ret, 1e-9);
  EXPECT_EQ(log.outcome.finds_used, finds);
  EXPECT_EQ(static_cast<int>(log.steps.size()), log.outcome.actions);
  EXPECT_LE(finds, EpisodeLimits{}.find_budget);
  EXPECT_TRUE(log.final_belief.has_value());
  EXPECT_NEAR(log.final_belief->total(), 1.0, 1e-9);
}

TEST(Episode, StaticAndDynamicDifferOnlyInUpdateParams) {
  const auto s = load_scene_file(scene_path(2));
  int step_no = 0;
  EpisodeOptions opts;
  opts.policy = [&](const Belief&, const RobotPose&, int step) {
    step_no = step;
    static const Action script[] = {Action::look(), Action::move(Direction::East), Action::look(),
                                    Action::move(Direction::South), Action::look()};
    return script[step % 5];
  };
  const EpisodeLimits lim{40, 10, 0.0};
  const auto a = run_episode(s, confidence_arm(LcomMode::Static), planner(1), {}, lim, 9, opts);
  const auto b = run_episode(s, confidence_arm(LcomMode::DynamicBoth), planner(1), {}, lim, 9, opts);
  ASSERT_EQ(a.steps.size(), b.steps.size());
  bool params_differ = false;
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    EXPECT_EQ(a.steps[i].action, b.steps[i].action);
    EXPECT_EQ(a.steps[i].pose, b.steps[i].pose);
    EXPECT_EQ(a.steps[i].observation, b.steps[i].observation);
    EXPECT_EQ(a.steps[i].reward, b.steps[i].reward);
    if (a.steps[i].params) {
      EXPECT_EQ(*a.steps[i].params, hu_segmentation_profile().static_params);
      EXPECT_EQ(*b.steps[i].params,
                noise_for(LcomMode::DynamicBoth, hu_segmentation_profile(), b.steps[i].observation.confidence));
      params_differ |= !(*a.steps[i].params == *b.steps[i].params);
    }
  }
  EXPECT_TRUE(params_differ);
  EXPECT_EQ(a.outcome.discounted_return, b.outcome.discounted_return);
  EXPECT_NE(a.final_belief, b.final_belief);
  EXPECT_EQ(step_no, 39);
}

TEST(Episode, FindBudgetStopsTheEpisode) {
  const auto s = small_scene({4, 4}, {0, 0, Direction::East});
  EpisodeOptions opts;
  opts.policy = [](const Belief&, const RobotPose&, int step) { return Action::find({step % 4, 0}); };
  const auto log = run_episode(s, perfect_arm(), planner(1), {}, {100, 10, 0.0}, 1, opts);
  EXPECT_FALSE(log.outcome.success);
  EXPECT_EQ(log.outcome.finds_used, 10);
  EXPECT_EQ(log.outcome.actions, 10);
  EXPECT_EQ(log.outcome.reason, StopReason::FindBudget);
}

TEST(Episode, StepCapStopsTheEpisode) {
  const auto s = small_scene({4, 4}, {0, 0, Direction::East});
  EpisodeOptions opts;
  opts.policy = [](const Belief&, const RobotPose&, int) { return Action::look(); };
  const auto log = run_episode(s, perfect_arm(), planner(1), {}, {25, 10, 0.0}, 1, opts);
  EXPECT_EQ(log.outcome.actions, 25);
  EXPECT_EQ(log.outcome.reason, StopReason::StepCap);
}

TEST(Episode, RejectsInvalidInputs) {
  auto s = small_scene({2, 2}, {0, 0, Direction::East});  // object on the pillar
  EXPECT_THROW(run_episode(s, perfect_arm(), planner(10), {}, {}, 1), ContractViolation);
  s = small_scene({4, 4}, {0, 0, Direction::East});
  EXPECT_THROW(run_episode(s, perfect_arm(), planner(10), {}, {0, 10, 0.0}, 1), ContractViolation);
  ArmSpec bridge;
  bridge.detector.kind = DetectorKind::Bridge;
  EXPECT_THROW(run_episode(s, bridge, planner(10), {}, {}, 1), ContractViolation);
}

TEST(Detector, PerfectReportsOnlyTheTruth) {
  const CellSet v({{1, 0}, {2, 0}});
  Rng rng(1);
  DetectorSpec d;
  d.kind = DetectorKind::Perfect;
  const auto seen = simulate_detection(d, {1, 0}, v, rng);
  EXPECT_EQ(seen.observation.detection, (Cell{1, 0}));
  EXPECT_EQ(seen.observation.confidence, d.confidence.high_value);
  EXPECT_TRUE(simulate_detection(d, {5, 5}, v, rng).observation.is_null());
}

TEST(Detector, StaticDetectionRateMatchesTpr) {
  const CellSet v({{1, 0}, {2, 0}, {1, 1}, {2, 1}, {3, 1}});
  DetectorSpec d;  // static, hu-segmentation statistics
  Rng rng(2);
  const int n = 100000;
  int hits = 0;
  for (int i = 0; i < n; ++i) hits += !simulate_detection(d, {2, 1}, v, rng).observation.is_null();
  EXPECT_NEAR(static_cast<double>(hits) / n, 0.581, 0.01);
}

TEST(Detector, ConfidenceTracksTruePositives) {
  const CellSet v({{1, 0}, {2, 0}, {1, 1}, {2, 1}, {3, 1}});
  DetectorSpec d;
  d.kind = DetectorKind::Confidence;
  Rng rng(3);
  int tp = 0, tp_high = 0, other = 0, other_high = 0;
  for (int i = 0; i < 200000; ++i) {
    const Cell obj = (i % 2) ? Cell{2, 1} : Cell{9, 9};
    const auto r = simulate_detection(d, obj, v, rng);
    const bool high = r.observation.confidence == d.confidence.high_value;
    EXPECT_TRUE(high || r.observation.confidence == d.confidence.low_value);
    if (r.true_positive) {
      ++tp;
      tp_high += high;
    } else {
      ++other;
      other_high += high;
    }
  }
  EXPECT_NEAR(static_cast<double>(tp_high) / tp, 0.9, 0.01);
  EXPECT_NEAR(static_cast<double>(other_high) / other, 0.2, 0.01);
}

TEST(Detector, Validation) {
  DetectorSpec d;
  d.confidence.p_high_given_A = 1.5;
  EXPECT_THROW(validate(d), ContractViolation);
  d = {};
  d.confidence.low_value = 2.0;
  EXPECT_THROW(validate(d), ContractViolation);
  d = {};
  d.kind = DetectorKind::Bridge;
  EXPECT_THROW(validate(d), ContractViolation);
  for (auto k : {DetectorKind::Perfect, DetectorKind::Static, DetectorKind::Confidence, DetectorKind::Bridge}) {
    EXPECT_EQ(parse_detector_kind(to_string(k)), k);
  }
}

TEST(ValidateScene, Findings) {
  const auto sealed = Scene{"sealed", load_grid("...#.\n...#.\n####.\n....."), {0, 0}, "cup",
                            {4, 3, Direction::North}, FanParams{}};
  auto f = validate_scene(sealed);
  ASSERT_EQ(f.size(), 1u);
  EXPECT_EQ(f[0].code, "unreachable");
  EXPECT_TRUE(has_errors(f));

  auto visible = small_scene({0, 1}, {2, 3, Direction::North});
  f = validate_scene(visible);
  ASSERT_EQ(f.size(), 1u);
  EXPECT_EQ(f[0].code, "visible-at-start");
  EXPECT_FALSE(has_errors(f));

  auto blocked = small_scene({1, 1}, {2, 2, Direction::North});
  EXPECT_EQ(validate_scene(blocked).front().code, "start-occupied");
  auto on_wall = small_scene({2, 2}, {0, 0, Direction::North});
  EXPECT_EQ(validate_scene(on_wall).front().code, "object-occupied");
  auto mute = small_scene({4, 4}, {0, 0, Direction::North});
  mute.language.clear();
  EXPECT_EQ(validate_scene(mute).front().code, "empty-language");
}

TEST(SceneSuite, CommittedScenesAreValid) {
  const auto scenes = load_scenes({std::string(LCOM_SOURCE_DIR) + "/scenes"});
  ASSERT_GE(scenes.size(), 20u);
  for (const auto& s : scenes) {
    EXPECT_EQ(s.grid.width(), 16);
    EXPECT_EQ(s.grid.height(), 16);
    EXPECT_TRUE(validate_scene(s).empty()) << s.name;
  }
}

TEST(SceneFile, RoundTripAndErrors) {
  const auto s = load_scene_file(scene_path(4));
  EXPECT_EQ(s.name, "scene_04");
  const auto t = parse_scene(to_text(s));
  EXPECT_EQ(t.grid, s.grid);
  EXPECT_EQ(t.object_cell, s.object_cell);
  EXPECT_EQ(t.robot_start, s.robot_start);
  EXPECT_EQ(t.language, s.language);
  EXPECT_EQ(to_text(t), to_text(s));

  EXPECT_THROW(parse_scene("language: x\nobject: 0 0\nstart: 0 0 N\n"), ParseError);
  EXPECT_THROW(parse_scene("object: 0 0\nstart: 0 0 N\nmap:\n..\n"), ParseError);
  EXPECT_THROW(parse_scene("language: x\nobject: 0 zero\nstart: 0 0 N\nmap:\n..\n"), ParseError);
  EXPECT_THROW(parse_scene("language: x\nobject: 5 0\nstart: 0 0 N\nmap:\n..\n"), ParseError);
  EXPECT_THROW(parse_scene("language: x\nobject: 1 0\nstart: 0 0 UP\nmap:\n..\n"), ParseError);
  EXPECT_THROW(parse_scene("language: x\ncolor: red\nobject: 1 0\nstart: 0 0 N\nmap:\n..\n"), ParseError);
  try {
    load_scene_file("/nonexistent/dir/missing.scene");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/dir/missing.scene"), std::string::npos);
  }
}
