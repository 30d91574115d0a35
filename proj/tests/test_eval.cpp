#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <fstream>

#include "nav/eval.hpp"
#include "nav/scene_io.hpp"
#include "test_util.hpp"

using namespace nav;

namespace {

// Minimal deterministic policies for exercising the evaluation harness.
class StopPolicy : public Policy {
 public:
  Action act(const Env&, int, Rng&) override { return {0.0, 0.0, 0.0}; }
  LidarMode lidar_mode() const override { return LidarMode::standard; }
  double distance_normalizer() const override { return 8.0 * M_SQRT2; }
  std::string name() const override { return "stop"; }
};

class DrivePolicy : public Policy {
 public:
  Action act(const Env& env, int, Rng&) override {
    // Head straight for the goal in the robot frame, full speed.
    ProprioObs p = env.proprio();
    return {p.values[18], p.values[19], 0.0};
  }
  LidarMode lidar_mode() const override { return LidarMode::standard; }
  double distance_normalizer() const override { return 8.0 * M_SQRT2; }
  std::string name() const override { return "drive"; }
};

AppConfig tiny_eval_config() {
  AppConfig cfg = default_app_config();
  cfg.world.n_scan = 40;
  cfg.world.max_steps = 25;
  cfg.world.obstacle_count = 5;
  return cfg;
}

}  // namespace

TEST_CASE("evaluation scenes depend on the seed, never on the policy") {
  AppConfig cfg = tiny_eval_config();
  StopPolicy stop;
  DrivePolicy drive;
  CellResult a = evaluate_cell(stop, cfg, 6, 16, 42);
  CellResult b = evaluate_cell(drive, cfg, 6, 16, 42);
  CHECK(a.scenes_hash == b.scenes_hash);  // paired comparison guarantee
  CellResult c = evaluate_cell(stop, cfg, 6, 16, 43);
  CHECK(a.scenes_hash != c.scenes_hash);  // new seed, new scene set
  CellResult d = evaluate_cell(stop, cfg, 7, 16, 42);
  CHECK(a.scenes_hash != d.scenes_hash);  // obstacle count keys the stream
}

TEST_CASE("evaluation is deterministic and self-consistent") {
  AppConfig cfg = tiny_eval_config();
  DrivePolicy drive;
  CellResult a = evaluate_cell(drive, cfg, 5, 20, 7);
  CellResult b = evaluate_cell(drive, cfg, 5, 20, 7);
  CHECK(a.success == b.success);
  CHECK(a.collision == b.collision);
  CHECK(a.timeout == b.timeout);
  CHECK(a.mean_path_len == b.mean_path_len);
  CHECK(a.scenes_hash == b.scenes_hash);

  CHECK(a.episodes == 20);
  CHECK(a.success + a.collision + a.timeout == a.episodes);
  CHECK(a.success_rate == doctest::Approx(double(a.success) / 20));
  CHECK(a.collision_rate == doctest::Approx(double(a.collision) / 20));
  CHECK(a.timeout_rate == doctest::Approx(double(a.timeout) / 20));
  double p = a.success_rate;
  CHECK(a.ci_halfwidth == doctest::Approx(1.96 * std::sqrt(p * (1.0 - p) / 20)).epsilon(1e-12));
  CHECK(a.mean_episode_len > 0.0);
  CHECK(a.mean_episode_len <= cfg.world.max_steps);
}

TEST_CASE("a stopped robot always times out") {
  AppConfig cfg = tiny_eval_config();
  StopPolicy stop;
  CellResult r = evaluate_cell(stop, cfg, 4, 10, 3);
  CHECK(r.timeout == 10);
  CHECK(r.success_rate == 0.0);
  CHECK(r.ci_halfwidth == 0.0);
  CHECK(r.mean_episode_len == doctest::Approx(double(cfg.world.max_steps)));
}

TEST_CASE("first-episode trajectory logging") {
  AppConfig cfg = tiny_eval_config();
  DrivePolicy drive;
  TrajectoryLog traj;
  evaluate_cell(drive, cfg, 3, 4, 11, &traj);
  REQUIRE(traj.points.size() >= 2);
  CHECK(traj.points[0].t == 0.0);
  for (size_t i = 1; i < traj.points.size(); ++i) {
    CHECK(traj.points[i].t - traj.points[i - 1].t == doctest::Approx(0.1).epsilon(1e-9));
  }
  // The logged scene matches the first evaluation scene stream entry.
  Rng scene_rng = Rng::derive(11, 0x5343454eull, 3, 0);
  SceneSpec expect =
      sample_scene(scene_rng, cfg.world.arena_half_extent, 3, cfg.world.kind_mix, cfg.world.robot);
  CHECK(scene_to_text(traj.scene) == scene_to_text(expect));
}

TEST_CASE("trajectory CSV round-trip") {
  TrajectoryLog log;
  Rng rng(5);
  for (int i = 0; i < 7; ++i) {
    TrajectoryPoint p;
    p.t = 0.1 * i;
    p.pose = {rng.uniform(-4, 4), rng.uniform(-4, 4), rng.uniform(-3, 3)};
    p.action = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    p.min_scan = rng.uniform(0, 10);
    log.points.push_back(p);
  }
  const std::string path = "/tmp/navtest_traj.csv";
  save_trajectory_csv(log, path);
  std::vector<TrajectoryPoint> back = load_trajectory_csv(path);
  REQUIRE(back.size() == log.points.size());
  for (size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].t == doctest::Approx(log.points[i].t).epsilon(1e-9));
    CHECK(back[i].pose.x == doctest::Approx(log.points[i].pose.x).epsilon(1e-5));
    CHECK(back[i].pose.theta == doctest::Approx(log.points[i].pose.theta).epsilon(1e-5));
    CHECK(back[i].action[2] == doctest::Approx(log.points[i].action[2]).epsilon(1e-5));
    CHECK(back[i].min_scan == doctest::Approx(log.points[i].min_scan).epsilon(1e-5));
  }
  CHECK_THROWS(load_trajectory_csv("/tmp/navtest_no_such_traj.csv"));
}

TEST_CASE("report CSV is stable across writes") {
  EvalReport report;
  report.policy = "drive";
  report.seed = 4;
  AppConfig cfg = tiny_eval_config();
  DrivePolicy drive;
  report.cells.push_back(evaluate_cell(drive, cfg, 4, 8, 4));
  const std::string p1 = "/tmp/navtest_report1.csv", p2 = "/tmp/navtest_report2.csv";
  write_report_csv(report, p1);
  write_report_csv(report, p2);
  std::ifstream f1(p1), f2(p2);
  std::string s1(std::istreambuf_iterator<char>(f1), {});
  std::string s2(std::istreambuf_iterator<char>(f2), {});
  CHECK(s1 == s2);
  CHECK(s1.rfind("policy,obstacle_count,episodes,", 0) == 0);
  CHECK(s1.find("drive,4,8,") != std::string::npos);
}
