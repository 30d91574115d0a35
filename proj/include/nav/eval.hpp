#pragma once

#include <memory>
#include <string>
#include <vector>

#include "nav/config.hpp"
#include "nav/env.hpp"

namespace nav {

struct TrajectoryPoint {
  double t = 0.0;  // seconds, one control tick apart
  Pose pose;
  Action action{0.0, 0.0, 0.0};
  double min_scan = 0.0;
};

struct TrajectoryLog {
  SceneSpec scene;
  std::vector<TrajectoryPoint> points;
};

void save_trajectory_csv(const TrajectoryLog& log, const std::string& path);
std::vector<TrajectoryPoint> load_trajectory_csv(const std::string& path);

// A deterministic evaluation policy. act() may be called concurrently with
// distinct chunk indices (each selects a private workspace); aug_rng carries
// the per-episode augmentation stream (ignored by teacher policies).
class Policy {
 public:
  virtual ~Policy() = default;
  virtual Action act(const Env& env, int chunk, Rng& aug_rng) = 0;
  virtual LidarMode lidar_mode() const = 0;
  virtual double distance_normalizer() const = 0;
  virtual std::string name() const = 0;
};

// Checkpoint-backed policies; both validate the checkpoint geometry against
// the configuration and throw on mismatch.
std::unique_ptr<Policy> make_teacher_policy(const std::string& checkpoint_path,
                                            const AppConfig& cfg, LidarMode mode);
std::unique_ptr<Policy> make_student_policy(const std::string& checkpoint_path,
                                            const AppConfig& cfg, bool clean_depth);

struct CellResult {
  int obstacle_count = 0;
  int episodes = 0;
  int success = 0, collision = 0, timeout = 0;
  double success_rate = 0.0, collision_rate = 0.0, timeout_rate = 0.0;
  double ci_halfwidth = 0.0;  // 95% binomial interval on the success rate
  double mean_episode_len = 0.0;  // steps
  double mean_path_len = 0.0;     // meters
  uint64_t scenes_hash = 0;       // combined hash of the episode scenes
};

struct EvalReport {
  std::string policy;
  uint64_t seed = 0;
  std::vector<CellResult> cells;
};

// Runs `episodes` paired-seed episodes at one obstacle count. The scene for
// episode i depends only on (seed, obstacle_count, i), never on the policy,
// so different policies see identical scenes. Optionally logs the first
// episode's trajectory.
CellResult evaluate_cell(Policy& policy, const AppConfig& cfg, int obstacle_count, int episodes,
                         uint64_t seed, TrajectoryLog* first_trajectory = nullptr);

EvalReport evaluate_policy(Policy& policy, const AppConfig& cfg, uint64_t seed);

void write_report_csv(const EvalReport& report, const std::string& path);

struct CompareRow {
  int obstacle_count = 0;
  CellResult teacher_std, teacher_priv, student;
};

struct CompareTable {
  std::vector<CompareRow> rows;
};

// Three-column comparison on identical scene sets per row: teacher with
// standard scans, teacher with privileged scans, student on (augmented)
// depth. Writes the comparison CSV plus a manifest with per-cell scene
// hashes under out_dir.
CompareTable compare_table(const std::string& teacher_checkpoint,
                           const std::string& student_checkpoint, const AppConfig& cfg,
                           uint64_t seed, const std::string& out_dir);

// Top-down vector rendering of a scene with optional trajectory overlay.
void render_scene_svg(const SceneSpec& scene, const std::vector<TrajectoryPoint>* trajectory,
                      const std::string& path);

}  // namespace nav
