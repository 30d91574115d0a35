#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "nav/geometry.hpp"
#include "nav/rng.hpp"

namespace nav {

struct RobotSpec {
  double footprint_radius = 0.25;
  double body_height = 0.30;
  double v_max_xy = 0.5;       // m/s
  double omega_max = 1.0;      // rad/s
  double deadzone_v = 0.03;    // m/s
  double deadzone_w = 0.06;    // rad/s
  double vel_time_constant = 0.15;  // s
  double lidar_height = 0.25;  // m
};

struct Pose {
  double x = 0.0, y = 0.0, theta = 0.0;
};

struct BodyVel {
  double vx = 0.0, vy = 0.0, wz = 0.0;
};

struct RobotState {
  Pose pose;
  BodyVel vel;  // robot frame
};

using Action = std::array<double, 3>;  // normalized (vx, vy, wz) in [-1,1]

enum class ObstacleKind : uint8_t {
  full_height = 0,
  low_profile = 1,
  overhang = 2,
  shelf_leg = 3,
  shelf_slab = 4,
};
constexpr int kNumObstacleKinds = 5;

const char* obstacle_kind_name(ObstacleKind k);
ObstacleKind obstacle_kind_from_name(const std::string& name);
bool kind_is_out_of_plane(ObstacleKind k);

struct ObstacleSpec {
  Footprint footprint;
  double z_lo = 0.0;
  double z_hi = 1.5;
  ObstacleKind kind = ObstacleKind::full_height;
};

struct SceneSpec {
  double arena_half_extent = 4.0;
  std::vector<ObstacleSpec> obstacles;
  Pose start_pose;
  Vec2 goal_position;
};

struct RewardWeights {
  double w_delta_d = 0.5;
  double w_lidar = -0.1;
  double w_a = -0.05;
  double w_delta_a = -0.1;
  double r_at_goal = 10.0;
  double r_collision = -50.0;
  double r_finished = 50.0;
  double d_min = 0.7;
  double d_goal_thresh = 0.5;
};

enum class Outcome : uint8_t { running = 0, success = 1, collision = 2, timeout = 3 };

enum class StepEvent : uint8_t { none = 0, at_goal_first_entry = 1, finished = 2, collision = 3, timeout = 4 };

constexpr int kOdomHistory = 6;  // current + 5 past velocities

struct EpisodeState {
  RobotState robot;
  int steps_elapsed = 0;
  Action prev_action{0.0, 0.0, 0.0};
  std::array<BodyVel, kOdomHistory> odom_history{};  // [0] = current
  bool at_goal_bonus_consumed = false;
  Outcome outcome = Outcome::running;
};

// Probability vector over the five obstacle kinds.
using KindMix = std::array<double, kNumObstacleKinds>;

KindMix kind_mix_from_out_of_plane_fraction(double fraction);

// Rejection-samples a scene. Each sampled obstacle gets up to 1000 placement
// attempts before it is skipped. Shelf-slab draws emit the slab plus four
// full-height legs as separate obstacle records.
SceneSpec sample_scene(Rng& rng, double arena_half_extent, int obstacle_count,
                       const KindMix& kind_mix, const RobotSpec& spec = RobotSpec{});

// 36 substeps at 360 Hz per 10 Hz control tick; exact exponential relaxation
// toward the deadzone-filtered target velocity, pose integrated with the
// updated velocity and current heading.
RobotState step_dynamics(const RobotState& state, const Action& command, const RobotSpec& spec,
                         double dt_control = 0.1);

// True iff the robot disc intersects any obstacle whose vertical interval
// overlaps [0, body_height], or penetrates a wall.
bool check_collision(const RobotState& state, const SceneSpec& scene, const RobotSpec& spec);

struct GoalStatus {
  double d_goal;
  bool reached;  // within d_goal_thresh AND planar speed < 0.1 m/s
};
GoalStatus goal_status(const RobotState& state, const SceneSpec& scene, const RobotSpec& spec,
                       const RewardWeights& weights);

double compute_reward(double d_prev, double d_curr, double min_scan, const Action& action,
                      const Action& prev_action, const RewardWeights& weights, StepEvent event);

// Solids the sensors and the collision check see: the scene obstacles plus
// four full-height wall boxes derived from the arena extent.
struct Solid {
  Footprint footprint;
  double z_lo;
  double z_hi;
  ObstacleKind kind;
  bool is_wall;
};
std::vector<Solid> scene_solids(const SceneSpec& scene);

constexpr double kWallHeight = 2.5;
constexpr double kWallThickness = 0.2;

}  // namespace nav
