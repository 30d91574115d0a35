#pragma once

#include <cmath>

#include "nav/nets.hpp"
#include "nav/sensors.hpp"
#include "nav/world.hpp"

namespace nav {

struct EnvConfig {
  RobotSpec robot;
  RewardWeights rewards;
  double arena_half_extent = 4.0;
  int obstacle_count = 10;
  KindMix kind_mix = kind_mix_from_out_of_plane_fraction(0.4);
  int n_scan = 360;
  double max_range = 10.0;
  LidarMode lidar_mode = LidarMode::privileged;
  int max_steps = 600;
  double dt_control = 0.1;
  double distance_normalizer = 8.0 * M_SQRT2;  // largest training arena diagonal
};

struct StepResult {
  double reward = 0.0;
  bool terminated = false;
  StepEvent event = StepEvent::none;
};

// One independent environment instance owning its RNG stream. Stepping
// different instances is data-parallel (no shared mutable state).
class Env {
 public:
  Env(const EnvConfig& cfg, uint64_t seed, uint64_t env_id);

  void reset();  // fresh randomized scene
  void reset_with_scene(const SceneSpec& scene);
  StepResult step(const Action& action);

  const EpisodeState& episode() const { return ep_; }
  const SceneSpec& scene() const { return scene_; }
  const EnvConfig& config() const { return cfg_; }

  // Scan at the current state in the configured mode (cached per step).
  const LidarScan& scan() const { return scan_; }
  double min_scan() const { return min_scan_; }
  ProprioObs proprio() const {
    return encode_proprio(ep_, scene_, cfg_.robot, cfg_.distance_normalizer);
  }
  double goal_distance() const;
  double path_length() const { return path_length_; }
  uint64_t rays_cast() const { return rays_cast_; }

 private:
  void refresh_scan();

  EnvConfig cfg_;
  Rng rng_;
  SceneSpec scene_;
  EpisodeState ep_;
  LidarScan scan_;
  double min_scan_ = 0.0;
  double path_length_ = 0.0;
  uint64_t rays_cast_ = 0;
};

}  // namespace nav
