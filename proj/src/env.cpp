#include "nav/env.hpp"

#include <stdexcept>

namespace nav {

Env::Env(const EnvConfig& cfg, uint64_t seed, uint64_t env_id)
    : cfg_(cfg), rng_(Rng::derive(seed, 0x454e56ull, env_id)) {
  reset();
}

void Env::reset() {
  scene_ = sample_scene(rng_, cfg_.arena_half_extent, cfg_.obstacle_count, cfg_.kind_mix,
                        cfg_.robot);
  reset_with_scene(scene_);
}

void Env::reset_with_scene(const SceneSpec& scene) {
  scene_ = scene;
  ep_ = EpisodeState{};
  ep_.robot.pose = scene_.start_pose;
  path_length_ = 0.0;
  refresh_scan();
}

void Env::refresh_scan() {
  scan_ = raycast_lidar(ep_.robot, scene_, cfg_.robot, cfg_.lidar_mode, cfg_.n_scan,
                        cfg_.max_range);
  rays_cast_ += uint64_t(cfg_.n_scan);
  min_scan_ = min_range(scan_);
}

double Env::goal_distance() const {
  return (Vec2{ep_.robot.pose.x, ep_.robot.pose.y} - scene_.goal_position).norm();
}

StepResult Env::step(const Action& action) {
  if (ep_.outcome != Outcome::running) {
    throw std::runtime_error("Env::step called on a terminated episode");
  }
  Action cmd;
  for (int i = 0; i < 3; ++i) cmd[i] = std::clamp(action[i], -1.0, 1.0);

  double d_prev = goal_distance();
  Pose old_pose = ep_.robot.pose;
  ep_.robot = step_dynamics(ep_.robot, cmd, cfg_.robot, cfg_.dt_control);
  ep_.steps_elapsed += 1;
  path_length_ += (Vec2{ep_.robot.pose.x, ep_.robot.pose.y} - Vec2{old_pose.x, old_pose.y}).norm();

  bool collided = check_collision(ep_.robot, scene_, cfg_.robot);
  GoalStatus goal = goal_status(ep_.robot, scene_, cfg_.robot, cfg_.rewards);

  // Event precedence: finished > collision > timeout > shaping.
  StepEvent event = StepEvent::none;
  if (goal.reached) {
    event = StepEvent::finished;
  } else if (collided) {
    event = StepEvent::collision;
  } else if (ep_.steps_elapsed >= cfg_.max_steps) {
    event = StepEvent::timeout;
  } else if (goal.d_goal < cfg_.rewards.d_goal_thresh && !ep_.at_goal_bonus_consumed) {
    event = StepEvent::at_goal_first_entry;
    ep_.at_goal_bonus_consumed = true;
  }

  refresh_scan();
  double reward = compute_reward(d_prev, goal.d_goal, min_scan_, cmd, ep_.prev_action,
                                 cfg_.rewards, event);

  for (int i = kOdomHistory - 1; i > 0; --i) ep_.odom_history[i] = ep_.odom_history[i - 1];
  ep_.odom_history[0] = ep_.robot.vel;
  ep_.prev_action = cmd;

  StepResult res;
  res.reward = reward;
  res.event = event;
  switch (event) {
    case StepEvent::finished:
      ep_.outcome = Outcome::success;
      res.terminated = true;
      break;
    case StepEvent::collision:
      ep_.outcome = Outcome::collision;
      res.terminated = true;
      break;
    case StepEvent::timeout:
      ep_.outcome = Outcome::timeout;
      res.terminated = true;
      break;
    default:
      break;
  }
  return res;
}

}  // namespace nav
