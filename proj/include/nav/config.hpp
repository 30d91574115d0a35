#pragma once

#include <map>
#include <string>
#include <vector>

#include "nav/augment.hpp"
#include "nav/env.hpp"
#include "nav/sensors.hpp"

namespace nav {

// Flat key=value config file with [section] headers; keys are stored as
// "section.key". '#' starts a comment.
class ConfigFile {
 public:
  static ConfigFile parse_file(const std::string& path);
  static ConfigFile parse_string(const std::string& text);

  bool has(const std::string& key) const { return kv_.count(key) > 0; }
  std::string get_string(const std::string& key, const std::string& dflt) const;
  double get_double(const std::string& key, double dflt) const;
  int get_int(const std::string& key, int dflt) const;
  bool get_bool(const std::string& key, bool dflt) const;
  std::vector<int> get_int_list(const std::string& key, std::vector<int> dflt) const;

  void set(const std::string& key, const std::string& value) { kv_[key] = value; }

  // Sorted key=value lines; input to the config hash.
  std::string canonical() const;

 private:
  std::map<std::string, std::string> kv_;
};

struct PPOConfig {
  double lr0 = 1e-3;
  double gamma = 0.99;
  int horizon = 96;
  double clip = 0.2;
  int mini_epochs = 5;
  int n_env = 64;
  int minibatch_div = 4;  // minibatch = batch / minibatch_div
  double gae_lambda = 0.95;
  double kl_target = 0.008;
  double value_coef = 1.0;
  double entropy_coef = 0.0;
  int max_epochs = 300;
  double lr_min = 1e-6;
  double lr_max = 1e-2;
};

struct BCConfig {
  double lr = 5e-4;
  int batch = 8;
  int epochs = 100;
  double val_fraction = 0.1;
  int episode_target = 2000;  // successful demo episodes to collect
  bool freeze_augmentation = false;  // augment once at collection instead of per epoch
};

struct EvalSettings {
  std::vector<int> obstacle_counts = {10, 15, 20, 25};
  int episodes = 200;
  double out_of_plane_fraction = 0.4;
  bool clean_depth = false;  // student: skip augmentation at evaluation
};

// Everything a run needs, assembled from one config file.
struct AppConfig {
  EnvConfig world;
  double out_of_plane_fraction = 0.4;
  CameraRig rig;
  AugmentConfig augment;
  PPOConfig ppo;
  BCConfig bc;
  EvalSettings eval;
  int worker_threads = 0;  // 0 = hardware default
  uint64_t config_hash = 0;
};

AppConfig app_config_from(const ConfigFile& cf);
AppConfig load_app_config(const std::string& path);
AppConfig default_app_config();

// Writes a run manifest (key=value) echoing every hyperparameter.
void write_manifest(const std::string& path, const std::map<std::string, std::string>& entries);

std::string run_id(const AppConfig& cfg, uint64_t seed, const std::string& command);

}  // namespace nav
