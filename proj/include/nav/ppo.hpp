#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nav/checkpoint.hpp"
#include "nav/config.hpp"
#include "nav/env.hpp"
#include "nav/nets.hpp"

namespace nav {

// Fixed chunk count for batched gradient accumulation; chunks are reduced in
// index order, so results do not depend on the worker thread count.
constexpr int kGradChunks = 8;

template <typename T>
struct RolloutBuffer {
  int n_env = 0, horizon = 0, obs_dim = 0;
  std::vector<T> obs;              // [(t*n_env+e) * obs_dim]
  std::vector<double> raw_action;  // [(t*n_env+e) * 3], pre-clip samples
  std::vector<double> log_prob;
  std::vector<double> reward;
  std::vector<double> value;
  std::vector<uint8_t> done;   // episode ended at this step
  std::vector<double> boot;    // bootstrap value when done (0 unless timeout)
  std::vector<double> horizon_boot;  // [e] critic value at horizon truncation
  std::vector<double> adv, ret;

  void resize(int n_env_, int horizon_, int obs_dim_) {
    n_env = n_env_;
    horizon = horizon_;
    obs_dim = obs_dim_;
    size_t n = size_t(n_env) * horizon;
    obs.assign(n * obs_dim, T(0));
    raw_action.assign(n * 3, 0.0);
    log_prob.assign(n, 0.0);
    reward.assign(n, 0.0);
    value.assign(n, 0.0);
    done.assign(n, 0);
    boot.assign(n, 0.0);
    horizon_boot.assign(n_env, 0.0);
    adv.assign(n, 0.0);
    ret.assign(n, 0.0);
  }
  size_t size() const { return size_t(n_env) * horizon; }
  size_t at(int t, int e) const { return size_t(t) * n_env + e; }
};

// Backward GAE recursion per environment; advantages are normalized to zero
// mean / unit variance across the batch after returns are formed.
template <typename T>
void compute_gae(RolloutBuffer<T>& buf, double gamma, double lambda) {
  for (int e = 0; e < buf.n_env; ++e) {
    double a_next = 0.0;
    for (int t = buf.horizon - 1; t >= 0; --t) {
      size_t i = buf.at(t, e);
      double v_next;
      if (buf.done[i]) {
        v_next = buf.boot[i];
        a_next = 0.0;
      } else if (t == buf.horizon - 1) {
        v_next = buf.horizon_boot[e];
      } else {
        v_next = buf.value[buf.at(t + 1, e)];
      }
      double delta = buf.reward[i] + gamma * v_next - buf.value[i];
      double a = delta + gamma * lambda * (buf.done[i] ? 0.0 : a_next);
      buf.adv[i] = a;
      buf.ret[i] = a + buf.value[i];
      a_next = a;
    }
  }
  double mean = 0.0;
  for (double a : buf.adv) mean += a;
  mean /= double(buf.size());
  double var = 0.0;
  for (double a : buf.adv) var += (a - mean) * (a - mean);
  var /= double(buf.size());
  double inv = 1.0 / (std::sqrt(var) + 1e-8);
  for (double& a : buf.adv) a = (a - mean) * inv;
}

// KL-adaptive learning-rate schedule.
inline double kl_adaptive_lr(double lr, double approx_kl, double kl_target,
                             double lr_min = 1e-6, double lr_max = 1e-2) {
  if (lr <= 0.0) throw std::runtime_error("kl_adaptive_lr: lr must be positive");
  if (approx_kl > 2.0 * kl_target) {
    lr /= 1.5;
  } else if (approx_kl < 0.5 * kl_target) {
    lr *= 1.5;
  }
  return std::clamp(lr, lr_min, lr_max);
}

struct PPOStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double approx_kl = 0.0;
};

// Clipped-surrogate update over shuffled minibatches; one Adam step per
// minibatch at the given learning rate.
template <typename T>
PPOStats ppo_update(TeacherNet<T>& net, ParamStore<T>& store, RolloutBuffer<T>& buf,
                    const PPOConfig& cfg, double lr, Rng& rng,
                    std::vector<typename TeacherNet<T>::Ws>& ws_pool,
                    std::vector<GradBuf<T>>& grad_pool) {
  const int batch = int(buf.size());
  const int mb_size = batch / cfg.minibatch_div;
  if (mb_size * cfg.minibatch_div != batch) {
    throw std::runtime_error("minibatch size must divide the batch");
  }
  std::vector<int> order(batch);
  for (int i = 0; i < batch; ++i) order[i] = i;

  PPOStats stats;
  int stat_count = 0;
  const int n_scan = net.actor.n_scan;

  for (int me = 0; me < cfg.mini_epochs; ++me) {
    // Fisher-Yates with the trainer stream.
    for (int i = batch - 1; i > 0; --i) {
      int j = int(rng.uniform_int(0, i));
      std::swap(order[i], order[j]);
    }
    for (int mb = 0; mb < cfg.minibatch_div; ++mb) {
      const int* idx = order.data() + size_t(mb) * mb_size;
      double mb_ploss = 0.0, mb_vloss = 0.0, mb_kl = 0.0;

      int chunk_len = (mb_size + kGradChunks - 1) / kGradChunks;
      std::vector<double> c_ploss(kGradChunks, 0.0), c_vloss(kGradChunks, 0.0),
          c_kl(kGradChunks, 0.0);
#pragma omp parallel for schedule(static)
      for (int c = 0; c < kGradChunks; ++c) {
        auto& ws = ws_pool[c];
        auto& gb = grad_pool[c];
        gb.clear();
        int lo = c * chunk_len, hi = std::min(mb_size, lo + chunk_len);
        for (int s = lo; s < hi; ++s) {
          size_t i = size_t(idx[s]);
          const T* obs = buf.obs.data() + i * buf.obs_dim;
          const T* lidar = obs;
          const T* prop = obs + n_scan;
          ActionDistribution dist = net.actor_fwd(store, lidar, prop, ws);
          std::array<double, 3> raw{buf.raw_action[i * 3], buf.raw_action[i * 3 + 1],
                                    buf.raw_action[i * 3 + 2]};
          double logp = log_prob_of(dist, raw);
          double ratio = std::exp(logp - buf.log_prob[i]);
          double adv = buf.adv[i];
          double unclipped = ratio * adv;
          double clipped = std::clamp(ratio, 1.0 - cfg.clip, 1.0 + cfg.clip) * adv;
          c_ploss[c] += -std::min(unclipped, clipped);
          c_kl[c] += buf.log_prob[i] - logp;

          bool active = !((ratio > 1.0 + cfg.clip && adv > 0.0) ||
                          (ratio < 1.0 - cfg.clip && adv < 0.0));
          T gmean[3] = {0, 0, 0};
          T glogstd[3] = {0, 0, 0};
          if (active) {
            double coef = -adv * ratio / mb_size;  // dL/dlogp
            for (int k = 0; k < 3; ++k) {
              double sigma = std::exp(dist.log_std[k]);
              double z = (raw[k] - dist.mean[k]) / sigma;
              gmean[k] = T(coef * z / sigma);
              glogstd[k] = T(coef * (z * z - 1.0));
            }
          }
          net.actor_bwd(store, prop, ws, gmean, glogstd, gb);

          double v = net.critic_fwd(store, lidar, prop, ws);
          double verr = v - buf.ret[i];
          c_vloss[c] += verr * verr;
          net.critic_bwd(store, prop, ws, T(cfg.value_coef * 2.0 * verr / mb_size), gb);
        }
      }
      for (int c = 0; c < kGradChunks; ++c) {
        grad_pool[c].add_into(store);
        mb_ploss += c_ploss[c];
        mb_vloss += c_vloss[c];
        mb_kl += c_kl[c];
      }
      store.adam_step(lr);
      // Keep the learned log_std inside its clamp range.
      for (auto& v : store.at(net.log_std_idx).value) {
        v = T(std::clamp(double(v), kLogStdMin, kLogStdMax));
      }
      stats.policy_loss += mb_ploss / mb_size;
      stats.value_loss += mb_vloss / mb_size;
      stats.approx_kl += mb_kl / mb_size;
      ++stat_count;
    }
  }
  stats.policy_loss /= stat_count;
  stats.value_loss /= stat_count;
  stats.approx_kl /= stat_count;
  return stats;
}

struct EpochStats {
  double mean_reward = 0.0;  // mean total reward of episodes ended this epoch
  int ended = 0, success = 0, collision = 0, timeout = 0;
  double success_rate = 0.0, collision_rate = 0.0, timeout_rate = 0.0;
  PPOStats update;
  double lr = 0.0;
};

// Vectorized on-policy teacher training.
template <typename T>
class PPOTrainer {
 public:
  PPOTrainer(const AppConfig& cfg, uint64_t seed)
      : cfg_(cfg), seed_(seed), shuffle_rng_(Rng::derive(seed, 0x50504full)) {
    EnvConfig ec = cfg.world;
    ec.lidar_mode = LidarMode::privileged;  // teacher trains on privileged scans
    for (int e = 0; e < cfg.ppo.n_env; ++e) {
      envs_.emplace_back(ec, seed, uint64_t(e));
      act_rngs_.push_back(Rng::derive(seed, 0x414354ull, uint64_t(e)));
    }
    Rng init_rng = Rng::derive(seed, 0x494e4954ull);
    net_.init(store_, cfg.world.n_scan, init_rng);
    obs_dim_ = cfg.world.n_scan + kProprioDim;
    buffer_.resize(cfg.ppo.n_env, cfg.ppo.horizon, obs_dim_);
    for (int c = 0; c < kGradChunks; ++c) {
      ws_pool_.emplace_back();
      net_.make_ws(ws_pool_.back());
      grad_pool_.emplace_back(store_);
    }
    acc_reward_.assign(cfg.ppo.n_env, 0.0);
    lr_ = cfg.ppo.lr0;
  }

  void build_obs(const Env& env, T* out) const {
    const auto& scan = env.scan();
    double inv = 1.0 / env.config().max_range;
    for (int i = 0; i < env.config().n_scan; ++i) out[i] = T(scan.ranges[i] * inv);
    ProprioObs p = env.proprio();
    for (int i = 0; i < kProprioDim; ++i) out[env.config().n_scan + i] = T(p.values[i]);
  }

  // Steps all environments `horizon` times, auto-resetting finished
  // episodes, and leaves a full buffer.
  void collect_rollouts(EpochStats& stats) {
    const int n_env = cfg_.ppo.n_env;
    pending_event_.assign(n_env, StepResult{});
    int chunk_len = (n_env + kGradChunks - 1) / kGradChunks;
    for (int t = 0; t < cfg_.ppo.horizon; ++t) {
#pragma omp parallel for schedule(static)
      for (int c = 0; c < kGradChunks; ++c) {
        auto& ws = ws_pool_[c];
        int lo = c * chunk_len, hi = std::min(n_env, lo + chunk_len);
        for (int e = lo; e < hi; ++e) {
          size_t i = buffer_.at(t, e);
          T* obs = buffer_.obs.data() + i * obs_dim_;
          build_obs(envs_[e], obs);
          ActionDistribution dist =
              net_.actor_fwd(store_, obs, obs + cfg_.world.n_scan, ws);
          buffer_.value[i] = net_.critic_fwd(store_, obs, obs + cfg_.world.n_scan, ws);
          SampledAction sa = sample_action(dist, act_rngs_[e]);
          for (int k = 0; k < 3; ++k) buffer_.raw_action[i * 3 + k] = sa.raw[k];
          buffer_.log_prob[i] = sa.log_prob;
          StepResult r = envs_[e].step(sa.clipped);
          buffer_.reward[i] = r.reward;
          pending_event_[e] = r;
        }
      }
      // Terminations are folded serially (stats + resets touch shared state).
      for (int e = 0; e < n_env; ++e) {
        size_t i = buffer_.at(t, e);
        acc_reward_[e] += buffer_.reward[i];
        const StepResult& r = pending_event_[e];
        if (!r.terminated) continue;
        buffer_.done[i] = 1;
        if (r.event == StepEvent::timeout) {
          // Truncation bootstraps with the critic value of the final state.
          std::vector<T> term_obs(obs_dim_);
          build_obs(envs_[e], term_obs.data());
          buffer_.boot[i] = net_.critic_fwd(store_, term_obs.data(),
                                            term_obs.data() + cfg_.world.n_scan, ws_pool_[0]);
        } else {
          buffer_.boot[i] = 0.0;
        }
        stats.ended += 1;
        if (r.event == StepEvent::finished) stats.success += 1;
        if (r.event == StepEvent::collision) stats.collision += 1;
        if (r.event == StepEvent::timeout) stats.timeout += 1;
        stats.mean_reward += acc_reward_[e];
        acc_reward_[e] = 0.0;
        envs_[e].reset();
      }
    }
#pragma omp parallel for schedule(static)
    for (int c = 0; c < kGradChunks; ++c) {
      int lo = c * chunk_len, hi = std::min(n_env, lo + chunk_len);
      for (int e = lo; e < hi; ++e) {
        std::vector<T> obs(obs_dim_);
        build_obs(envs_[e], obs.data());
        buffer_.horizon_boot[e] =
            net_.critic_fwd(store_, obs.data(), obs.data() + cfg_.world.n_scan, ws_pool_[c]);
      }
    }
  }

  EpochStats run_epoch() {
    EpochStats stats;
    pending_event_.assign(cfg_.ppo.n_env, StepResult{});
    collect_rollouts(stats);
    if (stats.ended > 0) {
      stats.mean_reward /= stats.ended;
      stats.success_rate = double(stats.success) / stats.ended;
      stats.collision_rate = double(stats.collision) / stats.ended;
      stats.timeout_rate = double(stats.timeout) / stats.ended;
    }
    compute_gae(buffer_, cfg_.ppo.gamma, cfg_.ppo.gae_lambda);
    stats.update = ppo_update(net_, store_, buffer_, cfg_.ppo, lr_, shuffle_rng_, ws_pool_,
                              grad_pool_);
    stats.lr = lr_;
    lr_ = kl_adaptive_lr(lr_, stats.update.approx_kl, cfg_.ppo.kl_target, cfg_.ppo.lr_min,
                         cfg_.ppo.lr_max);
    if (!std::isfinite(stats.update.policy_loss) || !std::isfinite(stats.update.value_loss)) {
      throw std::runtime_error("ppo: non-finite loss (epoch diagnostics dumped by caller)");
    }
    return stats;
  }

  ParamStore<T>& store() { return store_; }
  TeacherNet<T>& net() { return net_; }
  RolloutBuffer<T>& buffer() { return buffer_; }
  double lr() const { return lr_; }
  uint64_t total_rays() const {
    uint64_t r = 0;
    for (const auto& e : envs_) r += e.rays_cast();
    return r;
  }

 private:
  AppConfig cfg_;
  uint64_t seed_;
  std::vector<Env> envs_;
  std::vector<Rng> act_rngs_;
  std::vector<StepResult> pending_event_;
  std::vector<double> acc_reward_;
  TeacherNet<T> net_;
  ParamStore<T> store_;
  RolloutBuffer<T> buffer_;
  std::vector<typename TeacherNet<T>::Ws> ws_pool_;
  std::vector<GradBuf<T>> grad_pool_;
  Rng shuffle_rng_;
  int obs_dim_ = 0;
  double lr_ = 1e-3;
};

// Full training run: collect -> GAE -> update loop with CSV logging and
// best-success checkpointing. Returns the best-checkpoint path.
template <typename T>
std::string train_teacher(const AppConfig& cfg, uint64_t seed, const std::string& out_dir,
                          int log_every = 1, const std::string& init_checkpoint = "") {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  PPOTrainer<T> trainer(cfg, seed);
  if (!init_checkpoint.empty()) {
    LoadedCheckpoint ck = load_checkpoint(init_checkpoint);
    if (ck.meta.kind != "teacher") throw std::runtime_error("init checkpoint is not a teacher");
    if (ck.meta.n_scan != cfg.world.n_scan) {
      throw std::runtime_error("init checkpoint n_scan mismatch");
    }
    restore_into(ck, trainer.store());
  }

  std::ofstream log(out_dir + "/teacher_log.csv");
  log << "epoch,mean_reward,success_rate,collision_rate,timeout_rate,lr,approx_kl\n";

  CheckpointMeta meta;
  meta.kind = "teacher";
  meta.n_scan = cfg.world.n_scan;
  meta.distance_normalizer = cfg.world.distance_normalizer;
  meta.config_hash = cfg.config_hash;

  double best_success = -1.0;
  auto t0 = std::chrono::steady_clock::now();
  uint64_t total_steps = 0;
  for (int epoch = 1; epoch <= cfg.ppo.max_epochs; ++epoch) {
    EpochStats s;
    try {
      s = trainer.run_epoch();
    } catch (const std::exception& ex) {
      write_manifest(out_dir + "/abort_diagnostics.txt",
                     {{"epoch", std::to_string(epoch)}, {"error", ex.what()}});
      throw;
    }
    total_steps += uint64_t(cfg.ppo.n_env) * cfg.ppo.horizon;
    char row[256];
    std::snprintf(row, sizeof(row), "%d,%.6f,%.6f,%.6f,%.6f,%.8g,%.8g\n", epoch, s.mean_reward,
                  s.success_rate, s.collision_rate, s.timeout_rate, s.lr, s.update.approx_kl);
    log << row;
    log.flush();
    if (epoch % log_every == 0) {
      std::fprintf(stderr, "epoch %d reward %.3f succ %.3f coll %.3f lr %.2g kl %.4f\n", epoch,
                   s.mean_reward, s.success_rate, s.collision_rate, s.lr, s.update.approx_kl);
    }
    if (s.ended >= 8 && s.success_rate >= best_success) {
      best_success = s.success_rate;
      save_checkpoint(out_dir + "/teacher_best.bin", meta, trainer.store());
    }
  }
  save_checkpoint(out_dir + "/teacher_final.bin", meta, trainer.store());
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(out_dir + "/teacher_manifest.txt",
                 {{"seed", std::to_string(seed)},
                  {"epochs", std::to_string(cfg.ppo.max_epochs)},
                  {"n_env", std::to_string(cfg.ppo.n_env)},
                  {"n_scan", std::to_string(cfg.world.n_scan)},
                  {"best_success_rate", std::to_string(best_success)},
                  {"env_steps_per_s", std::to_string(double(total_steps) / secs)},
                  {"rays_per_s", std::to_string(double(trainer.total_rays()) / secs)},
                  {"wall_seconds", std::to_string(secs)}});
  return out_dir + "/teacher_best.bin";
}

}  // namespace nav
