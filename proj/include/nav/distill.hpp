#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "nav/augment.hpp"
#include "nav/checkpoint.hpp"
#include "nav/config.hpp"
#include "nav/env.hpp"
#include "nav/ppo.hpp"

namespace nav {

constexpr char kDatasetMagic[8] = {'N', 'A', 'V', 'D', 'E', 'M', 'O', '1'};
constexpr uint32_t kDatasetVersion = 1;

// One demonstration step. Depth is stored u16-quantized against max_depth so
// that write -> read round-trips bit-exactly.
struct DemoRecord {
  uint32_t episode_id = 0;
  uint32_t step_index = 0;
  float proprio[kProprioDim];
  float action[3];
  std::vector<uint16_t> depth;  // 4*H*W
};

struct EpisodeInfo {
  uint32_t episode_id = 0;
  Outcome outcome = Outcome::success;
  uint64_t first_record = 0;
  uint32_t length = 0;
};

inline uint16_t quantize_depth(float d, double max_depth) {
  double q = std::round(double(d) / max_depth * 65535.0);
  return uint16_t(std::clamp(q, 0.0, 65535.0));
}

inline float dequantize_depth(uint16_t q, double max_depth) {
  return float(double(q) / 65535.0 * max_depth);
}

// Streams fixed-size records; per-episode buffering so only successful
// episodes are committed to disk.
class DatasetWriter {
 public:
  DatasetWriter(const std::string& path, int height, int width, uint64_t config_hash,
                double max_depth);
  ~DatasetWriter();

  void begin_episode();
  void add_step(const float* proprio, const float* action, const uint16_t* depth);
  void commit_episode();   // successful episode: flush buffered steps
  void discard_episode();  // drop buffered steps
  void close();            // finalize header + episode table

  uint64_t record_count() const { return record_count_; }
  uint64_t episode_count() const { return episodes_.size(); }
  size_t record_bytes() const { return record_bytes_; }

 private:
  std::FILE* f_ = nullptr;
  std::string path_;
  int height_, width_;
  uint64_t config_hash_;
  double max_depth_;
  size_t record_bytes_;
  uint64_t record_count_ = 0;
  std::vector<EpisodeInfo> episodes_;
  std::vector<uint8_t> pending_;  // serialized steps of the open episode
  uint32_t pending_steps_ = 0;
  bool episode_open_ = false;
};

// Random access over a dataset file via pread; records never need to fit in
// memory at once.
class DatasetReader {
 public:
  explicit DatasetReader(const std::string& path);
  ~DatasetReader();

  int height() const { return height_; }
  int width() const { return width_; }
  uint64_t record_count() const { return record_count_; }
  uint64_t config_hash() const { return config_hash_; }
  double max_depth() const { return max_depth_; }
  const std::vector<EpisodeInfo>& episodes() const { return episodes_; }

  // Thread-safe (pread). Throws naming the record index on truncation.
  void read_record(uint64_t index, DemoRecord& out) const;

 private:
  int fd_ = -1;
  std::string path_;
  int height_ = 0, width_ = 0;
  uint64_t record_count_ = 0;
  uint64_t config_hash_ = 0;
  double max_depth_ = 0.0;
  size_t record_bytes_ = 0;
  std::vector<EpisodeInfo> episodes_;
};

struct CollectStats {
  int episodes_attempted = 0;
  int successes = 0;
  uint64_t records = 0;
};

// Runs the teacher (distribution mean, privileged scans) and stores clean
// depth panoramas with proprio and action labels; commits only successful
// episodes until episode_target are stored. Episodes run round-robin across
// a fixed set of environments, so results are thread-count independent.
template <typename T>
CollectStats collect_demos(const AppConfig& cfg, uint64_t seed, TeacherNet<T>& net,
                           ParamStore<T>& store, const std::string& out_path) {
  const int n_envs = kGradChunks;
  EnvConfig ec = cfg.world;
  ec.lidar_mode = LidarMode::privileged;

  std::vector<std::unique_ptr<Env>> envs;
  std::vector<typename TeacherNet<T>::Ws> ws(n_envs);
  for (int e = 0; e < n_envs; ++e) {
    envs.emplace_back(std::make_unique<Env>(ec, seed, uint64_t(e)));
    net.make_ws(ws[e]);
  }

  struct EpisodeBuf {
    std::vector<float> proprio, action;
    std::vector<uint16_t> depth;
    Outcome outcome = Outcome::running;
    int steps = 0;
  };
  std::vector<EpisodeBuf> bufs(n_envs);

  DatasetWriter writer(out_path, cfg.rig.height, cfg.rig.width, cfg.config_hash,
                       cfg.rig.max_depth);
  const size_t dhw = size_t(4) * cfg.rig.height * cfg.rig.width;
  CollectStats stats;

  while (stats.successes < cfg.bc.episode_target) {
#pragma omp parallel for schedule(static)
    for (int e = 0; e < n_envs; ++e) {
      auto& buf = bufs[e];
      buf.proprio.clear();
      buf.action.clear();
      buf.depth.clear();
      buf.steps = 0;
      Env& env = *envs[e];
      env.reset();
      std::vector<T> obs(size_t(ec.n_scan) + kProprioDim);
      while (true) {
        const auto& scan = env.scan();
        double inv = 1.0 / ec.max_range;
        for (int i = 0; i < ec.n_scan; ++i) obs[i] = T(scan.ranges[i] * inv);
        ProprioObs p = env.proprio();
        for (int i = 0; i < kProprioDim; ++i) obs[ec.n_scan + i] = T(p.values[i]);
        ActionDistribution dist = net.actor_fwd(store, obs.data(), obs.data() + ec.n_scan, ws[e]);

        DepthPanorama pano = render_depth(env.episode().robot, env.scene(), cfg.rig);
        size_t base = buf.depth.size();
        buf.depth.resize(base + dhw);
        for (size_t i = 0; i < dhw; ++i) {
          buf.depth[base + i] = quantize_depth(pano.depth[i], cfg.rig.max_depth);
        }
        for (int i = 0; i < kProprioDim; ++i) buf.proprio.push_back(float(p.values[i]));
        Action a{dist.mean[0], dist.mean[1], dist.mean[2]};
        for (int i = 0; i < 3; ++i) buf.action.push_back(float(a[i]));
        buf.steps += 1;

        StepResult r = env.step(a);
        if (r.terminated) {
          buf.outcome = env.episode().outcome;
          break;
        }
      }
    }
    // Commit in env-index order for determinism.
    for (int e = 0; e < n_envs && stats.successes < cfg.bc.episode_target; ++e) {
      auto& buf = bufs[e];
      stats.episodes_attempted += 1;
      if (buf.outcome == Outcome::success) {
        writer.begin_episode();
        for (int s = 0; s < buf.steps; ++s) {
          writer.add_step(buf.proprio.data() + size_t(s) * kProprioDim,
                          buf.action.data() + size_t(s) * 3, buf.depth.data() + size_t(s) * dhw);
        }
        writer.commit_episode();
        stats.successes += 1;
        stats.records += uint64_t(buf.steps);
      }
      if (stats.episodes_attempted == 100 && stats.successes < 10) {
        writer.close();
        throw std::runtime_error(
            "collect_demos: teacher success rate below 10% over the first 100 episodes "
            "(bad checkpoint?)");
      }
    }
  }
  writer.close();
  return stats;
}

struct BCResult {
  std::string best_checkpoint;
  double epoch1_val = 0.0;
  double best_val = 0.0;
  int best_epoch = 0;
};

// Behavior cloning of the student from a demonstration dataset. Training
// samples get a fresh augmentation draw each epoch; validation uses a fixed
// draw per record so epochs are comparable. Validation split is by whole
// episodes.
template <typename T>
BCResult bc_train(const AppConfig& cfg, uint64_t seed, const std::string& dataset_path,
                  const std::string& out_dir, bool allow_config_mismatch = false) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  DatasetReader reader(dataset_path);
  if (reader.record_count() == 0) throw std::runtime_error("bc_train: dataset is empty");
  if (reader.config_hash() != cfg.config_hash) {
    std::fprintf(stderr, "warning: dataset config hash %016llx != current %016llx\n",
                 (unsigned long long)reader.config_hash(), (unsigned long long)cfg.config_hash);
    if (!allow_config_mismatch) {
      throw std::runtime_error(
          "bc_train: dataset was collected under a different config (pass "
          "--allow-config-mismatch to proceed)");
    }
  }
  const int H = reader.height(), W = reader.width();
  const double max_depth = reader.max_depth();
  const size_t dhw = size_t(4) * H * W;

  // Episode-granular split: shuffle, last val_fraction go to validation.
  std::vector<uint32_t> ep_order(reader.episodes().size());
  for (size_t i = 0; i < ep_order.size(); ++i) ep_order[i] = uint32_t(i);
  Rng split_rng = Rng::derive(seed, 0x53504c49ull);
  for (size_t i = ep_order.size() - 1; i > 0; --i) {
    size_t j = size_t(split_rng.uniform_int(0, int64_t(i)));
    std::swap(ep_order[i], ep_order[j]);
  }
  size_t n_val_ep = std::max<size_t>(1, size_t(std::ceil(ep_order.size() * cfg.bc.val_fraction)));
  if (n_val_ep >= ep_order.size()) throw std::runtime_error("bc_train: dataset too small to split");
  std::vector<uint64_t> train_idx, val_idx;
  for (size_t i = 0; i < ep_order.size(); ++i) {
    const EpisodeInfo& ep = reader.episodes()[ep_order[i]];
    auto& dst = (i + n_val_ep >= ep_order.size()) ? val_idx : train_idx;
    for (uint32_t s = 0; s < ep.length; ++s) dst.push_back(ep.first_record + s);
  }

  StudentNet<T> net;
  ParamStore<T> store;
  Rng init_rng = Rng::derive(seed, 0x494e4954ull);
  net.init(store, H, W, init_rng);

  std::vector<typename StudentNet<T>::Ws> ws_pool(kGradChunks);
  std::vector<GradBuf<T>> grad_pool;
  for (int c = 0; c < kGradChunks; ++c) {
    net.make_ws(ws_pool[c]);
    grad_pool.emplace_back(store);
  }

  AugmentConfig aug = cfg.augment;
  aug.max_depth = max_depth;

  // Per-sample loss ||a_teacher - a_student||^2 with gradient accumulation;
  // returns the loss (and leaves gradients in gb when training).
  auto sample_pass = [&](uint64_t rec_idx, uint64_t aug_a, uint64_t aug_b, int chunk,
                         bool train, double gscale) -> double {
    DemoRecord rec;
    rec.depth.resize(dhw);
    reader.read_record(rec_idx, rec);
    DepthPanorama pano;
    pano.height = H;
    pano.width = W;
    pano.depth.resize(dhw);
    for (size_t i = 0; i < dhw; ++i) pano.depth[i] = dequantize_depth(rec.depth[i], max_depth);
    Rng aug_rng = Rng::derive(seed, aug_a, aug_b, rec_idx);
    apply_pipeline(pano, aug, aug_rng);
    std::vector<T> depth_in(dhw);
    T inv = T(1.0 / max_depth);
    for (size_t i = 0; i < dhw; ++i) depth_in[i] = T(pano.depth[i]) * inv;
    std::vector<T> prop(kProprioDim);
    for (int i = 0; i < kProprioDim; ++i) prop[i] = T(rec.proprio[i]);
    auto& ws = ws_pool[chunk];
    net.fwd(store, depth_in.data(), prop.data(), ws);
    double loss = 0.0;
    T gaction[3];
    for (int k = 0; k < 3; ++k) {
      double err = double(ws.action[k]) - double(rec.action[k]);
      loss += err * err;
      gaction[k] = T(2.0 * err * gscale);
    }
    if (train) net.bwd(store, prop.data(), ws, gaction, grad_pool[chunk]);
    return loss;
  };

  auto eval_val = [&]() -> double {
    std::vector<double> sums(kGradChunks, 0.0);
    size_t chunk_len = (val_idx.size() + kGradChunks - 1) / kGradChunks;
#pragma omp parallel for schedule(static)
    for (int c = 0; c < kGradChunks; ++c) {
      size_t lo = size_t(c) * chunk_len, hi = std::min(val_idx.size(), lo + chunk_len);
      for (size_t i = lo; i < hi; ++i) {
        sums[c] += sample_pass(val_idx[i], 0x56415547ull, 0, c, false, 0.0);
      }
    }
    double total = 0.0;
    for (double s : sums) total += s;
    return total / double(val_idx.size());
  };

  CheckpointMeta meta;
  meta.kind = "student";
  meta.height = H;
  meta.width = W;
  meta.distance_normalizer = cfg.world.distance_normalizer;
  meta.config_hash = cfg.config_hash;

  std::ofstream log(out_dir + "/bc_log.csv");
  log << "epoch,train_loss,val_loss\n";

  BCResult result;
  result.best_val = std::numeric_limits<double>::infinity();
  std::vector<uint64_t> order(train_idx);
  Rng shuffle_rng = Rng::derive(seed, 0x53485546ull);
  for (int epoch = 1; epoch <= cfg.bc.epochs; ++epoch) {
    for (size_t i = order.size() - 1; i > 0; --i) {
      size_t j = size_t(shuffle_rng.uniform_int(0, int64_t(i)));
      std::swap(order[i], order[j]);
    }
    uint64_t aug_epoch = cfg.bc.freeze_augmentation ? 1 : uint64_t(epoch);
    double train_sum = 0.0;
    size_t n_train = 0;
    for (size_t pos = 0; pos < order.size(); pos += size_t(cfg.bc.batch)) {
      size_t bsz = std::min(size_t(cfg.bc.batch), order.size() - pos);
      std::vector<double> losses(kGradChunks, 0.0);
      size_t chunk_len = (bsz + kGradChunks - 1) / kGradChunks;
#pragma omp parallel for schedule(static)
      for (int c = 0; c < kGradChunks; ++c) {
        grad_pool[c].clear();
        size_t lo = size_t(c) * chunk_len, hi = std::min(bsz, lo + chunk_len);
        for (size_t i = lo; i < hi; ++i) {
          losses[c] += sample_pass(order[pos + i], 0x41554721ull, aug_epoch, c, true,
                                   1.0 / double(bsz));
        }
      }
      for (int c = 0; c < kGradChunks; ++c) {
        grad_pool[c].add_into(store);
        train_sum += losses[c];
      }
      store.adam_step(cfg.bc.lr);
      n_train += bsz;
    }
    double train_loss = train_sum / double(n_train);
    double val_loss = eval_val();
    if (!std::isfinite(train_loss) || !std::isfinite(val_loss)) {
      throw std::runtime_error("bc_train: non-finite loss at epoch " + std::to_string(epoch));
    }
    char row[96];
    std::snprintf(row, sizeof(row), "%d,%.8f,%.8f\n", epoch, train_loss, val_loss);
    log << row;
    log.flush();
    std::fprintf(stderr, "bc epoch %d train %.5f val %.5f\n", epoch, train_loss, val_loss);
    if (epoch == 1) result.epoch1_val = val_loss;
    if (val_loss < result.best_val) {
      result.best_val = val_loss;
      result.best_epoch = epoch;
      save_checkpoint(out_dir + "/student_best.bin", meta, store);
    }
  }
  save_checkpoint(out_dir + "/student_final.bin", meta, store);
  result.best_checkpoint = out_dir + "/student_best.bin";
  write_manifest(out_dir + "/bc_manifest.txt",
                 {{"seed", std::to_string(seed)},
                  {"dataset", dataset_path},
                  {"train_records", std::to_string(train_idx.size())},
                  {"val_records", std::to_string(val_idx.size())},
                  {"epochs", std::to_string(cfg.bc.epochs)},
                  {"best_epoch", std::to_string(result.best_epoch)},
                  {"epoch1_val", std::to_string(result.epoch1_val)},
                  {"best_val", std::to_string(result.best_val)}});
  return result;
}

}  // namespace nav
