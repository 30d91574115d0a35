#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "nav/distill.hpp"
#include "test_util.hpp"

using namespace nav;
namespace fs = std::filesystem;

namespace {

std::vector<uint8_t> slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f.good());
  return std::vector<uint8_t>(std::istreambuf_iterator<char>(f), {});
}

AppConfig tiny_collect_config() {
  AppConfig cfg = default_app_config();
  cfg.world.n_scan = 40;
  cfg.world.obstacle_count = 0;
  cfg.world.max_steps = 30;
  cfg.rig.width = 16;
  cfg.rig.height = 10;
  cfg.bc.episode_target = 5;
  cfg.config_hash = 0x1234abcd;
  return cfg;
}

}  // namespace

TEST_CASE("depth quantization") {
  const double max_depth = 5.0;
  SUBCASE("codes round-trip exactly") {
    for (uint32_t q = 0; q <= 65535; q += 17) {
      CHECK(quantize_depth(dequantize_depth(uint16_t(q), max_depth), max_depth) == q);
    }
    CHECK(quantize_depth(dequantize_depth(65535, max_depth), max_depth) == 65535);
  }
  SUBCASE("error bounded by half a code step") {
    Rng rng(1);
    double bound = max_depth / 65535.0 / 2.0;
    for (int i = 0; i < 10000; ++i) {
      float d = float(rng.uniform(0.0, max_depth));
      float back = dequantize_depth(quantize_depth(d, max_depth), max_depth);
      CHECK(std::abs(double(back) - double(d)) <= bound + 1e-9);
    }
  }
  SUBCASE("out-of-range values clamp to valid codes") {
    CHECK(quantize_depth(-1.0f, max_depth) == 0);
    CHECK(quantize_depth(100.0f, max_depth) == 65535);
  }
}

TEST_CASE("dataset writer and reader round-trip") {
  const std::string path = "/tmp/navtest_dataset.bin";
  const int H = 3, W = 4;
  const size_t dhw = size_t(4) * H * W;
  const uint64_t hash = 0xfeedface12345678ull;
  Rng rng(2);

  // Three episodes: commit, discard, commit.
  std::vector<std::vector<float>> proprios, actions;
  std::vector<std::vector<uint16_t>> depths;
  auto make_step = [&]() {
    std::vector<float> p(kProprioDim), a(3);
    std::vector<uint16_t> d(dhw);
    for (auto& v : p) v = float(rng.uniform(-1, 1));
    for (auto& v : a) v = float(rng.uniform(-1, 1));
    for (auto& v : d) v = uint16_t(rng.uniform_int(0, 65535));
    proprios.push_back(p);
    actions.push_back(a);
    depths.push_back(d);
  };

  {
    DatasetWriter w(path, H, W, hash, 5.0);
    w.begin_episode();
    for (int s = 0; s < 3; ++s) {
      make_step();
      w.add_step(proprios.back().data(), actions.back().data(), depths.back().data());
    }
    w.commit_episode();
    w.begin_episode();
    std::vector<float> junk_p(kProprioDim, 9.0f), junk_a(3, 9.0f);
    std::vector<uint16_t> junk_d(dhw, 9);
    w.add_step(junk_p.data(), junk_a.data(), junk_d.data());
    w.discard_episode();  // failed episode: must not reach disk
    w.begin_episode();
    for (int s = 0; s < 2; ++s) {
      make_step();
      w.add_step(proprios.back().data(), actions.back().data(), depths.back().data());
    }
    w.commit_episode();
    CHECK(w.record_count() == 5);
    CHECK(w.episode_count() == 2);
    w.close();
  }

  DatasetReader r(path);
  CHECK(r.height() == H);
  CHECK(r.width() == W);
  CHECK(r.record_count() == 5);
  CHECK(r.config_hash() == hash);
  CHECK(r.max_depth() == 5.0);
  REQUIRE(r.episodes().size() == 2);
  CHECK(r.episodes()[0].first_record == 0);
  CHECK(r.episodes()[0].length == 3);
  CHECK(r.episodes()[1].first_record == 3);
  CHECK(r.episodes()[1].length == 2);
  CHECK(r.episodes()[0].outcome == Outcome::success);

  DemoRecord rec;
  rec.depth.resize(dhw);
  uint32_t expect_step[5] = {0, 1, 2, 0, 1};
  for (uint64_t i = 0; i < 5; ++i) {
    r.read_record(i, rec);
    CHECK(rec.step_index == expect_step[i]);
    CHECK(rec.episode_id == (i < 3 ? r.episodes()[0].episode_id : r.episodes()[1].episode_id));
    for (int k = 0; k < kProprioDim; ++k) CHECK(rec.proprio[k] == proprios[i][k]);
    for (int k = 0; k < 3; ++k) CHECK(rec.action[k] == actions[i][k]);
    CHECK(rec.depth == depths[i]);
  }

  SUBCASE("out-of-range record index throws") {
    CHECK_THROWS(r.read_record(5, rec));
  }
  SUBCASE("truncated file names the unreadable record") {
    std::vector<uint8_t> bytes = slurp(path);
    // Header + 2.5 records: the episode table is gone and opening must fail.
    size_t rec_bytes = 8 + size_t(kProprioDim) * 4 + 12 + dhw * 2;
    const std::string cut = "/tmp/navtest_dataset_cut.bin";
    {
      std::ofstream f(cut, std::ios::binary);
      f.write(reinterpret_cast<const char*>(bytes.data()),
              std::streamsize(52 + rec_bytes * 2 + rec_bytes / 2));
    }
    CHECK_THROWS(DatasetReader(cut));  // episode table is gone entirely
  }
  SUBCASE("non-dataset file is rejected") {
    const std::string bad = "/tmp/navtest_dataset_bad.bin";
    std::ofstream f(bad, std::ios::binary);
    f << "garbage header that is long enough to read but wrong magic bytes";
    f.close();
    CHECK_THROWS(DatasetReader(bad));
  }
}

TEST_CASE("demo collection stores only successful episodes") {
  AppConfig cfg = tiny_collect_config();
  // Huge goal radius: every episode succeeds on its first low-speed step.
  cfg.world.rewards.d_goal_thresh = 100.0;
  ParamStore<float> store;
  TeacherNet<float> net;
  Rng rng(3);
  net.init(store, cfg.world.n_scan, rng);
  const std::string path = "/tmp/navtest_collect.bin";
  CollectStats stats = collect_demos(cfg, 11, net, store, path);
  CHECK(stats.successes == cfg.bc.episode_target);
  CHECK(stats.episodes_attempted >= stats.successes);
  CHECK(stats.records >= uint64_t(stats.successes));

  DatasetReader r(path);
  CHECK(r.record_count() == stats.records);
  CHECK(int(r.episodes().size()) == stats.successes);
  CHECK(r.config_hash() == cfg.config_hash);
  uint64_t acc = 0;
  DemoRecord rec;
  rec.depth.resize(size_t(4) * r.height() * r.width());
  for (const auto& ep : r.episodes()) {
    CHECK(ep.outcome == Outcome::success);
    CHECK(ep.first_record == acc);
    acc += ep.length;
    r.read_record(ep.first_record, rec);
    for (int k = 0; k < 3; ++k) {
      CHECK(rec.action[k] > -1.0f);  // tanh mean actions
      CHECK(rec.action[k] < 1.0f);
    }
  }
  CHECK(acc == r.record_count());

  SUBCASE("collection is byte-deterministic for a fixed seed") {
    const std::string again = "/tmp/navtest_collect2.bin";
    collect_demos(cfg, 11, net, store, again);
    CHECK(slurp(path) == slurp(again));
  }
}

TEST_CASE("demo collection aborts on a hopeless teacher") {
  AppConfig cfg = tiny_collect_config();  // default goal radius; near-zero policy times out
  ParamStore<float> store;
  TeacherNet<float> net;
  Rng rng(4);
  net.init(store, cfg.world.n_scan, rng);
  CHECK_THROWS_WITH_AS(collect_demos(cfg, 5, net, store, "/tmp/navtest_collect_fail.bin"),
                       doctest::Contains("success rate"), std::runtime_error);
}

TEST_CASE("behavior cloning on a tiny dataset") {
  AppConfig cfg = tiny_collect_config();
  cfg.world.rewards.d_goal_thresh = 100.0;
  cfg.bc.episode_target = 6;
  cfg.bc.epochs = 3;
  cfg.bc.batch = 4;
  ParamStore<float> store;
  TeacherNet<float> net;
  Rng rng(5);
  net.init(store, cfg.world.n_scan, rng);
  const std::string data = "/tmp/navtest_bc_data.bin";
  collect_demos(cfg, 13, net, store, data);

  const std::string out = "/tmp/navtest_bc_out";
  fs::remove_all(out);
  BCResult res = bc_train<float>(cfg, 17, data, out);
  CHECK(std::isfinite(res.epoch1_val));
  CHECK(std::isfinite(res.best_val));
  CHECK(res.best_val <= res.epoch1_val);
  CHECK(res.best_epoch >= 1);
  CHECK(fs::exists(out + "/student_best.bin"));
  CHECK(fs::exists(out + "/student_final.bin"));
  CHECK(fs::exists(out + "/bc_log.csv"));

  LoadedCheckpoint ck = load_checkpoint(res.best_checkpoint);
  CHECK(ck.meta.kind == "student");
  CHECK(ck.meta.height == cfg.rig.height);
  CHECK(ck.meta.width == cfg.rig.width);
  CHECK(ck.meta.config_hash == cfg.config_hash);

  // Three epochs logged.
  std::ifstream log(out + "/bc_log.csv");
  std::string line;
  int rows = 0;
  std::getline(log, line);
  CHECK(line == "epoch,train_loss,val_loss");
  while (std::getline(log, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == 3);

  SUBCASE("training is deterministic for a fixed seed") {
    const std::string out2 = "/tmp/navtest_bc_out2";
    fs::remove_all(out2);
    BCResult res2 = bc_train<float>(cfg, 17, data, out2);
    CHECK(res2.best_val == res.best_val);
    CHECK(res2.best_epoch == res.best_epoch);
    CHECK(slurp(out2 + "/bc_log.csv") == slurp(out + "/bc_log.csv"));
    CHECK(slurp(out2 + "/student_final.bin") == slurp(out + "/student_final.bin"));
  }
  SUBCASE("config-hash mismatch is rejected unless overridden") {
    AppConfig other = cfg;
    other.config_hash = 0x999;
    CHECK_THROWS_WITH_AS(bc_train<float>(other, 17, data, "/tmp/navtest_bc_mismatch"),
                         doctest::Contains("different config"), std::runtime_error);
    BCResult ok = bc_train<float>(other, 17, data, "/tmp/navtest_bc_mismatch", true);
    CHECK(std::isfinite(ok.best_val));
  }
  SUBCASE("train/validation records partition the dataset") {
    std::ifstream mf(out + "/bc_manifest.txt");
    REQUIRE(mf.good());
    uint64_t train_n = 0, val_n = 0;
    std::string l;
    while (std::getline(mf, l)) {
      if (l.rfind("train_records=", 0) == 0) train_n = std::stoull(l.substr(14));
      if (l.rfind("val_records=", 0) == 0) val_n = std::stoull(l.substr(12));
    }
    DatasetReader r(data);
    CHECK(train_n > 0);
    CHECK(val_n > 0);
    CHECK(train_n + val_n == r.record_count());
  }
}
