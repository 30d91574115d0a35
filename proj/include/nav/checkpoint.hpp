#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "nav/params.hpp"

namespace nav {

// Named-tensor checkpoint container: versioned header with the sensor
// geometry the parameters were built for, then (name, shape, float32 values)
// entries. Identical format for teacher and student.
struct CheckpointMeta {
  std::string kind;  // "teacher" | "student"
  int n_scan = 0;    // teacher geometry
  int height = 0, width = 0;  // student geometry
  double distance_normalizer = 0.0;
  uint64_t config_hash = 0;
};

constexpr uint64_t kCkptMagic = 0x314e4b4356414eull;  // "NAVCKN1" packed
constexpr uint32_t kCkptVersion = 1;

template <typename T>
void save_checkpoint(const std::string& path, const CheckpointMeta& meta,
                     const ParamStore<T>& store) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write checkpoint " + path);
  auto put = [&f](const void* p, size_t n) { f.write(static_cast<const char*>(p), std::streamsize(n)); };
  put(&kCkptMagic, 8);
  put(&kCkptVersion, 4);
  uint8_t kind = meta.kind == "student" ? 1 : 0;
  put(&kind, 1);
  uint32_t geo[3] = {uint32_t(meta.n_scan), uint32_t(meta.height), uint32_t(meta.width)};
  put(geo, 12);
  put(&meta.distance_normalizer, 8);
  put(&meta.config_hash, 8);
  uint32_t n = uint32_t(store.count());
  put(&n, 4);
  for (int i = 0; i < store.count(); ++i) {
    const auto& p = store.at(i);
    uint32_t len = uint32_t(p.name.size());
    put(&len, 4);
    put(p.name.data(), len);
    uint32_t nd = uint32_t(p.shape.size());
    put(&nd, 4);
    for (int d : p.shape) {
      int32_t dd = d;
      put(&dd, 4);
    }
    std::vector<float> vals(p.value.size());
    for (size_t j = 0; j < vals.size(); ++j) vals[j] = float(p.value[j]);
    put(vals.data(), vals.size() * 4);
  }
}

struct LoadedTensor {
  std::vector<int> shape;
  std::vector<float> values;
};

struct LoadedCheckpoint {
  CheckpointMeta meta;
  std::map<std::string, LoadedTensor> tensors;
};

inline LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open checkpoint " + path);
  auto get = [&f, &path](void* p, size_t n) {
    f.read(static_cast<char*>(p), std::streamsize(n));
    if (!f) throw std::runtime_error("truncated checkpoint " + path);
  };
  uint64_t magic;
  get(&magic, 8);
  if (magic != kCkptMagic) throw std::runtime_error("not a checkpoint file: " + path);
  uint32_t version;
  get(&version, 4);
  if (version != kCkptVersion) throw std::runtime_error("unsupported checkpoint version");
  LoadedCheckpoint ck;
  uint8_t kind;
  get(&kind, 1);
  ck.meta.kind = kind == 1 ? "student" : "teacher";
  uint32_t geo[3];
  get(geo, 12);
  ck.meta.n_scan = int(geo[0]);
  ck.meta.height = int(geo[1]);
  ck.meta.width = int(geo[2]);
  get(&ck.meta.distance_normalizer, 8);
  get(&ck.meta.config_hash, 8);
  uint32_t n;
  get(&n, 4);
  for (uint32_t i = 0; i < n; ++i) {
    uint32_t len;
    get(&len, 4);
    std::string name(len, '\0');
    get(name.data(), len);
    uint32_t nd;
    get(&nd, 4);
    LoadedTensor t;
    size_t count = 1;
    for (uint32_t d = 0; d < nd; ++d) {
      int32_t dim;
      get(&dim, 4);
      t.shape.push_back(int(dim));
      count *= size_t(dim);
    }
    t.values.resize(count);
    get(t.values.data(), count * 4);
    ck.tensors[name] = std::move(t);
  }
  return ck;
}

// Copies loaded values into a freshly initialized store; every parameter
// must be present with a matching shape.
template <typename T>
void restore_into(const LoadedCheckpoint& ck, ParamStore<T>& store) {
  for (int i = 0; i < store.count(); ++i) {
    auto& p = store.at(i);
    auto it = ck.tensors.find(p.name);
    if (it == ck.tensors.end()) {
      throw std::runtime_error("checkpoint missing tensor " + p.name);
    }
    if (it->second.shape != p.shape) {
      throw std::runtime_error("checkpoint shape mismatch for " + p.name);
    }
    for (size_t j = 0; j < p.value.size(); ++j) p.value[j] = T(it->second.values[j]);
  }
}

}  // namespace nav
