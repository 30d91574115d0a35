#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "nav/rng.hpp"

namespace nav {

// Named trainable parameters with gradients and Adam state.
template <typename T>
class ParamStore {
 public:
  struct Param {
    std::string name;
    std::vector<int> shape;
    std::vector<T> value;
    std::vector<T> grad;
    std::vector<T> m;
    std::vector<T> v;
  };

  int add(const std::string& name, std::vector<int> shape) {
    if (index_.count(name)) throw std::runtime_error("duplicate parameter: " + name);
    size_t n = 1;
    for (int d : shape) n *= size_t(d);
    Param p;
    p.name = name;
    p.shape = std::move(shape);
    p.value.assign(n, T(0));
    p.grad.assign(n, T(0));
    p.m.assign(n, T(0));
    p.v.assign(n, T(0));
    params_.push_back(std::move(p));
    index_[name] = int(params_.size()) - 1;
    return int(params_.size()) - 1;
  }

  Param& at(int idx) { return params_[idx]; }
  const Param& at(int idx) const { return params_[idx]; }
  int find(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? -1 : it->second;
  }
  int count() const { return int(params_.size()); }
  int64_t step() const { return step_; }
  void set_step(int64_t s) { step_ = s; }

  size_t total_values() const {
    size_t n = 0;
    for (const auto& p : params_) n += p.value.size();
    return n;
  }

  void zero_grad() {
    for (auto& p : params_) std::fill(p.grad.begin(), p.grad.end(), T(0));
  }

  // Bias-corrected Adam; zeroes gradients afterward.
  void adam_step(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8) {
    ++step_;
    double bc1 = 1.0 - std::pow(beta1, double(step_));
    double bc2 = 1.0 - std::pow(beta2, double(step_));
    for (auto& p : params_) {
      for (size_t i = 0; i < p.value.size(); ++i) {
        double g = double(p.grad[i]);
        double m = beta1 * double(p.m[i]) + (1.0 - beta1) * g;
        double v = beta2 * double(p.v[i]) + (1.0 - beta2) * g * g;
        p.m[i] = T(m);
        p.v[i] = T(v);
        p.value[i] -= T(lr * (m / bc1) / (std::sqrt(v / bc2) + eps));
      }
      std::fill(p.grad.begin(), p.grad.end(), T(0));
    }
  }

  std::vector<Param>& params() { return params_; }
  const std::vector<Param>& params() const { return params_; }

 private:
  std::vector<Param> params_;
  std::map<std::string, int> index_;
  int64_t step_ = 0;
};

// Per-chunk gradient buffer mirroring a store's parameter layout; chunks are
// reduced into the store in a fixed order so batched backward passes stay
// deterministic under any thread count.
template <typename T>
struct GradBuf {
  std::vector<std::vector<T>> g;

  explicit GradBuf(const ParamStore<T>& store) {
    g.resize(store.count());
    for (int i = 0; i < store.count(); ++i) g[i].assign(store.at(i).value.size(), T(0));
  }
  void clear() {
    for (auto& v : g) std::fill(v.begin(), v.end(), T(0));
  }
  void add_into(ParamStore<T>& store) const {
    for (size_t i = 0; i < g.size(); ++i) {
      auto& grad = store.at(int(i)).grad;
      for (size_t j = 0; j < grad.size(); ++j) grad[j] += g[i][j];
    }
  }
  T* data(int idx) { return g[idx].data(); }
};

}  // namespace nav
