#pragma once

#include <array>
#include <string>

#include "nav/ops.hpp"
#include "nav/params.hpp"
#include "nav/world.hpp"

namespace nav {

constexpr int kProprioDim = 24;  // 6x3 odometry + goal unit vec + distance + prev action

// Proprioceptive observation, normalized to [-1, 1].
struct ProprioObs {
  std::array<double, kProprioDim> values;
};

ProprioObs encode_proprio(const EpisodeState& ep, const SceneSpec& scene, const RobotSpec& spec,
                          double distance_normalizer);

inline ProprioObs encode_proprio(const EpisodeState& ep, const SceneSpec& scene,
                                 const RobotSpec& spec) {
  return encode_proprio(ep, scene, spec, 2.0 * scene.arena_half_extent * M_SQRT2);
}

struct ActionDistribution {
  std::array<double, 3> mean;     // tanh-bounded
  std::array<double, 3> log_std;  // clamped to [-5, 1]
};

struct SampledAction {
  Action clipped;               // sent to the environment, in [-1,1]
  std::array<double, 3> raw;    // pre-clip Gaussian sample (log_prob refers to this)
  double log_prob;
};

SampledAction sample_action(const ActionDistribution& dist, Rng& rng);
double log_prob_of(const ActionDistribution& dist, const std::array<double, 3>& raw);

constexpr double kLogStdInit = -0.916290731874155;  // ln(0.4)
constexpr double kLogStdMin = -5.0, kLogStdMax = 1.0;

namespace detail {

template <typename T>
struct LinearLayer {
  int w = -1, b = -1;
  int in = 0, out = 0;

  void init(ParamStore<T>& ps, const std::string& name, int in_, int out_, Rng& rng,
            double scale = 1.0) {
    in = in_;
    out = out_;
    w = ps.add(name + ".w", {in, out});
    b = ps.add(name + ".b", {out});
    double k = scale * std::sqrt(1.0 / in);
    for (auto& v : ps.at(w).value) v = T(rng.uniform(-k, k));
  }
  void fwd(const ParamStore<T>& ps, const T* x, T* y) const {
    ops::linear_fwd(x, ps.at(w).value.data(), ps.at(b).value.data(), y, 1, in, out);
  }
  void bwd(const ParamStore<T>& ps, const T* x, const T* gy, T* gx, GradBuf<T>& gb) const {
    ops::linear_bwd(x, ps.at(w).value.data(), gy, gx, gb.data(w), gb.data(b), 1, in, out);
  }
};

template <typename T>
struct Conv1dLayer {
  int w = -1, b = -1;
  int cin = 0, cout = 0, k = 3, pad = 1;

  void init(ParamStore<T>& ps, const std::string& name, int cin_, int cout_, Rng& rng) {
    cin = cin_;
    cout = cout_;
    w = ps.add(name + ".w", {cout, cin, k});
    b = ps.add(name + ".b", {cout});
    double kk = std::sqrt(1.0 / (cin * k));
    for (auto& v : ps.at(w).value) v = T(rng.uniform(-kk, kk));
  }
  void fwd(const ParamStore<T>& ps, const T* x, T* y, int L) const {
    ops::conv1d_fwd(x, ps.at(w).value.data(), ps.at(b).value.data(), y, cin, L, cout, k, pad);
  }
  void bwd(const ParamStore<T>& ps, const T* x, const T* gy, T* gx, GradBuf<T>& gb,
           int L) const {
    ops::conv1d_bwd(x, ps.at(w).value.data(), gy, gx, gb.data(w), gb.data(b), cin, L, cout, k,
                    pad);
  }
};

template <typename T>
struct Conv2dLayer {
  int w = -1, b = -1;
  int cin = 0, cout = 0, k = 3, pad = 1;

  void init(ParamStore<T>& ps, const std::string& name, int cin_, int cout_, Rng& rng) {
    cin = cin_;
    cout = cout_;
    w = ps.add(name + ".w", {cout, cin, k, k});
    b = ps.add(name + ".b", {cout});
    double kk = std::sqrt(1.0 / (cin * k * k));
    for (auto& v : ps.at(w).value) v = T(rng.uniform(-kk, kk));
  }
  void fwd(const ParamStore<T>& ps, const T* x, T* y, int h, int wd) const {
    ops::conv2d_fwd(x, ps.at(w).value.data(), ps.at(b).value.data(), y, cin, h, wd, cout, k,
                    pad);
  }
  void bwd(const ParamStore<T>& ps, const T* x, const T* gy, T* gx, GradBuf<T>& gb, int h,
           int wd) const {
    ops::conv2d_bwd(x, ps.at(w).value.data(), gy, gx, gb.data(w), gb.data(b), cin, h, wd, cout,
                    k, pad);
  }
};

// IMPALA block: conv(k3, same) -> max-pool(k3, stride 2) -> two residual
// units (ReLU -> conv -> ReLU -> conv plus skip).
template <typename T>
struct Impala1d {
  Conv1dLayer<T> conv_in, a1, a2, b1, b2;
  int cin = 0, cout = 0;
  int L = 0, Lp = 0;  // input / post-pool extents

  struct Ws {
    std::vector<T> c0, h0;  // conv out, pooled
    std::vector<int32_t> arg;
    std::vector<T> r1, c1, r2, c2, h1;  // residual unit 1
    std::vector<T> r3, c3, r4, c4, h2;  // residual unit 2
    std::vector<T> t0, t1;              // scratch gradients
  };

  void init(ParamStore<T>& ps, const std::string& name, int cin_, int cout_, int L_, Rng& rng) {
    cin = cin_;
    cout = cout_;
    L = L_;
    Lp = ops::maxpool_out_len(L, 3, 2, 1);
    conv_in.init(ps, name + ".conv", cin, cout, rng);
    a1.init(ps, name + ".res0.conv0", cout, cout, rng);
    a2.init(ps, name + ".res0.conv1", cout, cout, rng);
    b1.init(ps, name + ".res1.conv0", cout, cout, rng);
    b2.init(ps, name + ".res1.conv1", cout, cout, rng);
  }

  void make_ws(Ws& ws) const {
    size_t n = size_t(cout) * L, np = size_t(cout) * Lp;
    ws.c0.resize(n);
    ws.h0.resize(np);
    ws.arg.resize(np);
    for (auto* v : {&ws.r1, &ws.c1, &ws.r2, &ws.c2, &ws.h1, &ws.r3, &ws.c3, &ws.r4, &ws.c4,
                    &ws.h2, &ws.t0, &ws.t1}) {
      v->resize(np);
    }
  }

  const T* fwd(const ParamStore<T>& ps, const T* x, Ws& ws) const {
    int np = cout * Lp;
    conv_in.fwd(ps, x, ws.c0.data(), L);
    ops::maxpool1d_fwd(ws.c0.data(), ws.h0.data(), ws.arg.data(), cout, L, 3, 2, 1);
    ops::relu_fwd(ws.h0.data(), ws.r1.data(), np);
    a1.fwd(ps, ws.r1.data(), ws.c1.data(), Lp);
    ops::relu_fwd(ws.c1.data(), ws.r2.data(), np);
    a2.fwd(ps, ws.r2.data(), ws.c2.data(), Lp);
    for (int i = 0; i < np; ++i) ws.h1[i] = ws.h0[i] + ws.c2[i];
    ops::relu_fwd(ws.h1.data(), ws.r3.data(), np);
    b1.fwd(ps, ws.r3.data(), ws.c3.data(), Lp);
    ops::relu_fwd(ws.c3.data(), ws.r4.data(), np);
    b2.fwd(ps, ws.r4.data(), ws.c4.data(), Lp);
    for (int i = 0; i < np; ++i) ws.h2[i] = ws.h1[i] + ws.c4[i];
    return ws.h2.data();
  }

  // gout over h2; gx accumulates over the block input (may be null).
  void bwd(const ParamStore<T>& ps, const T* x, Ws& ws, const T* gout, T* gx,
           GradBuf<T>& gb) const {
    int np = cout * Lp;
    std::vector<T>& gh1 = ws.t0;
    std::vector<T>& tmp = ws.t1;
    std::copy(gout, gout + np, gh1.begin());  // skip path
    // residual unit 2
    std::fill(tmp.begin(), tmp.end(), T(0));
    b2.bwd(ps, ws.r4.data(), gout, tmp.data(), gb, Lp);  // tmp = g(r4)
    std::vector<T> gc3(np, T(0));
    ops::relu_bwd(ws.c3.data(), tmp.data(), gc3.data(), np);
    std::fill(tmp.begin(), tmp.end(), T(0));
    b1.bwd(ps, ws.r3.data(), gc3.data(), tmp.data(), gb, Lp);  // tmp = g(r3)
    ops::relu_bwd(ws.h1.data(), tmp.data(), gh1.data(), np);
    // residual unit 1
    std::vector<T> gh0(gh1.begin(), gh1.end());  // skip path
    std::fill(tmp.begin(), tmp.end(), T(0));
    a2.bwd(ps, ws.r2.data(), gh1.data(), tmp.data(), gb, Lp);  // tmp = g(r2)
    std::fill(gc3.begin(), gc3.end(), T(0));
    ops::relu_bwd(ws.c1.data(), tmp.data(), gc3.data(), np);  // gc3 = g(c1)
    std::fill(tmp.begin(), tmp.end(), T(0));
    a1.bwd(ps, ws.r1.data(), gc3.data(), tmp.data(), gb, Lp);  // tmp = g(r1)
    ops::relu_bwd(ws.h0.data(), tmp.data(), gh0.data(), np);
    // pool + entry conv
    std::vector<T> gc0(size_t(cout) * L, T(0));
    ops::pool_route_bwd(gh0.data(), ws.arg.data(), gc0.data(), cout, L, Lp);
    conv_in.bwd(ps, x, gc0.data(), gx, gb, L);
  }
};

template <typename T>
struct Impala2d {
  Conv2dLayer<T> conv_in, a1, a2, b1, b2;
  int cin = 0, cout = 0;
  int h = 0, w = 0, hp = 0, wp = 0;

  struct Ws {
    std::vector<T> c0, h0;
    std::vector<int32_t> arg;
    std::vector<T> r1, c1, r2, c2, h1;
    std::vector<T> r3, c3, r4, c4, h2;
    std::vector<T> t0, t1, t2;
  };

  void init(ParamStore<T>& ps, const std::string& name, int cin_, int cout_, int h_, int w_,
            Rng& rng) {
    cin = cin_;
    cout = cout_;
    h = h_;
    w = w_;
    hp = ops::maxpool_out_len(h, 3, 2, 1);
    wp = ops::maxpool_out_len(w, 3, 2, 1);
    conv_in.init(ps, name + ".conv", cin, cout, rng);
    a1.init(ps, name + ".res0.conv0", cout, cout, rng);
    a2.init(ps, name + ".res0.conv1", cout, cout, rng);
    b1.init(ps, name + ".res1.conv0", cout, cout, rng);
    b2.init(ps, name + ".res1.conv1", cout, cout, rng);
  }

  void make_ws(Ws& ws) const {
    size_t n = size_t(cout) * h * w, np = size_t(cout) * hp * wp;
    ws.c0.resize(n);
    ws.h0.resize(np);
    ws.arg.resize(np);
    for (auto* v : {&ws.r1, &ws.c1, &ws.r2, &ws.c2, &ws.h1, &ws.r3, &ws.c3, &ws.r4, &ws.c4,
                    &ws.h2, &ws.t0, &ws.t1, &ws.t2}) {
      v->resize(np);
    }
  }

  const T* fwd(const ParamStore<T>& ps, const T* x, Ws& ws) const {
    int np = cout * hp * wp;
    conv_in.fwd(ps, x, ws.c0.data(), h, w);
    ops::maxpool2d_fwd(ws.c0.data(), ws.h0.data(), ws.arg.data(), cout, h, w, 3, 2, 1);
    ops::relu_fwd(ws.h0.data(), ws.r1.data(), np);
    a1.fwd(ps, ws.r1.data(), ws.c1.data(), hp, wp);
    ops::relu_fwd(ws.c1.data(), ws.r2.data(), np);
    a2.fwd(ps, ws.r2.data(), ws.c2.data(), hp, wp);
    for (int i = 0; i < np; ++i) ws.h1[i] = ws.h0[i] + ws.c2[i];
    ops::relu_fwd(ws.h1.data(), ws.r3.data(), np);
    b1.fwd(ps, ws.r3.data(), ws.c3.data(), hp, wp);
    ops::relu_fwd(ws.c3.data(), ws.r4.data(), np);
    b2.fwd(ps, ws.r4.data(), ws.c4.data(), hp, wp);
    for (int i = 0; i < np; ++i) ws.h2[i] = ws.h1[i] + ws.c4[i];
    return ws.h2.data();
  }

  void bwd(const ParamStore<T>& ps, const T* x, Ws& ws, const T* gout, T* gx,
           GradBuf<T>& gb) const {
    int np = cout * hp * wp;
    std::vector<T>& gh1 = ws.t0;
    std::vector<T>& tmp = ws.t1;
    std::vector<T>& scratch = ws.t2;
    std::copy(gout, gout + np, gh1.begin());
    std::fill(tmp.begin(), tmp.end(), T(0));
    b2.bwd(ps, ws.r4.data(), gout, tmp.data(), gb, hp, wp);
    std::fill(scratch.begin(), scratch.end(), T(0));
    ops::relu_bwd(ws.c3.data(), tmp.data(), scratch.data(), np);
    std::fill(tmp.begin(), tmp.end(), T(0));
    b1.bwd(ps, ws.r3.data(), scratch.data(), tmp.data(), gb, hp, wp);
    ops::relu_bwd(ws.h1.data(), tmp.data(), gh1.data(), np);
    std::vector<T> gh0(gh1.begin(), gh1.end());
    std::fill(tmp.begin(), tmp.end(), T(0));
    a2.bwd(ps, ws.r2.data(), gh1.data(), tmp.data(), gb, hp, wp);
    std::fill(scratch.begin(), scratch.end(), T(0));
    ops::relu_bwd(ws.c1.data(), tmp.data(), scratch.data(), np);
    std::fill(tmp.begin(), tmp.end(), T(0));
    a1.bwd(ps, ws.r1.data(), scratch.data(), tmp.data(), gb, hp, wp);
    ops::relu_bwd(ws.h0.data(), tmp.data(), gh0.data(), np);
    std::vector<T> gc0(size_t(cout) * h * w, T(0));
    ops::pool_route_bwd(gh0.data(), ws.arg.data(), gc0.data(), cout, h * w, hp * wp);
    conv_in.bwd(ps, x, gc0.data(), gx, gb, h, w);
  }
};

}  // namespace detail

// Teacher trunk: lidar -> min-pool(10) -> 1D IMPALA(24) -> 1D IMPALA(16) ->
// flatten -> linear(256)+ReLU; proprio -> linear(96)+ReLU; concat ->
// linear(256)+ReLU -> head. The actor head is tanh(linear(3)); the critic is
// a separate network of identical trunk with a scalar head.
template <typename T>
struct TeacherTrunk {
  int n_scan = 0;
  int L0 = 0, L1 = 0, L2 = 0;  // post min-pool, post block extents
  int flat = 0;
  detail::Impala1d<T> block0, block1;
  detail::LinearLayer<T> lidar_fc, prop_fc, trunk_fc, head;

  struct Ws {
    std::vector<T> pooled;
    std::vector<int32_t> arg;
    typename detail::Impala1d<T>::Ws b0, b1;
    std::vector<T> z1, a1;      // lidar fc
    std::vector<T> z2, a2;      // proprio fc
    std::vector<T> cat, z3, a3; // trunk
    std::vector<T> out;
    // backward scratch
    std::vector<T> g3, gcat, g1, g2, gflat, gpool;
  };

  void init(ParamStore<T>& ps, const std::string& prefix, int n_scan_, int head_dim, Rng& rng,
            double head_scale) {
    n_scan = n_scan_;
    L0 = ops::pool_out_len(n_scan, 10, 10);
    block0.init(ps, prefix + ".block0", 1, 24, L0, rng);
    L1 = block0.Lp;
    block1.init(ps, prefix + ".block1", 24, 16, L1, rng);
    L2 = block1.Lp;
    flat = 16 * L2;
    lidar_fc.init(ps, prefix + ".lidar_fc", flat, 256, rng);
    prop_fc.init(ps, prefix + ".prop_fc", kProprioDim, 96, rng);
    trunk_fc.init(ps, prefix + ".trunk_fc", 256 + 96, 256, rng);
    head.init(ps, prefix + ".head", 256, head_dim, rng, head_scale);
  }

  void make_ws(Ws& ws) const {
    ws.pooled.resize(L0);
    ws.arg.resize(L0);
    block0.make_ws(ws.b0);
    block1.make_ws(ws.b1);
    ws.z1.resize(256);
    ws.a1.resize(256);
    ws.z2.resize(96);
    ws.a2.resize(96);
    ws.cat.resize(352);
    ws.z3.resize(256);
    ws.a3.resize(256);
    ws.out.resize(head.out);
    ws.g3.resize(256);
    ws.gcat.resize(352);
    ws.g1.resize(256);
    ws.g2.resize(96);
    ws.gflat.resize(flat);
    ws.gpool.resize(L0);
  }

  // Pre-activation head output in ws.out.
  void fwd(const ParamStore<T>& ps, const T* lidar, const T* proprio, Ws& ws) const {
    ops::minpool1d_fwd(lidar, ws.pooled.data(), ws.arg.data(), 1, n_scan, 10, 10);
    const T* h0 = block0.fwd(ps, ws.pooled.data(), ws.b0);
    const T* h1 = block1.fwd(ps, h0, ws.b1);
    lidar_fc.fwd(ps, h1, ws.z1.data());
    ops::relu_fwd(ws.z1.data(), ws.a1.data(), 256);
    prop_fc.fwd(ps, proprio, ws.z2.data());
    ops::relu_fwd(ws.z2.data(), ws.a2.data(), 96);
    std::copy(ws.a1.begin(), ws.a1.end(), ws.cat.begin());
    std::copy(ws.a2.begin(), ws.a2.end(), ws.cat.begin() + 256);
    trunk_fc.fwd(ps, ws.cat.data(), ws.z3.data());
    ops::relu_fwd(ws.z3.data(), ws.a3.data(), 256);
    head.fwd(ps, ws.a3.data(), ws.out.data());
  }

  // ghead over the pre-activation head output.
  void bwd(const ParamStore<T>& ps, const T* proprio, Ws& ws, const T* ghead,
           GradBuf<T>& gb) const {
    std::fill(ws.g3.begin(), ws.g3.end(), T(0));
    head.bwd(ps, ws.a3.data(), ghead, ws.g3.data(), gb);
    std::fill(ws.gcat.begin(), ws.gcat.end(), T(0));
    std::vector<T> gz3(256, T(0));
    ops::relu_bwd(ws.z3.data(), ws.g3.data(), gz3.data(), 256);
    trunk_fc.bwd(ps, ws.cat.data(), gz3.data(), ws.gcat.data(), gb);
    std::fill(ws.g1.begin(), ws.g1.end(), T(0));
    ops::relu_bwd(ws.z1.data(), ws.gcat.data(), ws.g1.data(), 256);
    std::fill(ws.g2.begin(), ws.g2.end(), T(0));
    ops::relu_bwd(ws.z2.data(), ws.gcat.data() + 256, ws.g2.data(), 96);
    prop_fc.bwd(ps, proprio, ws.g2.data(), nullptr, gb);
    std::fill(ws.gflat.begin(), ws.gflat.end(), T(0));
    lidar_fc.bwd(ps, ws.b1.h2.data(), ws.g1.data(), ws.gflat.data(), gb);
    std::vector<T> gh0(size_t(24) * L1, T(0));
    block1.bwd(ps, ws.b0.h2.data(), ws.b1, ws.gflat.data(), gh0.data(), gb);
    std::fill(ws.gpool.begin(), ws.gpool.end(), T(0));
    block0.bwd(ps, ws.pooled.data(), ws.b0, gh0.data(), ws.gpool.data(), gb);
    // Gradient stops at the observation.
  }
};

// Student: depth (4 channels) -> min-pool(5x5) -> 2D IMPALA [16,32,32] ->
// ReLU -> flatten -> linear(256) -> concat with proprio linear(96)+ReLU ->
// linear(256)+ReLU -> tanh(linear(3)).
template <typename T>
struct StudentNet {
  int H = 0, W = 0;
  int h1 = 0, w1 = 0;
  detail::Impala2d<T> block0, block1, block2;
  detail::LinearLayer<T> depth_fc, prop_fc, trunk_fc, head;
  int flat = 0;

  struct Ws {
    std::vector<T> pooled;
    std::vector<int32_t> arg;
    typename detail::Impala2d<T>::Ws b0, b1, b2;
    std::vector<T> rflat;        // relu over last block output
    std::vector<T> z1;           // depth fc (no relu)
    std::vector<T> z2, a2;       // proprio fc
    std::vector<T> cat, z3, a3;  // trunk
    std::vector<T> z4, action;   // head, tanh
    std::vector<T> g3, gcat, g1, g2, gr, gflat;
  };

  void init(ParamStore<T>& ps, int H_, int W_, Rng& rng) {
    H = H_;
    W = W_;
    h1 = ops::pool_out_len(H, 5, 5);
    w1 = ops::pool_out_len(W, 5, 5);
    block0.init(ps, "student.block0", 4, 16, h1, w1, rng);
    block1.init(ps, "student.block1", 16, 32, block0.hp, block0.wp, rng);
    block2.init(ps, "student.block2", 32, 32, block1.hp, block1.wp, rng);
    flat = 32 * block2.hp * block2.wp;
    depth_fc.init(ps, "student.depth_fc", flat, 256, rng);
    prop_fc.init(ps, "student.prop_fc", kProprioDim, 96, rng);
    trunk_fc.init(ps, "student.trunk_fc", 256 + 96, 256, rng);
    head.init(ps, "student.head", 256, 3, rng, 0.01);
  }

  void make_ws(Ws& ws) const {
    ws.pooled.resize(size_t(4) * h1 * w1);
    ws.arg.resize(size_t(4) * h1 * w1);
    block0.make_ws(ws.b0);
    block1.make_ws(ws.b1);
    block2.make_ws(ws.b2);
    ws.rflat.resize(flat);
    ws.z1.resize(256);
    ws.z2.resize(96);
    ws.a2.resize(96);
    ws.cat.resize(352);
    ws.z3.resize(256);
    ws.a3.resize(256);
    ws.z4.resize(3);
    ws.action.resize(3);
    ws.g3.resize(256);
    ws.gcat.resize(352);
    ws.g1.resize(256);
    ws.g2.resize(96);
    ws.gr.resize(flat);
    ws.gflat.resize(flat);
  }

  // depth: 4*H*W normalized to [0,1]; returns tanh action in ws.action.
  void fwd(const ParamStore<T>& ps, const T* depth, const T* proprio, Ws& ws) const {
    ops::minpool2d_fwd(depth, ws.pooled.data(), ws.arg.data(), 4, H, W, 5, 5);
    const T* o0 = block0.fwd(ps, ws.pooled.data(), ws.b0);
    const T* o1 = block1.fwd(ps, o0, ws.b1);
    const T* o2 = block2.fwd(ps, o1, ws.b2);
    ops::relu_fwd(o2, ws.rflat.data(), flat);
    depth_fc.fwd(ps, ws.rflat.data(), ws.z1.data());
    prop_fc.fwd(ps, proprio, ws.z2.data());
    ops::relu_fwd(ws.z2.data(), ws.a2.data(), 96);
    std::copy(ws.z1.begin(), ws.z1.end(), ws.cat.begin());
    std::copy(ws.a2.begin(), ws.a2.end(), ws.cat.begin() + 256);
    trunk_fc.fwd(ps, ws.cat.data(), ws.z3.data());
    ops::relu_fwd(ws.z3.data(), ws.a3.data(), 256);
    head.fwd(ps, ws.a3.data(), ws.z4.data());
    ops::tanh_fwd(ws.z4.data(), ws.action.data(), 3);
  }

  // gaction over the tanh output.
  void bwd(const ParamStore<T>& ps, const T* proprio, Ws& ws, const T* gaction,
           GradBuf<T>& gb) const {
    T gz4[3] = {0, 0, 0};
    ops::tanh_bwd(ws.action.data(), gaction, gz4, 3);
    std::fill(ws.g3.begin(), ws.g3.end(), T(0));
    head.bwd(ps, ws.a3.data(), gz4, ws.g3.data(), gb);
    std::vector<T> gz3(256, T(0));
    ops::relu_bwd(ws.z3.data(), ws.g3.data(), gz3.data(), 256);
    std::fill(ws.gcat.begin(), ws.gcat.end(), T(0));
    trunk_fc.bwd(ps, ws.cat.data(), gz3.data(), ws.gcat.data(), gb);
    std::fill(ws.g2.begin(), ws.g2.end(), T(0));
    ops::relu_bwd(ws.z2.data(), ws.gcat.data() + 256, ws.g2.data(), 96);
    prop_fc.bwd(ps, proprio, ws.g2.data(), nullptr, gb);
    std::fill(ws.gr.begin(), ws.gr.end(), T(0));
    depth_fc.bwd(ps, ws.rflat.data(), ws.gcat.data(), ws.gr.data(), gb);
    std::fill(ws.gflat.begin(), ws.gflat.end(), T(0));
    ops::relu_bwd(ws.b2.h2.data(), ws.gr.data(), ws.gflat.data(), flat);
    std::vector<T> g1(size_t(32) * block1.hp * block1.wp, T(0));
    block2.bwd(ps, ws.b1.h2.data(), ws.b2, ws.gflat.data(), g1.data(), gb);
    std::vector<T> g0(size_t(16) * block0.hp * block0.wp, T(0));
    block1.bwd(ps, ws.b0.h2.data(), ws.b1, g1.data(), g0.data(), gb);
    block0.bwd(ps, ws.pooled.data(), ws.b0, g0.data(), nullptr, gb);
  }
};

// Actor-critic teacher: separate actor and critic networks plus a learned
// state-independent log_std.
template <typename T>
struct TeacherNet {
  TeacherTrunk<T> actor, critic;
  int log_std_idx = -1;

  struct Ws {
    typename TeacherTrunk<T>::Ws a, c;
    std::array<T, 3> mean;
  };

  void init(ParamStore<T>& ps, int n_scan, Rng& rng) {
    actor.init(ps, "actor", n_scan, 3, rng, 0.01);
    critic.init(ps, "critic", n_scan, 1, rng, 1.0);
    log_std_idx = ps.add("log_std", {3});
    for (auto& v : ps.at(log_std_idx).value) v = T(kLogStdInit);
  }

  void make_ws(Ws& ws) const {
    actor.make_ws(ws.a);
    critic.make_ws(ws.c);
  }

  ActionDistribution actor_fwd(const ParamStore<T>& ps, const T* lidar, const T* proprio,
                               Ws& ws) const {
    actor.fwd(ps, lidar, proprio, ws.a);
    ActionDistribution dist;
    for (int i = 0; i < 3; ++i) {
      ws.mean[i] = std::tanh(ws.a.out[i]);
      dist.mean[i] = double(ws.mean[i]);
      dist.log_std[i] =
          std::clamp(double(ps.at(log_std_idx).value[i]), kLogStdMin, kLogStdMax);
    }
    return dist;
  }

  double critic_fwd(const ParamStore<T>& ps, const T* lidar, const T* proprio, Ws& ws) const {
    critic.fwd(ps, lidar, proprio, ws.c);
    return double(ws.c.out[0]);
  }

  // gmean over the tanh-ed action mean; glogstd added directly.
  void actor_bwd(const ParamStore<T>& ps, const T* proprio, Ws& ws, const T* gmean,
                 const T* glogstd, GradBuf<T>& gb) const {
    T ghead[3];
    for (int i = 0; i < 3; ++i) ghead[i] = gmean[i] * (T(1) - ws.mean[i] * ws.mean[i]);
    actor.bwd(ps, proprio, ws.a, ghead, gb);
    if (glogstd) {
      for (int i = 0; i < 3; ++i) gb.data(log_std_idx)[i] += glogstd[i];
    }
  }

  void critic_bwd(const ParamStore<T>& ps, const T* proprio, Ws& ws, T gvalue,
                  GradBuf<T>& gb) const {
    T g[1] = {gvalue};
    critic.bwd(ps, proprio, ws.c, g, gb);
  }
};

}  // namespace nav
