#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "nav/nets.hpp"
#include "nav/ops.hpp"
#include "test_util.hpp"

using namespace nav;
using testutil::central_diff;
using testutil::random_vec;
using testutil::rel_err;

namespace {
constexpr double kPrimTol = 1e-6;
constexpr double kBlockTol = 1e-5;
}  // namespace

TEST_CASE("linear forward/backward gradcheck") {
  Rng rng(1);
  const int rows = 2, in = 4, out = 3;
  auto x = random_vec(rows * in, rng), w = random_vec(in * out, rng), b = random_vec(out, rng);
  auto gy = random_vec(rows * out, rng);
  auto loss = [&]() {
    std::vector<double> y(rows * out);
    ops::linear_fwd(x.data(), w.data(), b.data(), y.data(), rows, in, out);
    double l = 0;
    for (size_t i = 0; i < y.size(); ++i) l += gy[i] * y[i];
    return l;
  };
  std::vector<double> gx(x.size(), 0), gw(w.size(), 0), gb(b.size(), 0);
  ops::linear_bwd(x.data(), w.data(), gy.data(), gx.data(), gw.data(), gb.data(), rows, in, out);
  for (size_t i = 0; i < x.size(); ++i) CHECK(rel_err(gx[i], central_diff(x, i, loss)) < kPrimTol);
  for (size_t i = 0; i < w.size(); ++i) CHECK(rel_err(gw[i], central_diff(w, i, loss)) < kPrimTol);
  for (size_t i = 0; i < b.size(); ++i) CHECK(rel_err(gb[i], central_diff(b, i, loss)) < kPrimTol);
}

TEST_CASE("conv1d matches padded brute-force reference exactly") {
  Rng rng(2);
  const int cin = 2, L = 9, cout = 3, k = 3, pad = 1;
  auto x = random_vec(cin * L, rng), w = random_vec(cout * cin * k, rng),
       b = random_vec(cout, rng);
  std::vector<double> y(cout * L);
  ops::conv1d_fwd(x.data(), w.data(), b.data(), y.data(), cin, L, cout, k, pad);
  // Reference: explicit zero-padded input, same accumulation order.
  std::vector<double> xp(cin * (L + 2 * pad), 0.0);
  for (int c = 0; c < cin; ++c)
    for (int i = 0; i < L; ++i) xp[c * (L + 2 * pad) + pad + i] = x[c * L + i];
  for (int co = 0; co < cout; ++co) {
    for (int p = 0; p < L; ++p) {
      double acc = b[co];
      for (int ci = 0; ci < cin; ++ci) {
        double part = 0;
        for (int j = 0; j < k; ++j) {
          if (p + j < pad || p + j >= L + pad) continue;  // zero-padded cells
          part += w[(co * cin + ci) * k + j] * xp[ci * (L + 2 * pad) + p + j];
        }
        acc += part;
      }
      CHECK(y[co * L + p] == acc);
    }
  }
}

TEST_CASE("conv1d gradcheck") {
  Rng rng(3);
  const int cin = 2, L = 7, cout = 3, k = 3, pad = 1;
  auto x = random_vec(cin * L, rng), w = random_vec(cout * cin * k, rng),
       b = random_vec(cout, rng);
  auto gy = random_vec(cout * L, rng);
  auto loss = [&]() {
    std::vector<double> y(cout * L);
    ops::conv1d_fwd(x.data(), w.data(), b.data(), y.data(), cin, L, cout, k, pad);
    double l = 0;
    for (size_t i = 0; i < y.size(); ++i) l += gy[i] * y[i];
    return l;
  };
  std::vector<double> gx(x.size(), 0), gw(w.size(), 0), gb(b.size(), 0);
  ops::conv1d_bwd(x.data(), w.data(), gy.data(), gx.data(), gw.data(), gb.data(), cin, L, cout,
                  k, pad);
  for (size_t i = 0; i < x.size(); ++i) CHECK(rel_err(gx[i], central_diff(x, i, loss)) < kPrimTol);
  for (size_t i = 0; i < w.size(); ++i) CHECK(rel_err(gw[i], central_diff(w, i, loss)) < kPrimTol);
  for (size_t i = 0; i < b.size(); ++i) CHECK(rel_err(gb[i], central_diff(b, i, loss)) < kPrimTol);
}

TEST_CASE("conv2d gradcheck") {
  Rng rng(4);
  const int cin = 2, h = 5, wd = 6, cout = 3, k = 3, pad = 1;
  auto x = random_vec(cin * h * wd, rng), w = random_vec(cout * cin * k * k, rng),
       b = random_vec(cout, rng);
  auto gy = random_vec(cout * h * wd, rng);
  auto loss = [&]() {
    std::vector<double> y(cout * h * wd);
    ops::conv2d_fwd(x.data(), w.data(), b.data(), y.data(), cin, h, wd, cout, k, pad);
    double l = 0;
    for (size_t i = 0; i < y.size(); ++i) l += gy[i] * y[i];
    return l;
  };
  std::vector<double> gx(x.size(), 0), gw(w.size(), 0), gb(b.size(), 0);
  ops::conv2d_bwd(x.data(), w.data(), gy.data(), gx.data(), gw.data(), gb.data(), cin, h, wd,
                  cout, k, pad);
  for (size_t i = 0; i < x.size(); ++i) CHECK(rel_err(gx[i], central_diff(x, i, loss)) < kPrimTol);
  for (size_t i = 0; i < w.size(); ++i) CHECK(rel_err(gw[i], central_diff(w, i, loss)) < kPrimTol);
  for (size_t i = 0; i < b.size(); ++i) CHECK(rel_err(gb[i], central_diff(b, i, loss)) < kPrimTol);
}

TEST_CASE("relu and tanh gradcheck away from the kink") {
  Rng rng(5);
  const int n = 32;
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) {
    x[i] = rng.uniform(0.1, 1.0) * (rng.bernoulli(0.5) ? 1.0 : -1.0);
  }
  auto gy = random_vec(n, rng);
  {
    auto loss = [&]() {
      std::vector<double> y(n);
      ops::relu_fwd(x.data(), y.data(), n);
      double l = 0;
      for (int i = 0; i < n; ++i) l += gy[i] * y[i];
      return l;
    };
    std::vector<double> gx(n, 0);
    ops::relu_bwd(x.data(), gy.data(), gx.data(), n);
    for (int i = 0; i < n; ++i) CHECK(rel_err(gx[i], central_diff(x, size_t(i), loss)) < kPrimTol);
  }
  {
    auto loss = [&]() {
      std::vector<double> y(n);
      ops::tanh_fwd(x.data(), y.data(), n);
      double l = 0;
      for (int i = 0; i < n; ++i) l += gy[i] * y[i];
      return l;
    };
    std::vector<double> y(n);
    ops::tanh_fwd(x.data(), y.data(), n);
    std::vector<double> gx(n, 0);
    ops::tanh_bwd(y.data(), gy.data(), gx.data(), n);
    for (int i = 0; i < n; ++i) CHECK(rel_err(gx[i], central_diff(x, size_t(i), loss)) < kPrimTol);
  }
}

TEST_CASE("min-pool matches brute-force reference and routes to first argmin") {
  Rng rng(6);
  const int C = 3, L = 17, window = 5, stride = 5;
  auto x = random_vec(C * L, rng);
  int Lo = ops::pool_out_len(L, window, stride);
  CHECK(Lo == 4);  // clamped tail window
  std::vector<double> y(C * Lo);
  std::vector<int32_t> arg(C * Lo);
  ops::minpool1d_fwd(x.data(), y.data(), arg.data(), C, L, window, stride);
  for (int c = 0; c < C; ++c) {
    for (int p = 0; p < Lo; ++p) {
      double best = std::numeric_limits<double>::infinity();
      for (int i = std::min(p * stride, L - 1); i < std::min(p * stride + window, L); ++i) {
        best = std::min(best, x[c * L + i]);
      }
      CHECK(y[c * Lo + p] == best);
    }
  }
  // Tie: first index wins.
  std::vector<double> tie = {2.0, 1.0, 1.0, 3.0, 1.0};
  std::vector<double> ty(1);
  std::vector<int32_t> targ(1);
  ops::minpool1d_fwd(tie.data(), ty.data(), targ.data(), 1, 5, 5, 5);
  CHECK(targ[0] == 1);
  // Routing gradcheck.
  auto gy = random_vec(C * Lo, rng);
  auto loss = [&]() {
    std::vector<double> yy(C * Lo);
    std::vector<int32_t> aa(C * Lo);
    ops::minpool1d_fwd(x.data(), yy.data(), aa.data(), C, L, window, stride);
    double l = 0;
    for (size_t i = 0; i < yy.size(); ++i) l += gy[i] * yy[i];
    return l;
  };
  std::vector<double> gx(C * L, 0);
  ops::minpool1d_bwd(gy.data(), arg.data(), gx.data(), C, L, Lo);
  for (size_t i = 0; i < x.size(); ++i) CHECK(rel_err(gx[i], central_diff(x, i, loss)) < kPrimTol);
}

TEST_CASE("max-pool kernel-3 stride-2 pad-1 output length and gradcheck") {
  CHECK(ops::maxpool_out_len(36, 3, 2, 1) == 18);
  CHECK(ops::maxpool_out_len(9, 3, 2, 1) == 5);
  CHECK(ops::maxpool_out_len(5, 3, 2, 1) == 3);
  Rng rng(7);
  const int C = 2, L = 9;
  auto x = random_vec(C * L, rng);
  int Lo = ops::maxpool_out_len(L, 3, 2, 1);
  std::vector<double> y(C * Lo);
  std::vector<int32_t> arg(C * Lo);
  ops::maxpool1d_fwd(x.data(), y.data(), arg.data(), C, L, 3, 2, 1);
  for (int c = 0; c < C; ++c) {
    for (int p = 0; p < Lo; ++p) {
      double best = -std::numeric_limits<double>::infinity();
      for (int i = std::max(0, p * 2 - 1); i < std::min(L, p * 2 - 1 + 3); ++i) {
        best = std::max(best, x[c * L + i]);
      }
      CHECK(y[c * Lo + p] == best);
    }
  }
  auto gy = random_vec(C * Lo, rng);
  auto loss = [&]() {
    std::vector<double> yy(C * Lo);
    std::vector<int32_t> aa(C * Lo);
    ops::maxpool1d_fwd(x.data(), yy.data(), aa.data(), C, L, 3, 2, 1);
    double l = 0;
    for (size_t i = 0; i < yy.size(); ++i) l += gy[i] * yy[i];
    return l;
  };
  std::vector<double> gx(C * L, 0);
  ops::pool_route_bwd(gy.data(), arg.data(), gx.data(), C, L, Lo);
  for (size_t i = 0; i < x.size(); ++i) CHECK(rel_err(gx[i], central_diff(x, i, loss)) < kPrimTol);
}

TEST_CASE("pool output length formula") {
  CHECK(ops::pool_out_len(3000, 10, 10) == 300);
  CHECK(ops::pool_out_len(360, 10, 10) == 36);
  CHECK(ops::pool_out_len(96, 5, 5) == 20);
  CHECK(ops::pool_out_len(60, 5, 5) == 12);
  CHECK(ops::pool_out_len(4, 10, 10) == 1);
}

TEST_CASE("backward accumulation is linear in the output gradient") {
  Rng rng(8);
  const int cin = 2, L = 6, cout = 2, k = 3, pad = 1;
  auto x = random_vec(cin * L, rng), w = random_vec(cout * cin * k, rng);
  auto gy = random_vec(cout * L, rng);
  std::vector<double> g1(x.size(), 0), g2(x.size(), 0);
  ops::conv1d_bwd<double>(x.data(), w.data(), gy.data(), g1.data(), nullptr, nullptr, cin, L,
                          cout, k, pad);
  std::vector<double> gy2(gy);
  for (auto& g : gy2) g *= 2.5;
  ops::conv1d_bwd<double>(x.data(), w.data(), gy2.data(), g2.data(), nullptr, nullptr, cin, L,
                          cout, k, pad);
  for (size_t i = 0; i < x.size(); ++i) CHECK(rel_err(g2[i], 2.5 * g1[i]) < 1e-12);
}

namespace {

// Samples a subset of parameter coordinates for finite differencing (full
// sweeps over fc weights would dominate runtime).
template <typename Check>
void gradcheck_params(ParamStore<double>& store, GradBuf<double>& gb,
                      const std::function<double()>& loss, Rng& rng, int samples_per_param,
                      Check check) {
  for (int pi = 0; pi < store.count(); ++pi) {
    auto& p = store.at(pi);
    int n = int(p.value.size());
    for (int s = 0; s < std::min(samples_per_param, n); ++s) {
      int i = n <= samples_per_param ? s : int(rng.uniform_int(0, n - 1));
      double num = central_diff(p.value, size_t(i), loss);
      check(p.name, gb.data(pi)[i], num);
    }
  }
}

}  // namespace

TEST_CASE("IMPALA 1D block composed gradcheck") {
  Rng rng(9);
  ParamStore<double> store;
  detail::Impala1d<double> block;
  Rng init(10);
  block.init(store, "blk", 2, 4, 9, init);
  typename detail::Impala1d<double>::Ws ws;
  block.make_ws(ws);
  auto x = random_vec(size_t(2) * 9, rng);
  int np = 4 * block.Lp;
  auto gy = random_vec(np, rng);
  auto loss = [&]() {
    const double* out = block.fwd(store, x.data(), ws);
    double l = 0;
    for (int i = 0; i < np; ++i) l += gy[i] * out[i];
    return l;
  };
  loss();
  GradBuf<double> gb(store);
  std::vector<double> gx(x.size(), 0);
  block.bwd(store, x.data(), ws, gy.data(), gx.data(), gb);
  for (size_t i = 0; i < x.size(); ++i) {
    CHECK(rel_err(gx[i], central_diff(x, i, loss)) < kBlockTol);
  }
  gradcheck_params(store, gb, loss, rng, 8, [](const std::string& name, double a, double b) {
    INFO("param ", name);
    CHECK(rel_err(a, b) < kBlockTol);
  });
}

TEST_CASE("IMPALA 2D block composed gradcheck") {
  Rng rng(11);
  ParamStore<double> store;
  detail::Impala2d<double> block;
  Rng init(12);
  block.init(store, "blk", 2, 3, 5, 6, init);
  typename detail::Impala2d<double>::Ws ws;
  block.make_ws(ws);
  auto x = random_vec(size_t(2) * 5 * 6, rng);
  int np = 3 * block.hp * block.wp;
  auto gy = random_vec(np, rng);
  auto loss = [&]() {
    const double* out = block.fwd(store, x.data(), ws);
    double l = 0;
    for (int i = 0; i < np; ++i) l += gy[i] * out[i];
    return l;
  };
  loss();
  GradBuf<double> gb(store);
  std::vector<double> gx(x.size(), 0);
  block.bwd(store, x.data(), ws, gy.data(), gx.data(), gb);
  for (size_t i = 0; i < x.size(); ++i) {
    CHECK(rel_err(gx[i], central_diff(x, i, loss)) < kBlockTol);
  }
  gradcheck_params(store, gb, loss, rng, 8, [](const std::string& name, double a, double b) {
    INFO("param ", name);
    CHECK(rel_err(a, b) < kBlockTol);
  });
}

TEST_CASE("teacher trunk composed gradcheck (actor head path)") {
  Rng rng(13);
  ParamStore<double> store;
  TeacherNet<double> net;
  Rng init(14);
  net.init(store, 40, init);
  typename TeacherNet<double>::Ws ws;
  net.make_ws(ws);
  auto lidar = random_vec(40, rng, 0.05, 1.0);
  auto prop = random_vec(kProprioDim, rng);
  std::vector<double> gm = random_vec(3, rng);
  auto loss = [&]() {
    ActionDistribution d = net.actor_fwd(store, lidar.data(), prop.data(), ws);
    return gm[0] * d.mean[0] + gm[1] * d.mean[1] + gm[2] * d.mean[2];
  };
  loss();
  GradBuf<double> gb(store);
  double gmean[3] = {gm[0], gm[1], gm[2]};
  net.actor_bwd(store, prop.data(), ws, gmean, nullptr, gb);
  gradcheck_params(store, gb, loss, rng, 6, [&](const std::string& name, double a, double b) {
    if (name.rfind("critic", 0) == 0 || name == "log_std") {
      CHECK(a == 0.0);  // actor path must not touch critic params
      return;
    }
    INFO("param ", name);
    CHECK(rel_err(a, b) < kBlockTol);
  });
}

TEST_CASE("critic head composed gradcheck") {
  Rng rng(15);
  ParamStore<double> store;
  TeacherNet<double> net;
  Rng init(16);
  net.init(store, 40, init);
  typename TeacherNet<double>::Ws ws;
  net.make_ws(ws);
  auto lidar = random_vec(40, rng, 0.05, 1.0);
  auto prop = random_vec(kProprioDim, rng);
  auto loss = [&]() { return net.critic_fwd(store, lidar.data(), prop.data(), ws); };
  loss();
  GradBuf<double> gb(store);
  net.critic_bwd(store, prop.data(), ws, 1.0, gb);
  gradcheck_params(store, gb, loss, rng, 6, [&](const std::string& name, double a, double b) {
    if (name.rfind("actor", 0) == 0 || name == "log_std") {
      CHECK(a == 0.0);
      return;
    }
    INFO("param ", name);
    CHECK(rel_err(a, b) < kBlockTol);
  });
}

TEST_CASE("student network composed gradcheck") {
  Rng rng(17);
  ParamStore<double> store;
  StudentNet<double> net;
  Rng init(18);
  net.init(store, 20, 15, init);
  typename StudentNet<double>::Ws ws;
  net.make_ws(ws);
  auto depth = random_vec(size_t(4) * 20 * 15, rng, 0.01, 1.0);
  auto prop = random_vec(kProprioDim, rng);
  std::vector<double> ga = random_vec(3, rng);
  auto loss = [&]() {
    net.fwd(store, depth.data(), prop.data(), ws);
    return ga[0] * ws.action[0] + ga[1] * ws.action[1] + ga[2] * ws.action[2];
  };
  loss();
  GradBuf<double> gb(store);
  double gaction[3] = {ga[0], ga[1], ga[2]};
  net.bwd(store, prop.data(), ws, gaction, gb);
  gradcheck_params(store, gb, loss, rng, 6, [](const std::string& name, double a, double b) {
    INFO("param ", name);
    CHECK(rel_err(a, b) < kBlockTol);
  });
}

TEST_CASE("adam step matches a scalar reference") {
  ParamStore<double> store;
  int idx = store.add("p", {2});
  store.at(idx).value = {1.0, -2.0};
  store.at(idx).grad = {0.5, -0.25};
  store.adam_step(1e-2);
  // First step: m_hat = g, v_hat = g^2 -> update = lr * g / (|g| + eps).
  CHECK(store.at(idx).value[0] == doctest::Approx(1.0 - 1e-2 * (0.5 / (0.5 + 1e-8))).epsilon(1e-10));
  CHECK(store.at(idx).value[1] == doctest::Approx(-2.0 + 1e-2 * (0.25 / (0.25 + 1e-8))).epsilon(1e-10));
  CHECK(store.at(idx).grad[0] == 0.0);  // gradients cleared by the step
}
