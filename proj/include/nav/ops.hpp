#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace nav::ops {

// Raw-pointer kernels for the fixed layer set the policies need. All
// backward functions accumulate (+=) into the given gradient buffers.
// Layouts: linear x[rows,in] w[in,out]; conv1d x[cin,L] w[cout,cin,k];
// conv2d x[cin,h,w] w[cout,cin,k,k].

template <typename T>
void linear_fwd(const T* x, const T* w, const T* b, T* y, int rows, int in, int out) {
  for (int r = 0; r < rows; ++r) {
    const T* xr = x + size_t(r) * in;
    T* yr = y + size_t(r) * out;
    for (int o = 0; o < out; ++o) yr[o] = b[o];
    for (int i = 0; i < in; ++i) {
      T xi = xr[i];
      const T* wi = w + size_t(i) * out;
      for (int o = 0; o < out; ++o) yr[o] += xi * wi[o];
    }
  }
}

template <typename T>
void linear_bwd(const T* x, const T* w, const T* gy, T* gx, T* gw, T* gb, int rows, int in,
                int out) {
  for (int r = 0; r < rows; ++r) {
    const T* xr = x + size_t(r) * in;
    const T* gyr = gy + size_t(r) * out;
    if (gb) {
      for (int o = 0; o < out; ++o) gb[o] += gyr[o];
    }
    for (int i = 0; i < in; ++i) {
      const T* wi = w + size_t(i) * out;
      T* gwi = gw ? gw + size_t(i) * out : nullptr;
      T acc = 0;
      T xi = xr[i];
      for (int o = 0; o < out; ++o) {
        acc += wi[o] * gyr[o];
        if (gwi) gwi[o] += xi * gyr[o];
      }
      if (gx) gx[size_t(r) * in + i] += acc;
    }
  }
}

inline int conv_out_len(int n, int k, int pad) { return n + 2 * pad - k + 1; }

template <typename T>
void conv1d_fwd(const T* x, const T* w, const T* b, T* y, int cin, int L, int cout, int k,
                int pad) {
  int Lo = conv_out_len(L, k, pad);
  for (int co = 0; co < cout; ++co) {
    T* yo = y + size_t(co) * Lo;
    for (int p = 0; p < Lo; ++p) yo[p] = b ? b[co] : T(0);
    for (int ci = 0; ci < cin; ++ci) {
      const T* xi = x + size_t(ci) * L;
      const T* wk = w + (size_t(co) * cin + ci) * k;
      for (int p = 0; p < Lo; ++p) {
        T acc = 0;
        int base = p - pad;
        int j0 = std::max(0, -base), j1 = std::min(k, L - base);
        for (int j = j0; j < j1; ++j) acc += wk[j] * xi[base + j];
        yo[p] += acc;
      }
    }
  }
}

template <typename T>
void conv1d_bwd(const T* x, const T* w, const T* gy, T* gx, T* gw, T* gb, int cin, int L,
                int cout, int k, int pad) {
  int Lo = conv_out_len(L, k, pad);
  for (int co = 0; co < cout; ++co) {
    const T* gyo = gy + size_t(co) * Lo;
    if (gb) {
      T acc = 0;
      for (int p = 0; p < Lo; ++p) acc += gyo[p];
      gb[co] += acc;
    }
    for (int ci = 0; ci < cin; ++ci) {
      const T* xi = x + size_t(ci) * L;
      T* gxi = gx ? gx + size_t(ci) * L : nullptr;
      const T* wk = w + (size_t(co) * cin + ci) * k;
      T* gwk = gw ? gw + (size_t(co) * cin + ci) * k : nullptr;
      for (int p = 0; p < Lo; ++p) {
        T g = gyo[p];
        int base = p - pad;
        int j0 = std::max(0, -base), j1 = std::min(k, L - base);
        for (int j = j0; j < j1; ++j) {
          if (gwk) gwk[j] += g * xi[base + j];
          if (gxi) gxi[base + j] += g * wk[j];
        }
      }
    }
  }
}

inline int conv2d_out(int n, int k, int pad) { return n + 2 * pad - k + 1; }

template <typename T>
void conv2d_fwd(const T* x, const T* w, const T* b, T* y, int cin, int h, int wd, int cout,
                int k, int pad) {
  int ho = conv2d_out(h, k, pad), wo = conv2d_out(wd, k, pad);
  for (int co = 0; co < cout; ++co) {
    T* yo = y + size_t(co) * ho * wo;
    T bias = b ? b[co] : T(0);
    for (int i = 0; i < ho * wo; ++i) yo[i] = bias;
    for (int ci = 0; ci < cin; ++ci) {
      const T* xi = x + size_t(ci) * h * wd;
      const T* wk = w + (size_t(co) * cin + ci) * k * k;
      for (int r = 0; r < ho; ++r) {
        int rb = r - pad;
        int i0 = std::max(0, -rb), i1 = std::min(k, h - rb);
        T* yrow = yo + size_t(r) * wo;
        for (int i = i0; i < i1; ++i) {
          const T* xrow = xi + size_t(rb + i) * wd;
          const T* wrow = wk + size_t(i) * k;
          for (int c = 0; c < wo; ++c) {
            int cb = c - pad;
            int j0 = std::max(0, -cb), j1 = std::min(k, wd - cb);
            T acc = 0;
            for (int j = j0; j < j1; ++j) acc += wrow[j] * xrow[cb + j];
            yrow[c] += acc;
          }
        }
      }
    }
  }
}

template <typename T>
void conv2d_bwd(const T* x, const T* w, const T* gy, T* gx, T* gw, T* gb, int cin, int h,
                int wd, int cout, int k, int pad) {
  int ho = conv2d_out(h, k, pad), wo = conv2d_out(wd, k, pad);
  for (int co = 0; co < cout; ++co) {
    const T* gyo = gy + size_t(co) * ho * wo;
    if (gb) {
      T acc = 0;
      for (int i = 0; i < ho * wo; ++i) acc += gyo[i];
      gb[co] += acc;
    }
    for (int ci = 0; ci < cin; ++ci) {
      const T* xi = x + size_t(ci) * h * wd;
      T* gxi = gx ? gx + size_t(ci) * h * wd : nullptr;
      const T* wk = w + (size_t(co) * cin + ci) * k * k;
      T* gwk = gw ? gw + (size_t(co) * cin + ci) * k * k : nullptr;
      for (int r = 0; r < ho; ++r) {
        int rb = r - pad;
        int i0 = std::max(0, -rb), i1 = std::min(k, h - rb);
        const T* gyrow = gyo + size_t(r) * wo;
        for (int i = i0; i < i1; ++i) {
          const T* xrow = xi + size_t(rb + i) * wd;
          T* gxrow = gxi ? gxi + size_t(rb + i) * wd : nullptr;
          const T* wrow = wk + size_t(i) * k;
          T* gwrow = gwk ? gwk + size_t(i) * k : nullptr;
          for (int c = 0; c < wo; ++c) {
            int cb = c - pad;
            int j0 = std::max(0, -cb), j1 = std::min(k, wd - cb);
            T g = gyrow[c];
            for (int j = j0; j < j1; ++j) {
              if (gwrow) gwrow[j] += g * xrow[cb + j];
              if (gxrow) gxrow[cb + j] += g * wrow[j];
            }
          }
        }
      }
    }
  }
}

// Min-pooling, non-overlapping by default (stride == window), window clamped
// at the tail. Gradient routes to the first argmin.
inline int pool_out_len(int n, int window, int stride) {
  if (n <= window) return 1;
  return (n - window + stride - 1) / stride + 1;
}

template <typename T>
void minpool1d_fwd(const T* x, T* y, int32_t* argmin, int C, int L, int window, int stride) {
  int Lo = pool_out_len(L, window, stride);
  for (int c = 0; c < C; ++c) {
    const T* xc = x + size_t(c) * L;
    for (int p = 0; p < Lo; ++p) {
      int s = std::min(p * stride, L - 1);
      int e = std::min(s + window, L);
      int best = s;
      for (int i = s + 1; i < e; ++i) {
        if (xc[i] < xc[best]) best = i;
      }
      y[size_t(c) * Lo + p] = xc[best];
      argmin[size_t(c) * Lo + p] = best;
    }
  }
}

template <typename T>
void minpool1d_bwd(const T* gy, const int32_t* argmin, T* gx, int C, int L, int Lo) {
  for (int c = 0; c < C; ++c) {
    for (int p = 0; p < Lo; ++p) {
      gx[size_t(c) * L + argmin[size_t(c) * Lo + p]] += gy[size_t(c) * Lo + p];
    }
  }
}

template <typename T>
void minpool2d_fwd(const T* x, T* y, int32_t* argmin, int C, int h, int w, int window,
                   int stride) {
  int ho = pool_out_len(h, window, stride);
  int wo = pool_out_len(w, window, stride);
  for (int c = 0; c < C; ++c) {
    const T* xc = x + size_t(c) * h * w;
    for (int r = 0; r < ho; ++r) {
      int rs = std::min(r * stride, h - 1), re = std::min(rs + window, h);
      for (int q = 0; q < wo; ++q) {
        int cs = std::min(q * stride, w - 1), ce = std::min(cs + window, w);
        int best = rs * w + cs;
        for (int i = rs; i < re; ++i) {
          for (int j = cs; j < ce; ++j) {
            if (xc[i * w + j] < xc[best]) best = i * w + j;
          }
        }
        y[(size_t(c) * ho + r) * wo + q] = xc[best];
        argmin[(size_t(c) * ho + r) * wo + q] = best;
      }
    }
  }
}

template <typename T>
void minpool2d_bwd(const T* gy, const int32_t* argmin, T* gx, int C, int h, int w, int ho,
                   int wo) {
  for (int c = 0; c < C; ++c) {
    for (int i = 0; i < ho * wo; ++i) {
      gx[size_t(c) * h * w + argmin[size_t(c) * ho * wo + i]] += gy[size_t(c) * ho * wo + i];
    }
  }
}

// Max-pooling with zero-free padding (padded cells are ignored), the IMPALA
// downsampling flavor: kernel 3, stride 2, pad 1 gives ceil(n/2).
inline int maxpool_out_len(int n, int k, int stride, int pad) {
  return (n + 2 * pad - k) / stride + 1;
}

template <typename T>
void maxpool1d_fwd(const T* x, T* y, int32_t* argmax, int C, int L, int k, int stride,
                   int pad) {
  int Lo = maxpool_out_len(L, k, stride, pad);
  for (int c = 0; c < C; ++c) {
    const T* xc = x + size_t(c) * L;
    for (int p = 0; p < Lo; ++p) {
      int s = std::max(0, p * stride - pad);
      int e = std::min(L, p * stride - pad + k);
      int best = s;
      for (int i = s + 1; i < e; ++i) {
        if (xc[i] > xc[best]) best = i;
      }
      y[size_t(c) * Lo + p] = xc[best];
      argmax[size_t(c) * Lo + p] = best;
    }
  }
}

template <typename T>
void maxpool2d_fwd(const T* x, T* y, int32_t* argmax, int C, int h, int w, int k, int stride,
                   int pad) {
  int ho = maxpool_out_len(h, k, stride, pad);
  int wo = maxpool_out_len(w, k, stride, pad);
  for (int c = 0; c < C; ++c) {
    const T* xc = x + size_t(c) * h * w;
    for (int r = 0; r < ho; ++r) {
      int rs = std::max(0, r * stride - pad), re = std::min(h, r * stride - pad + k);
      for (int q = 0; q < wo; ++q) {
        int cs = std::max(0, q * stride - pad), ce = std::min(w, q * stride - pad + k);
        int best = rs * w + cs;
        for (int i = rs; i < re; ++i) {
          for (int j = cs; j < ce; ++j) {
            if (xc[i * w + j] > xc[best]) best = i * w + j;
          }
        }
        y[(size_t(c) * ho + r) * wo + q] = xc[best];
        argmax[(size_t(c) * ho + r) * wo + q] = best;
      }
    }
  }
}

template <typename T>
void pool_route_bwd(const T* gy, const int32_t* arg, T* gx, int C, int plane_in,
                    int plane_out) {
  for (int c = 0; c < C; ++c) {
    for (int i = 0; i < plane_out; ++i) {
      gx[size_t(c) * plane_in + arg[size_t(c) * plane_out + i]] +=
          gy[size_t(c) * plane_out + i];
    }
  }
}

template <typename T>
void relu_fwd(const T* x, T* y, int n) {
  for (int i = 0; i < n; ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
}

template <typename T>
void relu_bwd(const T* x, const T* gy, T* gx, int n) {
  for (int i = 0; i < n; ++i) {
    if (x[i] > T(0)) gx[i] += gy[i];
  }
}

template <typename T>
void tanh_fwd(const T* x, T* y, int n) {
  for (int i = 0; i < n; ++i) y[i] = std::tanh(x[i]);
}

// Uses the forward output y.
template <typename T>
void tanh_bwd(const T* y, const T* gy, T* gx, int n) {
  for (int i = 0; i < n; ++i) gx[i] += gy[i] * (T(1) - y[i] * y[i]);
}

}  // namespace nav::ops
