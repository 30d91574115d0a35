#include "nav/augment.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace nav {

namespace {

void clip_grid(float* d, int n, const AugmentConfig& cfg) {
  for (int i = 0; i < n; ++i) {
    d[i] = std::clamp(d[i], float(cfg.min_depth), float(cfg.max_depth));
  }
}

// Separable Gaussian with edge clamping.
void gaussian_blur(float* d, int h, int w, double sigma) {
  int radius = std::max(1, int(std::ceil(3.0 * sigma)));
  std::vector<double> kernel(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += kernel[i + radius];
  }
  for (auto& k : kernel) k /= sum;

  std::vector<float> tmp(size_t(h) * w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        int cc = std::clamp(c + i, 0, w - 1);
        acc += kernel[i + radius] * d[r * w + cc];
      }
      tmp[r * w + c] = float(acc);
    }
  }
  for (int c = 0; c < w; ++c) {
    for (int r = 0; r < h; ++r) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        int rr = std::clamp(r + i, 0, h - 1);
        acc += kernel[i + radius] * tmp[rr * w + c];
      }
      d[r * w + c] = float(acc);
    }
  }
}

float sample_bilinear(const float* d, int h, int w, double y, double x) {
  x = std::clamp(x, 0.0, double(w - 1));
  y = std::clamp(y, 0.0, double(h - 1));
  int x0 = int(x), y0 = int(y);
  int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
  double fx = x - x0, fy = y - y0;
  double v0 = d[y0 * w + x0] * (1 - fx) + d[y0 * w + x1] * fx;
  double v1 = d[y1 * w + x0] * (1 - fx) + d[y1 * w + x1] * fx;
  return float(v0 * (1 - fy) + v1 * fy);
}

// Bilinear upsample of a coarse grid value at pixel (r, c).
double coarse_at(const std::vector<double>& grid, int rows, int cols, int h, int w, int r,
                 int c) {
  double gy = (rows == 1) ? 0.0 : double(r) * (rows - 1) / std::max(1, h - 1);
  double gx = (cols == 1) ? 0.0 : double(c) * (cols - 1) / std::max(1, w - 1);
  int y0 = int(gy), x0 = int(gx);
  int y1 = std::min(y0 + 1, rows - 1), x1 = std::min(x0 + 1, cols - 1);
  double fy = gy - y0, fx = gx - x0;
  double v0 = grid[y0 * cols + x0] * (1 - fx) + grid[y0 * cols + x1] * fx;
  double v1 = grid[y1 * cols + x0] * (1 - fx) + grid[y1 * cols + x1] * fx;
  return v0 * (1 - fy) + v1 * fy;
}

}  // namespace

StageParams draw_stage_params(int stage_id, const AugmentConfig& cfg, Rng& rng) {
  StageParams p;
  switch (stage_id) {
    case 1:
      p.sigma = rng.uniform(cfg.gaussian_sigma_lo, cfg.gaussian_sigma_hi);
      break;
    case 2:
      p.motion_len = int(rng.uniform_int(cfg.motion_len_lo, cfg.motion_len_hi));
      p.motion_dir = rng.uniform(0.0, 2.0 * M_PI);
      break;
    case 3:
      p.smudge_alpha = rng.uniform(cfg.smudge_alpha_lo, cfg.smudge_alpha_hi);
      break;
    case 4: {
      double amp = rng.uniform(cfg.elastic_amp_lo, cfg.elastic_amp_hi);
      int n = cfg.elastic_rows * cfg.elastic_cols;
      p.disp_x.resize(n);
      p.disp_y.resize(n);
      for (int i = 0; i < n; ++i) p.disp_x[i] = rng.uniform(-amp, amp);
      for (int i = 0; i < n; ++i) p.disp_y[i] = rng.uniform(-amp, amp);
      break;
    }
    case 5:
      p.scale = rng.uniform(cfg.scale_lo, cfg.scale_hi);
      p.shift = rng.uniform(cfg.shift_lo, cfg.shift_hi);
      break;
    case 6: {
      double amp = rng.uniform(cfg.lowfreq_amp_lo, cfg.lowfreq_amp_hi);
      int n = cfg.lowfreq_rows * cfg.lowfreq_cols;
      p.noise.resize(n);
      for (int i = 0; i < n; ++i) p.noise[i] = rng.uniform(-amp, amp);
      break;
    }
    case 7:
      p.levels = int(rng.uniform_int(cfg.quantize_levels_lo, cfg.quantize_levels_hi));
      break;
    default:
      throw std::runtime_error("draw_stage_params: unknown stage id");
  }
  return p;
}

void apply_stage(float* d, int h, int w, int stage_id, const StageParams& p,
                 const AugmentConfig& cfg) {
  const int n = h * w;
  switch (stage_id) {
    case 1:
      gaussian_blur(d, h, w, p.sigma);
      break;
    case 2: {
      // Average p.motion_len bilinear samples along the blur direction.
      std::vector<float> src(d, d + n);
      double dx = std::cos(p.motion_dir), dy = std::sin(p.motion_dir);
      double mid = (p.motion_len - 1) / 2.0;
      for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
          double acc = 0.0;
          for (int k = 0; k < p.motion_len; ++k) {
            double off = k - mid;
            acc += sample_bilinear(src.data(), h, w, r + off * dy, c + off * dx);
          }
          d[r * w + c] = float(acc / p.motion_len);
        }
      }
      break;
    }
    case 3: {
      std::vector<float> blurred(d, d + n);
      gaussian_blur(blurred.data(), h, w, cfg.smudge_sigma);
      for (int i = 0; i < n; ++i) {
        if (d[i] > cfg.smudge_threshold) {
          d[i] = float((1.0 - p.smudge_alpha) * d[i] + p.smudge_alpha * blurred[i]);
        }
      }
      break;
    }
    case 4: {
      std::vector<float> src(d, d + n);
      for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
          double ox = coarse_at(p.disp_x, cfg.elastic_rows, cfg.elastic_cols, h, w, r, c);
          double oy = coarse_at(p.disp_y, cfg.elastic_rows, cfg.elastic_cols, h, w, r, c);
          d[r * w + c] = sample_bilinear(src.data(), h, w, r + oy, c + ox);
        }
      }
      break;
    }
    case 5:
      for (int i = 0; i < n; ++i) d[i] = float(p.scale * d[i] + p.shift);
      break;
    case 6:
      for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
          d[r * w + c] +=
              float(coarse_at(p.noise, cfg.lowfreq_rows, cfg.lowfreq_cols, h, w, r, c));
        }
      }
      break;
    case 7: {
      double step = cfg.max_depth / (p.levels - 1);
      for (int i = 0; i < n; ++i) d[i] = float(std::round(d[i] / step) * step);
      break;
    }
    default:
      throw std::runtime_error("apply_stage: unknown stage id");
  }
  clip_grid(d, n, cfg);
}

void apply_pipeline(DepthPanorama& pano, const AugmentConfig& cfg, Rng& rng) {
  const int h = pano.height, w = pano.width;
  const double gate_p[8] = {0.0,          cfg.p_gaussian, cfg.p_motion, cfg.p_smudge,
                            cfg.p_elastic, cfg.p_scale_shift, cfg.p_lowfreq, cfg.p_quantize};
  for (int stage = 1; stage <= 7; ++stage) {
    if (!cfg.enable[stage]) continue;
    if (stage == 5 && !cfg.per_camera_scale_shift) {
      if (!rng.bernoulli(gate_p[stage])) continue;
      StageParams p = draw_stage_params(5, cfg, rng);
      for (int cam = 0; cam < 4; ++cam) {
        apply_stage(&pano.at(cam, 0, 0), h, w, 5, p, cfg);
      }
    } else {
      for (int cam = 0; cam < 4; ++cam) {
        if (!rng.bernoulli(gate_p[stage])) continue;
        StageParams p = draw_stage_params(stage, cfg, rng);
        apply_stage(&pano.at(cam, 0, 0), h, w, stage, p, cfg);
      }
    }
  }
}

}  // namespace nav
