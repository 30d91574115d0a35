#pragma once

#include "nav/rng.hpp"
#include "nav/sensors.hpp"

namespace nav {

// Seven-stage depth degradation pipeline. Stage ids:
//   1 gaussian smooth, 2 motion blur, 3 background smudge, 4 elastic smear,
//   5 scale-shift, 6 low-frequency noise, 7 quantize.
struct AugmentConfig {
  bool enable[8] = {false, true, true, true, true, true, true, true};  // index by stage id
  double p_gaussian = 0.9;
  double gaussian_sigma_lo = 0.5, gaussian_sigma_hi = 2.0;
  double p_motion = 0.3;
  int motion_len_lo = 3, motion_len_hi = 9;
  double p_smudge = 0.5;
  double smudge_threshold = 3.0;  // m
  double smudge_sigma = 4.0;      // px
  double smudge_alpha_lo = 0.3, smudge_alpha_hi = 0.7;
  double p_elastic = 0.3;
  int elastic_rows = 6, elastic_cols = 8;
  double elastic_amp_lo = 1.0, elastic_amp_hi = 4.0;  // px
  double p_scale_shift = 1.0;
  double scale_lo = 0.9, scale_hi = 1.1;
  double shift_lo = -0.1, shift_hi = 0.1;  // m
  bool per_camera_scale_shift = false;     // default: one (s,t) per panorama
  double p_lowfreq = 1.0;
  int lowfreq_rows = 6, lowfreq_cols = 8;
  double lowfreq_amp_lo = 0.0, lowfreq_amp_hi = 0.1;  // m
  double p_quantize = 1.0;
  int quantize_levels_lo = 64, quantize_levels_hi = 256;
  double max_depth = 5.0;
  double min_depth = 0.05;
};

// Per-stage parameters, drawn from the config by draw_stage_params.
struct StageParams {
  double sigma = 0.0;          // stage 1
  int motion_len = 0;          // stage 2
  double motion_dir = 0.0;     // stage 2, radians
  double smudge_alpha = 0.0;   // stage 3
  std::vector<double> disp_x;  // stage 4, coarse grid
  std::vector<double> disp_y;
  double scale = 1.0;          // stage 5
  double shift = 0.0;
  std::vector<double> noise;   // stage 6, coarse grid
  int levels = 0;              // stage 7
};

StageParams draw_stage_params(int stage_id, const AugmentConfig& cfg, Rng& rng);

// Applies one stage to a single H x W grid (row-major floats).
void apply_stage(float* depth, int height, int width, int stage_id, const StageParams& params,
                 const AugmentConfig& cfg);

// Full pipeline on a 4-camera panorama: stages 1..7 in order, each gated by
// an independent probability draw; parameters drawn per camera except the
// scale-shift, which is shared across the panorama unless
// per_camera_scale_shift is set.
void apply_pipeline(DepthPanorama& pano, const AugmentConfig& cfg, Rng& rng);

}  // namespace nav
