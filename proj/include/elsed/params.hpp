#pragma once

#include <vector>

namespace elsed {

struct DetectorParams {
  int blur_kernel = 5;
  double blur_sigma = 1.0;
  double t_grad = 30;
  double t_anchor = 8;
  int scan_interval = 2;
  int t_ol = 3;
  int t_min_length = 15;
  double t_line_fit_err = 0.2;   // px^2, mean squared residual
  double t_px_to_seg_dist = 1.5; // px
  double t_eigen_ext = 10;
  double t_angle_ext = 10;       // degrees
  double t_valid = 0.15;         // radians
  int validation_margin = 2;     // pixels ignored at each endpoint
  std::vector<int> jump_lengths{5, 7, 9};
  bool jumps_enabled = true;
  bool jump_validation_enabled = true;
  bool segment_validation_enabled = true;

  // Throws InvalidArgument on out-of-range values.
  void check() const;
};

}  // namespace elsed
