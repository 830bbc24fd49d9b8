#pragma once

#include <vector>

#include "elsed/imgproc.hpp"

namespace elsed {

struct Anchor {
  Pixel pixel;
  EdgeOrient orient = EdgeOrient::Vertical;
  int magnitude = 0;
};

// True when p passes the two-sided margin test along its gradient axis.
bool is_anchor(const GradientMap& grad, Pixel p, double t_anchor);

// Anchors on rows and columns that are multiples of scan_interval, strongest
// first; equal magnitudes keep row-major order.
std::vector<Anchor> extract_anchors(const GradientMap& grad, double t_anchor,
                                    int scan_interval);

}  // namespace elsed
