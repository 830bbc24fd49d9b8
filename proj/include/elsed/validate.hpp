#pragma once

#include "elsed/eed.hpp"

namespace elsed {

struct ValidatedSegment {
  Point2 p0, p1;
  double score = 0.0;  // inlier ratio, or length when validation is off
  double length = 0.0;
  int support = 0;     // inlier pixel count
  bool accepted = false;

  Segment segment() const { return {p0, p1, score}; }
};

// Angle in [0, pi/2] between the gradient (gx, gy) and the line normal.
double angular_error(double gx, double gy, Point2 normal);

ValidatedSegment validate_segment(const SegmentCandidate& seg, const GradientMap& grad,
                                  double t_valid, int margin = 2);

// Pass-through used when segment validation is disabled.
ValidatedSegment length_scored(const SegmentCandidate& seg);

}  // namespace elsed
