#include "elsed/validate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace elsed {

double angular_error(double gx, double gy, Point2 normal) {
  const double gn = std::hypot(gx, gy);
  const double nn = std::hypot(normal.x, normal.y);
  if (gn == 0 || nn == 0) return std::numbers::pi / 2;
  const double c = std::min(1.0, std::abs(gx * normal.x + gy * normal.y) / (gn * nn));
  return std::acos(c);
}

ValidatedSegment validate_segment(const SegmentCandidate& seg, const GradientMap& grad,
                                  double t_valid, int margin) {
  ValidatedSegment v;
  v.p0 = seg.p0;
  v.p1 = seg.p1;
  v.length = distance(seg.p0, seg.p1);
  v.support = static_cast<int>(seg.pixels.size());
  if (!seg.fit.valid()) return v;

  const Point2 n = seg.fit.unit_normal();
  const ptrdiff_t total = static_cast<ptrdiff_t>(seg.pixels.size());
  int usable = 0, aligned = 0;
  for (ptrdiff_t i = margin; i < total - margin; ++i) {
    const Pixel p = seg.pixels[static_cast<size_t>(i)];
    if (std::find(seg.jumped.begin(), seg.jumped.end(), p) != seg.jumped.end()) continue;
    const size_t k = grad.index(p);
    ++usable;
    if (angular_error(grad.gx[k], grad.gy[k], n) < t_valid) ++aligned;
  }
  v.score = usable > 0 ? static_cast<double>(aligned) / usable : 0.0;
  v.accepted = v.score >= 0.5;
  return v;
}

ValidatedSegment length_scored(const SegmentCandidate& seg) {
  ValidatedSegment v;
  v.p0 = seg.p0;
  v.p1 = seg.p1;
  v.length = distance(seg.p0, seg.p1);
  v.support = static_cast<int>(seg.pixels.size());
  v.score = v.length;
  v.accepted = true;
  return v;
}

}  // namespace elsed
