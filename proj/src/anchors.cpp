#include "elsed/anchors.hpp"

#include <algorithm>

namespace elsed {

bool is_anchor(const GradientMap& grad, Pixel p, double t_anchor) {
  if (!grad.contains(p)) return false;
  const int g = grad.mag(p);
  if (g <= 0) return false;
  Pixel a = p, b = p;
  if (grad.orientation(p) == EdgeOrient::Vertical) {
    a.x -= 1;
    b.x += 1;
  } else {
    a.y -= 1;
    b.y += 1;
  }
  return g - grad.mag_or_zero(a) >= t_anchor && g - grad.mag_or_zero(b) >= t_anchor;
}

std::vector<Anchor> extract_anchors(const GradientMap& grad, double t_anchor,
                                    int scan_interval) {
  if (scan_interval < 1)
    throw Error(ErrorCode::InvalidArgument, "scan interval must be >= 1");
  if (t_anchor < 0)
    throw Error(ErrorCode::InvalidArgument, "anchor threshold must be >= 0");
  std::vector<Anchor> out;
  for (int y = 0; y < grad.height; y += scan_interval) {
    for (int x = 0; x < grad.width; x += scan_interval) {
      const Pixel p{x, y};
      if (is_anchor(grad, p, t_anchor))
        out.push_back({p, grad.orientation(p), grad.mag(p)});
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Anchor& a, const Anchor& b) {
    return a.magnitude > b.magnitude;
  });
  return out;
}

}  // namespace elsed
