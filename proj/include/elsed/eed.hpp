#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "elsed/anchors.hpp"
#include "elsed/imgproc.hpp"
#include "elsed/params.hpp"

namespace elsed {

enum class Direction : uint8_t { Up, Down, Left, Right };

Pixel step(Direction d);
Direction opposite(Direction d);
inline bool horizontal_axis(Direction d) {
  return d == Direction::Left || d == Direction::Right;
}

std::vector<Pixel> bresenham(Pixel p0, Pixel p1);

enum class FitAxis : uint8_t { Horizontal, Vertical };

// HorizontalFit when the chain spans at least as far in x as in y.
inline FitAxis choose_axis(int extent_x, int extent_y) {
  return extent_x >= extent_y ? FitAxis::Horizontal : FitAxis::Vertical;
}

// Oriented least squares with integer accumulators. HorizontalFit regresses
// y on x; VerticalFit regresses x on y. The line is a*x + b*y + c = 0.
struct LineFit {
  int64_t n = 0;
  int64_t sum_x = 0, sum_y = 0, sum_xx = 0, sum_yy = 0, sum_xy = 0;
  FitAxis axis = FitAxis::Horizontal;
  double a = 0.0, b = 0.0, c = 0.0;
  double fit_error = 0.0;  // mean squared residual along the regression axis

  void add(Pixel p);
  // Recomputes (a, b, c) and fit_error from the accumulators. Returns false
  // when the system is degenerate for the requested axis.
  bool solve(FitAxis ax);
  bool valid() const { return a != 0.0 || b != 0.0; }

  double distance(Point2 p) const;
  Point2 project(Point2 p) const;
  Point2 unit_normal() const;
  Point2 unit_direction() const;

  static LineFit from_pixels(std::span<const Pixel> pixels);
};

struct SegmentCandidate {
  LineFit fit;
  Point2 p0, p1;
  std::deque<Pixel> pixels;  // inliers, p0 side first
  std::deque<Pixel> chain;   // drawn pixels between the endpoints, jumps excluded
  std::vector<Pixel> jumped; // pixels skipped by accepted jumps
  int outlier_count = 0;     // total outliers seen
  int outlier_run = 0;       // consecutive outliers at the growing end
  int min_x = 0, max_x = 0, min_y = 0, max_y = 0;

  size_t size() const { return pixels.size(); }
  void update_endpoints();
};

enum class PixelVerdict : uint8_t { Inlier, Outlier };

std::optional<Pixel> draw_next_pixel(Pixel current, Pixel previous, Direction dir,
                                     const GradientMap& grad,
                                     const LineFit* fit = nullptr);

std::optional<SegmentCandidate> fit_new_segment(std::span<const Pixel> chain,
                                                const DetectorParams& params);

// Appends (or prepends when at_front) p. Outliers only bump the counters.
PixelVerdict add_pixel_to_segment(SegmentCandidate& seg, Pixel p,
                                  const DetectorParams& params, bool at_front = false);

struct DrawState {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> visited;
  std::vector<Pixel> edge_pixels;

  DrawState() = default;
  DrawState(int w, int h);
  bool is_visited(Pixel p) const {
    return visited[static_cast<size_t>(p.y) * width + p.x] != 0;
  }
  void set_visited(Pixel p, bool v) {
    visited[static_cast<size_t>(p.y) * width + p.x] = v ? 1 : 0;
  }
};

struct TensorTest {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double angle_deg = 90.0;  // between the dominant eigenvector and the normal
  bool pass = false;
};

// Gradient autocorrelation over the pixels plus a one-pixel band on each side
// across the walking axis.
TensorTest extension_tensor_test(const GradientMap& grad, std::span<const Pixel> pixels,
                                 Direction dir, Point2 normal,
                                 const DetectorParams& params);

struct Jump {
  Pixel landing;
  Direction dir = Direction::Right;
  int length = 0;
  std::vector<Pixel> gap;  // rasterized pixels strictly between c and landing
};

// c is the segment end the jump starts from; forward selects the p1 end.
std::optional<Jump> can_continue(const SegmentCandidate& seg, Pixel c, Direction dir,
                                 const GradientMap& grad, const DrawState& state,
                                 const DetectorParams& params, bool forward);

std::vector<SegmentCandidate> eed_from_anchor(const Anchor& a, const GradientMap& grad,
                                              DrawState& state,
                                              const DetectorParams& params);

}  // namespace elsed
