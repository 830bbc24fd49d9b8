#pragma once

#include <cstdint>
#include <vector>

#include "elsed/types.hpp"

namespace elsed {

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> data;  // row-major

  GrayImage() = default;
  GrayImage(int w, int h, uint8_t fill = 0);

  bool empty() const { return width <= 0 || height <= 0; }
  bool contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < width && y < height;
  }
  uint8_t& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
  uint8_t at(int x, int y) const {
    return data[static_cast<size_t>(y) * width + x];
  }
};

// VerticalEdge when |gx| >= |gy|: the edge runs up/down and is drawn along y.
enum class EdgeOrient : uint8_t { Vertical = 0, Horizontal = 1 };

struct GradientMap {
  int width = 0;
  int height = 0;
  std::vector<int16_t> gx;
  std::vector<int16_t> gy;
  std::vector<int16_t> g;  // |gx| + |gy|, or 0 below the threshold
  std::vector<EdgeOrient> orient;

  bool contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < width && y < height;
  }
  bool contains(Pixel p) const { return contains(p.x, p.y); }
  size_t index(Pixel p) const { return static_cast<size_t>(p.y) * width + p.x; }
  int mag(Pixel p) const { return g[index(p)]; }
  // 0 outside the image, so callers can probe neighbours freely.
  int mag_or_zero(Pixel p) const { return contains(p) ? g[index(p)] : 0; }
  EdgeOrient orientation(Pixel p) const { return orient[index(p)]; }
};

inline EdgeOrient classify_orientation(int gx, int gy) {
  return (gx < 0 ? -gx : gx) >= (gy < 0 ? -gy : gy) ? EdgeOrient::Vertical
                                                     : EdgeOrient::Horizontal;
}

// Separable fixed-point kernel; weights sum exactly to kGaussianOne.
inline constexpr int kGaussianShift = 10;
inline constexpr int kGaussianOne = 1 << kGaussianShift;
std::vector<int32_t> gaussian_kernel_1d(int kernel_size, double sigma);

GrayImage gaussian_blur(const GrayImage& img, int kernel_size, double sigma);

GradientMap compute_gradient(const GrayImage& img, double t_grad);

// Re-applies the weak-edge suppression to an existing map.
void suppress_weak(GradientMap& grad, double t_grad);

}  // namespace elsed
