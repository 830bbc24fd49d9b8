#pragma once

// Straightforward reference implementations the tests compare against.

#include <optional>
#include <vector>

#include "elsed/imgproc.hpp"

namespace oracles {

using elsed::GrayImage;
using elsed::Pixel;

// Floating-point Gaussian blur with continuous, normalized weights and
// replicated borders, rounded to 8 bits.
GrayImage blur(const GrayImage& img, int kernel_size, double sigma);

struct Sobel {
  int gx = 0, gy = 0;
};
// 3x3 Sobel at an interior pixel, written out term by term.
Sobel sobel_at(const GrayImage& img, int x, int y);

struct Accumulators {
  long long n = 0, sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
};
Accumulators accumulate(const std::vector<Pixel>& pixels);

// Regression of v on u (u = x when horizontal) from the normal equations,
// solved in long double. Residual is the mean squared error along v.
struct NormalFit {
  long double slope = 0, intercept = 0, residual = 0;
};
std::optional<NormalFit> normal_equations(const std::vector<Pixel>& pixels, bool horizontal);

// Lexicographic optimum over all injective row-to-column maps: most allowed
// pairs first, then least total cost. Negative cost = forbidden.
struct BruteAssignment {
  int pairs = 0;
  double cost = 0;
};
BruteAssignment brute_force_assignment(const std::vector<std::vector<double>>& cost);

}  // namespace oracles
