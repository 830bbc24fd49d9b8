#pragma once

#include <cstdint>
#include <vector>

#include "elsed/imgproc.hpp"

namespace fixtures {

using elsed::GrayImage;
using elsed::Point2;

// One straight step edge from a to b.
struct EdgePiece {
  Point2 a, b;
};

// Step edges of the given contrast with clean terminations. Each piece
// contributes the field arg((z - b) / (z - a)), which jumps by 2*pi across
// the piece and is smooth elsewhere; near each endpoint the angular ramp is
// bent away from the extension ray (radius rho) so the edge stops at its
// endpoint instead of trailing a long low-contrast tail. Collinear pieces
// share polarity. Supersampled ss x ss.
GrayImage render_edges(int w, int h, const std::vector<EdgePiece>& pieces,
                       double contrast = 200, double background = 28, double rho = 12,
                       int ss = 4);

// Bright rectangle [0, x_edge) x [0, y_edge) over a dark background, box
// filtered. Both edges run to the image border.
GrayImage render_corner(int w, int h, double x_edge, double y_edge, double contrast = 200,
                        double background = 28, int ss = 4);

GrayImage uniform_noise(int w, int h, uint32_t seed);

// Procedural street-like scene: facades with window grids, roof lines under
// a mild perspective, smooth shading and sensor noise.
GrayImage urban_scene(int w, int h, uint32_t seed);

GrayImage crop(const GrayImage& img, int x0, int y0, int w, int h);

}  // namespace fixtures
