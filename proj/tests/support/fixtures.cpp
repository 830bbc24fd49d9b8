#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

namespace fixtures {

namespace {

uint8_t to_u8(double v) { return static_cast<uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

std::vector<double> subsample_offsets(int ss) {
  std::vector<double> o;
  for (int i = 0; i < ss; ++i) o.push_back((i + 0.5) / ss - 0.5);
  return o;
}

double piece_field(const EdgePiece& p, double x, double y, double rho) {
  const double len = std::hypot(p.b.x - p.a.x, p.b.y - p.a.y);
  const double ux = (p.b.x - p.a.x) / len, uy = (p.b.y - p.a.y) / len;
  const std::complex<double> z(x, y), za(p.a.x, p.a.y), zb(p.b.x, p.b.y);
  double phi = std::arg((z - zb) / (z - za));
  auto bend = [&](Point2 e) {
    const double rx = x - e.x, ry = y - e.y;
    const double t = rx * ux + ry * uy;
    const double h = -rx * uy + ry * ux;
    const double r2 = rx * rx + ry * ry;
    const double c = std::exp(-r2 / (2 * rho * rho));
    return c * std::sin(std::atan2(h, t));
  };
  phi -= bend(p.b) + bend(p.a);
  return phi;
}

}  // namespace

GrayImage render_edges(int w, int h, const std::vector<EdgePiece>& pieces, double contrast,
                       double background, double rho, int ss) {
  GrayImage img(w, h);
  const auto offs = subsample_offsets(ss);
  // Keeps subsamples off the branch cuts of arg().
  const double jx = 1.234567e-7, jy = -7.654321e-8;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0;
      for (double dy : offs)
        for (double dx : offs)
          for (const EdgePiece& p : pieces) acc += piece_field(p, x + dx + jx, y + dy + jy, rho);
      acc /= ss * ss;
      img.at(x, y) = to_u8(background + contrast / 2 + contrast * acc / (2 * std::numbers::pi));
    }
  return img;
}

GrayImage render_corner(int w, int h, double x_edge, double y_edge, double contrast,
                        double background, int ss) {
  GrayImage img(w, h);
  const auto offs = subsample_offsets(ss);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      int in = 0;
      for (double dy : offs)
        for (double dx : offs) in += (x + dx < x_edge && y + dy < y_edge) ? 1 : 0;
      img.at(x, y) = to_u8(background + contrast * in / (ss * ss));
    }
  return img;
}

GrayImage uniform_noise(int w, int h, uint32_t seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> d(0, 255);
  GrayImage img(w, h);
  for (auto& v : img.data) v = static_cast<uint8_t>(d(rng));
  return img;
}

namespace {

struct Quad {
  Point2 p[4];
  double shade;
};

bool inside(const Quad& q, double x, double y) {
  bool in = false;
  for (int i = 0, j = 3; i < 4; j = i++) {
    const Point2 a = q.p[i], b = q.p[j];
    if ((a.y > y) != (b.y > y) && x < (b.x - a.x) * (y - a.y) / (b.y - a.y) + a.x) in = !in;
  }
  return in;
}

// Painter's algorithm with 3x3 supersampling per quad.
void paint(std::vector<double>& canvas, int w, int h, const Quad& q) {
  double x0 = 1e9, x1 = -1e9, y0 = 1e9, y1 = -1e9;
  for (const Point2& p : q.p) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  const int xa = std::max(0, static_cast<int>(std::floor(x0)) - 1);
  const int xb = std::min(w - 1, static_cast<int>(std::ceil(x1)) + 1);
  const int ya = std::max(0, static_cast<int>(std::floor(y0)) - 1);
  const int yb = std::min(h - 1, static_cast<int>(std::ceil(y1)) + 1);
  for (int y = ya; y <= yb; ++y)
    for (int x = xa; x <= xb; ++x) {
      int in = 0;
      for (int sy = -1; sy <= 1; ++sy)
        for (int sx = -1; sx <= 1; ++sx) in += inside(q, x + sx / 3.0, y + sy / 3.0);
      if (in == 0) continue;
      double& c = canvas[static_cast<size_t>(y) * w + x];
      c += (q.shade - c) * in / 9.0;
    }
}

}  // namespace

GrayImage urban_scene(int w, int h, uint32_t seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u01(0, 1);
  auto uni = [&](double a, double b) { return a + (b - a) * u01(rng); };

  std::vector<double> canvas(static_cast<size_t>(w) * h);
  // Sky and ground gradients.
  const double horizon = h * uni(0.55, 0.65);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      canvas[static_cast<size_t>(y) * w + x] =
          y < horizon ? 190 + 40.0 * y / h : 90 + 30.0 * (y - horizon) / h;

  // Facades: vertical sides converge slightly, tops slope with the perspective.
  double x = uni(-20, 10);
  while (x < w) {
    const double fw = uni(60, 150);
    const double top = uni(h * 0.08, h * 0.4);
    const double tilt = uni(-0.12, 0.12);
    const double shade = uni(50, 170);
    Quad facade{{{x, top}, {x + fw, top + tilt * fw}, {x + fw, horizon + 30}, {x, horizon + 30}},
                shade};
    paint(canvas, w, h, facade);
    // Window grid.
    const int cols = static_cast<int>(fw / uni(18, 28));
    const int rows = static_cast<int>((horizon - top) / uni(22, 34));
    const double win_shade = shade + (u01(rng) < 0.5 ? -1 : 1) * uni(35, 70);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) {
        const double cx = x + (c + 0.5) * fw / cols;
        const double cy = top + tilt * (cx - x) + (r + 0.6) * (horizon - top) / (rows + 0.5);
        const double ww = fw / cols * 0.5, wh = (horizon - top) / (rows + 0.5) * 0.55;
        Quad win{{{cx - ww / 2, cy - wh / 2 + tilt * (-ww / 2)},
                  {cx + ww / 2, cy - wh / 2 + tilt * (ww / 2)},
                  {cx + ww / 2, cy + wh / 2 + tilt * (ww / 2)},
                  {cx - ww / 2, cy + wh / 2 + tilt * (-ww / 2)}},
                 win_shade};
        paint(canvas, w, h, win);
      }
    x += fw + uni(0, 25);
  }
  // Road markings receding to a vanishing point.
  const Point2 vp{w * uni(0.4, 0.6), horizon};
  for (int k = 0; k < 5; ++k) {
    const double bx = w * (k + 0.5) / 5 + uni(-20, 20);
    const double half = 3;
    Quad stripe{{{vp.x - 0.5, vp.y + 2}, {vp.x + 0.5, vp.y + 2}, {bx + half, h + 5.0},
                 {bx - half, h + 5.0}},
                uni(170, 220)};
    paint(canvas, w, h, stripe);
  }

  // Smooth illumination and sensor noise.
  std::normal_distribution<double> noise(0, 3.0);
  const double gx = uni(-0.05, 0.05), gy = uni(-0.05, 0.05);
  GrayImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int xx = 0; xx < w; ++xx)
      img.at(xx, y) =
          to_u8(canvas[static_cast<size_t>(y) * w + xx] + gx * xx + gy * y + noise(rng));
  return img;
}

GrayImage crop(const GrayImage& img, int x0, int y0, int w, int h) {
  GrayImage out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out.at(x, y) = img.at(x0 + x, y0 + y);
  return out;
}

}  // namespace fixtures
