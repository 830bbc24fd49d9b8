#include "elsed/eed.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>

namespace elsed {

namespace {

int sgn(int v) { return (v > 0) - (v < 0); }

__extension__ typedef __int128 i128;

}  // namespace

Pixel step(Direction d) {
  switch (d) {
    case Direction::Up: return {0, -1};
    case Direction::Down: return {0, 1};
    case Direction::Left: return {-1, 0};
    case Direction::Right: return {1, 0};
  }
  return {0, 0};
}

Direction opposite(Direction d) {
  switch (d) {
    case Direction::Up: return Direction::Down;
    case Direction::Down: return Direction::Up;
    case Direction::Left: return Direction::Right;
    case Direction::Right: return Direction::Left;
  }
  return d;
}

std::vector<Pixel> bresenham(Pixel p0, Pixel p1) {
  std::vector<Pixel> out;
  int dx = std::abs(p1.x - p0.x), sx = p0.x < p1.x ? 1 : -1;
  int dy = -std::abs(p1.y - p0.y), sy = p0.y < p1.y ? 1 : -1;
  int err = dx + dy;
  int x = p0.x, y = p0.y;
  out.reserve(static_cast<size_t>(std::max(dx, -dy)) + 1);
  while (true) {
    out.push_back({x, y});
    if (x == p1.x && y == p1.y) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y += sy;
    }
  }
  return out;
}

// ---------------------------------------------------------------- LineFit

void LineFit::add(Pixel p) {
  ++n;
  sum_x += p.x;
  sum_y += p.y;
  sum_xx += static_cast<int64_t>(p.x) * p.x;
  sum_yy += static_cast<int64_t>(p.y) * p.y;
  sum_xy += static_cast<int64_t>(p.x) * p.y;
}

bool LineFit::solve(FitAxis ax) {
  axis = ax;
  // u is the regressor, v the regressand.
  const bool hz = ax == FitAxis::Horizontal;
  const i128 N = n;
  const i128 su = hz ? sum_x : sum_y;
  const i128 sv = hz ? sum_y : sum_x;
  const i128 suu = hz ? sum_xx : sum_yy;
  const i128 svv = hz ? sum_yy : sum_xx;
  const i128 suv = sum_xy;

  const i128 num = N * suv - su * sv;
  const i128 den = N * suu - su * su;
  if (n < 2 || den == 0) {
    a = b = c = 0.0;
    fit_error = 0.0;
    return false;
  }
  const i128 off = sv * suu - su * suv;
  // v = (num*u + off) / den  ->  num*u - den*v + off = 0
  if (hz) {
    a = static_cast<double>(num);
    b = -static_cast<double>(den);
  } else {
    a = -static_cast<double>(den);
    b = static_cast<double>(num);
  }
  c = static_cast<double>(off);

  // N * SSE = (N*svv - sv^2) - num^2 / den, evaluated exactly then divided.
  const i128 evv = N * svv - sv * sv;
  const i128 sse_num = evv * den - num * num;
  fit_error = static_cast<double>(static_cast<long double>(sse_num) /
                                  (static_cast<long double>(den) * N * N));
  if (fit_error < 0) fit_error = 0;
  return true;
}

double LineFit::distance(Point2 p) const {
  return std::abs(a * p.x + b * p.y + c) / std::hypot(a, b);
}

Point2 LineFit::project(Point2 p) const {
  const double k = (a * p.x + b * p.y + c) / (a * a + b * b);
  return {p.x - k * a, p.y - k * b};
}

Point2 LineFit::unit_normal() const {
  const double h = std::hypot(a, b);
  return {a / h, b / h};
}

Point2 LineFit::unit_direction() const {
  const double h = std::hypot(a, b);
  return {-b / h, a / h};
}

LineFit LineFit::from_pixels(std::span<const Pixel> pixels) {
  LineFit f;
  if (pixels.empty()) return f;
  int min_x = pixels[0].x, max_x = min_x, min_y = pixels[0].y, max_y = min_y;
  for (const Pixel& p : pixels) {
    f.add(p);
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  f.solve(choose_axis(max_x - min_x, max_y - min_y));
  return f;
}

// ------------------------------------------------------- SegmentCandidate

void SegmentCandidate::update_endpoints() {
  if (pixels.empty() || !fit.valid()) return;
  p0 = fit.project({double(pixels.front().x), double(pixels.front().y)});
  p1 = fit.project({double(pixels.back().x), double(pixels.back().y)});
}

std::optional<Pixel> draw_next_pixel(Pixel cur, Pixel prev, Direction dir,
                                     const GradientMap& grad, const LineFit* fit) {
  const Pixel f = step(dir);
  const bool hz = horizontal_axis(dir);
  const Pixel perp = hz ? Pixel{0, 1} : Pixel{1, 0};
  const int drift = hz ? sgn(cur.y - prev.y) : sgn(cur.x - prev.x);
  const bool matches =
      grad.contains(cur) && ((grad.orientation(cur) == EdgeOrient::Horizontal) == hz);

  const Pixel ahead{cur.x + f.x, cur.y + f.y};
  Pixel cand[3];
  int nc;
  cand[0] = ahead;
  if (matches || drift == 0) {
    cand[1] = {ahead.x - perp.x, ahead.y - perp.y};
    cand[2] = {ahead.x + perp.x, ahead.y + perp.y};
    nc = 3;
  } else {
    cand[1] = {ahead.x + drift * perp.x, ahead.y + drift * perp.y};
    nc = 2;
  }

  int best = -1;
  int best_g = 0;
  for (int i = 0; i < nc; ++i) {
    const int g = grad.mag_or_zero(cand[i]);
    if (g <= 0) continue;
    if (g > best_g) {
      best = i;
      best_g = g;
    } else if (g == best_g && best > 0 && fit != nullptr && fit->valid()) {
      const double di = fit->distance({double(cand[i].x), double(cand[i].y)});
      const double db = fit->distance({double(cand[best].x), double(cand[best].y)});
      if (di < db) best = i;
    }
  }
  if (best < 0) return std::nullopt;
  return cand[best];
}

std::optional<SegmentCandidate> fit_new_segment(std::span<const Pixel> chain,
                                                const DetectorParams& params) {
  if (chain.empty() || chain.size() < static_cast<size_t>(params.t_min_length))
    return std::nullopt;
  SegmentCandidate s;
  s.min_x = s.max_x = chain[0].x;
  s.min_y = s.max_y = chain[0].y;
  for (const Pixel& p : chain) {
    s.fit.add(p);
    s.min_x = std::min(s.min_x, p.x);
    s.max_x = std::max(s.max_x, p.x);
    s.min_y = std::min(s.min_y, p.y);
    s.max_y = std::max(s.max_y, p.y);
  }
  if (!s.fit.solve(choose_axis(s.max_x - s.min_x, s.max_y - s.min_y)))
    return std::nullopt;
  if (s.fit.fit_error > params.t_line_fit_err) return std::nullopt;
  for (const Pixel& p : chain)
    if (s.fit.distance({double(p.x), double(p.y)}) > params.t_px_to_seg_dist)
      return std::nullopt;
  s.pixels.assign(chain.begin(), chain.end());
  s.chain.assign(chain.begin(), chain.end());
  s.update_endpoints();
  return s;
}

PixelVerdict add_pixel_to_segment(SegmentCandidate& seg, Pixel p,
                                  const DetectorParams& params, bool at_front) {
  if (seg.fit.distance({double(p.x), double(p.y)}) > params.t_px_to_seg_dist) {
    ++seg.outlier_run;
    ++seg.outlier_count;
    return PixelVerdict::Outlier;
  }
  seg.fit.add(p);
  seg.min_x = std::min(seg.min_x, p.x);
  seg.max_x = std::max(seg.max_x, p.x);
  seg.min_y = std::min(seg.min_y, p.y);
  seg.max_y = std::max(seg.max_y, p.y);
  seg.fit.solve(choose_axis(seg.max_x - seg.min_x, seg.max_y - seg.min_y));
  if (at_front) {
    seg.pixels.push_front(p);
    seg.chain.push_front(p);
  } else {
    seg.pixels.push_back(p);
    seg.chain.push_back(p);
  }
  seg.outlier_run = 0;
  seg.update_endpoints();
  return PixelVerdict::Inlier;
}

DrawState::DrawState(int w, int h) : width(w), height(h) {
  visited.assign(static_cast<size_t>(w) * h, 0);
}

// ------------------------------------------------------------------ jumps

TensorTest extension_tensor_test(const GradientMap& grad, std::span<const Pixel> pixels,
                                 Direction dir, Point2 normal,
                                 const DetectorParams& params) {
  const Pixel perp = horizontal_axis(dir) ? Pixel{0, 1} : Pixel{1, 0};
  double sxx = 0, sxy = 0, syy = 0;
  for (const Pixel& p : pixels) {
    for (int k = -1; k <= 1; ++k) {
      const Pixel q{p.x + k * perp.x, p.y + k * perp.y};
      if (!grad.contains(q)) continue;
      const double gx = grad.gx[grad.index(q)];
      const double gy = grad.gy[grad.index(q)];
      sxx += gx * gx;
      sxy += gx * gy;
      syy += gy * gy;
    }
  }
  TensorTest t;
  const double half_tr = (sxx + syy) / 2;
  const double disc = std::hypot((sxx - syy) / 2, sxy);
  t.lambda1 = half_tr + disc;
  t.lambda2 = std::max(0.0, half_tr - disc);
  if (t.lambda1 <= 0) return t;

  double vx, vy;
  if (sxy == 0) {
    vx = sxx >= syy ? 1 : 0;
    vy = sxx >= syy ? 0 : 1;
  } else if (std::abs(t.lambda1 - sxx) < std::abs(t.lambda1 - syy)) {
    vx = t.lambda1 - syy;
    vy = sxy;
  } else {
    vx = sxy;
    vy = t.lambda1 - sxx;
  }
  const double vn = std::hypot(vx, vy);
  const double nn = std::hypot(normal.x, normal.y);
  const double cosang = std::min(1.0, std::abs(vx * normal.x + vy * normal.y) / (vn * nn));
  t.angle_deg = std::acos(cosang) * 180.0 / std::numbers::pi;

  const bool ratio_ok = t.lambda2 == 0 ? true : t.lambda1 / t.lambda2 >= params.t_eigen_ext;
  t.pass = ratio_ok && t.angle_deg <= params.t_angle_ext;
  return t;
}

std::optional<Jump> can_continue(const SegmentCandidate& seg, Pixel c, Direction dir,
                                 const GradientMap& grad, const DrawState& state,
                                 const DetectorParams& params, bool forward) {
  (void)forward;
  if (!seg.fit.valid()) return std::nullopt;
  const bool hz = horizontal_axis(dir);
  const Pixel s = step(dir);
  Point2 u = seg.fit.unit_direction();
  if (u.x * s.x + u.y * s.y < 0) u = {-u.x, -u.y};
  const double u_major = hz ? u.x : u.y;
  if (std::abs(u_major) < 1e-9) return std::nullopt;
  const Point2 origin = seg.fit.project({double(c.x), double(c.y)});

  for (int J : params.jump_lengths) {
    // (1) the segment must be longer than the jump
    if (seg.size() <= static_cast<size_t>(J)) break;

    // (2) landing pixel J steps ahead on the fitted line
    Pixel landing;
    if (hz) {
      landing.x = c.x + J * s.x;
      const double t = (landing.x - origin.x) / u.x;
      landing.y = static_cast<int>(std::lround(origin.y + t * u.y));
    } else {
      landing.y = c.y + J * s.y;
      const double t = (landing.y - origin.y) / u.y;
      landing.x = static_cast<int>(std::lround(origin.x + t * u.x));
    }
    if (!grad.contains(landing) || grad.mag(landing) <= 0 || state.is_visited(landing))
      continue;
    std::vector<Pixel> line = bresenham(c, landing);
    std::vector<Pixel> gap(line.begin() + 1, line.end() - 1);

    // (3) the edge must be drawable for J pixels from the landing pixel
    std::vector<Pixel> ext{landing};
    Pixel cur = landing;
    Pixel prev = gap.empty() ? c : gap.back();
    while (ext.size() < static_cast<size_t>(J)) {
      auto nxt = draw_next_pixel(cur, prev, dir, grad, &seg.fit);
      if (!nxt || state.is_visited(*nxt)) break;
      prev = cur;
      cur = *nxt;
      ext.push_back(cur);
    }
    if (ext.size() < static_cast<size_t>(J)) continue;

    // (4) the extension region must carry one dominant gradient direction
    if (params.jump_validation_enabled) {
      const TensorTest t =
          extension_tensor_test(grad, ext, dir, seg.fit.unit_normal(), params);
      if (!t.pass) continue;
    }
    return Jump{landing, dir, J, std::move(gap)};
  }
  return std::nullopt;
}

// ------------------------------------------------------------------- EED

namespace {

enum Side : int { kBack = 0, kFront = 1 };
enum class Kind : uint8_t { Fresh, Continue, Jump };
enum class Halt : uint8_t { Weak, Visited, Outliers };

struct Entry {
  Kind kind;
  Pixel px;
  Direction dir;
  int track;
  int side;
  std::vector<Pixel> gap;
};

struct Track {
  std::deque<Pixel> pre;
  std::optional<SegmentCandidate> seg;
  int created = -1;  // order of segment creation
  bool pending[2] = {false, false};
  bool explored[2] = {false, false};
};

class Drawer {
 public:
  Drawer(const GradientMap& grad, DrawState& state, const DetectorParams& params)
      : grad_(grad), state_(state), params_(params) {}

  std::vector<SegmentCandidate> run(const Anchor& a);

 private:
  Pixel end_pixel(const Track& t, int side) const {
    if (t.seg) return side == kBack ? t.seg->chain.back() : t.seg->chain.front();
    return side == kBack ? t.pre.back() : t.pre.front();
  }
  Pixel inward_pixel(const Track& t, int side, Pixel fallback) const {
    const std::deque<Pixel>& ch = t.seg ? t.seg->chain : t.pre;
    if (ch.size() < 2) return fallback;
    return side == kBack ? ch[ch.size() - 2] : ch[1];
  }
  void mark(Pixel p) {
    state_.set_visited(p, true);
    marked_.push_back(p);
  }

  void commit_inlier(SegmentCandidate& seg, std::vector<Pixel>& pending, Pixel p,
                     bool at_front) {
    for (const Pixel& q : pending) {
      if (at_front)
        seg.chain.push_front(q);
      else
        seg.chain.push_back(q);
    }
    pending.clear();
    add_pixel_to_segment(seg, p, params_, at_front);
  }

  bool is_inlier(const SegmentCandidate& seg, Pixel p) const {
    return seg.fit.distance({double(p.x), double(p.y)}) <= params_.t_px_to_seg_dist;
  }

  void try_create_segment(Track& t, int side);
  Direction turn_direction(Pixel c, Pixel from, Direction dir) const;
  void walk(int ti, int side, Pixel cur, Pixel prev, Direction dir);

  const GradientMap& grad_;
  DrawState& state_;
  const DetectorParams& params_;
  std::vector<Track> tracks_;
  std::vector<Entry> stack_;
  std::vector<Pixel> marked_;
  int created_ = 0;
};

void Drawer::try_create_segment(Track& t, int side) {
  const size_t L = static_cast<size_t>(params_.t_min_length);
  if (t.pre.size() < L) return;
  std::vector<Pixel> window;
  window.reserve(L);
  if (side == kBack)
    window.assign(t.pre.end() - static_cast<std::ptrdiff_t>(L), t.pre.end());
  else
    window.assign(t.pre.begin(), t.pre.begin() + static_cast<std::ptrdiff_t>(L));
  auto s = fit_new_segment(window, params_);
  if (!s) return;
  t.seg = std::move(*s);
  t.created = created_++;

  // Earlier chain pixels on the far side of the window join while they fit.
  SegmentCandidate& seg = *t.seg;
  std::vector<Pixel> pending;
  const bool at_front = side == kBack;
  const ptrdiff_t n = static_cast<ptrdiff_t>(t.pre.size());
  const ptrdiff_t L2 = static_cast<ptrdiff_t>(L);
  int run = 0;
  for (ptrdiff_t k = 0; k < n - L2; ++k) {
    const Pixel p = side == kBack ? t.pre[n - L2 - 1 - k] : t.pre[L2 + k];
    if (is_inlier(seg, p)) {
      commit_inlier(seg, pending, p, at_front);
      run = 0;
    } else {
      pending.push_back(p);
      ++seg.outlier_count;
      if (++run > params_.t_ol) break;
    }
  }
  seg.outlier_run = 0;
}

Direction Drawer::turn_direction(Pixel c, Pixel from, Direction dir) const {
  const bool hz = horizontal_axis(dir);
  const bool c_hz = grad_.orientation(c) == EdgeOrient::Horizontal;
  if (c_hz == hz) return dir;
  // Orientation changed: head along the new axis, on the side the drift went.
  int lateral = hz ? c.y - from.y : c.x - from.x;
  if (lateral == 0) {
    const Pixel perp = hz ? Pixel{0, 1} : Pixel{1, 0};
    const int gp = grad_.mag_or_zero({c.x + perp.x, c.y + perp.y});
    const int gm = grad_.mag_or_zero({c.x - perp.x, c.y - perp.y});
    lateral = gp >= gm ? 1 : -1;
  }
  if (hz) return lateral > 0 ? Direction::Down : Direction::Up;
  return lateral > 0 ? Direction::Right : Direction::Left;
}

void Drawer::walk(int ti, int side, Pixel cur, Pixel prev, Direction dir) {
  const bool at_front = side == kFront;
  std::vector<Pixel> trailing;
  int run = 0;
  Halt halt = Halt::Weak;
  while (true) {
    Track& t = tracks_[ti];
    const LineFit* fit = t.seg ? &t.seg->fit : nullptr;
    auto nxt = draw_next_pixel(cur, prev, dir, grad_, fit);
    if (!nxt) {
      halt = Halt::Weak;
      break;
    }
    if (state_.is_visited(*nxt)) {
      halt = Halt::Visited;
      break;
    }
    mark(*nxt);
    prev = cur;
    cur = *nxt;
    if (t.seg) {
      if (is_inlier(*t.seg, cur)) {
        commit_inlier(*t.seg, trailing, cur, at_front);
        run = 0;
      } else {
        trailing.push_back(cur);
        ++t.seg->outlier_count;
        if (++run > params_.t_ol) {
          halt = Halt::Outliers;
          break;
        }
      }
    } else {
      if (at_front)
        t.pre.push_front(cur);
      else
        t.pre.push_back(cur);
      try_create_segment(t, side);
    }
  }

  for (const Pixel& p : trailing) state_.set_visited(p, false);

  Track& t = tracks_[ti];
  if (halt == Halt::Outliers) {
    const Pixel from = end_pixel(t, side);
    stack_.push_back({Kind::Fresh, cur, turn_direction(cur, from, dir), -1, kBack, {}});
  }
  if (!t.seg) return;
  t.explored[side] = true;
  const int other = 1 - side;
  if (!t.pending[other] && !t.explored[other]) {
    t.pending[other] = true;
    stack_.push_back({Kind::Continue, end_pixel(t, other), opposite(dir), ti, other, {}});
  }
  if (params_.jumps_enabled) {
    const Pixel e = end_pixel(t, side);
    auto j = can_continue(*t.seg, e, dir, grad_, state_, params_, side == kBack);
    if (j) {
      t.pending[side] = true;
      stack_.push_back({Kind::Jump, j->landing, dir, ti, side, std::move(j->gap)});
    }
  }
}

std::vector<SegmentCandidate> Drawer::run(const Anchor& a) {
  if (!grad_.contains(a.pixel) || grad_.mag(a.pixel) <= 0 || state_.is_visited(a.pixel))
    return {};
  const Direction d_back = a.orient == EdgeOrient::Horizontal ? Direction::Left : Direction::Up;
  const Direction d_fwd = opposite(d_back);

  tracks_.push_back({});
  tracks_[0].pre.push_back(a.pixel);
  tracks_[0].pending[kBack] = tracks_[0].pending[kFront] = true;
  mark(a.pixel);
  stack_.push_back({Kind::Continue, a.pixel, d_back, 0, kFront, {}});
  stack_.push_back({Kind::Continue, a.pixel, d_fwd, 0, kBack, {}});

  const size_t budget = 8 * static_cast<size_t>(grad_.width) * grad_.height + 64;
  size_t iterations = 0;
  while (!stack_.empty() && iterations++ < budget) {
    Entry e = std::move(stack_.back());
    stack_.pop_back();
    switch (e.kind) {
      case Kind::Fresh: {
        if (!grad_.contains(e.px) || grad_.mag(e.px) <= 0 || state_.is_visited(e.px)) break;
        const int ti = static_cast<int>(tracks_.size());
        tracks_.push_back({});
        tracks_[ti].pre.push_back(e.px);
        mark(e.px);
        const Pixel s = step(e.dir);
        walk(ti, kBack, e.px, {e.px.x - s.x, e.px.y - s.y}, e.dir);
        break;
      }
      case Kind::Continue: {
        Track& t = tracks_[e.track];
        t.pending[e.side] = false;
        const Pixel cur = end_pixel(t, e.side);
        const Pixel s = step(e.dir);
        const Pixel prev = inward_pixel(t, e.side, {cur.x - s.x, cur.y - s.y});
        walk(e.track, e.side, cur, prev, e.dir);
        break;
      }
      case Kind::Jump: {
        Track& t = tracks_[e.track];
        t.pending[e.side] = false;
        if (!t.seg || state_.is_visited(e.px) || grad_.mag(e.px) <= 0) break;
        SegmentCandidate& seg = *t.seg;
        const Pixel from = end_pixel(t, e.side);
        if (!is_inlier(seg, e.px)) break;
        seg.jumped.insert(seg.jumped.end(), e.gap.begin(), e.gap.end());
        mark(e.px);
        add_pixel_to_segment(seg, e.px, params_, e.side == kFront);
        const Pixel prev = e.gap.empty() ? from : e.gap.back();
        walk(e.track, e.side, e.px, prev, e.dir);
        break;
      }
    }
  }
  stack_.clear();

  for (const Pixel& p : marked_)
    if (state_.is_visited(p)) state_.edge_pixels.push_back(p);
  std::vector<Track*> with_seg;
  for (Track& t : tracks_)
    if (t.seg) with_seg.push_back(&t);
  std::sort(with_seg.begin(), with_seg.end(),
            [](const Track* x, const Track* y) { return x->created < y->created; });
  std::vector<SegmentCandidate> out;
  out.reserve(with_seg.size());
  for (Track* t : with_seg) {
    SegmentCandidate& s = *t->seg;
    s.outlier_run = 0;
    s.update_endpoints();
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

std::vector<SegmentCandidate> eed_from_anchor(const Anchor& a, const GradientMap& grad,
                                              DrawState& state,
                                              const DetectorParams& params) {
  Drawer d(grad, state, params);
  return d.run(a);
}

}  // namespace elsed
