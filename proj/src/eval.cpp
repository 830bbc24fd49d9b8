#include "elsed/eval.hpp"

#include <algorithm>
#include <limits>
#include <numbers>

namespace elsed {

// ------------------------------------------------------------- Homography

double Homography::det() const {
  const auto& m = h;
  return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
         m[2] * (m[3] * m[7] - m[4] * m[6]);
}

Homography Homography::inverse() const {
  const auto& m = h;
  const double d = det();
  double scale = 0;
  for (double v : m) scale = std::max(scale, std::abs(v));
  if (scale == 0 || std::abs(d) <= 1e-12 * scale * scale * scale)
    throw Error(ErrorCode::SingularMatrix, "homography is singular");
  Homography r;
  r.h = {(m[4] * m[8] - m[5] * m[7]) / d, (m[2] * m[7] - m[1] * m[8]) / d,
         (m[1] * m[5] - m[2] * m[4]) / d, (m[5] * m[6] - m[3] * m[8]) / d,
         (m[0] * m[8] - m[2] * m[6]) / d, (m[2] * m[3] - m[0] * m[5]) / d,
         (m[3] * m[7] - m[4] * m[6]) / d, (m[1] * m[6] - m[0] * m[7]) / d,
         (m[0] * m[4] - m[1] * m[3]) / d};
  if (r.h[8] != 0) {
    const double s = r.h[8];
    for (double& v : r.h) v /= s;
  }
  return r;
}

Homography Homography::operator*(const Homography& o) const {
  Homography r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0;
      for (int k = 0; k < 3; ++k) s += h[i * 3 + k] * o.h[k * 3 + j];
      r.h[i * 3 + j] = s;
    }
  return r;
}

std::optional<Point2> Homography::apply(Point2 p) const {
  const double w = h[6] * p.x + h[7] * p.y + h[8];
  if (std::abs(w) < 1e-12) return std::nullopt;
  return Point2{(h[0] * p.x + h[1] * p.y + h[2]) / w, (h[3] * p.x + h[4] * p.y + h[5]) / w};
}

// --------------------------------------------------------------- geometry

double structural_distance(const Segment& s1, const Segment& s2) {
  if (s1.length() <= 0 || s2.length() <= 0)
    throw Error(ErrorCode::DegenerateSegment, "structural distance of a degenerate segment");
  const double direct = (distance(s1.p0, s2.p0) + distance(s1.p1, s2.p1)) / 2;
  const double swapped = (distance(s1.p0, s2.p1) + distance(s1.p1, s2.p0)) / 2;
  return std::min(direct, swapped);
}

namespace {

// Parameters of b's endpoints along a, in pixels from a.p0.
std::pair<double, double> projected_interval(const Segment& a, const Segment& b) {
  const double len = a.length();
  const double ux = (a.p1.x - a.p0.x) / len, uy = (a.p1.y - a.p0.y) / len;
  const double t0 = (b.p0.x - a.p0.x) * ux + (b.p0.y - a.p0.y) * uy;
  const double t1 = (b.p1.x - a.p0.x) * ux + (b.p1.y - a.p0.y) * uy;
  return {std::min(t0, t1), std::max(t0, t1)};
}

}  // namespace

double directed_overlap(const Segment& a, const Segment& b) {
  const double len = a.length();
  if (len <= 0) return 0;
  const auto [lo, hi] = projected_interval(a, b);
  return std::max(0.0, std::min(hi, len) - std::max(lo, 0.0));
}

double overlap_union(const Segment& a, const Segment& b) {
  const double len = a.length();
  if (len <= 0) return b.length();
  const auto [lo, hi] = projected_interval(a, b);
  const double inter = std::max(0.0, std::min(hi, len) - std::max(lo, 0.0));
  return len + (hi - lo) - inter;
}

double angular_distance_deg(const Segment& a, const Segment& b) {
  const double ta = std::atan2(a.p1.y - a.p0.y, a.p1.x - a.p0.x);
  const double tb = std::atan2(b.p1.y - b.p0.y, b.p1.x - b.p0.x);
  double d = std::fmod(std::abs(ta - tb), std::numbers::pi);
  if (d > std::numbers::pi / 2) d = std::numbers::pi - d;
  return d * 180.0 / std::numbers::pi;
}

double line_distance(const Segment& s, Point2 p) {
  const double len = s.length();
  if (len <= 0) return distance(s.p0, p);
  const double cross = (s.p1.x - s.p0.x) * (p.y - s.p0.y) - (s.p1.y - s.p0.y) * (p.x - s.p0.x);
  return std::abs(cross) / len;
}

bool gates_pass(const Segment& det, const Segment& gt, const MatchGates& gates) {
  if (det.length() <= 0 || gt.length() <= 0) return false;
  const double uni = overlap_union(gt, det);
  const double iou = uni > 0 ? directed_overlap(gt, det) / uni : 0.0;
  if (iou < gates.lambda_overlap) return false;
  if (angular_distance_deg(det, gt) > gates.lambda_ang) return false;
  if (line_distance(gt, det.midpoint()) > gates.lambda_dist) return false;
  return true;
}

// ------------------------------------------------------------- assignment

IncrementalAssignment::IncrementalAssignment(int cols, int max_rows, double max_cost)
    : m_(cols), mpad_(cols + std::max(0, max_rows)) {
  big_ = (static_cast<double>(std::max(0, max_rows)) + 1) * (std::max(0.0, max_cost) + 1);
  u_.assign(static_cast<size_t>(std::max(0, max_rows)) + 1, 0.0);
  v_.assign(static_cast<size_t>(mpad_) + 1, 0.0);
  p_.assign(static_cast<size_t>(mpad_) + 1, 0);
  way_.assign(static_cast<size_t>(mpad_) + 1, 0);
  a_.emplace_back();  // row 0 unused
}

void IncrementalAssignment::add_row(const std::vector<double>& costs) {
  if (n_ + 1 >= static_cast<int>(u_.size()))
    throw Error(ErrorCode::InvalidArgument, "assignment row capacity exceeded");
  std::vector<double> row(static_cast<size_t>(m_) + 1, big_);
  for (int j = 0; j < m_ && j < static_cast<int>(costs.size()); ++j) {
    const double c = costs[static_cast<size_t>(j)];
    if (std::isfinite(c) && c >= 0) row[static_cast<size_t>(j) + 1] = c;
  }
  a_.push_back(std::move(row));
  const int i = ++n_;

  const double inf = std::numeric_limits<double>::infinity();
  auto cost = [&](int r, int j) { return j <= m_ ? a_[r][j] : big_; };
  std::vector<double> minv(static_cast<size_t>(mpad_) + 1, inf);
  std::vector<char> used(static_cast<size_t>(mpad_) + 1, 0);
  p_[0] = i;
  int j0 = 0;
  do {
    used[j0] = 1;
    const int i0 = p_[j0];
    double delta = inf;
    int j1 = 0;
    for (int j = 1; j <= mpad_; ++j) {
      if (used[j]) continue;
      const double cur = cost(i0, j) - u_[i0] - v_[j];
      if (cur < minv[j]) {
        minv[j] = cur;
        way_[j] = j0;
      }
      if (minv[j] < delta) {
        delta = minv[j];
        j1 = j;
      }
    }
    for (int j = 0; j <= mpad_; ++j) {
      if (used[j]) {
        u_[p_[j]] += delta;
        v_[j] -= delta;
      } else {
        minv[j] -= delta;
      }
    }
    j0 = j1;
  } while (p_[j0] != 0);
  do {
    const int j1 = way_[j0];
    p_[j0] = p_[j1];
    j0 = j1;
  } while (j0 != 0);
}

std::vector<int> IncrementalAssignment::row_to_col() const {
  std::vector<int> out(static_cast<size_t>(n_), -1);
  for (int j = 1; j <= m_; ++j) {
    const int r = p_[j];
    if (r > 0 && a_[r][j] < big_) out[static_cast<size_t>(r) - 1] = j - 1;
  }
  return out;
}

std::vector<int> solve_assignment(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  const int m = n > 0 ? static_cast<int>(cost[0].size()) : 0;
  double max_cost = 0;
  for (const auto& r : cost)
    for (double c : r)
      if (std::isfinite(c) && c >= 0) max_cost = std::max(max_cost, c);
  IncrementalAssignment solver(m, n, max_cost);
  for (const auto& r : cost) solver.add_row(r);
  return solver.row_to_col();
}

// --------------------------------------------------------------- matching

double MatchResult::total_cost() const {
  double s = 0;
  for (const MatchPair& p : pairs) s += p.cost;
  return s;
}

namespace {

struct CostTable {
  std::vector<std::vector<double>> cost;  // -1 when a gate fails
  std::vector<char> has_feasible;
  int feasible_rows = 0;
  double max_cost = 0;
};

CostTable build_costs(const std::vector<Segment>& det, const std::vector<Segment>& gt,
                      const MatchGates& gates) {
  CostTable t;
  t.cost.assign(det.size(), std::vector<double>(gt.size(), -1.0));
  t.has_feasible.assign(det.size(), 0);
  for (size_t i = 0; i < det.size(); ++i) {
    for (size_t j = 0; j < gt.size(); ++j) {
      if (!gates_pass(det[i], gt[j], gates)) continue;
      const double c = structural_distance(det[i], gt[j]);
      t.cost[i][j] = c;
      t.max_cost = std::max(t.max_cost, c);
      t.has_feasible[i] = 1;
    }
    t.feasible_rows += t.has_feasible[i];
  }
  return t;
}

// Sweeps rows in order; fn(k, row_to_col) sees the optimum for rows [0, k].
template <typename Fn>
void sweep_assignment(const CostTable& t, size_t gt_count, Fn&& fn) {
  IncrementalAssignment solver(static_cast<int>(gt_count), t.feasible_rows, t.max_cost);
  std::vector<int> active;  // detection index of each solver row
  std::vector<int> assign(t.cost.size(), -1);
  for (size_t i = 0; i < t.cost.size(); ++i) {
    if (t.has_feasible[i]) {
      solver.add_row(t.cost[i]);
      active.push_back(static_cast<int>(i));
      const std::vector<int> r2c = solver.row_to_col();
      for (size_t k = 0; k < active.size(); ++k) assign[static_cast<size_t>(active[k])] = r2c[k];
    }
    fn(i, assign);
  }
}

MatchResult to_match(const CostTable& t, const std::vector<int>& assign, size_t det_count,
                     size_t gt_count) {
  MatchResult r;
  std::vector<char> gt_used(gt_count, 0);
  for (size_t i = 0; i < det_count; ++i) {
    const int j = assign[i];
    if (j >= 0) {
      r.pairs.push_back({static_cast<int>(i), j, t.cost[i][static_cast<size_t>(j)]});
      gt_used[static_cast<size_t>(j)] = 1;
    } else {
      r.unmatched_detected.push_back(static_cast<int>(i));
    }
  }
  for (size_t j = 0; j < gt_count; ++j)
    if (!gt_used[j]) r.unmatched_gt.push_back(static_cast<int>(j));
  return r;
}

}  // namespace

MatchResult match_segments(const std::vector<Segment>& det, const std::vector<Segment>& gt,
                           const MatchGates& gates) {
  const CostTable t = build_costs(det, gt, gates);
  std::vector<int> final_assign(det.size(), -1);
  sweep_assignment(t, gt.size(), [&](size_t k, const std::vector<int>& a) {
    if (k + 1 == det.size()) final_assign = a;
  });
  return to_match(t, final_assign, det.size(), gt.size());
}

CoverageSums& CoverageSums::operator+=(const CoverageSums& o) {
  det_inter += o.det_inter;
  det_len += o.det_len;
  gt_inter += o.gt_inter;
  gt_len += o.gt_len;
  gt_union += o.gt_union;
  matches += o.matches;
  gt_count += o.gt_count;
  return *this;
}

CoverageSums coverage(const MatchResult& match, const std::vector<Segment>& det,
                      const std::vector<Segment>& gt) {
  CoverageSums s;
  for (const Segment& d : det) s.det_len += d.length();
  for (const Segment& g : gt) s.gt_len += g.length();
  s.gt_count = gt.size();
  for (const MatchPair& p : match.pairs) {
    const Segment& d = det[static_cast<size_t>(p.det)];
    const Segment& g = gt[static_cast<size_t>(p.gt)];
    s.det_inter += directed_overlap(d, g);
    s.gt_inter += directed_overlap(g, d);
    s.gt_union += overlap_union(g, d);
    ++s.matches;
  }
  return s;
}

EvalMetrics metrics_from(const CoverageSums& s) {
  EvalMetrics m;
  m.precision = s.det_len > 0 ? s.det_inter / s.det_len : 0.0;
  m.recall_undefined = s.gt_count == 0 || s.gt_len <= 0;
  m.recall = m.recall_undefined ? 0.0 : s.gt_inter / s.gt_len;
  m.iou = s.gt_union > 0 ? s.gt_inter / s.gt_union : 0.0;
  const double pr = m.precision + m.recall;
  m.f_score = pr > 0 ? 2 * m.precision * m.recall / pr : 0.0;
  return m;
}

EvalMetrics metrics(const MatchResult& match, const std::vector<Segment>& det,
                    const std::vector<Segment>& gt) {
  return metrics_from(coverage(match, det, gt));
}

PrCurve pr_curve(const std::vector<Segment>& det, const std::vector<Segment>& gt,
                 const MatchGates& gates) {
  PrCurve curve;
  if (det.empty()) return curve;
  double gt_len = 0;
  for (const Segment& g : gt) gt_len += g.length();
  const CostTable t = build_costs(det, gt, gates);
  double prefix_len = 0;
  curve.points.reserve(det.size());
  sweep_assignment(t, gt.size(), [&](size_t k, const std::vector<int>& a) {
    prefix_len += det[k].length();
    double det_inter = 0, gt_inter = 0;
    for (size_t i = 0; i <= k; ++i) {
      if (a[i] < 0) continue;
      const Segment& g = gt[static_cast<size_t>(a[i])];
      det_inter += directed_overlap(det[i], g);
      gt_inter += directed_overlap(g, det[i]);
    }
    PrPoint p;
    p.precision = prefix_len > 0 ? det_inter / prefix_len : 0.0;
    p.recall = gt_len > 0 ? gt_inter / gt_len : 0.0;
    curve.points.push_back(p);
  });

  // Trapezoids from R = 0, holding the first precision at the origin.
  double prev_r = 0, prev_p = curve.points.front().precision;
  for (const PrPoint& p : curve.points) {
    curve.ap += (p.recall - prev_r) * (p.precision + prev_p) / 2;
    prev_r = p.recall;
    prev_p = p.precision;
    curve.max_recall = std::max(curve.max_recall, p.recall);
  }
  curve.bap = curve.max_recall > 0 ? curve.ap / curve.max_recall : 0.0;
  return curve;
}

EvalMetrics evaluate(std::vector<Segment> det, const std::vector<Segment>& gt,
                     const MatchGates& gates, CoverageSums* sums) {
  std::stable_sort(det.begin(), det.end(),
                   [](const Segment& a, const Segment& b) { return a.score > b.score; });
  const MatchResult m = match_segments(det, gt, gates);
  const CoverageSums s = coverage(m, det, gt);
  if (sums) *sums = s;
  EvalMetrics out = metrics_from(s);
  const PrCurve c = pr_curve(det, gt, gates);
  out.ap = c.ap;
  out.bap = c.bap;
  return out;
}

// ----------------------------------------------------------- projections

std::optional<Segment> clip_segment(const Segment& s, ImageSize size) {
  // Liang-Barsky against [0, w-1] x [0, h-1].
  const double xmin = 0, ymin = 0, xmax = size.width - 1.0, ymax = size.height - 1.0;
  const double dx = s.p1.x - s.p0.x, dy = s.p1.y - s.p0.y;
  double t0 = 0, t1 = 1;
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {s.p0.x - xmin, xmax - s.p0.x, s.p0.y - ymin, ymax - s.p0.y};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0) {
      if (q[i] < 0) return std::nullopt;
      continue;
    }
    const double r = q[i] / p[i];
    if (p[i] < 0)
      t0 = std::max(t0, r);
    else
      t1 = std::min(t1, r);
    if (t0 > t1) return std::nullopt;
  }
  Segment out = s;
  if (t0 > 0) out.p0 = {s.p0.x + t0 * dx, s.p0.y + t0 * dy};
  if (t1 < 1) out.p1 = {s.p0.x + t1 * dx, s.p0.y + t1 * dy};
  if (out.length() <= 0) return std::nullopt;
  return out;
}

std::optional<Segment> project_segment(const Segment& s, const Homography& h,
                                       ImageSize target) {
  const auto& m = h.h;
  const double w0 = m[6] * s.p0.x + m[7] * s.p0.y + m[8];
  const double w1 = m[6] * s.p1.x + m[7] * s.p1.y + m[8];
  // A sign change means the segment crosses the line at infinity.
  if ((w0 > 0) != (w1 > 0)) return std::nullopt;
  const auto a = h.apply(s.p0);
  const auto b = h.apply(s.p1);
  if (!a || !b) return std::nullopt;
  return clip_segment({*a, *b, s.score}, target);
}

namespace {

double shared_area(const Homography& h_ab, ImageSize a, ImageSize b) {
  // B's frame mapped into A, clipped to A (Sutherland-Hodgman).
  std::vector<Point2> poly;
  const Point2 corners[4] = {{0, 0},
                             {b.width - 1.0, 0},
                             {b.width - 1.0, b.height - 1.0},
                             {0, b.height - 1.0}};
  for (const Point2& c : corners) {
    const auto& m = h_ab.h;
    if (m[6] * c.x + m[7] * c.y + m[8] <= 0) return -1;  // unknown, do not gate
    poly.push_back(*h_ab.apply(c));
  }
  const double xmax = a.width - 1.0, ymax = a.height - 1.0;
  auto clip = [&](auto inside, auto cut) {
    std::vector<Point2> out;
    for (size_t i = 0; i < poly.size(); ++i) {
      const Point2 cur = poly[i], prv = poly[(i + poly.size() - 1) % poly.size()];
      const bool ic = inside(cur), ip = inside(prv);
      if (ic) {
        if (!ip) out.push_back(cut(prv, cur));
        out.push_back(cur);
      } else if (ip) {
        out.push_back(cut(prv, cur));
      }
    }
    poly = std::move(out);
  };
  auto lerp_x = [](Point2 p, Point2 q, double x) {
    const double t = (x - p.x) / (q.x - p.x);
    return Point2{x, p.y + t * (q.y - p.y)};
  };
  auto lerp_y = [](Point2 p, Point2 q, double y) {
    const double t = (y - p.y) / (q.y - p.y);
    return Point2{p.x + t * (q.x - p.x), y};
  };
  clip([](Point2 p) { return p.x >= 0; }, [&](Point2 p, Point2 q) { return lerp_x(p, q, 0); });
  clip([&](Point2 p) { return p.x <= xmax; }, [&](Point2 p, Point2 q) { return lerp_x(p, q, xmax); });
  clip([](Point2 p) { return p.y >= 0; }, [&](Point2 p, Point2 q) { return lerp_y(p, q, 0); });
  clip([&](Point2 p) { return p.y <= ymax; }, [&](Point2 p, Point2 q) { return lerp_y(p, q, ymax); });
  double area = 0;
  for (size_t i = 0; i < poly.size(); ++i) {
    const Point2 p = poly[i], q = poly[(i + 1) % poly.size()];
    area += p.x * q.y - q.x * p.y;
  }
  return std::abs(area) / 2;
}

struct Term {
  double inter = 0, denom = 0;
  size_t matches = 0, count = 0;
};

// Segments of `own` visible in the other view, matched against the other
// view's segments projected into this frame.
Term repeat_term(const std::vector<Segment>& own, const std::vector<Segment>& other,
                 const Homography& own_to_other, const Homography& other_to_own,
                 ImageSize own_size, ImageSize other_size, const MatchGates& gates) {
  std::vector<Segment> visible, projected;
  for (const Segment& s : own) {
    auto there = project_segment(s, own_to_other, other_size);
    if (!there) continue;
    auto back = project_segment(*there, other_to_own, own_size);
    if (back) visible.push_back(*back);
  }
  for (const Segment& s : other) {
    auto here = project_segment(s, other_to_own, own_size);
    if (here) projected.push_back(*here);
  }
  Term t;
  for (const Segment& s : visible) t.denom += s.length();
  for (const Segment& s : projected) t.denom += s.length();
  const MatchResult m = match_segments(visible, projected, gates);
  for (const MatchPair& p : m.pairs)
    t.inter += directed_overlap(visible[static_cast<size_t>(p.det)],
                                projected[static_cast<size_t>(p.gt)]);
  t.matches = m.pairs.size();
  t.count = visible.size();
  return t;
}

}  // namespace

Repeatability repeatability(const std::vector<Segment>& segs_a,
                            const std::vector<Segment>& segs_b, const Homography& h_ab,
                            ImageSize size_a, ImageSize size_b, const MatchGates& gates) {
  Repeatability r;
  const Homography h_ba = h_ab.inverse();
  if (shared_area(h_ab, size_a, size_b) == 0) {
    r.no_shared_region = true;
    return r;
  }
  const Term ta = repeat_term(segs_a, segs_b, h_ba, h_ab, size_a, size_b, gates);
  const Term tb = repeat_term(segs_b, segs_a, h_ab, h_ba, size_b, size_a, gates);
  if (ta.denom > 0) r.length += ta.inter / ta.denom;
  if (tb.denom > 0) r.length += tb.inter / tb.denom;
  r.matches_a = ta.matches;
  r.matches_b = tb.matches;
  const double mean_count = (ta.count + tb.count) / 2.0;
  r.count = mean_count > 0 ? (ta.matches + tb.matches) / 2.0 / mean_count : 0.0;
  return r;
}

}  // namespace elsed
