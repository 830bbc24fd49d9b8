#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "elsed/types.hpp"

namespace elsed {

// Row-major 3x3 matrix acting on homogeneous column vectors (x, y, 1).
struct Homography {
  std::array<double, 9> h{1, 0, 0, 0, 1, 0, 0, 0, 1};

  static Homography identity() { return {}; }
  static Homography translation(double tx, double ty) {
    return {{1, 0, tx, 0, 1, ty, 0, 0, 1}};
  }
  double det() const;
  Homography inverse() const;  // throws SingularMatrix
  Homography operator*(const Homography& o) const;
  // nullopt when p lands on the line at infinity.
  std::optional<Point2> apply(Point2 p) const;
};

struct MatchGates {
  double lambda_overlap = 0.1;
  double lambda_ang = 15.0;  // degrees
  double lambda_dist = 2.0 * std::sqrt(2.0);
};

inline MatchGates repeatability_gates() { return {0.5, 15.0, 5.0}; }

struct MatchPair {
  int det = -1;
  int gt = -1;
  double cost = 0.0;
};

struct MatchResult {
  std::vector<MatchPair> pairs;
  std::vector<int> unmatched_detected;
  std::vector<int> unmatched_gt;

  double total_cost() const;
};

struct EvalMetrics {
  double precision = 0, recall = 0, iou = 0, f_score = 0, ap = 0, bap = 0;
  bool recall_undefined = false;  // no ground truth
};

// Matched lengths, kept separately so datasets can be pooled.
struct CoverageSums {
  double det_inter = 0, det_len = 0;
  double gt_inter = 0, gt_len = 0, gt_union = 0;
  size_t matches = 0;
  size_t gt_count = 0;

  CoverageSums& operator+=(const CoverageSums& o);
};

double structural_distance(const Segment& s1, const Segment& s2);
// Length of b's projection onto a's line that falls inside a.
double directed_overlap(const Segment& a, const Segment& b);
// Length of the union of a and b's projection, on a's line.
double overlap_union(const Segment& a, const Segment& b);
// Undirected angle between the two supporting lines, in [0, 90] degrees.
double angular_distance_deg(const Segment& a, const Segment& b);
// Perpendicular distance from p to the infinite line through s.
double line_distance(const Segment& s, Point2 p);

bool gates_pass(const Segment& det, const Segment& gt, const MatchGates& gates);

// Min-cost assignment with forbidden entries, solved row by row so each
// prefix of rows is optimal: as many allowed pairs as possible, then the
// least total cost among those.
class IncrementalAssignment {
 public:
  // max_cost bounds every allowed cost; max_rows bounds add_row calls.
  IncrementalAssignment(int cols, int max_rows, double max_cost);
  // costs[j] < 0 or non-finite marks a forbidden pair.
  void add_row(const std::vector<double>& costs);
  // Column of each row, or -1.
  std::vector<int> row_to_col() const;
  int rows() const { return n_; }

 private:
  int m_;      // real columns
  int mpad_;   // real + padding columns
  int n_ = 0;
  double big_;
  std::vector<std::vector<double>> a_;  // 1-based
  std::vector<double> u_, v_;
  std::vector<int> p_, way_;
};

std::vector<int> solve_assignment(const std::vector<std::vector<double>>& cost);

MatchResult match_segments(const std::vector<Segment>& det, const std::vector<Segment>& gt,
                           const MatchGates& gates = {});

CoverageSums coverage(const MatchResult& match, const std::vector<Segment>& det,
                      const std::vector<Segment>& gt);
EvalMetrics metrics_from(const CoverageSums& sums);
EvalMetrics metrics(const MatchResult& match, const std::vector<Segment>& det,
                    const std::vector<Segment>& gt);

struct PrPoint {
  double recall = 0;
  double precision = 0;
};

struct PrCurve {
  std::vector<PrPoint> points;  // one per detection prefix
  double ap = 0;
  double bap = 0;
  double max_recall = 0;
};

// det must be sorted by descending score.
PrCurve pr_curve(const std::vector<Segment>& det, const std::vector<Segment>& gt,
                 const MatchGates& gates = {});

// Last-point metrics plus AP/bAP; det is sorted by score internally.
EvalMetrics evaluate(std::vector<Segment> det, const std::vector<Segment>& gt,
                     const MatchGates& gates = {}, CoverageSums* sums = nullptr);

struct ImageSize {
  int width = 0;
  int height = 0;
};

std::optional<Segment> clip_segment(const Segment& s, ImageSize size);
std::optional<Segment> project_segment(const Segment& s, const Homography& h,
                                       ImageSize target);

struct Repeatability {
  double length = 0;  // length-based repeatability
  double count = 0;   // matched pairs over mean segment count
  size_t matches_a = 0, matches_b = 0;
  bool no_shared_region = false;
};

// h_ab maps frame-B coordinates into frame A.
Repeatability repeatability(const std::vector<Segment>& segs_a,
                            const std::vector<Segment>& segs_b, const Homography& h_ab,
                            ImageSize size_a, ImageSize size_b,
                            const MatchGates& gates = repeatability_gates());

}  // namespace elsed
