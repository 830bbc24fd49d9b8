#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "elsed/anchors.hpp"
#include "fixtures.hpp"

using namespace elsed;

namespace {

GradientMap manual_map(int w, int h) {
  GradientMap g;
  g.width = w;
  g.height = h;
  const size_t n = static_cast<size_t>(w) * h;
  g.gx.assign(n, 0);
  g.gy.assign(n, 0);
  g.g.assign(n, 0);
  g.orient.assign(n, EdgeOrient::Vertical);
  return g;
}

}  // namespace

TEST(Anchors, MarginTestIsTwoSided) {
  GradientMap g = manual_map(5, 5);
  g.g[g.index({1, 2})] = 10;
  g.g[g.index({2, 2})] = 18;
  g.g[g.index({3, 2})] = 10;
  EXPECT_TRUE(is_anchor(g, {2, 2}, 8));
  g.g[g.index({3, 2})] = 11;
  EXPECT_FALSE(is_anchor(g, {2, 2}, 8));
}

TEST(Anchors, HorizontalEdgesCompareAlongY) {
  GradientMap g = manual_map(5, 5);
  const size_t c = g.index({2, 2});
  g.orient[c] = EdgeOrient::Horizontal;
  g.g[c] = 50;
  g.g[g.index({1, 2})] = 50;  // same row: irrelevant for a horizontal edge
  g.g[g.index({3, 2})] = 50;
  EXPECT_TRUE(is_anchor(g, {2, 2}, 8));
  g.g[g.index({2, 1})] = 45;
  EXPECT_FALSE(is_anchor(g, {2, 2}, 8));
}

TEST(Anchors, ZeroMagnitudeIsNeverAnAnchor) {
  GradientMap g = manual_map(5, 5);
  EXPECT_FALSE(is_anchor(g, {2, 2}, 0));
}

TEST(Anchors, StepEdgeColumnIsAnchoredOnEveryScannedRow) {
  // 0 | 128 | 255 step: Sobel gx is 512, 1020 and 508 on columns 9, 10, 11.
  GrayImage img(20, 20, 0);
  for (int y = 0; y < 20; ++y) {
    img.at(10, y) = 128;
    for (int x = 11; x < 20; ++x) img.at(x, y) = 255;
  }
  const GradientMap g = compute_gradient(img, 30);
  const auto anchors = extract_anchors(g, 8, 2);
  std::set<int> rows;
  for (const Anchor& a : anchors) {
    EXPECT_EQ(a.pixel.x, 10);
    EXPECT_EQ(a.orient, EdgeOrient::Vertical);
    EXPECT_EQ(a.magnitude, 1020);
    rows.insert(a.pixel.y);
  }
  EXPECT_EQ(rows, (std::set<int>{2, 4, 6, 8, 10, 12, 14, 16, 18}));
}

TEST(Anchors, ConstantImageHasNone) {
  const GradientMap g = compute_gradient(GrayImage(32, 32, 7), 30);
  EXPECT_TRUE(extract_anchors(g, 8, 1).empty());
}

TEST(Anchors, SortedByMagnitudeWithRowMajorTies) {
  GradientMap g = manual_map(9, 9);
  auto put = [&](int x, int y, int v) { g.g[g.index({x, y})] = static_cast<int16_t>(v); };
  put(6, 2, 40);
  put(2, 4, 90);
  put(4, 2, 40);
  put(2, 6, 40);
  const auto a = extract_anchors(g, 8, 2);
  ASSERT_EQ(a.size(), 4u);
  EXPECT_EQ(a[0].pixel, (Pixel{2, 4}));
  EXPECT_EQ(a[1].pixel, (Pixel{4, 2}));
  EXPECT_EQ(a[2].pixel, (Pixel{6, 2}));
  EXPECT_EQ(a[3].pixel, (Pixel{2, 6}));
}

TEST(Anchors, ScanIntervalSubsetAndReverification) {
  const GradientMap g =
      compute_gradient(gaussian_blur(fixtures::urban_scene(160, 120, 3), 5, 1.0), 30);
  const auto a1 = extract_anchors(g, 8, 1);
  const auto a2 = extract_anchors(g, 8, 2);
  std::set<std::pair<int, int>> s1;
  for (const Anchor& a : a1) s1.insert({a.pixel.x, a.pixel.y});
  for (const Anchor& a : a2) {
    EXPECT_EQ(a.pixel.x % 2, 0);
    EXPECT_EQ(a.pixel.y % 2, 0);
    EXPECT_TRUE(s1.count({a.pixel.x, a.pixel.y}));
    EXPECT_GT(g.mag(a.pixel), 0);
    EXPECT_TRUE(is_anchor(g, a.pixel, 8));
    EXPECT_EQ(a.magnitude, g.mag(a.pixel));
  }
  EXPECT_FALSE(a2.empty());
}

TEST(Anchors, RaisingThresholdNeverAddsAnchors) {
  const GradientMap g =
      compute_gradient(gaussian_blur(fixtures::urban_scene(160, 120, 4), 5, 1.0), 30);
  size_t prev = SIZE_MAX;
  for (double t : {0.0, 4.0, 8.0, 16.0, 32.0, 64.0}) {
    const size_t n = extract_anchors(g, t, 1).size();
    EXPECT_LE(n, prev);
    prev = n;
  }
}

TEST(Anchors, RejectsBadArguments) {
  const GradientMap g = manual_map(4, 4);
  EXPECT_THROW(extract_anchors(g, 8, 0), Error);
  EXPECT_THROW(extract_anchors(g, -1, 1), Error);
}
