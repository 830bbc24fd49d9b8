#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "elsed/imgproc.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace elsed;

namespace {

GrayImage ramp_x(int w, int h, int slope) {
  GrayImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.at(x, y) = static_cast<uint8_t>(10 + slope * x);
  return img;
}

}  // namespace

TEST(GaussianKernel, SumsToOneInFixedPoint) {
  for (int k : {3, 5, 7, 9})
    for (double s : {0.5, 1.0, 2.0}) {
      const auto w = gaussian_kernel_1d(k, s);
      ASSERT_EQ(static_cast<int>(w.size()), k);
      EXPECT_EQ(std::accumulate(w.begin(), w.end(), 0), kGaussianOne);
      for (int i = 0; i < k; ++i) EXPECT_EQ(w[i], w[k - 1 - i]);
    }
}

TEST(GaussianKernel, DefaultTapsMatchContinuousWeights) {
  const auto w = gaussian_kernel_1d(5, 1.0);
  // exp(-i^2/2) normalized: 0.054489, 0.244201, 0.402620
  EXPECT_NEAR(w[0] / 1024.0, 0.054489, 1.0 / 1024);
  EXPECT_NEAR(w[1] / 1024.0, 0.244201, 1.0 / 1024);
  EXPECT_NEAR(w[2] / 1024.0, 0.402620, 1.5 / 1024);
}

TEST(GaussianKernel, RejectsBadArguments) {
  EXPECT_THROW(gaussian_kernel_1d(4, 1.0), Error);
  EXPECT_THROW(gaussian_kernel_1d(1, 1.0), Error);
  EXPECT_THROW(gaussian_kernel_1d(5, 0.0), Error);
}

TEST(GaussianBlur, ConstantImageIsUnchanged) {
  const GrayImage img(31, 17, 173);
  const GrayImage out = gaussian_blur(img, 5, 1.0);
  for (uint8_t v : out.data) EXPECT_EQ(v, 173);
}

TEST(GaussianBlur, ImpulseResponseIsOuterProductOfTaps) {
  GrayImage img(11, 11, 0);
  img.at(5, 5) = 255;
  const GrayImage out = gaussian_blur(img, 5, 1.0);
  const auto k = gaussian_kernel_1d(5, 1.0);
  for (int y = 0; y < 11; ++y)
    for (int x = 0; x < 11; ++x) {
      const int dx = x - 5, dy = y - 5;
      long long expect = 0;
      if (std::abs(dx) <= 2 && std::abs(dy) <= 2) {
        const long long v = 255LL * k[dx + 2] * k[dy + 2];
        expect = (v + (1LL << 19)) >> 20;
      }
      EXPECT_EQ(out.at(x, y), expect) << x << "," << y;
    }
}

TEST(GaussianBlur, WithinOneLevelOfFloatingPointReference) {
  const GrayImage img = fixtures::uniform_noise(64, 48, 11);
  const GrayImage ours = gaussian_blur(img, 5, 1.0);
  const GrayImage ref = oracles::blur(img, 5, 1.0);
  for (size_t i = 0; i < ours.data.size(); ++i)
    ASSERT_LE(std::abs(int(ours.data[i]) - int(ref.data[i])), 1) << "index " << i;
}

TEST(GaussianBlur, ReplicatesBorders) {
  // A column of 200 at x = 0 stays 200 after blurring when the rest of the row is too.
  GrayImage img(20, 20, 200);
  for (int y = 0; y < 20; ++y) img.at(19, y) = 0;
  const GrayImage out = gaussian_blur(img, 5, 1.0);
  for (int y = 0; y < 20; ++y) EXPECT_EQ(out.at(0, y), 200);
}

TEST(Gradient, RampOfSlopeFourGivesThirtyTwo) {
  const GradientMap g = compute_gradient(ramp_x(20, 10, 4), 30);
  for (int y = 1; y < 9; ++y)
    for (int x = 1; x < 19; ++x) {
      const size_t i = g.index({x, y});
      EXPECT_EQ(g.gx[i], 32);
      EXPECT_EQ(g.gy[i], 0);
      EXPECT_EQ(g.g[i], 32);
      EXPECT_EQ(g.orient[i], EdgeOrient::Vertical);
    }
}

TEST(Gradient, WeakRampIsSuppressedButKeepsComponents) {
  const GradientMap g = compute_gradient(ramp_x(20, 10, 2), 30);
  const size_t i = g.index({5, 5});
  EXPECT_EQ(g.gx[i], 16);
  EXPECT_EQ(g.g[i], 0);
}

TEST(Gradient, MatchesHandWrittenSobel) {
  const GrayImage img = fixtures::uniform_noise(40, 30, 3);
  const GradientMap g = compute_gradient(img, 30);
  for (int y = 1; y < 29; ++y)
    for (int x = 1; x < 39; ++x) {
      const auto s = oracles::sobel_at(img, x, y);
      const size_t i = g.index({x, y});
      ASSERT_EQ(g.gx[i], s.gx);
      ASSERT_EQ(g.gy[i], s.gy);
      const int l1 = std::abs(s.gx) + std::abs(s.gy);
      ASSERT_EQ(g.g[i], l1 >= 30 ? l1 : 0);
      ASSERT_EQ(g.orient[i], std::abs(s.gx) >= std::abs(s.gy) ? EdgeOrient::Vertical
                                                               : EdgeOrient::Horizontal);
    }
}

TEST(Gradient, BorderRingIsZero) {
  const GradientMap g = compute_gradient(fixtures::uniform_noise(25, 19, 5), 0);
  for (int x = 0; x < 25; ++x) {
    EXPECT_EQ(g.g[g.index({x, 0})], 0);
    EXPECT_EQ(g.g[g.index({x, 18})], 0);
  }
  for (int y = 0; y < 19; ++y) {
    EXPECT_EQ(g.g[g.index({0, y})], 0);
    EXPECT_EQ(g.g[g.index({24, y})], 0);
  }
}

TEST(Gradient, ConstantImageHasNoEdges) {
  const GradientMap g = compute_gradient(GrayImage(30, 30, 90), 0);
  for (int16_t v : g.g) EXPECT_EQ(v, 0);
}

TEST(Gradient, OrientationTieIsVertical) {
  EXPECT_EQ(classify_orientation(5, 5), EdgeOrient::Vertical);
  EXPECT_EQ(classify_orientation(-5, 5), EdgeOrient::Vertical);
  EXPECT_EQ(classify_orientation(4, -5), EdgeOrient::Horizontal);
}

TEST(Gradient, TooSmallImageIsRejected) {
  try {
    compute_gradient(GrayImage(2, 5), 30);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ImageTooSmall);
  }
}

TEST(GrayImage, RejectsNonPositiveSize) {
  EXPECT_THROW(GrayImage(0, 4), Error);
  EXPECT_THROW(GrayImage(4, -1), Error);
}
