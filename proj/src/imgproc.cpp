#include "elsed/imgproc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

namespace elsed {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::ImageTooSmall: return "image-too-small";
    case ErrorCode::UnsupportedFormat: return "unsupported-format";
    case ErrorCode::TruncatedFile: return "truncated-file";
    case ErrorCode::MalformedFile: return "malformed-file";
    case ErrorCode::IoError: return "io-error";
    case ErrorCode::ParseError: return "parse-error";
    case ErrorCode::SingularMatrix: return "singular-matrix";
    case ErrorCode::DegenerateSegment: return "degenerate-segment";
  }
  return "unknown";
}

GrayImage::GrayImage(int w, int h, uint8_t fill) : width(w), height(h) {
  if (w <= 0 || h <= 0)
    throw Error(ErrorCode::InvalidArgument, "image dimensions must be positive");
  data.assign(static_cast<size_t>(w) * h, fill);
}

std::vector<int32_t> gaussian_kernel_1d(int kernel_size, double sigma) {
  if (kernel_size < 3 || kernel_size % 2 == 0)
    throw Error(ErrorCode::InvalidArgument, "kernel size must be odd and >= 3");
  if (!(sigma > 0.0))
    throw Error(ErrorCode::InvalidArgument, "sigma must be positive");
  const int r = kernel_size / 2;
  std::vector<double> w(kernel_size);
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) {
    w[i + r] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    sum += w[i + r];
  }
  std::vector<int32_t> k(kernel_size);
  int32_t total = 0;
  for (int i = 0; i < kernel_size; ++i) {
    k[i] = static_cast<int32_t>(std::lround(w[i] / sum * kGaussianOne));
    total += k[i];
  }
  // Rounding residue goes to the center tap so the kernel stays normalized.
  k[r] += kGaussianOne - total;
  return k;
}

GrayImage gaussian_blur(const GrayImage& img, int kernel_size, double sigma) {
  if (img.empty() || img.data.size() != static_cast<size_t>(img.width) * img.height)
    throw Error(ErrorCode::InvalidArgument, "cannot blur an empty image");
  const std::vector<int32_t> k = gaussian_kernel_1d(kernel_size, sigma);
  const int r = kernel_size / 2;
  const int w = img.width, h = img.height;

  // 255 * 2^20 fits in int32, so both passes accumulate in 32 bits.
  std::vector<int32_t> tmp(static_cast<size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    const uint8_t* row = &img.data[static_cast<size_t>(y) * w];
    int32_t* out = &tmp[static_cast<size_t>(y) * w];
    auto clamped = [&](int x) {
      int32_t acc = 0;
      for (int i = -r; i <= r; ++i) acc += k[i + r] * row[std::clamp(x + i, 0, w - 1)];
      return acc;
    };
    const int lo = std::min(r, w), hi = std::max(lo, w - r);
    for (int x = 0; x < lo; ++x) out[x] = clamped(x);
    for (int x = lo; x < hi; ++x) {
      int32_t acc = 0;
      for (int i = -r; i <= r; ++i) acc += k[i + r] * row[x + i];
      out[x] = acc;
    }
    for (int x = hi; x < w; ++x) out[x] = clamped(x);
  }

  GrayImage res(w, h);
  constexpr int shift = 2 * kGaussianShift;
  constexpr int32_t half = int32_t{1} << (shift - 1);
  std::vector<int32_t> acc(static_cast<size_t>(w));
  for (int y = 0; y < h; ++y) {
    std::fill(acc.begin(), acc.end(), half);
    for (int i = -r; i <= r; ++i) {
      const int32_t kv = k[i + r];
      const int32_t* src = &tmp[static_cast<size_t>(std::clamp(y + i, 0, h - 1)) * w];
      for (int x = 0; x < w; ++x) acc[x] += kv * src[x];
    }
    uint8_t* dst = &res.data[static_cast<size_t>(y) * w];
    for (int x = 0; x < w; ++x) dst[x] = static_cast<uint8_t>(std::min(255, acc[x] >> shift));
  }
  return res;
}

GradientMap compute_gradient(const GrayImage& img, double t_grad) {
  if (img.width < 3 || img.height < 3)
    throw Error(ErrorCode::ImageTooSmall, "image smaller than the 3x3 Sobel kernel");
  const int w = img.width, h = img.height;
  const size_t n = static_cast<size_t>(w) * h;
  GradientMap gm;
  gm.width = w;
  gm.height = h;
  gm.gx.assign(n, 0);
  gm.gy.assign(n, 0);
  gm.g.assign(n, 0);
  gm.orient.assign(n, EdgeOrient::Vertical);

  const uint8_t* d = img.data.data();
  for (int y = 1; y < h - 1; ++y) {
    const uint8_t* up = d + static_cast<size_t>(y - 1) * w;
    const uint8_t* mid = d + static_cast<size_t>(y) * w;
    const uint8_t* dn = d + static_cast<size_t>(y + 1) * w;
    for (int x = 1; x < w - 1; ++x) {
      const int gx = (up[x + 1] + 2 * mid[x + 1] + dn[x + 1]) -
                     (up[x - 1] + 2 * mid[x - 1] + dn[x - 1]);
      const int gy = (dn[x - 1] + 2 * dn[x] + dn[x + 1]) -
                     (up[x - 1] + 2 * up[x] + up[x + 1]);
      const size_t i = static_cast<size_t>(y) * w + x;
      gm.gx[i] = static_cast<int16_t>(gx);
      gm.gy[i] = static_cast<int16_t>(gy);
      const int l1 = std::abs(gx) + std::abs(gy);
      gm.g[i] = static_cast<int16_t>(l1 >= t_grad ? l1 : 0);
      gm.orient[i] = classify_orientation(gx, gy);
    }
  }
  return gm;
}

void suppress_weak(GradientMap& grad, double t_grad) {
  for (auto& v : grad.g)
    if (v < t_grad) v = 0;
}

}  // namespace elsed
