#include "elsed/detector.hpp"

#include <algorithm>
#include <chrono>
#include <string>

#include "elsed/anchors.hpp"

namespace elsed {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvalidArgument, what);
}

}  // namespace

void DetectorParams::check() const {
  require(blur_kernel >= 3 && blur_kernel % 2 == 1, "blur kernel must be odd and >= 3");
  require(blur_sigma > 0, "blur sigma must be positive");
  require(t_grad >= 0, "t_grad must be >= 0");
  require(t_anchor >= 0, "t_anchor must be >= 0");
  require(scan_interval >= 1, "scan interval must be >= 1");
  require(t_ol >= 0, "t_ol must be >= 0");
  require(t_min_length >= 2, "t_min_length must be >= 2");
  require(t_line_fit_err >= 0, "t_line_fit_err must be >= 0");
  require(t_px_to_seg_dist > 0, "t_px_to_seg_dist must be positive");
  require(t_eigen_ext >= 1, "t_eigen_ext must be >= 1");
  require(t_angle_ext >= 0 && t_angle_ext <= 90, "t_angle_ext must be in [0, 90]");
  require(t_valid > 0, "t_valid must be positive");
  require(validation_margin >= 0, "validation margin must be >= 0");
  for (size_t i = 0; i < jump_lengths.size(); ++i) {
    require(jump_lengths[i] >= 5, "jump lengths must be >= 5");
    if (i > 0) require(jump_lengths[i] > jump_lengths[i - 1], "jump lengths must ascend");
  }
}

Detection detect_full(const GrayImage& img, const DetectorParams& params,
                      StageTimes* times) {
  params.check();
  if (img.width < kMinImageSide || img.height < kMinImageSide)
    throw Error(ErrorCode::ImageTooSmall,
                "image must be at least " + std::to_string(kMinImageSide) + "x" +
                    std::to_string(kMinImageSide));
  StageTimes local;
  StageTimes& t = times ? *times : local;

  auto t0 = Clock::now();
  const GrayImage blurred = gaussian_blur(img, params.blur_kernel, params.blur_sigma);
  t.blur = ms_since(t0);

  t0 = Clock::now();
  const GradientMap grad = compute_gradient(blurred, params.t_grad);
  t.gradient = ms_since(t0);

  t0 = Clock::now();
  const std::vector<Anchor> anchors =
      extract_anchors(grad, params.t_anchor, params.scan_interval);
  t.anchors = ms_since(t0);

  t0 = Clock::now();
  DrawState state(grad.width, grad.height);
  std::vector<SegmentCandidate> cands;
  for (const Anchor& a : anchors) {
    if (state.is_visited(a.pixel)) continue;
    auto segs = eed_from_anchor(a, grad, state, params);
    for (auto& s : segs) cands.push_back(std::move(s));
  }
  t.drawing = ms_since(t0);

  t0 = Clock::now();
  Detection det;
  det.candidates.reserve(cands.size());
  for (const SegmentCandidate& s : cands) {
    det.candidates.push_back(params.segment_validation_enabled
                                 ? validate_segment(s, grad, params.t_valid,
                                                    params.validation_margin)
                                 : length_scored(s));
  }
  for (const ValidatedSegment& v : det.candidates)
    if (v.accepted) det.segments.push_back(v);
  std::stable_sort(det.segments.begin(), det.segments.end(),
                   [](const ValidatedSegment& a, const ValidatedSegment& b) {
                     return a.score > b.score;
                   });
  t.validation = ms_since(t0);
  return det;
}

std::vector<ValidatedSegment> detect(const GrayImage& img, const DetectorParams& params) {
  return detect_full(img, params).segments;
}

std::vector<AblationConfig> ablation_configs(const DetectorParams& base) {
  auto make = [&](bool jumps, std::vector<int> lengths, bool jump_val, bool seg_val) {
    DetectorParams p = base;
    p.jumps_enabled = jumps;
    if (!lengths.empty()) p.jump_lengths = std::move(lengths);
    p.jump_validation_enabled = jump_val;
    p.segment_validation_enabled = seg_val;
    return p;
  };
  return {
      {"none", make(false, {}, false, false)},
      {"none+segval", make(false, {}, false, true)},
      {"fixed5", make(true, {5}, false, false)},
      {"fixed5+jumpval", make(true, {5}, true, false)},
      {"multi+jumpval", make(true, {5, 7, 9}, true, false)},
      {"multi+jumpval+segval", make(true, {5, 7, 9}, true, true)},
  };
}

}  // namespace elsed
