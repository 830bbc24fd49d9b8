#pragma once

#include <vector>

#include "elsed/params.hpp"
#include "elsed/validate.hpp"

namespace elsed {

inline constexpr int kMinImageSide = 16;

// Wall-clock milliseconds per pipeline stage.
struct StageTimes {
  double blur = 0, gradient = 0, anchors = 0, drawing = 0, validation = 0;
  double total() const { return blur + gradient + anchors + drawing + validation; }
};

struct Detection {
  std::vector<ValidatedSegment> candidates;  // every drawn segment, in drawing order
  std::vector<ValidatedSegment> segments;    // accepted, best score first
};

Detection detect_full(const GrayImage& img, const DetectorParams& params,
                      StageTimes* times = nullptr);

// Accepted segments sorted by score, descending.
std::vector<ValidatedSegment> detect(const GrayImage& img,
                                     const DetectorParams& params = {});

// The six ablation configurations, from bare drawing to the full detector.
struct AblationConfig {
  const char* name;
  DetectorParams params;
};
std::vector<AblationConfig> ablation_configs(const DetectorParams& base = {});

}  // namespace elsed
