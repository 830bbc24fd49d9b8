#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace elsed {

enum class ErrorCode {
  InvalidArgument,
  ImageTooSmall,
  UnsupportedFormat,
  TruncatedFile,
  MalformedFile,
  IoError,
  ParseError,
  SingularMatrix,
  DegenerateSegment,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

struct Pixel {
  int x = 0;
  int y = 0;
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

inline double distance(const Point2& a, const Point2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

// x rightward, y downward, origin at the center of the top-left pixel.
struct Segment {
  Point2 p0;
  Point2 p1;
  double score = 0.0;

  double length() const { return distance(p0, p1); }
  Point2 midpoint() const { return {(p0.x + p1.x) / 2, (p0.y + p1.y) / 2}; }
};

}  // namespace elsed
