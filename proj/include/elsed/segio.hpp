#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "elsed/eval.hpp"
#include "elsed/imgproc.hpp"

namespace elsed {

namespace fs = std::filesystem;

// PGM (P5, maxval <= 255) or 8-bit PNG. Colour is reduced with integer luma.
GrayImage load_image(const fs::path& path);
GrayImage decode_image(const std::vector<unsigned char>& bytes);

struct Rgb {
  unsigned char r = 0, g = 0, b = 0;
};

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<unsigned char> data;  // interleaved RGB

  RgbImage() = default;
  explicit RgbImage(const GrayImage& gray);
  void set(int x, int y, Rgb c);
};

void write_pgm(const fs::path& path, const GrayImage& img);
void write_png(const fs::path& path, const GrayImage& img);
void write_png(const fs::path& path, const RgbImage& img);

// Draws segments in distinct colours over the image.
RgbImage render_overlay(const GrayImage& img, const std::vector<Segment>& segs);

enum class SegmentFormat { Csv, JsonLines };

// ".jsonl" / ".json" select JSON lines, anything else CSV.
SegmentFormat format_for(const fs::path& path);

std::vector<Segment> read_segments(const fs::path& path);
std::vector<Segment> parse_segments(const std::string& text, SegmentFormat format,
                                    bool require_score = false);
void write_segments(const fs::path& path, const std::vector<Segment>& segs);
std::string format_segments(const std::vector<Segment>& segs, SegmentFormat format);

Homography load_homography(const fs::path& path);
Homography parse_homography(const std::string& text);

// Source of ground-truth segment lists, keyed by image.
class GroundTruthReader {
 public:
  virtual ~GroundTruthReader() = default;
  virtual std::vector<Segment> read(const fs::path& path) const = 0;
  // Extensions this reader accepts, with the leading dot.
  virtual std::vector<std::string> extensions() const = 0;
};

// The segment CSV/JSONL schema; a score column is optional and ignored.
class SegmentFileReader final : public GroundTruthReader {
 public:
  std::vector<Segment> read(const fs::path& path) const override;
  std::vector<std::string> extensions() const override { return {".csv", ".jsonl"}; }
};

struct DatasetEntry {
  std::string stem;
  fs::path image;
  std::vector<Segment> ground_truth;
  std::optional<fs::path> homography;
  std::optional<fs::path> paired_image;
};

// Images (.pgm/.png) of image_dir paired with annotations of gt_dir by stem.
std::vector<DatasetEntry> load_dataset(const fs::path& image_dir, const fs::path& gt_dir,
                                       const GroundTruthReader& reader);

struct StemPairing {
  std::vector<std::pair<fs::path, fs::path>> pairs;  // (det, gt) by stem
  std::vector<std::string> only_left;
  std::vector<std::string> only_right;
};

// Pairs files of two directories on filename stem, sorted by stem.
StemPairing pair_by_stem(const fs::path& left, const fs::path& right,
                         const std::vector<std::string>& extensions);

struct PairManifestRow {
  fs::path image_a, image_b, homography;
  int line = 0;
};

// Whitespace or comma separated rows "imgA imgB H"; '#' starts a comment.
// Relative paths resolve against the manifest's directory.
std::vector<PairManifestRow> read_pair_manifest(const fs::path& path);

std::string read_text_file(const fs::path& path);

}  // namespace elsed
