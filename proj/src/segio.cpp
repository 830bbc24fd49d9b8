#include "elsed/segio.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "elsed/eed.hpp"

namespace elsed {

namespace {

constexpr unsigned char kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

std::vector<unsigned char> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

uint8_t luma(unsigned r, unsigned g, unsigned b) {
  return static_cast<uint8_t>((299 * r + 587 * g + 114 * b + 500) / 1000);
}

// ------------------------------------------------------------------ PGM

class PgmHeader {
 public:
  explicit PgmHeader(const std::vector<unsigned char>& b) : b_(b) {}

  int next_int() {
    skip_space_and_comments();
    if (pos_ >= b_.size()) throw Error(ErrorCode::TruncatedFile, "PGM header ends early");
    if (!std::isdigit(b_[pos_]))
      throw Error(ErrorCode::MalformedFile, "PGM header field is not a number");
    long v = 0;
    while (pos_ < b_.size() && std::isdigit(b_[pos_])) {
      v = v * 10 + (b_[pos_++] - '0');
      if (v > 1 << 24) throw Error(ErrorCode::MalformedFile, "PGM header value too large");
    }
    return static_cast<int>(v);
  }

  // Exactly one whitespace byte separates maxval from the raster.
  size_t raster_start() {
    if (pos_ >= b_.size()) throw Error(ErrorCode::TruncatedFile, "PGM raster missing");
    if (!std::isspace(b_[pos_]))
      throw Error(ErrorCode::MalformedFile, "PGM header not followed by whitespace");
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < b_.size()) {
      if (std::isspace(b_[pos_])) {
        ++pos_;
      } else if (b_[pos_] == '#') {
        while (pos_ < b_.size() && b_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<unsigned char>& b_;
  size_t pos_ = 2;
};

GrayImage decode_pgm(const std::vector<unsigned char>& bytes) {
  PgmHeader hdr(bytes);
  const int w = hdr.next_int();
  const int h = hdr.next_int();
  const int maxval = hdr.next_int();
  if (w <= 0 || h <= 0) throw Error(ErrorCode::MalformedFile, "PGM dimensions must be positive");
  if (maxval <= 0 || maxval > 65535) throw Error(ErrorCode::MalformedFile, "PGM maxval out of range");
  if (maxval > 255) throw Error(ErrorCode::UnsupportedFormat, "16-bit PGM is not supported");
  const size_t start = hdr.raster_start();
  const size_t need = static_cast<size_t>(w) * static_cast<size_t>(h);
  if (bytes.size() - start < need)
    throw Error(ErrorCode::TruncatedFile, "PGM raster has " + std::to_string(bytes.size() - start) +
                                              " of " + std::to_string(need) + " bytes");
  GrayImage img(w, h);
  for (size_t i = 0; i < need; ++i) {
    const unsigned char v = bytes[start + i];
    if (v > maxval) throw Error(ErrorCode::MalformedFile, "PGM sample exceeds maxval");
    img.data[i] = v;
  }
  return img;
}

// ------------------------------------------------------------------ PNG

uint32_t be32(const unsigned char* p) {
  return (uint32_t{p[0]} << 24) | (uint32_t{p[1]} << 16) | (uint32_t{p[2]} << 8) | p[3];
}

GrayImage decode_png(const std::vector<unsigned char>& bytes) {
  // Signature + IHDR chunk.
  if (bytes.size() < 33) throw Error(ErrorCode::TruncatedFile, "PNG header truncated");
  if (std::memcmp(bytes.data() + 12, "IHDR", 4) != 0 || be32(bytes.data() + 8) != 13)
    throw Error(ErrorCode::MalformedFile, "PNG does not start with IHDR");
  const int depth = bytes[24];
  const int colour = bytes[25];
  if (depth == 16) throw Error(ErrorCode::UnsupportedFormat, "16-bit PNG is not supported");

  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
    throw Error(ErrorCode::MalformedFile, std::string("PNG: ") + image.message);
  const bool gray = (colour & PNG_COLOR_MASK_COLOR) == 0;
  image.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  const int w = static_cast<int>(image.width), h = static_cast<int>(image.height);
  std::vector<unsigned char> buf(PNG_IMAGE_SIZE(image));
  png_color background{0, 0, 0};
  if (!png_image_finish_read(&image, &background, buf.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    const bool truncated = msg.find("EOF") != std::string::npos ||
                           msg.find("end of data") != std::string::npos ||
                           msg.find("Not enough") != std::string::npos ||
                           msg.find("Read Error") != std::string::npos;
    throw Error(truncated ? ErrorCode::TruncatedFile : ErrorCode::MalformedFile, "PNG: " + msg);
  }
  GrayImage img(w, h);
  if (gray) {
    std::copy(buf.begin(), buf.begin() + static_cast<ptrdiff_t>(img.data.size()), img.data.begin());
  } else {
    for (size_t i = 0; i < img.data.size(); ++i)
      img.data[i] = luma(buf[3 * i], buf[3 * i + 1], buf[3 * i + 2]);
  }
  return img;
}

// ------------------------------------------------------------- segments

std::string trim(std::string_view s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

[[noreturn]] void parse_fail(int line, const std::string& what) {
  throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + what);
}

double parse_real(const std::string& field, int line, const char* name) {
  const std::string t = trim(field);
  double v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    parse_fail(line, std::string("bad number for ") + name + ": '" + t + "'");
  if (!std::isfinite(v)) parse_fail(line, std::string("non-finite ") + name);
  return v;
}

void check_score(double s, int line) {
  if (s < 0) parse_fail(line, "negative score");
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::vector<Segment> parse_csv(const std::string& text, bool require_score) {
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  bool have_header = false;
  size_t columns = 0;
  std::vector<Segment> out;
  while (std::getline(in, raw)) {
    ++line;
    const std::string row = trim(raw);
    if (row.empty()) continue;
    const auto fields = split(row, ',');
    if (!have_header) {
      std::vector<std::string> names;
      for (const auto& f : fields) names.push_back(trim(f));
      const std::vector<std::string> full{"x1", "y1", "x2", "y2", "score"};
      const bool with_score = names == full;
      const bool without = names == std::vector<std::string>(full.begin(), full.end() - 1);
      if (!with_score && !(without && !require_score))
        parse_fail(line, "expected header x1,y1,x2,y2,score");
      columns = names.size();
      have_header = true;
      continue;
    }
    if (fields.size() != columns)
      parse_fail(line, "expected " + std::to_string(columns) + " fields, got " +
                           std::to_string(fields.size()));
    Segment s;
    s.p0.x = parse_real(fields[0], line, "x1");
    s.p0.y = parse_real(fields[1], line, "y1");
    s.p1.x = parse_real(fields[2], line, "x2");
    s.p1.y = parse_real(fields[3], line, "y2");
    if (columns == 5) {
      s.score = parse_real(fields[4], line, "score");
      check_score(s.score, line);
    }
    out.push_back(s);
  }
  if (!have_header) parse_fail(line == 0 ? 1 : line, "missing header");
  return out;
}

double json_real(const nlohmann::json& obj, const char* key, int line) {
  const auto it = obj.find(key);
  if (it == obj.end()) parse_fail(line, std::string("missing key ") + key);
  if (!it->is_number()) parse_fail(line, std::string("non-numeric ") + key);
  const double v = it->get<double>();
  if (!std::isfinite(v)) parse_fail(line, std::string("non-finite ") + key);
  return v;
}

std::vector<Segment> parse_jsonl(const std::string& text, bool require_score) {
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  std::vector<Segment> out;
  while (std::getline(in, raw)) {
    ++line;
    const std::string row = trim(raw);
    if (row.empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(row);
    } catch (const nlohmann::json::parse_error& e) {
      parse_fail(line, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) parse_fail(line, "expected a JSON object");
    Segment s;
    s.p0.x = json_real(obj, "x1", line);
    s.p0.y = json_real(obj, "y1", line);
    s.p1.x = json_real(obj, "x2", line);
    s.p1.y = json_real(obj, "y2", line);
    if (obj.contains("score") || require_score) {
      s.score = json_real(obj, "score", line);
      check_score(s.score, line);
    }
    out.push_back(s);
  }
  return out;
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

// ---------------------------------------------------------------- images

GrayImage decode_image(const std::vector<unsigned char>& bytes) {
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') return decode_pgm(bytes);
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] >= '1' && bytes[1] <= '7')
    throw Error(ErrorCode::UnsupportedFormat, "only binary P5 PGM is supported");
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSignature, 8) == 0)
    return decode_png(bytes);
  if (bytes.size() < 8 && !bytes.empty() &&
      std::memcmp(bytes.data(), kPngSignature, bytes.size()) == 0)
    throw Error(ErrorCode::TruncatedFile, "PNG signature truncated");
  throw Error(ErrorCode::UnsupportedFormat, "not a PGM (P5) or PNG file");
}

GrayImage load_image(const fs::path& path) {
  try {
    return decode_image(read_bytes(path));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

RgbImage::RgbImage(const GrayImage& gray) : width(gray.width), height(gray.height) {
  data.resize(gray.data.size() * 3);
  for (size_t i = 0; i < gray.data.size(); ++i)
    data[3 * i] = data[3 * i + 1] = data[3 * i + 2] = gray.data[i];
}

void RgbImage::set(int x, int y, Rgb c) {
  if (x < 0 || y < 0 || x >= width || y >= height) return;
  const size_t i = (static_cast<size_t>(y) * width + x) * 3;
  data[i] = c.r;
  data[i + 1] = c.g;
  data[i + 2] = c.b;
}

void write_pgm(const fs::path& path, const GrayImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data.data()),
            static_cast<std::streamsize>(img.data.size()));
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

namespace {

void write_png_raw(const fs::path& path, int w, int h, png_uint_32 format, const void* data) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(w);
  image.height = static_cast<png_uint_32>(h);
  image.format = format;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, data, 0, nullptr))
    throw Error(ErrorCode::IoError, "PNG write failed for " + path.string() + ": " + image.message);
}

}  // namespace

void write_png(const fs::path& path, const GrayImage& img) {
  write_png_raw(path, img.width, img.height, PNG_FORMAT_GRAY, img.data.data());
}

void write_png(const fs::path& path, const RgbImage& img) {
  write_png_raw(path, img.width, img.height, PNG_FORMAT_RGB, img.data.data());
}

RgbImage render_overlay(const GrayImage& img, const std::vector<Segment>& segs) {
  RgbImage out(img);
  // Dim the background so the segments stand out.
  for (unsigned char& v : out.data) v = static_cast<unsigned char>(v / 2);
  for (size_t k = 0; k < segs.size(); ++k) {
    // Hues spaced by the golden angle.
    const double hue = std::fmod(static_cast<double>(k) * 137.508, 360.0) / 60.0;
    const int sector = static_cast<int>(hue);
    const double f = hue - sector;
    const auto q = static_cast<unsigned char>(255 * (1 - f));
    const auto t = static_cast<unsigned char>(255 * f);
    Rgb c;
    switch (sector % 6) {
      case 0: c = {255, t, 0}; break;
      case 1: c = {q, 255, 0}; break;
      case 2: c = {0, 255, t}; break;
      case 3: c = {0, q, 255}; break;
      case 4: c = {t, 0, 255}; break;
      default: c = {255, 0, q}; break;
    }
    const Segment& s = segs[k];
    const Pixel a{static_cast<int>(std::lround(s.p0.x)), static_cast<int>(std::lround(s.p0.y))};
    const Pixel b{static_cast<int>(std::lround(s.p1.x)), static_cast<int>(std::lround(s.p1.y))};
    for (const Pixel& p : bresenham(a, b)) out.set(p.x, p.y, c);
  }
  return out;
}

// -------------------------------------------------------------- segments

SegmentFormat format_for(const fs::path& path) {
  const std::string ext = lower(path.extension().string());
  return ext == ".jsonl" || ext == ".json" ? SegmentFormat::JsonLines : SegmentFormat::Csv;
}

std::vector<Segment> parse_segments(const std::string& text, SegmentFormat format,
                                    bool require_score) {
  return format == SegmentFormat::Csv ? parse_csv(text, require_score)
                                      : parse_jsonl(text, require_score);
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<Segment> read_segments(const fs::path& path) {
  try {
    return parse_segments(read_text_file(path), format_for(path));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::string format_segments(const std::vector<Segment>& segs, SegmentFormat format) {
  std::string out;
  if (format == SegmentFormat::Csv) out += "x1,y1,x2,y2,score\n";
  for (const Segment& s : segs) {
    for (double v : {s.p0.x, s.p0.y, s.p1.x, s.p1.y, s.score})
      if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "non-finite segment value");
    if (format == SegmentFormat::Csv) {
      out += fixed6(s.p0.x) + "," + fixed6(s.p0.y) + "," + fixed6(s.p1.x) + "," +
             fixed6(s.p1.y) + "," + fixed6(s.score) + "\n";
    } else {
      out += "{\"x1\":" + fixed6(s.p0.x) + ",\"y1\":" + fixed6(s.p0.y) + ",\"x2\":" +
             fixed6(s.p1.x) + ",\"y2\":" + fixed6(s.p1.y) + ",\"score\":" + fixed6(s.score) +
             "}\n";
    }
  }
  return out;
}

void write_segments(const fs::path& path, const std::vector<Segment>& segs) {
  write_text(path, format_segments(segs, format_for(path)));
}

// ------------------------------------------------------------ homography

Homography parse_homography(const std::string& text) {
  std::istringstream in(text);
  std::vector<double> vals;
  std::string tok;
  while (in >> tok) {
    double v = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
      throw Error(ErrorCode::ParseError, "homography: bad number '" + tok + "'");
    if (!std::isfinite(v)) throw Error(ErrorCode::ParseError, "homography: non-finite entry");
    vals.push_back(v);
  }
  if (vals.size() != 9)
    throw Error(ErrorCode::ParseError,
                "homography: expected 9 values, got " + std::to_string(vals.size()));
  Homography h;
  std::copy(vals.begin(), vals.end(), h.h.begin());
  if (h.h[8] != 0) {
    const double s = h.h[8];
    for (double& v : h.h) v /= s;
  }
  double scale = 0;
  for (double v : h.h) scale = std::max(scale, std::abs(v));
  if (scale == 0 || std::abs(h.det()) <= 1e-12 * scale * scale * scale)
    throw Error(ErrorCode::SingularMatrix, "homography is singular");
  return h;
}

Homography load_homography(const fs::path& path) {
  try {
    return parse_homography(read_text_file(path));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

// -------------------------------------------------------------- datasets

std::vector<Segment> SegmentFileReader::read(const fs::path& path) const {
  try {
    return parse_segments(read_text_file(path), format_for(path), false);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

namespace {

std::map<std::string, fs::path> files_by_stem(const fs::path& dir,
                                              const std::vector<std::string>& exts) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::IoError, dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const std::string ext = lower(e.path().extension().string());
    if (std::find(exts.begin(), exts.end(), ext) != exts.end()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::map<std::string, fs::path> out;
  for (const auto& f : files) out.emplace(f.stem().string(), f);  // first extension wins
  return out;
}

}  // namespace

StemPairing pair_by_stem(const fs::path& left, const fs::path& right,
                         const std::vector<std::string>& extensions) {
  const auto l = files_by_stem(left, extensions);
  const auto r = files_by_stem(right, extensions);
  StemPairing out;
  for (const auto& [stem, path] : l) {
    const auto it = r.find(stem);
    if (it == r.end())
      out.only_left.push_back(stem);
    else
      out.pairs.emplace_back(path, it->second);
  }
  for (const auto& [stem, path] : r)
    if (!l.count(stem)) out.only_right.push_back(stem);
  return out;
}

std::vector<DatasetEntry> load_dataset(const fs::path& image_dir, const fs::path& gt_dir,
                                       const GroundTruthReader& reader) {
  const auto images = files_by_stem(image_dir, {".pgm", ".png"});
  const auto gts = files_by_stem(gt_dir, reader.extensions());
  std::vector<DatasetEntry> out;
  for (const auto& [stem, img] : images) {
    const auto it = gts.find(stem);
    if (it == gts.end()) continue;
    DatasetEntry e;
    e.stem = stem;
    e.image = img;
    e.ground_truth = reader.read(it->second);
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<PairManifestRow> read_pair_manifest(const fs::path& path) {
  const std::string text = read_text_file(path);
  const fs::path base = path.parent_path();
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  std::vector<PairManifestRow> out;
  while (std::getline(in, raw)) {
    ++line;
    std::string row = raw.substr(0, raw.find('#'));
    std::replace(row.begin(), row.end(), ',', ' ');
    std::istringstream fields(row);
    std::vector<std::string> f;
    std::string tok;
    while (fields >> tok) f.push_back(tok);
    if (f.empty()) continue;
    if (f.size() != 3)
      throw Error(ErrorCode::ParseError, path.string() + ": line " + std::to_string(line) +
                                             ": expected imgA imgB H");
    auto resolve = [&](const std::string& p) {
      const fs::path q(p);
      return q.is_absolute() ? q : base / q;
    };
    out.push_back({resolve(f[0]), resolve(f[1]), resolve(f[2]), line});
  }
  return out;
}

}  // namespace elsed
