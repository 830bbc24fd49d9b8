// elsed: detect, eval, repeatability, ablate and bench subcommands.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <nlohmann/json.hpp>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "elsed/detector.hpp"
#include "elsed/eval.hpp"
#include "elsed/segio.hpp"

using namespace elsed;
using nlohmann::json;

namespace {

const std::vector<std::string> kImageExts{".pgm", ".png"};
const std::vector<std::string> kSegmentExts{".csv", ".jsonl"};

struct DetectorFlags {
  DetectorParams p;
  std::string jump_lengths = "5,7,9";
  bool no_jumps = false, no_jump_validation = false, no_validation = false;

  void add(CLI::App* app) {
    app->add_option("--blur-kernel", p.blur_kernel, "Gaussian kernel size")->capture_default_str();
    app->add_option("--blur-sigma", p.blur_sigma, "Gaussian sigma")->capture_default_str();
    app->add_option("--t-grad", p.t_grad, "Gradient magnitude threshold")->capture_default_str();
    app->add_option("--t-anchor", p.t_anchor, "Anchor margin")->capture_default_str();
    app->add_option("--scan-interval", p.scan_interval, "Anchor scan interval")->capture_default_str();
    app->add_option("--t-ol", p.t_ol, "Max consecutive outliers")->capture_default_str();
    app->add_option("--t-min-length", p.t_min_length, "Min pixels to fit a segment")->capture_default_str();
    app->add_option("--t-line-fit-err", p.t_line_fit_err, "Max mean squared fit residual")->capture_default_str();
    app->add_option("--t-px-to-seg-dist", p.t_px_to_seg_dist, "Inlier distance (px)")->capture_default_str();
    app->add_option("--t-eigen-ext", p.t_eigen_ext, "Jump eigenvalue ratio")->capture_default_str();
    app->add_option("--t-angle-ext", p.t_angle_ext, "Jump angle tolerance (deg)")->capture_default_str();
    app->add_option("--t-valid", p.t_valid, "Validation angle (rad)")->capture_default_str();
    app->add_option("--validation-margin", p.validation_margin, "Endpoint pixels ignored by validation")->capture_default_str();
    app->add_option("--jump-lengths", jump_lengths, "Comma separated jump lengths")->capture_default_str();
    app->add_flag("--no-jumps", no_jumps, "Disable discontinuity jumps");
    app->add_flag("--no-jump-validation", no_jump_validation, "Jump without the structure tensor check");
    app->add_flag("--no-validation", no_validation, "Keep every drawn segment");
  }

  DetectorParams resolve() const {
    DetectorParams out = p;
    out.jump_lengths.clear();
    std::stringstream ss(jump_lengths);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (tok.empty()) continue;
      try {
        out.jump_lengths.push_back(std::stoi(tok));
      } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidArgument, "bad --jump-lengths entry '" + tok + "'");
      }
    }
    out.jumps_enabled = !no_jumps && !out.jump_lengths.empty();
    out.jump_validation_enabled = !no_jump_validation;
    out.segment_validation_enabled = !no_validation;
    out.check();
    return out;
  }
};

struct GateFlags {
  MatchGates g;
  void add(CLI::App* app) {
    app->add_option("--lambda-overlap", g.lambda_overlap, "Min overlap ratio")->capture_default_str();
    app->add_option("--lambda-ang", g.lambda_ang, "Max angle (deg)")->capture_default_str();
    app->add_option("--lambda-dist", g.lambda_dist, "Max midpoint to line distance (px)")->capture_default_str();
  }
};

std::vector<Segment> to_segments(const std::vector<ValidatedSegment>& v) {
  std::vector<Segment> out;
  out.reserve(v.size());
  for (const auto& s : v) out.push_back(s.segment());
  return out;
}

unsigned worker_count(size_t jobs) {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("ELSED_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) n = std::min(n, static_cast<unsigned>(cap));
  }
  return static_cast<unsigned>(std::min<size_t>(n, std::max<size_t>(jobs, 1)));
}

// Runs fn(i) for i in [0, n) on up to worker_count(n) threads.
template <typename Fn>
void parallel_for(size_t n, Fn&& fn) {
  const unsigned workers = worker_count(n);
  std::atomic<size_t> next{0};
  auto body = [&] {
    for (size_t i = next++; i < n; i = next++) fn(i);
  };
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < workers; ++k) pool.emplace_back(body);
  body();
  for (auto& t : pool) t.join();
}

json metrics_json(const EvalMetrics& m) {
  json j{{"precision", m.precision}, {"recall", m.recall}, {"iou", m.iou},
         {"f_score", m.f_score},     {"ap", m.ap},         {"bap", m.bap}};
  if (m.recall_undefined) j["recall_undefined"] = true;
  return j;
}

void write_json(const std::string& path, const json& j) {
  if (path == "-") {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << j.dump(2) << "\n";
}

std::string fmt(double v, int prec = 3) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

std::vector<fs::path> list_images(const fs::path& p) {
  std::vector<fs::path> out;
  if (fs::is_directory(p)) {
    for (const auto& e : fs::directory_iterator(p)) {
      std::string ext = e.path().extension().string();
      std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
      if (e.is_regular_file() && std::count(kImageExts.begin(), kImageExts.end(), ext))
        out.push_back(e.path());
    }
    std::sort(out.begin(), out.end());
  } else {
    out.push_back(p);
  }
  if (out.empty()) throw Error(ErrorCode::InvalidArgument, "no images in " + p.string());
  return out;
}

// ------------------------------------------------------------------ detect

int cmd_detect(const std::string& image, const std::string& output, const std::string& overlay,
               const DetectorFlags& flags) {
  const DetectorParams p = flags.resolve();
  const GrayImage img = load_image(image);
  const auto segs = to_segments(detect(img, p));
  if (output.empty() || output == "-")
    std::cout << format_segments(segs, SegmentFormat::Csv);
  else
    write_segments(output, segs);
  if (!overlay.empty()) write_png(overlay, render_overlay(img, segs));
  std::cerr << image << ": " << segs.size() << " segments\n";
  return 0;
}

// -------------------------------------------------------------------- eval

int cmd_eval(const std::string& det_dir, const std::string& gt_dir, const MatchGates& gates,
             const std::string& json_path) {
  const StemPairing pairing = pair_by_stem(det_dir, gt_dir, kSegmentExts);
  for (const auto& s : pairing.only_left)
    std::cerr << "warning: no ground truth for detection '" << s << "', skipped\n";
  for (const auto& s : pairing.only_right)
    std::cerr << "warning: no detections for '" << s << "', counted as empty\n";

  struct Row {
    std::string stem;
    size_t det = 0, gt = 0;
    EvalMetrics m;
    CoverageSums sums;
  };
  std::vector<std::pair<fs::path, fs::path>> jobs = pairing.pairs;
  const fs::path gt_root(gt_dir);
  for (const auto& s : pairing.only_right) {
    for (const auto& ext : kSegmentExts) {
      const fs::path g = gt_root / (s + ext);
      if (fs::exists(g)) {
        jobs.emplace_back(fs::path(), g);
        break;
      }
    }
  }
  std::sort(jobs.begin(), jobs.end(),
            [](const auto& a, const auto& b) { return a.second.stem() < b.second.stem(); });

  const SegmentFileReader gt_reader;
  std::vector<Row> rows(jobs.size());
  std::mutex err_mu;
  std::vector<std::string> errors;
  parallel_for(jobs.size(), [&](size_t i) {
    Row& r = rows[i];
    r.stem = jobs[i].second.stem().string();
    try {
      const auto det = jobs[i].first.empty() ? std::vector<Segment>{} : read_segments(jobs[i].first);
      const auto gt = gt_reader.read(jobs[i].second);
      r.det = det.size();
      r.gt = gt.size();
      r.m = evaluate(det, gt, gates, &r.sums);
    } catch (const std::exception& e) {
      std::lock_guard lock(err_mu);
      errors.push_back(e.what());
    }
  });
  if (!errors.empty()) {
    for (const auto& e : errors) std::cerr << "error: " << e << "\n";
    return 1;
  }

  CoverageSums total;
  double ap = 0, bap = 0;
  for (const Row& r : rows) {
    total += r.sums;
    ap += r.m.ap;
    bap += r.m.bap;
  }
  EvalMetrics pooled = metrics_from(total);
  if (!rows.empty()) {
    pooled.ap = ap / rows.size();
    pooled.bap = bap / rows.size();
  }

  std::printf("%-24s %6s %6s %7s %7s %7s %7s %7s %7s\n", "image", "det", "gt", "P", "R", "IoU",
              "F", "AP", "bAP");
  for (const Row& r : rows)
    std::printf("%-24s %6zu %6zu %7s %7s %7s %7s %7s %7s\n", r.stem.c_str(), r.det, r.gt,
                fmt(r.m.precision).c_str(), r.m.recall_undefined ? "n/a" : fmt(r.m.recall).c_str(),
                fmt(r.m.iou).c_str(), fmt(r.m.f_score).c_str(), fmt(r.m.ap).c_str(),
                fmt(r.m.bap).c_str());
  std::printf("%-24s %6s %6s %7s %7s %7s %7s %7s %7s\n", "pooled", "", "",
              fmt(pooled.precision).c_str(), fmt(pooled.recall).c_str(), fmt(pooled.iou).c_str(),
              fmt(pooled.f_score).c_str(), fmt(pooled.ap).c_str(), fmt(pooled.bap).c_str());

  if (!json_path.empty()) {
    json j;
    j["gates"] = {{"lambda_overlap", gates.lambda_overlap},
                  {"lambda_ang", gates.lambda_ang},
                  {"lambda_dist", gates.lambda_dist}};
    j["images"] = json::array();
    for (const Row& r : rows) {
      json e = metrics_json(r.m);
      e["stem"] = r.stem;
      e["detections"] = r.det;
      e["ground_truth"] = r.gt;
      e["matches"] = r.sums.matches;
      j["images"].push_back(e);
    }
    j["pooled"] = metrics_json(pooled);
    j["missing_ground_truth"] = pairing.only_left;
    j["missing_detections"] = pairing.only_right;
    write_json(json_path, j);
  }
  return 0;
}

// ----------------------------------------------------------- repeatability

int cmd_repeatability(const std::string& manifest, const DetectorFlags& flags,
                      const MatchGates& gates, const std::string& json_path) {
  const DetectorParams p = flags.resolve();
  const auto rows = read_pair_manifest(manifest);
  struct Result {
    bool ok = false;
    std::string warning;
    Repeatability r;
  };
  std::vector<Result> results(rows.size());
  parallel_for(rows.size(), [&](size_t i) {
    const PairManifestRow& row = rows[i];
    Result& res = results[i];
    try {
      if (!fs::exists(row.homography)) {
        res.warning = "missing homography " + row.homography.string();
        return;
      }
      const Homography h = load_homography(row.homography);
      const GrayImage a = load_image(row.image_a);
      const GrayImage b = load_image(row.image_b);
      const auto sa = to_segments(detect(a, p));
      const auto sb = to_segments(detect(b, p));
      res.r = repeatability(sa, sb, h, {a.width, a.height}, {b.width, b.height}, gates);
      res.ok = true;
    } catch (const std::exception& e) {
      res.warning = e.what();
    }
  });

  double sum_len = 0, sum_cnt = 0;
  int n = 0;
  json j;
  j["pairs"] = json::array();
  std::printf("%-5s %-28s %-28s %9s %9s\n", "line", "image_a", "image_b", "rep_len", "rep_cnt");
  for (size_t i = 0; i < rows.size(); ++i) {
    const Result& res = results[i];
    if (!res.ok) {
      std::cerr << "warning: manifest line " << rows[i].line << " skipped: " << res.warning << "\n";
      continue;
    }
    if (res.r.no_shared_region)
      std::cerr << "warning: manifest line " << rows[i].line << ": views share no region\n";
    sum_len += res.r.length;
    sum_cnt += res.r.count;
    ++n;
    std::printf("%-5d %-28s %-28s %9s %9s\n", rows[i].line,
                rows[i].image_a.filename().string().c_str(),
                rows[i].image_b.filename().string().c_str(), fmt(res.r.length).c_str(),
                fmt(res.r.count).c_str());
    j["pairs"].push_back({{"image_a", rows[i].image_a.string()},
                          {"image_b", rows[i].image_b.string()},
                          {"length_repeatability", res.r.length},
                          {"count_repeatability", res.r.count},
                          {"no_shared_region", res.r.no_shared_region}});
  }
  const double mean_len = n ? sum_len / n : 0, mean_cnt = n ? sum_cnt / n : 0;
  std::printf("%-5s %-28s %-28s %9s %9s\n", "mean", "", "", fmt(mean_len).c_str(),
              fmt(mean_cnt).c_str());
  j["mean"] = {{"length_repeatability", mean_len}, {"count_repeatability", mean_cnt}, {"pairs", n}};
  if (!json_path.empty()) write_json(json_path, j);
  return 0;
}

// ------------------------------------------------------------ bench/ablate

struct Stat {
  double mean = 0, std = 0;
};

Stat stat_of(const std::vector<double>& v) {
  Stat s;
  if (v.empty()) return s;
  for (double x : v) s.mean += x;
  s.mean /= v.size();
  for (double x : v) s.std += (x - s.mean) * (x - s.mean);
  s.std = v.size() > 1 ? std::sqrt(s.std / (v.size() - 1)) : 0.0;
  return s;
}

struct Timing {
  std::vector<double> blur, gradient, anchors, drawing, validation, total;
  size_t segments = 0;
};

Timing time_detector(const std::vector<GrayImage>& images, const DetectorParams& p, int reps,
                     int warmup) {
  Timing t;
  for (const GrayImage& img : images) {
    for (int i = 0; i < warmup; ++i) detect_full(img, p);
    for (int i = 0; i < reps; ++i) {
      StageTimes st;
      const auto t0 = std::chrono::steady_clock::now();
      const Detection d = detect_full(img, p, &st);
      const double wall =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      t.blur.push_back(st.blur);
      t.gradient.push_back(st.gradient);
      t.anchors.push_back(st.anchors);
      t.drawing.push_back(st.drawing);
      t.validation.push_back(st.validation);
      t.total.push_back(wall);
      if (i == 0) t.segments += d.segments.size();
    }
  }
  return t;
}

std::string pm(const Stat& s) { return fmt(s.mean, 2) + " +- " + fmt(s.std, 2); }

json stat_json(const Stat& s) { return {{"mean_ms", s.mean}, {"std_ms", s.std}}; }

int cmd_bench(const std::string& input, int reps, int warmup, const DetectorFlags& flags,
              const std::string& json_path) {
  const DetectorParams p = flags.resolve();
  std::vector<GrayImage> images;
  for (const auto& f : list_images(input)) images.push_back(load_image(f));
  // Single thread: the detector itself never spawns threads.
  const Timing t = time_detector(images, p, reps, warmup);
  const std::pair<const char*, const std::vector<double>*> stages[] = {
      {"blur", &t.blur},           {"gradient", &t.gradient},     {"anchors", &t.anchors},
      {"drawing", &t.drawing},     {"validation", &t.validation}, {"total", &t.total}};
  std::printf("%zu image(s), %d reps, %d warm-up\n", images.size(), reps, warmup);
  json j;
  for (const auto& [name, v] : stages) {
    const Stat s = stat_of(*v);
    std::printf("%-11s %s ms\n", name, pm(s).c_str());
    j[name] = stat_json(s);
  }
  j["images"] = images.size();
  j["repetitions"] = reps;
  if (!json_path.empty()) write_json(json_path, j);
  return 0;
}

int cmd_ablate(const std::string& input, const std::string& gt_dir, int reps,
               const DetectorFlags& flags, const MatchGates& gates, const std::string& json_path) {
  const DetectorParams base = flags.resolve();
  const auto files = list_images(input);
  std::vector<GrayImage> images;
  for (const auto& f : files) images.push_back(load_image(f));
  std::vector<std::vector<Segment>> gts(files.size());
  std::vector<bool> has_gt(files.size(), false);
  if (!gt_dir.empty()) {
    for (size_t i = 0; i < files.size(); ++i) {
      for (const auto& ext : kSegmentExts) {
        const fs::path g = fs::path(gt_dir) / (files[i].stem().string() + ext);
        if (fs::exists(g)) {
          gts[i] = SegmentFileReader().read(g);
          has_gt[i] = true;
          break;
        }
      }
      if (!has_gt[i]) std::cerr << "warning: no ground truth for " << files[i].stem() << "\n";
    }
  }

  std::printf("%-22s %16s %8s %7s %7s %7s\n", "config", "time (ms)", "segs", "P", "R", "F");
  json j = json::array();
  for (const AblationConfig& cfg : ablation_configs(base)) {
    const Timing t = time_detector(images, cfg.params, reps, 1);
    const Stat s = stat_of(t.total);
    CoverageSums sums;
    double ap = 0, bap = 0;
    int n_gt = 0;
    for (size_t i = 0; i < images.size(); ++i) {
      if (!has_gt[i]) continue;
      CoverageSums one;
      const EvalMetrics mi =
          evaluate(to_segments(detect(images[i], cfg.params)), gts[i], gates, &one);
      sums += one;
      ap += mi.ap;
      bap += mi.bap;
      ++n_gt;
    }
    const bool any_gt = n_gt > 0;
    // Same pooling as eval: coverage sums, AP averaged per image.
    EvalMetrics m = metrics_from(sums);
    if (any_gt) {
      m.ap = ap / n_gt;
      m.bap = bap / n_gt;
    }
    std::printf("%-22s %16s %8zu %7s %7s %7s\n", cfg.name, pm(s).c_str(), t.segments,
                any_gt ? fmt(m.precision).c_str() : "-", any_gt ? fmt(m.recall).c_str() : "-",
                any_gt ? fmt(m.f_score).c_str() : "-");
    json row{{"config", cfg.name}, {"time", stat_json(s)}, {"segments", t.segments}};
    if (any_gt) row["metrics"] = metrics_json(m);
    j.push_back(row);
  }
  if (!json_path.empty()) write_json(json_path, j);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ELSED line segment detection and evaluation"};
  app.require_subcommand(1);

  DetectorFlags dflags;
  GateFlags gflags;
  GateFlags rgflags;
  rgflags.g = repeatability_gates();
  std::string image, output, overlay, det_dir, gt_dir, json_path, manifest, input;
  int reps = 50, warmup = 3;

  auto* detect_cmd = app.add_subcommand("detect", "Detect segments in one image");
  detect_cmd->add_option("image", image, "PGM or PNG image")->required();
  detect_cmd->add_option("-o,--output", output, "Segment file (.csv or .jsonl); stdout if omitted");
  detect_cmd->add_option("--overlay", overlay, "Write a PNG with the segments drawn");
  dflags.add(detect_cmd);

  auto* eval_cmd = app.add_subcommand("eval", "Score detections against ground truth");
  eval_cmd->add_option("det_dir", det_dir, "Directory of detection files")->required();
  eval_cmd->add_option("gt_dir", gt_dir, "Directory of ground-truth files")->required();
  eval_cmd->add_option("--json", json_path, "JSON report path ('-' for stdout)");
  gflags.add(eval_cmd);

  auto* rep_cmd = app.add_subcommand("repeatability", "Repeatability over image pairs");
  rep_cmd->add_option("manifest", manifest, "Rows of: imgA imgB homography")->required();
  rep_cmd->add_option("--json", json_path, "JSON report path ('-' for stdout)");
  dflags.add(rep_cmd);
  rgflags.add(rep_cmd);

  auto* ablate_cmd = app.add_subcommand("ablate", "Run the six ablation configurations");
  ablate_cmd->add_option("input", input, "Image or directory of images")->required();
  ablate_cmd->add_option("--gt-dir", gt_dir, "Ground truth for accuracy columns");
  ablate_cmd->add_option("--reps", reps, "Timed runs per image")->capture_default_str();
  ablate_cmd->add_option("--json", json_path, "JSON report path ('-' for stdout)");
  dflags.add(ablate_cmd);
  gflags.add(ablate_cmd);

  auto* bench_cmd = app.add_subcommand("bench", "Per-stage timing");
  bench_cmd->add_option("input", input, "Image or directory of images")->required();
  bench_cmd->add_option("--reps", reps, "Timed runs per image")->capture_default_str()
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--warmup", warmup, "Untimed runs per image")->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  bench_cmd->add_option("--json", json_path, "JSON report path ('-' for stdout)");
  dflags.add(bench_cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    if (detect_cmd->parsed()) return cmd_detect(image, output, overlay, dflags);
    if (eval_cmd->parsed()) return cmd_eval(det_dir, gt_dir, gflags.g, json_path);
    if (rep_cmd->parsed()) return cmd_repeatability(manifest, dflags, rgflags.g, json_path);
    if (ablate_cmd->parsed())
      return cmd_ablate(input, gt_dir, std::max(1, reps), dflags, gflags.g, json_path);
    if (bench_cmd->parsed()) return cmd_bench(input, reps, warmup, dflags, json_path);
  } catch (const Error& e) {
    std::cerr << "error [" << error_code_name(e.code()) << "]: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
