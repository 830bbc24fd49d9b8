#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "elsed/detector.hpp"
#include "elsed/eval.hpp"
#include "elsed/segio.hpp"

namespace py = pybind11;
using namespace elsed;

namespace {

GrayImage from_array(const py::array_t<uint8_t, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-D uint8 array");
  GrayImage img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  std::copy(a.data(), a.data() + a.size(), img.data.begin());
  return img;
}

py::array_t<double> to_array(const std::vector<Segment>& segs) {
  py::array_t<double> out({static_cast<py::ssize_t>(segs.size()), py::ssize_t{5}});
  auto m = out.mutable_unchecked<2>();
  for (size_t i = 0; i < segs.size(); ++i) {
    const auto k = static_cast<py::ssize_t>(i);
    m(k, 0) = segs[i].p0.x;
    m(k, 1) = segs[i].p0.y;
    m(k, 2) = segs[i].p1.x;
    m(k, 3) = segs[i].p1.y;
    m(k, 4) = segs[i].score;
  }
  return out;
}

std::vector<Segment> from_segments(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.size() == 0) return {};
  if (a.ndim() != 2 || (a.shape(1) != 4 && a.shape(1) != 5))
    throw py::value_error("expected an (N, 4) or (N, 5) array");
  auto r = a.unchecked<2>();
  std::vector<Segment> out;
  for (py::ssize_t i = 0; i < a.shape(0); ++i)
    out.push_back({{r(i, 0), r(i, 1)}, {r(i, 2), r(i, 3)}, a.shape(1) == 5 ? r(i, 4) : 0.0});
  return out;
}

}  // namespace

PYBIND11_MODULE(_elsed, m) {
  m.doc() = "ELSED line segment detector";

  py::class_<DetectorParams>(m, "DetectorParams")
      .def(py::init<>())
      .def_readwrite("blur_kernel", &DetectorParams::blur_kernel)
      .def_readwrite("blur_sigma", &DetectorParams::blur_sigma)
      .def_readwrite("t_grad", &DetectorParams::t_grad)
      .def_readwrite("t_anchor", &DetectorParams::t_anchor)
      .def_readwrite("scan_interval", &DetectorParams::scan_interval)
      .def_readwrite("t_ol", &DetectorParams::t_ol)
      .def_readwrite("t_min_length", &DetectorParams::t_min_length)
      .def_readwrite("t_line_fit_err", &DetectorParams::t_line_fit_err)
      .def_readwrite("t_px_to_seg_dist", &DetectorParams::t_px_to_seg_dist)
      .def_readwrite("t_eigen_ext", &DetectorParams::t_eigen_ext)
      .def_readwrite("t_angle_ext", &DetectorParams::t_angle_ext)
      .def_readwrite("t_valid", &DetectorParams::t_valid)
      .def_readwrite("validation_margin", &DetectorParams::validation_margin)
      .def_readwrite("jump_lengths", &DetectorParams::jump_lengths)
      .def_readwrite("jumps_enabled", &DetectorParams::jumps_enabled)
      .def_readwrite("jump_validation_enabled", &DetectorParams::jump_validation_enabled)
      .def_readwrite("segment_validation_enabled", &DetectorParams::segment_validation_enabled);

  py::class_<EvalMetrics>(m, "EvalMetrics")
      .def_readonly("precision", &EvalMetrics::precision)
      .def_readonly("recall", &EvalMetrics::recall)
      .def_readonly("iou", &EvalMetrics::iou)
      .def_readonly("f_score", &EvalMetrics::f_score)
      .def_readonly("ap", &EvalMetrics::ap)
      .def_readonly("bap", &EvalMetrics::bap)
      .def_readonly("recall_undefined", &EvalMetrics::recall_undefined);

  m.def(
      "detect",
      [](const py::array_t<uint8_t, py::array::c_style | py::array::forcecast>& image,
         const DetectorParams& params) {
        const GrayImage img = from_array(image);
        std::vector<Segment> segs;
        {
          py::gil_scoped_release release;
          for (const auto& s : detect(img, params)) segs.push_back(s.segment());
        }
        return to_array(segs);
      },
      py::arg("image"), py::arg("params") = DetectorParams{},
      "Detect segments; returns an (N, 5) array of x1, y1, x2, y2, score.");

  m.def(
      "load_image",
      [](const std::string& path) {
        const GrayImage img = load_image(path);
        py::array_t<uint8_t> out({img.height, img.width});
        std::copy(img.data.begin(), img.data.end(), out.mutable_data());
        return out;
      },
      py::arg("path"));

  m.def(
      "evaluate",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& det,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& gt) {
        return evaluate(from_segments(det), from_segments(gt));
      },
      py::arg("detections"), py::arg("ground_truth"));

  m.def(
      "repeatability",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& b,
         const std::array<double, 9>& h_ab, std::pair<int, int> size_a,
         std::pair<int, int> size_b) {
        Homography h;
        h.h = h_ab;
        const Repeatability r = repeatability(from_segments(a), from_segments(b), h,
                                              {size_a.first, size_a.second},
                                              {size_b.first, size_b.second});
        return py::make_tuple(r.length, r.count);
      },
      py::arg("segments_a"), py::arg("segments_b"), py::arg("h_ab"), py::arg("size_a"),
      py::arg("size_b"),
      "Length and count repeatability; sizes are (width, height), h_ab maps B into A.");

  py::register_exception<Error>(m, "ElsedError", PyExc_RuntimeError);
}
