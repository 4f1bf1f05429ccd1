// Copyright 2026 The realsr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "realsr/checkpoint.hpp"
#include "realsr/cli.hpp"
#include "realsr/common.hpp"
#include "realsr/degrade.hpp"
#include "realsr/eval.hpp"
#include "realsr/image_io.hpp"
#include "realsr/ops.hpp"
#include "realsr/optim.hpp"
#include "realsr/synth.hpp"
#include "realsr/train.hpp"

namespace py = pybind11;
using namespace realsr;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;
using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

void require_hwc(const py::buffer_info& b) {
  if (b.ndim != 3 || b.shape[2] != 3) throw ValidationError("expected an H x W x 3 array");
}

Image to_image(const FloatArray& a) {
  const py::buffer_info b = a.request();
  require_hwc(b);
  const auto* p = static_cast<const float*>(b.ptr);
  return Image(static_cast<int>(b.shape[0]), static_cast<int>(b.shape[1]),
               std::vector<float>(p, p + b.size));
}

FloatArray to_array(const Image& img) {
  FloatArray out({img.height(), img.width(), Image::kChannels});
  std::copy(img.samples().begin(), img.samples().end(), out.mutable_data());
  return out;
}

Tensor to_tensor(const DoubleArray& a) {
  const py::buffer_info b = a.request();
  require_hwc(b);
  const int h = static_cast<int>(b.shape[0]), w = static_cast<int>(b.shape[1]);
  Tensor t(Shape{1, 3, h, w});
  const auto* p = static_cast<const double*>(b.ptr);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) t.at(0, c, y, x) = p[(static_cast<size_t>(y) * w + x) * 3 + c];
  return t;
}

DoubleArray from_tensor(const Tensor& t) {
  const Shape s = t.shape();
  DoubleArray out({s.h, s.w, 3});
  double* p = out.mutable_data();
  for (int y = 0; y < s.h; ++y)
    for (int x = 0; x < s.w; ++x)
      for (int c = 0; c < 3; ++c) p[(static_cast<size_t>(y) * s.w + x) * 3 + c] = t.at(0, c, y, x);
  return out;
}

py::dict report_dict(const MetricReport& r) {
  py::list rows;
  for (const auto& row : r.rows) {
    py::dict d;
    d["image_id"] = row.image_id;
    d["psnr"] = row.psnr;
    d["ssim"] = row.ssim;
    d["lpips"] = row.lpips ? py::cast(*row.lpips) : py::none();
    rows.append(d);
  }
  py::dict d;
  d["rows"] = rows;
  d["mean_psnr"] = r.mean_psnr;
  d["mean_ssim"] = r.mean_ssim;
  d["mean_lpips"] = r.mean_lpips ? py::cast(*r.mean_lpips) : py::none();
  d["checkpoint_id"] = r.checkpoint_id;
  d["benchmark_id"] = r.benchmark_id;
  d["scenario"] = r.scenario;
  d["degradation"] = r.degradation;
  d["plugin_id"] = r.plugin_id;
  d["table"] = render_report(r, ReportFormat::kTextTable);
  d["tsv"] = render_report(r, ReportFormat::kDelimited);
  return d;
}

std::unique_ptr<PerceptualMetricPlugin> plugin_or_null(const std::string& spec) {
  return spec.empty() ? nullptr : load_plugin(spec);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Real-world super-resolution by learned degradation: native core.";
  m.attr("__version__") = std::string(kToolVersion);

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_ArithmeticError);

  m.def("synth_image", [](int h, int w, uint64_t seed) { return to_array(synth_image(h, w, seed)); },
        py::arg("height"), py::arg("width"), py::arg("seed"));
  m.def("read_png", [](const std::filesystem::path& p) { return to_array(read_png(p)); }, py::arg("path"));
  m.def("write_png", [](const std::filesystem::path& p, const FloatArray& a) { write_png(p, to_image(a)); },
        py::arg("path"), py::arg("image"));
  m.def("downsample", [](const FloatArray& a, int f) { return to_array(downsample(to_image(a), f)); },
        py::arg("image"), py::arg("factor") = 4);
  m.def("resample", [](const FloatArray& a, int num, int den) { return to_array(resample(to_image(a), num, den)); },
        py::arg("image"), py::arg("scale_num"), py::arg("scale_den"));
  m.def("apply_sensor_noise",
        [](const FloatArray& a, double sigma, uint64_t seed) {
          return to_array(apply_sensor_noise(to_image(a), sigma, seed));
        },
        py::arg("image"), py::arg("sigma_8bit"), py::arg("seed"));
  m.def("apply_jpeg", [](const FloatArray& a, int q) { return to_array(apply_jpeg(to_image(a), q)); },
        py::arg("image"), py::arg("quality"));
  m.def("psnr", [](const FloatArray& a, const FloatArray& b) { return psnr(to_image(a), to_image(b)); });
  m.def("ssim", [](const FloatArray& a, const FloatArray& b) { return ssim(to_image(a), to_image(b)); });
  m.def("color_adjust",
        [](const DoubleArray& sr, const DoubleArray& lr, int factor) {
          return from_tensor(ops::color_adjust(Var::constant(to_tensor(sr)), Var::constant(to_tensor(lr)), factor)
                                 .value());
        },
        py::arg("sr"), py::arg("lr"), py::arg("factor") = 4,
        "Shifts every factor x factor block of sr so its mean matches the lr pixel. Not clamped.");
  m.def("multistep_lr", &multistep_lr, py::arg("step"), py::arg("total"), py::arg("base"));
  m.def("linear_decay_lr", &linear_decay_lr, py::arg("step"), py::arg("total"), py::arg("base"));

  py::class_<SrModel>(m, "SrModel")
      .def(py::init([](const std::filesystem::path& ckpt, const std::optional<std::string>& mode) {
             std::optional<Mode> md;
             if (mode) md = parse_mode(*mode);
             return SrModel(load_checkpoint(ckpt), md);
           }),
           py::arg("checkpoint"), py::arg("mode") = py::none())
      .def("infer", [](const SrModel& s, const FloatArray& a) {
        Image out;
        const Image in = to_image(a);
        {
          py::gil_scoped_release release;
          out = s.infer(in);
        }
        return to_array(out);
      })
      .def_property_readonly("id", &SrModel::id)
      .def_property_readonly("mode", [](const SrModel& s) { return to_string(s.mode()); });

  m.def("checkpoint_info",
        [](const std::filesystem::path& p) {
          const Checkpoint ck = load_checkpoint(p);
          py::dict d;
          d["step"] = ck.step;
          py::dict nets;
          for (const char* role : {"G", "F", "D_X", "D_Z", "S", "C", "H"}) {
            if (ck.has_network(role)) nets[role] = ck.network(role).checksum();
          }
          d["networks"] = nets;
          d["meta"] = ck.meta;
          return d;
        },
        py::arg("path"), "Step, per-network checksums and metadata of a checkpoint.");

  m.def("evaluate",
        [](const std::filesystem::path& ckpt, const std::filesystem::path& bench, const std::string& plugin) {
          const SrModel model(load_checkpoint(ckpt));
          const auto p = plugin_or_null(plugin);
          MetricReport r;
          {
            py::gil_scoped_release release;
            r = evaluate(model, bench, p.get());
          }
          return report_dict(r);
        },
        py::arg("checkpoint"), py::arg("benchmark"), py::arg("plugin") = "");
  m.def("score_external",
        [](const std::filesystem::path& images, const std::filesystem::path& bench, const std::string& plugin,
           const std::string& id) {
          const auto p = plugin_or_null(plugin);
          return report_dict(score_external(images, bench, p.get(), {}, id));
        },
        py::arg("images"), py::arg("benchmark"), py::arg("plugin") = "", py::arg("id") = "");

  m.def("run_cli",
        [](const std::vector<std::string>& args) {
          std::ostringstream out, err;
          int code;
          {
            py::gil_scoped_release release;
            code = run_cli(args, out, err);
          }
          return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs one command line in-process; returns (exit_code, stdout, stderr).");
}
