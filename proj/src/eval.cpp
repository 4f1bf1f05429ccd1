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

#include "realsr/eval.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "realsr/checkpoint.hpp"
#include "realsr/common.hpp"
#include "realsr/degrade.hpp"
#include "realsr/image_io.hpp"
#include "realsr/ops.hpp"
#include "realsr/parallel.hpp"
#include "realsr/random.hpp"

namespace realsr {
namespace {

// VGG16 feature stack, conv slots per block in torchvision numbering.
constexpr std::array<std::array<int, 3>, 5> kVgg16Convs = {{
    {0, 2, -1}, {5, 7, -1}, {10, 12, 14}, {17, 19, 21}, {24, 26, 28}}};
// LPIPS input scaling applied to images mapped to [-1, 1].
constexpr std::array<double, 3> kLpipsShift = {-0.030, -0.088, -0.188};
constexpr std::array<double, 3> kLpipsScale = {0.458, 0.448, 0.450};

std::string hex64(uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

class LpipsStyleMetric final : public PerceptualMetricPlugin {
 public:
  struct Layer {
    Var weight, bias;
  };

  LpipsStyleMetric(std::string id, std::string fingerprint, std::vector<Layer> convs, std::vector<Tensor> lin)
      : id_(std::move(id)), fingerprint_(std::move(fingerprint)), convs_(std::move(convs)), lin_(std::move(lin)) {}

  std::string id() const override { return id_; }
  std::string fingerprint() const override { return fingerprint_; }

  std::unique_ptr<PerceptualMetricPlugin> clone() const override {
    std::vector<Layer> convs;
    for (const Layer& l : convs_) convs.push_back({Var::constant(l.weight.value()), Var::constant(l.bias.value())});
    return std::make_unique<LpipsStyleMetric>(id_, fingerprint_, std::move(convs), lin_);
  }

  double distance(const Image& a, const Image& b) const override {
    if (a.height() != b.height() || a.width() != b.width()) {
      throw ValidationError(id_ + ": image sizes differ");
    }
    if (a.height() < 16 || a.width() < 16) throw ValidationError(id_ + ": images must be at least 16x16");
    NoGradGuard no_grad;
    const std::vector<Tensor> fa = taps(a), fb = taps(b);
    double total = 0.0;
    for (size_t l = 0; l < fa.size(); ++l) {
      const Shape& s = fa[l].shape();
      const size_t plane = s.plane();
      std::vector<double> na(plane, 0.0), nb(plane, 0.0);
      for (int c = 0; c < s.c; ++c) {
        const double* pa = fa[l].plane(0, c);
        const double* pb = fb[l].plane(0, c);
        for (size_t i = 0; i < plane; ++i) {
          na[i] += pa[i] * pa[i];
          nb[i] += pb[i] * pb[i];
        }
      }
      for (size_t i = 0; i < plane; ++i) {
        na[i] = std::sqrt(na[i]) + 1e-10;
        nb[i] = std::sqrt(nb[i]) + 1e-10;
      }
      double acc = 0.0;
      for (int c = 0; c < s.c; ++c) {
        const double w = lin_[l][static_cast<size_t>(c)];
        const double* pa = fa[l].plane(0, c);
        const double* pb = fb[l].plane(0, c);
        for (size_t i = 0; i < plane; ++i) {
          const double d = pa[i] / na[i] - pb[i] / nb[i];
          acc += w * d * d;
        }
      }
      total += acc / static_cast<double>(plane);
    }
    return total;
  }

 private:
  std::vector<Tensor> taps(const Image& img) const {
    std::array<double, 3> shift{}, div{};
    for (size_t c = 0; c < 3; ++c) {
      shift[c] = (1.0 + kLpipsShift[c]) / 2.0;
      div[c] = kLpipsScale[c] / 2.0;
    }
    Var h = ops::channel_normalize(Var::constant(image_to_tensor(img)), shift, div);
    std::vector<Tensor> out;
    size_t k = 0;
    for (size_t b = 0; b < kVgg16Convs.size(); ++b) {
      if (b > 0) h = ops::max_pool2x(h);
      for (int idx : kVgg16Convs[b]) {
        if (idx < 0) continue;
        h = ops::relu(ops::conv2d(h, convs_[k].weight, convs_[k].bias, 1, 1));
        ++k;
      }
      out.push_back(h.value());
    }
    return out;
  }

  std::string id_, fingerprint_;
  std::vector<Layer> convs_;
  std::vector<Tensor> lin_;
};

constexpr uint64_t kNotLpipsSeed = 0x6e6f742d6c706970ULL;

MetricRow score_one(const std::string& id, const Image& out, const Image& gt, const EvalOptions& opt) {
  if (out.height() != gt.height() || out.width() != gt.width()) {
    throw ValidationError("image '" + id + "': output is " + std::to_string(out.height()) + "x" +
                          std::to_string(out.width()) + ", ground truth is " + std::to_string(gt.height()) + "x" +
                          std::to_string(gt.width()));
  }
  const Image a = opt.shave > 0 ? shave(out, opt.shave) : out;
  const Image b = opt.shave > 0 ? shave(gt, opt.shave) : gt;
  MetricRow row;
  row.image_id = id;
  row.psnr = psnr(a, b);
  row.ssim = ssim(a, b);
  return row;
}

struct EvalItem {
  std::string id;
  std::filesystem::path input, gt;
};

std::vector<EvalItem> eval_items(const DatasetManifest& m, const std::filesystem::path& dir) {
  std::vector<EvalItem> items;
  std::set<std::string> with_gt;
  for (const auto& [in, gt] : m.eval_pairs()) {
    items.push_back({in->source_id, dir / in->path, dir / gt->path});
    with_gt.insert(in->source_id);
  }
  for (const ManifestEntry* e : m.with_role(kEvalInput)) {
    if (!with_gt.count(e->source_id)) throw ValidationError("eval input '" + e->source_id + "' has no eval_gt");
  }
  if (items.empty()) throw ValidationError("benchmark has no eval pairs");
  for (const EvalItem& it : items) {
    if (!std::filesystem::exists(it.gt)) throw ValidationError("missing eval_gt file " + it.gt.string());
  }
  return items;
}

MetricReport report_header(const DatasetManifest& m, const std::filesystem::path& dir, const std::string& model_id) {
  MetricReport r;
  r.checkpoint_id = model_id;
  const std::string name = std::filesystem::absolute(dir).lexically_normal().filename().string();
  r.benchmark_id = (name.empty() ? std::string("benchmark") : name) + "@" + hex64(fnv1a64(m.serialize()));
  r.scenario = to_string(m.scenario);
  r.degradation = m.recipe.kind_name() + " " + m.recipe.params();
  return r;
}

// Scores every item; `produce(i)` yields the image to compare with item i's
// ground truth.
MetricReport score_items(MetricReport report, const std::vector<EvalItem>& items,
                         const std::function<Image(size_t)>& produce, const PerceptualMetricPlugin* plugin,
                         const EvalOptions& opt) {
  std::vector<MetricRow> rows(items.size());
  std::vector<std::string> plugin_errors(items.size());
  parallel_for(items.size(), opt.workers, [&](size_t i) {
    const Image out = produce(i);
    const Image gt = read_png(items[i].gt);
    rows[i] = score_one(items[i].id, out, gt, opt);
    if (plugin) {
      try {
        const auto local = plugin->clone();
        const Image a = opt.shave > 0 ? shave(out, opt.shave) : out;
        const Image b = opt.shave > 0 ? shave(gt, opt.shave) : gt;
        rows[i].lpips = local->distance(a, b);
      } catch (const std::exception& e) {
        plugin_errors[i] = items[i].id + ": " + e.what();
      }
    }
  });
  report.rows = std::move(rows);
  if (plugin) {
    report.plugin_id = plugin->id();
    report.plugin_fingerprint = plugin->fingerprint();
    for (const std::string& e : plugin_errors) {
      if (!e.empty()) {
        report.warning = "perceptual metric failed (" + e + "); column omitted";
        break;
      }
    }
    if (!report.warning.empty()) {
      for (MetricRow& r : report.rows) r.lpips.reset();
    }
  }
  report.finalize();
  return report;
}

std::string fmt(double v, const char* spec) {
  char buf[48];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    const size_t tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw ValidationError("report: bad number '" + s + "'");
  return v;
}

constexpr const char* kMeanId = "(mean)";

}  // namespace

void MetricReport::finalize() {
  const double n = static_cast<double>(rows.size());
  mean_psnr = mean_ssim = 0.0;
  mean_lpips.reset();
  if (rows.empty()) return;
  bool lp = true;
  double lp_sum = 0.0;
  for (const MetricRow& r : rows) {
    mean_psnr += r.psnr;
    mean_ssim += r.ssim;
    if (r.lpips) {
      lp_sum += *r.lpips;
    } else {
      lp = false;
    }
  }
  mean_psnr /= n;
  mean_ssim /= n;
  if (lp) mean_lpips = lp_sum / n;
}

std::unique_ptr<PerceptualMetricPlugin> make_not_lpips() {
  static constexpr std::array<int, 5> kWidths = {8, 16, 32, 64, 64};
  std::vector<LpipsStyleMetric::Layer> convs;
  std::vector<Tensor> lin;
  int in = 3;
  for (size_t b = 0; b < kVgg16Convs.size(); ++b) {
    const int w = kWidths[b];
    for (int idx : kVgg16Convs[b]) {
      if (idx < 0) continue;
      Tensor weight(Shape{w, in, 3, 3});
      Rng rng(derive_seed(kNotLpipsSeed, static_cast<uint64_t>(idx)));
      const double std = std::sqrt(2.0 / (in * 9));
      for (double& v : weight.values()) v = std * rng.normal();
      weight.round_to_float();
      convs.push_back({Var::constant(std::move(weight)), Var::constant(Tensor(Shape{1, w, 1, 1}))});
      in = w;
    }
    lin.emplace_back(Shape{1, w, 1, 1}, 1.0 / w);
  }
  return std::make_unique<LpipsStyleMetric>("not-lpips", "seed:" + hex64(kNotLpipsSeed), std::move(convs),
                                            std::move(lin));
}

std::unique_ptr<PerceptualMetricPlugin> load_plugin(const std::string& spec) {
  if (spec == "not-lpips") return make_not_lpips();
  const std::filesystem::path path = resolve_weight_file(spec);
  const std::vector<uint8_t> raw = read_file(path);
  const std::string bytes(raw.begin(), raw.end());
  const std::vector<NamedTensor> tensors = decode_tensor_archive(bytes);
  std::map<std::string, const Tensor*> by_name;
  for (const NamedTensor& t : tensors) by_name[t.name] = &t.value;
  auto get = [&](const std::string& name) -> const Tensor& {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw ValidationError(path.string() + ": LPIPS archive lacks '" + name + "'");
    return *it->second;
  };
  std::vector<LpipsStyleMetric::Layer> convs;
  std::vector<Tensor> lin;
  int in = 3;
  for (size_t b = 0; b < kVgg16Convs.size(); ++b) {
    int width = 0;
    for (int idx : kVgg16Convs[b]) {
      if (idx < 0) continue;
      const std::string pre = "features." + std::to_string(idx);
      const Tensor& w = get(pre + ".weight");
      const Tensor& bias = get(pre + ".bias");
      if (w.shape().c != in || w.shape().h != 3 || w.shape().w != 3 ||
          bias.numel() != static_cast<size_t>(w.shape().n)) {
        throw ValidationError(path.string() + ": tensor '" + pre + ".weight' has unexpected shape " + w.shape().str());
      }
      width = w.shape().n;
      convs.push_back({Var::constant(w), Var::constant(Tensor(Shape{1, width, 1, 1},
                                                              std::vector<double>(bias.values().begin(), bias.values().end())))});
      in = width;
    }
    const Tensor& l = get("lin" + std::to_string(b) + ".model.1.weight");
    if (l.numel() != static_cast<size_t>(width)) {
      throw ValidationError(path.string() + ": LPIPS head " + std::to_string(b) + " has " + std::to_string(l.numel()) +
                            " weights, expected " + std::to_string(width));
    }
    lin.emplace_back(Shape{1, width, 1, 1}, std::vector<double>(l.values().begin(), l.values().end()));
  }
  return std::make_unique<LpipsStyleMetric>("lpips-vgg", hex64(fnv1a64(bytes)), std::move(convs), std::move(lin));
}

MetricReport evaluate(const SrFunction& sr, const std::string& model_id, const std::filesystem::path& benchmark_dir,
                      const PerceptualMetricPlugin* plugin, const EvalOptions& options) {
  const DatasetManifest m = load_manifest(benchmark_dir);
  const std::vector<EvalItem> items = eval_items(m, benchmark_dir);
  return score_items(report_header(m, benchmark_dir, model_id), items,
                     [&](size_t i) { return quantize8(sr(read_png(items[i].input))); }, plugin, options);
}

MetricReport evaluate(const SrModel& model, const std::filesystem::path& benchmark_dir,
                      const PerceptualMetricPlugin* plugin, const EvalOptions& options) {
  return evaluate([&](const Image& img) { return model.infer(img); }, model.id(), benchmark_dir, plugin, options);
}

MetricReport score_external(const std::filesystem::path& images_dir, const std::filesystem::path& benchmark_dir,
                            const PerceptualMetricPlugin* plugin, const EvalOptions& options,
                            const std::string& model_id) {
  const DatasetManifest m = load_manifest(benchmark_dir);
  const std::vector<EvalItem> items = eval_items(m, benchmark_dir);
  std::set<std::string> expected, present;
  for (const EvalItem& it : items) expected.insert(it.id + ".png");
  if (!std::filesystem::is_directory(images_dir)) throw IoError("not a directory: " + images_dir.string());
  for (const auto& p : list_png_files(images_dir)) present.insert(p.filename().string());
  std::vector<std::string> problems;
  for (const std::string& e : expected) {
    if (!present.count(e)) problems.push_back("missing " + e);
  }
  for (const std::string& p : present) {
    if (!expected.count(p)) problems.push_back("unexpected " + p);
  }
  if (!problems.empty()) {
    std::string msg = "image directory does not match the eval set:";
    for (const std::string& p : problems) msg += "\n  " + p;
    throw ValidationError(msg);
  }
  const std::string id = model_id.empty() ? "external:" + images_dir.filename().string() : model_id;
  return score_items(report_header(m, benchmark_dir, id), items,
                     [&](size_t i) { return read_png(images_dir / (items[i].id + ".png")); }, plugin, options);
}

void dump_outputs(const SrModel& model, const std::filesystem::path& benchmark_dir,
                  const std::filesystem::path& out_dir, int workers) {
  const DatasetManifest m = load_manifest(benchmark_dir);
  const std::vector<EvalItem> items = eval_items(m, benchmark_dir);
  parallel_for(items.size(), workers, [&](size_t i) {
    write_png(out_dir / (items[i].id + ".png"), model.infer(read_png(items[i].input)));
  });
}

ReportFormat parse_report_format(const std::string& s) {
  if (s == "table" || s == "text") return ReportFormat::kTextTable;
  if (s == "tsv" || s == "delimited") return ReportFormat::kDelimited;
  throw ValidationError("unknown report format '" + s + "' (expected table or tsv)");
}

std::string render_report(const MetricReport& report, ReportFormat format) {
  const bool lp = report.has_lpips();
  std::ostringstream o;
  if (format == ReportFormat::kDelimited) {
    o << "# checkpoint=" << report.checkpoint_id << "\n"
      << "# benchmark=" << report.benchmark_id << "\n"
      << "# scenario=" << report.scenario << "\n"
      << "# degradation=" << report.degradation << "\n";
    if (!report.plugin_id.empty()) {
      o << "# plugin=" << report.plugin_id << "\n# plugin_fingerprint=" << report.plugin_fingerprint << "\n";
    }
    if (!report.warning.empty()) o << "# warning=" << report.warning << "\n";
    o << "image_id\tpsnr\tssim" << (lp ? "\tlpips" : "") << "\n";
    for (const MetricRow& r : report.rows) {
      o << r.image_id << "\t" << fmt(r.psnr, "%.17g") << "\t" << fmt(r.ssim, "%.17g");
      if (lp) o << "\t" << fmt(*r.lpips, "%.17g");
      o << "\n";
    }
    if (!report.rows.empty()) {
      o << kMeanId << "\t" << fmt(report.mean_psnr, "%.17g") << "\t" << fmt(report.mean_ssim, "%.17g");
      if (lp) o << "\t" << fmt(*report.mean_lpips, "%.17g");
      o << "\n";
    }
    return o.str();
  }

  size_t id_width = 8;
  for (const MetricRow& r : report.rows) id_width = std::max(id_width, r.image_id.size());
  auto pad = [](std::string s, size_t w) {
    if (s.size() < w) s.append(w - s.size(), ' ');
    return s;
  };
  o << "checkpoint   " << report.checkpoint_id << "\n"
    << "benchmark    " << report.benchmark_id << "\n"
    << "scenario     " << report.scenario << "\n"
    << "degradation  " << report.degradation << "\n"
    << "perceptual   "
    << (report.plugin_id.empty() ? std::string("none") : report.plugin_id + " " + report.plugin_fingerprint) << "\n";
  if (!report.warning.empty()) o << "warning      " << report.warning << "\n";
  o << "\n" << pad("image", id_width) << "  " << "    PSNR↑" << "   SSIM↑" << (lp ? "  LPIPS↓" : "") << "\n";
  auto line = [&](const std::string& id, double p, double s, std::optional<double> l) {
    o << pad(id, id_width) << "  " << fmt(p, "%9.4f") << " " << fmt(s, "%7.4f");
    if (lp) o << " " << fmt(*l, "%8.4f");
    o << "\n";
  };
  for (const MetricRow& r : report.rows) line(r.image_id, r.psnr, r.ssim, r.lpips);
  if (!report.rows.empty()) line("mean", report.mean_psnr, report.mean_ssim, report.mean_lpips);
  return o.str();
}

MetricReport parse_delimited_report(const std::string& text) {
  MetricReport r;
  std::istringstream in(text);
  std::string line;
  bool header_seen = false, lp = false, mean_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = line.substr(2, eq - 2), value = line.substr(eq + 1);
      if (key == "checkpoint") r.checkpoint_id = value;
      else if (key == "benchmark") r.benchmark_id = value;
      else if (key == "scenario") r.scenario = value;
      else if (key == "degradation") r.degradation = value;
      else if (key == "plugin") r.plugin_id = value;
      else if (key == "plugin_fingerprint") r.plugin_fingerprint = value;
      else if (key == "warning") r.warning = value;
      continue;
    }
    const std::vector<std::string> cols = split_tabs(line);
    if (!header_seen) {
      if (cols.size() < 3 || cols[0] != "image_id" || cols[1] != "psnr" || cols[2] != "ssim") {
        throw ValidationError("report: missing header row");
      }
      lp = cols.size() == 4 && cols[3] == "lpips";
      header_seen = true;
      continue;
    }
    if (cols.size() != (lp ? 4u : 3u)) throw ValidationError("report: wrong column count in '" + line + "'");
    if (cols[0] == kMeanId) {
      mean_seen = true;
      continue;
    }
    if (mean_seen) throw ValidationError("report: rows after the mean row");
    MetricRow row;
    row.image_id = cols[0];
    row.psnr = parse_double(cols[1]);
    row.ssim = parse_double(cols[2]);
    if (lp) row.lpips = parse_double(cols[3]);
    r.rows.push_back(std::move(row));
  }
  if (!header_seen) throw ValidationError("report: missing header row");
  r.finalize();
  return r;
}

}  // namespace realsr
