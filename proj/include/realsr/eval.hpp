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

#ifndef REALSR_EVAL_HPP_
#define REALSR_EVAL_HPP_

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "realsr/image.hpp"
#include "realsr/train.hpp"

namespace realsr {

struct MetricRow {
  std::string image_id;
  double psnr = 0.0;
  double ssim = 0.0;
  std::optional<double> lpips;
};

struct MetricReport {
  std::vector<MetricRow> rows;
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;
  std::optional<double> mean_lpips;
  std::string checkpoint_id;
  std::string benchmark_id;
  std::string scenario;
  std::string degradation;
  std::string plugin_id;           // empty when no perceptual metric ran
  std::string plugin_fingerprint;
  std::string warning;             // set when the perceptual plugin failed

  bool has_lpips() const { return !plugin_id.empty() && warning.empty(); }
  // Recomputes the aggregates from the rows.
  void finalize();
};

// Perceptual distance. Implementations must give distance(a, a) == 0, be
// symmetric and non-negative. One instance per worker thread.
class PerceptualMetricPlugin {
 public:
  virtual ~PerceptualMetricPlugin() = default;
  virtual std::string id() const = 0;
  virtual std::string fingerprint() const = 0;
  virtual double distance(const Image& a, const Image& b) const = 0;
  virtual std::unique_ptr<PerceptualMetricPlugin> clone() const = 0;
};

// Built-in stand-in: the LPIPS procedure on a seeded random VGG16-shaped
// stack with uniform layer weights. Labelled "not-lpips".
std::unique_ptr<PerceptualMetricPlugin> make_not_lpips();

// "not-lpips", or a tensor archive holding torchvision VGG16 features
// ("features.N.*") plus LPIPS linear heads ("linK.model.1.weight").
std::unique_ptr<PerceptualMetricPlugin> load_plugin(const std::string& spec);

struct EvalOptions {
  int shave = 0;
  int workers = 1;
};

using SrFunction = std::function<Image(const Image&)>;

// Runs `sr` on every eval input and scores the 8-bit-quantised output
// against the eval ground truth.
MetricReport evaluate(const SrFunction& sr, const std::string& model_id,
                      const std::filesystem::path& benchmark_dir, const PerceptualMetricPlugin* plugin,
                      const EvalOptions& options = {});
MetricReport evaluate(const SrModel& model, const std::filesystem::path& benchmark_dir,
                      const PerceptualMetricPlugin* plugin, const EvalOptions& options = {});

// Scores "<source_id>.png" files from `images_dir` against the eval ground
// truth. Missing or unexpected files are listed in the error. `model_id`
// defaults to "external:<dir name>".
MetricReport score_external(const std::filesystem::path& images_dir,
                            const std::filesystem::path& benchmark_dir,
                            const PerceptualMetricPlugin* plugin, const EvalOptions& options = {},
                            const std::string& model_id = "");

// Writes model outputs as "<source_id>.png" for score_external.
void dump_outputs(const SrModel& model, const std::filesystem::path& benchmark_dir,
                  const std::filesystem::path& out_dir, int workers = 1);

enum class ReportFormat { kTextTable, kDelimited };
ReportFormat parse_report_format(const std::string& s);
std::string render_report(const MetricReport& report, ReportFormat format);
// Reads the delimited format back.
MetricReport parse_delimited_report(const std::string& text);

}  // namespace realsr

#endif  // REALSR_EVAL_HPP_
