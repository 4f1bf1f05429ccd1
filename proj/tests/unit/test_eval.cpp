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

#include <doctest.h>

#include <cmath>
#include <limits>

#include "../support/oracles.hpp"
#include "realsr/common.hpp"
#include "realsr/degrade.hpp"
#include "realsr/eval.hpp"
#include "realsr/image_io.hpp"
#include "realsr/synth.hpp"

using namespace realsr;

namespace {

std::filesystem::path make_benchmark(const std::string& name, int scale, double sigma) {
  TrainingSources s;
  s.train_input.push_back({"tr0", synth_image(64, 64, 1)});
  for (int i = 0; i < 3; ++i) s.eval.push_back({"ev" + std::to_string(i), synth_image(48, 64, 20 + i)});
  const auto dir = oracle::scratch_dir(name);
  write_benchmark(build_benchmark(s, Scenario::kDSR, scale, DegradationRecipe::sensor_noise(sigma, 0), 9), dir);
  return dir;
}

Checkpoint baseline_checkpoint() {
  Checkpoint ck;
  ck.set_network("S", NetworkParams::initialized(Architecture::kSrGenerator, Preset::kDesk, 2));
  ck.meta["mode"] = "baseline";
  return ck;
}

}  // namespace

TEST_CASE("identity model at scale 1 without noise scores infinite PSNR") {
  const auto dir = make_benchmark("eval_identity", 1, 0.0);
  const MetricReport r = evaluate([](const Image& img) { return img; }, "identity", dir, nullptr);
  REQUIRE(r.rows.size() == 3);
  for (const auto& row : r.rows) {
    CHECK(row.psnr == std::numeric_limits<double>::infinity());
    CHECK(row.ssim == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_FALSE(row.lpips.has_value());
  }
  CHECK_FALSE(r.has_lpips());
  CHECK(r.scenario == "DSR");
}

TEST_CASE("evaluation is deterministic and one row per eval pair") {
  const auto dir = make_benchmark("eval_repeat", 4, 8.0);
  const SrModel model(baseline_checkpoint());
  const auto plugin = make_not_lpips();
  const MetricReport a = evaluate(model, dir, plugin.get());
  const MetricReport b = evaluate(model, dir, plugin.get(), {0, 3});
  CHECK(a.rows.size() == load_manifest(dir).eval_pairs().size());
  CHECK(render_report(a, ReportFormat::kDelimited) == render_report(b, ReportFormat::kDelimited));
  CHECK(a.has_lpips());
  CHECK(a.checkpoint_id == model.id());
  // Aggregates are the plain means of the rows.
  double p = 0.0, s = 0.0, l = 0.0;
  for (const auto& row : a.rows) {
    p += row.psnr;
    s += row.ssim;
    l += *row.lpips;
  }
  CHECK(a.mean_psnr == doctest::Approx(p / 3));
  CHECK(a.mean_ssim == doctest::Approx(s / 3));
  CHECK(*a.mean_lpips == doctest::Approx(l / 3));
}

TEST_CASE("scoring external images: ground truth, bicubic, constant gray") {
  const auto dir = make_benchmark("eval_score", 4, 8.0);
  const auto plugin = make_not_lpips();
  const DatasetManifest m = load_manifest(dir);

  const auto gt_dir = dir.parent_path() / "realsr_test_eval_score_gt";
  const auto bic_dir = dir.parent_path() / "realsr_test_eval_score_bic";
  const auto gray_dir = dir.parent_path() / "realsr_test_eval_score_gray";
  for (const auto& d : {gt_dir, bic_dir, gray_dir}) {
    std::filesystem::remove_all(d);
    std::filesystem::create_directories(d);
  }
  std::vector<Image> gts;
  for (const auto& [in, gt] : m.eval_pairs()) {
    const Image g = read_png(dir / gt->path);
    gts.push_back(g);
    write_png(gt_dir / (in->source_id + ".png"), g);
    write_png(bic_dir / (in->source_id + ".png"), resample(read_png(dir / in->path), 4, 1));
    write_png(gray_dir / (in->source_id + ".png"), Image(g.height(), g.width(), 128.0f / 255.0f));
  }
  const MetricReport self = score_external(gt_dir, dir, plugin.get());
  const MetricReport bic = score_external(bic_dir, dir, plugin.get());
  const MetricReport gray = score_external(gray_dir, dir, nullptr);
  CHECK(self.checkpoint_id == "external:realsr_test_eval_score_gt");
  for (const auto& row : self.rows) {
    CHECK(row.psnr == std::numeric_limits<double>::infinity());
    CHECK(*row.lpips == 0.0);
  }
  CHECK(bic.mean_ssim < self.mean_ssim);
  CHECK(*bic.mean_lpips > 0.0);
  for (size_t i = 0; i < gray.rows.size(); ++i) {
    const double mse = oracle::mse(gts[i], Image(gts[i].height(), gts[i].width(), 128.0f / 255.0f));
    CHECK(gray.rows[i].psnr == doctest::Approx(10.0 * std::log10(1.0 / mse)).epsilon(1e-9));
  }
  // Missing and extra files are both listed.
  std::filesystem::remove(gt_dir / "ev0.png");
  write_png(gt_dir / "stray.png", gts[0]);
  try {
    score_external(gt_dir, dir, nullptr);
    FAIL("expected a ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("missing ev0.png") != std::string::npos);
    CHECK(std::string(e.what()).find("unexpected stray.png") != std::string::npos);
  }
  CHECK_THROWS_AS(score_external(dir / "nope", dir, nullptr), IoError);
}

TEST_CASE("evaluate and score_external agree byte for byte") {
  const auto dir = make_benchmark("eval_parity", 4, 8.0);
  const SrModel model(baseline_checkpoint());
  const auto plugin = make_not_lpips();
  const auto out = dir.parent_path() / "realsr_test_eval_parity_out";
  std::filesystem::remove_all(out);
  std::filesystem::create_directories(out);
  dump_outputs(model, dir, out);
  const MetricReport a = evaluate(model, dir, plugin.get());
  const MetricReport b = score_external(out, dir, plugin.get(), {}, model.id());
  CHECK(render_report(a, ReportFormat::kDelimited) == render_report(b, ReportFormat::kDelimited));
  CHECK(render_report(a, ReportFormat::kTextTable) == render_report(b, ReportFormat::kTextTable));
}

TEST_CASE("delimited reports parse back") {
  MetricReport empty;
  const std::string text = render_report(empty, ReportFormat::kDelimited);
  CHECK(text.find("image_id\tpsnr\tssim\n") != std::string::npos);
  CHECK(text.find("(mean)") == std::string::npos);
  CHECK(parse_delimited_report(text).rows.empty());

  MetricReport r;
  r.checkpoint_id = "m";
  r.benchmark_id = "b@1";
  r.scenario = "CSR";
  r.degradation = "jpeg quality=30";
  r.plugin_id = "not-lpips";
  r.plugin_fingerprint = "seed:1";
  r.rows = {{"a", 21.5, 0.625, 0.25}, {"b", std::numeric_limits<double>::infinity(), 1.0, 0.0}, {"c", 1.0 / 3, 0.1, 0.3}};
  r.finalize();
  const MetricReport back = parse_delimited_report(render_report(r, ReportFormat::kDelimited));
  REQUIRE(back.rows.size() == 3);
  for (size_t i = 0; i < 3; ++i) {
    CHECK(back.rows[i].image_id == r.rows[i].image_id);
    CHECK(back.rows[i].psnr == r.rows[i].psnr);
    CHECK(back.rows[i].ssim == r.rows[i].ssim);
    CHECK(*back.rows[i].lpips == *r.rows[i].lpips);
  }
  CHECK(back.degradation == r.degradation);
  CHECK(back.plugin_fingerprint == "seed:1");
  CHECK(*back.mean_lpips == doctest::Approx(0.55 / 3));
  CHECK(render_report(back, ReportFormat::kDelimited) == render_report(r, ReportFormat::kDelimited));
  CHECK_THROWS_AS(parse_delimited_report("a\tb\n"), ValidationError);
  CHECK_THROWS_AS(parse_report_format("xml"), ValidationError);
}

TEST_CASE("perceptual plugin: zero on identical images, symmetric, non-negative") {
  const auto p = make_not_lpips();
  CHECK(p->id() == "not-lpips");
  CHECK(load_plugin("not-lpips")->fingerprint() == p->fingerprint());
  for (int i = 0; i < 4; ++i) {
    const Image a = synth_image(32, 32, 70 + i), b = synth_image(32, 32, 80 + i);
    CHECK(p->distance(a, a) == 0.0);
    const double d = p->distance(a, b);
    CHECK(d > 0.0);
    CHECK(d == p->distance(b, a));
    CHECK(p->clone()->distance(a, b) == d);
  }
  CHECK_THROWS_AS(load_plugin("/nonexistent/lpips.bin"), IoError);
}
