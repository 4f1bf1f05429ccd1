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
#include <set>

#include "../support/oracles.hpp"
#include "realsr/common.hpp"
#include "realsr/degrade.hpp"
#include "realsr/image.hpp"
#include "realsr/image_io.hpp"
#include "realsr/synth.hpp"

using namespace realsr;

namespace {

TrainingSources sources(int n_in, int n_out, int n_eval, int size = 64) {
  TrainingSources s;
  for (int i = 0; i < n_in; ++i) s.train_input.push_back({"in" + std::to_string(i), synth_image(size, size, 10 + i)});
  for (int i = 0; i < n_out; ++i) s.train_output.push_back({"out" + std::to_string(i), synth_image(size, size, 50 + i)});
  for (int i = 0; i < n_eval; ++i) s.eval.push_back({"ev" + std::to_string(i), synth_image(size, size, 90 + i)});
  return s;
}

}  // namespace

TEST_CASE("sensor noise: zero sigma is the identity, determinism, rejection") {
  const Image img = oracle::random_image(16, 16, 1);
  CHECK(apply_sensor_noise(img, 0.0, 5) == img);
  CHECK(apply_sensor_noise(img, 8.0, 5) == apply_sensor_noise(img, 8.0, 5));
  CHECK_FALSE(apply_sensor_noise(img, 8.0, 5) == apply_sensor_noise(img, 8.0, 6));
  CHECK_THROWS_AS(apply_sensor_noise(img, -1.0, 5), ValidationError);
}

TEST_CASE("sensor noise statistics on mid-gray") {
  const Image gray(256, 256, 0.5f);
  const Image noisy = apply_sensor_noise(gray, 8.0, 42);
  CHECK(std::fabs(psnr(gray, noisy) - 10.0 * std::log10(255.0 * 255.0 / 64.0)) < 0.3);
  double sum = 0.0, sq = 0.0;
  const size_t n = gray.size();
  for (size_t i = 0; i < n; ++i) {
    const double r = static_cast<double>(noisy.samples()[i]) - gray.samples()[i];
    sum += r;
    sq += r * r;
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sq / n - mean * mean);
  CHECK(std::fabs(mean) < 0.5 / 255.0);
  CHECK(std::fabs(sd - 8.0 / 255.0) < 0.02 * 8.0 / 255.0);
}

TEST_CASE("jpeg round trip") {
  const Image flat(32, 32, 0.6f);
  CHECK(psnr(flat, apply_jpeg(flat, 100)) > 50.0);
  const Image crop = synth_image(64, 64, 3);
  const Image q30 = apply_jpeg(crop, 30), q90 = apply_jpeg(crop, 90);
  CHECK(q30.height() == 64);
  CHECK(q30.width() == 64);
  CHECK(ssim(crop, q30) < ssim(crop, q90));
  // Recompressing at the same quality changes much less than the first pass.
  CHECK(psnr(q30, apply_jpeg(q30, 30)) > psnr(crop, q30));
  CHECK(apply_jpeg(crop, 30) == q30);
  CHECK_THROWS_AS(apply_jpeg(crop, 0), ValidationError);
  CHECK_THROWS_AS(apply_jpeg(crop, 101), ValidationError);
  CHECK_FALSE(jpeg_codec_id().empty());
}

TEST_CASE("eval pairs: DSR and CSR definitions") {
  const Image orig = synth_image(256, 256, 7);
  const auto zero = DegradationRecipe::sensor_noise(0.0, 1);
  const EvalPair dz = make_dsr_eval_pair(orig, 4, zero);
  CHECK(dz.input == downsample(orig, 4));
  CHECK(dz.gt == orig);
  const auto noise = DegradationRecipe::sensor_noise(8.0, 1);
  const EvalPair d = make_dsr_eval_pair(orig, 4, noise);
  CHECK(d.input.height() == 64);
  CHECK(d.gt.height() == 256);
  // Flat image keeps the statistical oracle away from the clamp.
  const EvalPair flat = make_dsr_eval_pair(Image(256, 256, 0.5f), 4, noise);
  CHECK(std::fabs(psnr(flat.gt, Image(256, 256, 0.5f)) - 30.07) < 0.3);

  const EvalPair c = make_csr_eval_pair(orig, 4, noise);
  CHECK(c.gt == orig);
  CHECK(make_csr_eval_pair(orig, 4, zero).input == downsample(orig, 4));
  const Image b = downsample(orig, 4);
  size_t differ = 0, total = 0;
  for (int y = 0; y < b.height(); ++y)
    for (int x = 0; x < b.width(); ++x) {
      bool any = false;
      for (int ch = 0; ch < 3; ++ch) any |= to_byte(c.input.at(y, x, ch)) != to_byte(b.at(y, x, ch));
      differ += any;
      ++total;
    }
  CHECK(differ >= 0.99 * total);
  CHECK_THROWS_AS(make_dsr_eval_pair(synth_image(30, 32, 1), 4, noise), ValidationError);
  CHECK_THROWS_AS(make_csr_eval_pair(synth_image(32, 30, 1), 4, noise), ValidationError);
}

TEST_CASE("train input is degraded after downsampling") {
  const Image orig = synth_image(64, 64, 8);
  const auto r = DegradationRecipe::sensor_noise(8.0, 3);
  CHECK(make_train_input(orig, 4, r) == apply_sensor_noise(downsample(orig, 4), 8.0, 3));
  CHECK(make_train_output(orig, 4) == downsample(orig, 4));
}

TEST_CASE("DSR tags one set as both domains, CSR two disjoint sets") {
  const auto recipe = DegradationRecipe::sensor_noise(8.0, 0);
  const auto dsr = build_training_sets(sources(3, 0, 0), Scenario::kDSR, 4, recipe, 7);
  CHECK(dsr.manifest.entries.size() == 3);
  for (const auto& e : dsr.manifest.entries) CHECK(e.roles == (kTrainInputX | kTrainOutputY));
  const auto csr = build_training_sets(sources(3, 2, 0), Scenario::kCSR, 4, recipe, 7);
  CHECK(csr.manifest.with_role(kTrainInputX).size() == 3);
  CHECK(csr.manifest.with_role(kTrainOutputY).size() == 2);
  std::set<std::string> xs, ys;
  for (const auto* e : csr.manifest.with_role(kTrainInputX)) xs.insert(e->source_id);
  for (const auto* e : csr.manifest.with_role(kTrainOutputY)) ys.insert(e->source_id);
  for (const auto& id : xs) CHECK(ys.count(id) == 0);
  CHECK_THROWS_AS(build_training_sets(sources(3, 2, 0), Scenario::kDSR, 4, recipe, 7), ValidationError);
  CHECK_THROWS_AS(build_training_sets(sources(3, 0, 0), Scenario::kCSR, 4, recipe, 7), ValidationError);
}

TEST_CASE("benchmark generation is deterministic, seeded per image, and worker-independent") {
  const auto recipe = DegradationRecipe::sensor_noise(8.0, 0);
  const auto a = build_benchmark(sources(3, 0, 2), Scenario::kDSR, 4, recipe, 11, 1);
  const auto b = build_benchmark(sources(3, 0, 2), Scenario::kDSR, 4, recipe, 11, 3);
  REQUIRE(a.files.size() == b.files.size());
  for (size_t i = 0; i < a.files.size(); ++i) {
    CHECK(a.files[i].path == b.files[i].path);
    CHECK(a.files[i].image == b.files[i].image);
  }
  CHECK(a.manifest == b.manifest);
  CHECK(a.manifest.eval_pairs().size() == 2);
  // Adding an image does not perturb the existing ones.
  const auto c = build_benchmark(sources(4, 0, 2), Scenario::kDSR, 4, recipe, 11, 1);
  CHECK(c.files[0].image == a.files[0].image);
  CHECK(c.files[2].image == a.files[2].image);
  // DSR eval pair uses independent realisations for input and gt.
  const auto pairs = a.manifest.eval_pairs();
  CHECK(pairs[0].first->seed != pairs[0].second->seed);
}

TEST_CASE("train and eval sources must be disjoint") {
  auto s = sources(2, 0, 1);
  s.eval.push_back({"in0", synth_image(64, 64, 10)});
  CHECK_THROWS_AS(build_benchmark(s, Scenario::kDSR, 4, DegradationRecipe::jpeg(30), 1), ValidationError);
}

TEST_CASE("eval originals are centre-cropped to the scale and the crop recorded") {
  TrainingSources s = sources(1, 0, 0);
  s.eval.push_back({"odd", synth_image(70, 66, 5)});
  const auto bench = build_benchmark(s, Scenario::kDSR, 4,
                                     DegradationRecipe::sensor_noise(8.0, 0), 3);
  const auto pairs = bench.manifest.eval_pairs();
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].second->params.find("crop=") != std::string::npos);
  for (const auto& f : bench.files) {
    if (f.path == pairs[0].second->path) {
      CHECK(f.image.height() == 68);
      CHECK(f.image.width() == 64);
    }
  }
}

TEST_CASE("manifest serialisation round-trips and validation catches broken pairing") {
  const auto bench = build_benchmark(sources(2, 2, 2), Scenario::kCSR, 4, DegradationRecipe::jpeg(30, 0), 5);
  const std::string text = bench.manifest.serialize();
  CHECK(DatasetManifest::parse(text) == bench.manifest);
  CHECK(text.find("master_seed") != std::string::npos);
  DatasetManifest broken = bench.manifest;
  for (auto it = broken.entries.begin(); it != broken.entries.end(); ++it) {
    if (it->roles & kEvalGt) {
      broken.entries.erase(it);
      break;
    }
  }
  CHECK_THROWS_AS(broken.validate(), ValidationError);
  CHECK_THROWS_AS(DatasetManifest::parse("garbage\n"), ValidationError);
}

TEST_CASE("write_benchmark creates the four directories and skips identical files") {
  const auto dir = oracle::scratch_dir("degrade_write");
  const auto bench = build_benchmark(sources(2, 0, 1), Scenario::kDSR, 4, DegradationRecipe::sensor_noise(8, 0), 5);
  const auto first = write_benchmark(bench, dir);
  CHECK(first.written > 0);
  for (const char* sub : {"train_input", "train_output", "eval_input", "eval_gt"}) {
    CHECK(std::filesystem::is_directory(dir / sub));
  }
  const auto second = write_benchmark(bench, dir);
  CHECK(second.written == 0);
  CHECK(load_manifest(dir) == bench.manifest);
  // Files on disk decode to the in-memory images.
  for (const auto& f : bench.files) CHECK(read_png(dir / f.path) == quantize8(f.image));
  CHECK(benchmark_dir_name(Scenario::kDSR, DegradationRecipe::sensor_noise(8, 0)) == "dsr_noise");
  CHECK(benchmark_dir_name(Scenario::kCSR, DegradationRecipe::jpeg(30)) == "csr_jpeg");
}
