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

#ifndef REALSR_DEGRADE_HPP_
#define REALSR_DEGRADE_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "realsr/image.hpp"

namespace realsr {

struct DegradationRecipe {
  enum class Kind { kSensorNoise, kJpeg };
  Kind kind = Kind::kSensorNoise;
  double sigma_8bit = 8.0;  // sensor noise only
  int quality = 30;         // jpeg only
  uint64_t seed = 0;

  static DegradationRecipe sensor_noise(double sigma_8bit, uint64_t seed) {
    return {Kind::kSensorNoise, sigma_8bit, 30, seed};
  }
  static DegradationRecipe jpeg(int quality, uint64_t seed = 0) {
    return {Kind::kJpeg, 8.0, quality, seed};
  }

  void validate() const;
  // "sensor_noise" / "jpeg"
  std::string kind_name() const;
  // Short tag used in directory names: "noise" / "jpeg".
  std::string short_name() const;
  // "sigma_8bit=8" / "quality=30"
  std::string params() const;
  DegradationRecipe with_seed(uint64_t s) const {
    DegradationRecipe r = *this;
    r.seed = s;
    return r;
  }
};

// Adds i.i.d. N(0, (sigma_8bit/255)^2) to every sample, then clamps.
Image apply_sensor_noise(const Image& img, double sigma_8bit, uint64_t seed);

// Baseline JPEG round trip (4:2:0, integer DCT) at the given quality.
Image apply_jpeg(const Image& img, int quality);

// Identifies the pinned codec configuration, e.g. "libjpeg-turbo 80 islow 4:2:0".
std::string jpeg_codec_id();

Image apply_degradation(const Image& img, const DegradationRecipe& recipe);

struct EvalPair {
  Image input;
  Image gt;
};

// Degradation is always applied after downsampling. The two degradations use
// independent seeds derived from recipe.seed.
EvalPair make_dsr_eval_pair(const Image& original, int scale, const DegradationRecipe& recipe);
EvalPair make_csr_eval_pair(const Image& original, int scale, const DegradationRecipe& recipe);

// Training input-domain sample: degrade(B(original)).
Image make_train_input(const Image& original, int scale, const DegradationRecipe& recipe);
// Clean output-domain sample (CSR only): B(original).
Image make_train_output(const Image& original, int scale);

// Largest centred crop whose dimensions are multiples of `scale`.
struct CenterCrop {
  int y0 = 0, x0 = 0, height = 0, width = 0;
};
CenterCrop center_crop_for(int height, int width, int scale);

enum class Scenario { kDSR, kCSR };
std::string to_string(Scenario s);
Scenario parse_scenario(const std::string& s);

// Role tags. DSR training entries carry both train roles.
enum Role : unsigned {
  kTrainInputX = 1u << 0,
  kTrainOutputY = 1u << 1,
  kEvalInput = 1u << 2,
  kEvalGt = 1u << 3,
};
std::string roles_to_string(unsigned roles);
unsigned parse_roles(const std::string& s);

struct ManifestEntry {
  unsigned roles = 0;
  std::string path;  // relative to the benchmark directory
  std::string source_id;
  std::string recipe_kind;  // "sensor_noise", "jpeg" or "none"
  std::string params;       // space separated key=value
  uint64_t seed = 0;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct DatasetManifest {
  std::string tool_version;
  uint64_t master_seed = 0;
  Scenario scenario = Scenario::kDSR;
  int scale = 4;
  DegradationRecipe recipe;
  std::string codec;  // jpeg codec id, empty for sensor noise
  std::vector<ManifestEntry> entries;

  std::vector<const ManifestEntry*> with_role(unsigned role) const;
  // Eval (input, gt) entry pairs joined on source_id, in entry order.
  std::vector<std::pair<const ManifestEntry*, const ManifestEntry*>> eval_pairs() const;

  // Checks pairing and train/eval disjointness; throws ValidationError.
  void validate() const;

  std::string serialize() const;
  static DatasetManifest parse(const std::string& text);

  friend bool operator==(const DatasetManifest&, const DatasetManifest&);
};

struct SourceImage {
  std::string id;
  Image image;
};

struct TrainingSources {
  std::vector<SourceImage> train_input;   // originals for {X_i}
  std::vector<SourceImage> train_output;  // originals for {Y_j}; CSR only
  std::vector<SourceImage> eval;          // originals for eval pairs
};

// One generated file, path relative to the benchmark directory.
struct GeneratedFile {
  std::string path;
  Image image;
};

struct GeneratedBenchmark {
  DatasetManifest manifest;
  std::vector<GeneratedFile> files;
};

// Builds every training and evaluation image plus the manifest, in memory.
// DSR: one set degrade(B(orig)) tagged as both domains. CSR: the same input
// set plus a clean set B(orig) from `train_output`. `workers` > 1 parallelises
// over images; results do not depend on it.
GeneratedBenchmark build_benchmark(const TrainingSources& sources, Scenario scenario, int scale,
                                   const DegradationRecipe& recipe, uint64_t master_seed,
                                   int workers = 1);

// Only the training part (no eval entries).
GeneratedBenchmark build_training_sets(const TrainingSources& sources, Scenario scenario,
                                       int scale, const DegradationRecipe& recipe,
                                       uint64_t master_seed, int workers = 1);

std::string benchmark_dir_name(Scenario scenario, const DegradationRecipe& recipe);

struct WriteStats {
  int written = 0;
  int unchanged = 0;
};
// Writes files + manifest.tsv under `dir`, skipping byte-identical files.
WriteStats write_benchmark(const GeneratedBenchmark& bench, const std::filesystem::path& dir);

inline constexpr const char* kManifestFile = "manifest.tsv";

DatasetManifest load_manifest(const std::filesystem::path& benchmark_dir);

}  // namespace realsr

#endif  // REALSR_DEGRADE_HPP_
