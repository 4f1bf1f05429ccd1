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

#ifndef REALSR_TRAIN_HPP_
#define REALSR_TRAIN_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "realsr/checkpoint.hpp"
#include "realsr/degrade.hpp"
#include "realsr/losses.hpp"
#include "realsr/nets.hpp"

namespace realsr {

enum class Stage { kDdl, kSr };
std::string to_string(Stage s);
Stage parse_stage(const std::string& s);

enum class Mode { kOurs, kBaseline, kCleanInput, kLrSupervision, kSupervised };
std::string to_string(Mode m);
Mode parse_mode(const std::string& s);

struct TrainConfig {
  Stage stage = Stage::kSr;
  Mode mode = Mode::kOurs;
  Preset preset = Preset::kDesk;
  uint64_t seed = 0;
  int batch_size = 4;
  int hr_crop = 64;     // SR stage: HR crop, LR crop is hr_crop / 4
  int ddl_crop = 16;    // domain stage crop on both domains
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  int epochs = 0;       // domain stage: passes over the larger domain set
  uint64_t steps = 0;   // total optimisation steps; 0 derives them from epochs
  LossWeights weights;
  DdlGan ddl_gan = DdlGan::kLogistic;
  uint64_t checkpoint_every = 0;  // 0: only at the end
  int workers = 1;
  std::string sr_init;      // optional SR weights (checkpoint or ESRGAN archive)
  std::string vgg_weights;  // optional feature-extractor archive
  bool materialize_pairs = false;

  // Stage/preset defaults.
  static TrainConfig defaults(Stage stage, Preset preset);

  // Flat "key = value" text, '#' starts a comment. Keys absent from the text
  // keep the values of `base`; unknown keys and malformed values throw.
  static TrainConfig parse(const std::string& text, const TrainConfig& base);
  // Every key, one per line, in a fixed order. parse(dump()) round-trips.
  std::string dump() const;
  void validate() const;
};

// Images of the two domains, loaded from a generated benchmark.
struct TrainingData {
  std::vector<Image> x;  // input domain {X_i}
  std::vector<Image> y;  // output domain {Y_j}
  DegradationRecipe recipe;
  Scenario scenario = Scenario::kDSR;
  int scale = 4;

  static TrainingData from_benchmark(const std::filesystem::path& dir);
};

struct TrainHooks {
  std::function<void(const std::string&)> on_log;      // one line per step
  std::function<void(const std::string&)> on_warning;
  // Called after every checkpoint write (cadence and final).
  std::function<void(const Checkpoint&)> on_checkpoint;
  // Stop (and checkpoint) once this many steps are done; 0 disables.
  uint64_t stop_after = 0;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<std::string> log;
};

// Domain stage: G (bicubic -> input domain), F (inverse), D_X, D_Z.
// `out` receives the checkpoint at the cadence and at the end; a diverging
// run throws DivergenceError and leaves the last good file in place.
TrainResult train_ddl(const TrainConfig& config, const TrainingData& data,
                      const std::filesystem::path& out, const TrainHooks& hooks = {});

// SR stage. `ddl` is required for ours and clean_input.
TrainResult train_sr(const TrainConfig& config, const TrainingData& data, const Checkpoint* ddl,
                     const std::filesystem::path& out, const TrainHooks& hooks = {});

// Continues a run from its checkpoint with the stored configuration.
TrainResult resume_training(const Checkpoint& from, const TrainingData& data,
                            const std::filesystem::path& out, const TrainHooks& hooks = {});

// (G(B(y)), y) with G frozen; x_hat is clamped to the image range.
std::pair<Image, Image> generate_training_pair(const NetworkParams& g, const Image& y, int scale);

// Inference model assembled from an SR checkpoint.
class SrModel {
 public:
  // `mode` defaults to the training mode stored in the checkpoint; a
  // `runtime_preset` that differs from the checkpoint's is rejected.
  explicit SrModel(const Checkpoint& ckpt, std::optional<Mode> mode = std::nullopt,
                   std::optional<Preset> runtime_preset = std::nullopt);

  // x4 output. Large inputs are processed in overlapping tiles.
  Image infer(const Image& lr) const;
  Mode mode() const { return mode_; }
  Preset preset() const { return s_.preset(); }
  // Stable identifier: preset, mode and the S checksum.
  std::string id() const;

 private:
  NetworkParams s_;
  std::optional<NetworkParams> f_;
  Mode mode_;
};

Image infer(const Checkpoint& ckpt, const Image& img, std::optional<Mode> mode = std::nullopt);

}  // namespace realsr

#endif  // REALSR_TRAIN_HPP_
