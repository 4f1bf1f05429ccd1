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

#ifndef REALSR_NETS_HPP_
#define REALSR_NETS_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "realsr/autograd.hpp"

namespace realsr {

enum class Preset { kDesk, kFull };
std::string to_string(Preset p);
Preset parse_preset(const std::string& s);

enum class Architecture {
  kDomainGenerator,     // G and F: same-resolution ResNet translator
  kLrGenerator,         // H: HR -> LR translator for the LR-supervision ablation
  kPatchDiscriminator,  // D_X and D_Z
  kSrGenerator,         // S: RRDB x4 network with colour adjustment
  kSrCritic,            // C: raw-score critic for the relativistic loss
  kFeatureExtractor,    // phi: VGG19 conv stack up to conv5_4
};
std::string architecture_id(Architecture a);
Architecture parse_architecture(const std::string& id);

struct TensorSpec {
  std::string name;
  Shape shape;
};

// Widths and depths of every architecture at one preset.
struct ArchConfig {
  int domain_channels;   // ngf
  int domain_blocks;
  int disc_channels;     // ndf
  int sr_channels;       // nf
  int sr_growth;         // gc
  int sr_blocks;         // RRDB count
  int critic_channels;
  int critic_stages;     // stride-2 stages
  std::vector<int> vgg_widths;  // five blocks
};
ArchConfig arch_config(Preset preset);

// Fixed ordered list of tensor names and shapes for (architecture, preset).
std::vector<TensorSpec> schema(Architecture arch, Preset preset);

// Named parameter tensors of one network.
class NetworkParams {
 public:
  static constexpr std::string_view kVersion = "1";

  // All schema tensors, zero-filled.
  NetworkParams(Architecture arch, Preset preset);
  // Seeded architecture-specific initialisation; values are float32-exact.
  static NetworkParams initialized(Architecture arch, Preset preset, uint64_t seed);

  Architecture architecture() const { return arch_; }
  Preset preset() const { return preset_; }

  const Var& operator[](std::string_view name) const;
  Var& operator[](std::string_view name);
  bool contains(std::string_view name) const;
  const std::vector<std::pair<std::string, Var>>& tensors() const { return tensors_; }
  std::vector<std::pair<std::string, Var>>& tensors() { return tensors_; }

  void set_trainable(bool on);
  void zero_grad();
  size_t parameter_count() const;
  // FNV-1a over the float32 image of every tensor, in schema order.
  uint64_t checksum() const;
  // Throws ValidationError naming the first tensor with a non-finite value.
  void require_finite() const;
  // Independent copy of the values (no shared nodes, grads dropped).
  NetworkParams clone() const;

 private:
  Architecture arch_;
  Preset preset_;
  std::vector<std::pair<std::string, Var>> tensors_;
};

// Output has the input's spatial size; the last layer is linear and added to
// the input (zero-initialised, so a fresh network is the identity).
Var forward_domain_generator(const NetworkParams& params, const Var& x);

// Output is input / 4; a box-downsampled copy of the input is the skip path.
Var forward_lr_generator(const NetworkParams& params, const Var& x);

// Raw (pre-sigmoid) patch score map at 1/8 of the input resolution.
Var forward_patch_discriminator(const NetworkParams& params, const Var& x);

// x4 super-resolution with the colour-adjustment stage applied last.
Var forward_sr(const NetworkParams& params, const Var& lr, bool color_adjustment = true);

// One raw score per sample, shape (N, 1, 1, 1).
Var forward_sr_critic(const NetworkParams& params, const Var& x);

// Frozen VGG19-style feature stack tapped after the activation of the 4th
// convolution of the 5th block (before the 5th max-pool).
class FeatureExtractor {
 public:
  // Seeded random weights (He-normal), frozen.
  FeatureExtractor(Preset preset, uint64_t seed);
  // Weights from a parameter set (e.g. a converted pretrained file), frozen.
  explicit FeatureExtractor(NetworkParams params);

  Var extract(const Var& images) const;
  const NetworkParams& params() const { return params_; }
  // Spatial downscale factor of the tap.
  static constexpr int kStride = 16;

 private:
  NetworkParams params_;
};

// Minimum input extent accepted by the forward passes.
int min_input_size(Architecture arch);

}  // namespace realsr

#endif  // REALSR_NETS_HPP_
