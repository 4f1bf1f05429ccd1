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

#include "realsr/nets.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>

#include "realsr/common.hpp"
#include "realsr/ops.hpp"
#include "realsr/random.hpp"

namespace realsr {
namespace {

constexpr double kLeak = 0.2;

enum class Init {
  kNormal002,     // N(0, 0.02), zero bias
  kZero,
  kTorchDefault,  // U(+-1/sqrt(fan_in)) for weight and bias
  kHeScaled,      // He-normal * 0.1, zero bias
  kHe,            // He-normal, zero bias
};

struct ConvSpec {
  std::string name;
  int out, in, k;
  Init init;
};

std::vector<ConvSpec> layers(Architecture arch, Preset preset) {
  const ArchConfig cfg = arch_config(preset);
  std::vector<ConvSpec> out;
  switch (arch) {
    case Architecture::kDomainGenerator:
    case Architecture::kLrGenerator: {
      const int g = cfg.domain_channels;
      const bool lr = arch == Architecture::kLrGenerator;
      out.push_back({"stem", g, 3, 7, Init::kNormal002});
      out.push_back({"down1", 2 * g, g, 3, Init::kNormal002});
      out.push_back({"down2", 4 * g, 2 * g, 3, Init::kNormal002});
      if (lr) {
        out.push_back({"down3", 4 * g, 4 * g, 3, Init::kNormal002});
        out.push_back({"down4", 4 * g, 4 * g, 3, Init::kNormal002});
      }
      for (int b = 0; b < cfg.domain_blocks; ++b) {
        const std::string p = "block" + std::to_string(b);
        out.push_back({p + ".conv1", 4 * g, 4 * g, 3, Init::kNormal002});
        out.push_back({p + ".conv2", 4 * g, 4 * g, 3, Init::kNormal002});
      }
      out.push_back({"up1", 2 * g, 4 * g, 3, Init::kNormal002});
      out.push_back({"up2", g, 2 * g, 3, Init::kNormal002});
      out.push_back({"head", 3, g, 7, Init::kZero});
      break;
    }
    case Architecture::kPatchDiscriminator: {
      const int d = cfg.disc_channels;
      out.push_back({"conv1", d, 3, 4, Init::kNormal002});
      out.push_back({"conv2", 2 * d, d, 4, Init::kNormal002});
      out.push_back({"conv3", 4 * d, 2 * d, 4, Init::kNormal002});
      out.push_back({"score", 1, 4 * d, 4, Init::kNormal002});
      break;
    }
    case Architecture::kSrGenerator: {
      const int nf = cfg.sr_channels, gc = cfg.sr_growth;
      out.push_back({"conv_first", nf, 3, 3, Init::kTorchDefault});
      for (int b = 0; b < cfg.sr_blocks; ++b) {
        for (int r = 1; r <= 3; ++r) {
          const std::string p = "RRDB_trunk." + std::to_string(b) + ".RDB" + std::to_string(r);
          for (int c = 1; c <= 5; ++c) {
            out.push_back({p + ".conv" + std::to_string(c), c == 5 ? nf : gc, nf + (c - 1) * gc, 3,
                           Init::kHeScaled});
          }
        }
      }
      out.push_back({"trunk_conv", nf, nf, 3, Init::kTorchDefault});
      out.push_back({"upconv1", nf, nf, 3, Init::kTorchDefault});
      out.push_back({"upconv2", nf, nf, 3, Init::kTorchDefault});
      out.push_back({"HRconv", nf, nf, 3, Init::kTorchDefault});
      out.push_back({"conv_last", 3, nf, 3, Init::kTorchDefault});
      break;
    }
    case Architecture::kSrCritic: {
      const int nf = cfg.critic_channels;
      out.push_back({"conv0_0", nf, 3, 3, Init::kTorchDefault});
      out.push_back({"conv0_1", nf, nf, 4, Init::kTorchDefault});
      int ch = nf;
      for (int s = 1; s < cfg.critic_stages; ++s) {
        const int next = std::min(ch * 2, nf * 8);
        const std::string p = "conv" + std::to_string(s);
        out.push_back({p + "_0", next, ch, 3, Init::kTorchDefault});
        out.push_back({p + "_1", next, next, 4, Init::kTorchDefault});
        ch = next;
      }
      out.push_back({"linear1", 100, ch, 1, Init::kTorchDefault});
      out.push_back({"linear2", 1, 100, 1, Init::kTorchDefault});
      break;
    }
    case Architecture::kFeatureExtractor: {
      // Index layout of the common VGG19 feature stack; only conv slots carry tensors.
      static constexpr std::array<int, 5> kConvs = {2, 2, 4, 4, 4};
      int index = 0, in = 3;
      for (int b = 0; b < 5; ++b) {
        const int w = cfg.vgg_widths[static_cast<size_t>(b)];
        for (int c = 0; c < kConvs[static_cast<size_t>(b)]; ++c) {
          out.push_back({"features." + std::to_string(index), w, in, 3, Init::kHe});
          in = w;
          index += 2;  // conv, relu
        }
        index += 1;  // pool
      }
      break;
    }
  }
  return out;
}

Tensor init_tensor(const Shape& shape, Init init, int fan_in, bool is_bias, uint64_t seed) {
  Tensor t(shape);
  Rng rng(seed);
  switch (init) {
    case Init::kZero:
      break;
    case Init::kNormal002:
      if (!is_bias) {
        for (double& v : t.values()) v = 0.02 * rng.normal();
      }
      break;
    case Init::kTorchDefault: {
      const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
      for (double& v : t.values()) v = rng.uniform(-bound, bound);
      break;
    }
    case Init::kHeScaled:
    case Init::kHe:
      if (!is_bias) {
        const double std = std::sqrt(2.0 / fan_in) * (init == Init::kHeScaled ? 0.1 : 1.0);
        for (double& v : t.values()) v = std * rng.normal();
      }
      break;
  }
  t.round_to_float();
  return t;
}

struct Conv {
  const Var& w;
  const Var& b;
};

Conv conv_of(const NetworkParams& p, const std::string& name) {
  return {p[name + ".weight"], p[name + ".bias"]};
}

Var conv(const NetworkParams& p, const std::string& name, const Var& x, int stride, int pad) {
  const Conv c = conv_of(p, name);
  return ops::conv2d(x, c.w, c.b, stride, pad);
}

void check_input(const NetworkParams& params, Architecture want, const Var& x) {
  if (params.architecture() != want) {
    throw ValidationError("parameter set is " + architecture_id(params.architecture()) +
                          ", expected " + architecture_id(want));
  }
  if (!x.defined() || x.shape().c != 3) {
    throw ValidationError(architecture_id(want) + ": input must have 3 channels");
  }
  if (!x.value().all_finite()) {
    throw ValidationError(architecture_id(want) + ": non-finite value in input tensor");
  }
  params.require_finite();
  const int m = min_input_size(want);
  if (x.shape().h < m || x.shape().w < m) {
    throw ValidationError(architecture_id(want) + ": input " + x.shape().str() +
                          " is smaller than the minimum extent " + std::to_string(m));
  }
}

Var in_relu(const Var& x) { return ops::relu(ops::instance_norm(x)); }

// Shared body of G/F and H. `extra_downs` stride-2 stages are inserted
// before the residual blocks.
Var resnet_translator(const NetworkParams& p, const Var& x, int extra_downs) {
  const ArchConfig cfg = arch_config(p.preset());
  Var h = in_relu(conv(p, "stem", ops::reflect_pad(x, 3), 1, 0));
  h = in_relu(conv(p, "down1", h, 2, 1));
  h = in_relu(conv(p, "down2", h, 2, 1));
  for (int d = 0; d < extra_downs; ++d) h = in_relu(conv(p, "down" + std::to_string(3 + d), h, 2, 1));
  for (int b = 0; b < cfg.domain_blocks; ++b) {
    const std::string pre = "block" + std::to_string(b);
    Var r = in_relu(conv(p, pre + ".conv1", ops::reflect_pad(h, 1), 1, 0));
    r = ops::instance_norm(conv(p, pre + ".conv2", ops::reflect_pad(r, 1), 1, 0));
    h = ops::add(h, r);
  }
  h = in_relu(conv(p, "up1", ops::upsample_bilinear2x(h), 1, 1));
  h = in_relu(conv(p, "up2", ops::upsample_bilinear2x(h), 1, 1));
  return conv(p, "head", ops::reflect_pad(h, 3), 1, 0);
}

int round_up(int v, int m) { return (v + m - 1) / m * m; }

Var rdb(const NetworkParams& p, const std::string& pre, const Var& x) {
  std::vector<Var> feats{x};
  for (int c = 1; c <= 4; ++c) {
    Var in = feats.size() == 1 ? x : ops::concat_channels(feats);
    feats.push_back(ops::leaky_relu(conv(p, pre + ".conv" + std::to_string(c), in, 1, 1), kLeak));
  }
  Var x5 = conv(p, pre + ".conv5", ops::concat_channels(feats), 1, 1);
  return ops::add(ops::scale(x5, 0.2), x);
}

Var rrdb(const NetworkParams& p, const std::string& pre, const Var& x) {
  Var out = rdb(p, pre + ".RDB1", x);
  out = rdb(p, pre + ".RDB2", out);
  out = rdb(p, pre + ".RDB3", out);
  return ops::add(ops::scale(out, 0.2), x);
}

constexpr std::array<double, 3> kImagenetMean = {0.485, 0.456, 0.406};
constexpr std::array<double, 3> kImagenetStd = {0.229, 0.224, 0.225};

}  // namespace

std::string to_string(Preset p) { return p == Preset::kDesk ? "desk" : "full"; }

Preset parse_preset(const std::string& s) {
  if (s == "desk") return Preset::kDesk;
  if (s == "full") return Preset::kFull;
  throw ValidationError("unknown preset '" + s + "' (expected desk or full)");
}

std::string architecture_id(Architecture a) {
  switch (a) {
    case Architecture::kDomainGenerator: return "domain_generator";
    case Architecture::kLrGenerator: return "lr_generator";
    case Architecture::kPatchDiscriminator: return "patch_discriminator";
    case Architecture::kSrGenerator: return "rrdb_sr";
    case Architecture::kSrCritic: return "sr_critic";
    case Architecture::kFeatureExtractor: return "vgg19_features";
  }
  return "?";
}

Architecture parse_architecture(const std::string& id) {
  for (Architecture a : {Architecture::kDomainGenerator, Architecture::kLrGenerator,
                         Architecture::kPatchDiscriminator, Architecture::kSrGenerator,
                         Architecture::kSrCritic, Architecture::kFeatureExtractor}) {
    if (architecture_id(a) == id) return a;
  }
  throw ValidationError("unknown architecture id '" + id + "'");
}

ArchConfig arch_config(Preset preset) {
  if (preset == Preset::kFull) {
    return {64, 9, 64, 64, 32, 23, 64, 5, {64, 128, 256, 512, 512}};
  }
  return {16, 3, 16, 32, 16, 2, 16, 4, {8, 16, 32, 64, 64}};
}

std::vector<TensorSpec> schema(Architecture arch, Preset preset) {
  std::vector<TensorSpec> out;
  for (const ConvSpec& c : layers(arch, preset)) {
    out.push_back({c.name + ".weight", Shape{c.out, c.in, c.k, c.k}});
    out.push_back({c.name + ".bias", Shape{1, c.out, 1, 1}});
  }
  return out;
}

int min_input_size(Architecture arch) {
  switch (arch) {
    case Architecture::kDomainGenerator: return 8;
    case Architecture::kLrGenerator: return 32;
    case Architecture::kPatchDiscriminator: return 16;
    case Architecture::kSrGenerator: return 1;
    case Architecture::kSrCritic: return 16;
    case Architecture::kFeatureExtractor: return 16;
  }
  return 1;
}

NetworkParams::NetworkParams(Architecture arch, Preset preset) : arch_(arch), preset_(preset) {
  for (const TensorSpec& s : schema(arch, preset)) {
    tensors_.emplace_back(s.name, Var::parameter(Tensor(s.shape)));
  }
}

NetworkParams NetworkParams::initialized(Architecture arch, Preset preset, uint64_t seed) {
  NetworkParams p(arch, preset);
  const std::string id = architecture_id(arch);
  for (const ConvSpec& c : layers(arch, preset)) {
    const int fan_in = c.in * c.k * c.k;
    for (const bool is_bias : {false, true}) {
      const std::string name = c.name + (is_bias ? ".bias" : ".weight");
      Var& v = p[name];
      v.mutable_value() = init_tensor(v.shape(), c.init, fan_in, is_bias, derive_seed(seed, name, id));
    }
  }
  return p;
}

const Var& NetworkParams::operator[](std::string_view name) const {
  for (const auto& [n, v] : tensors_) {
    if (n == name) return v;
  }
  throw ValidationError(architecture_id(arch_) + ": no tensor named '" + std::string(name) + "'");
}

Var& NetworkParams::operator[](std::string_view name) {
  return const_cast<Var&>(static_cast<const NetworkParams&>(*this)[name]);
}

bool NetworkParams::contains(std::string_view name) const {
  return std::any_of(tensors_.begin(), tensors_.end(), [&](const auto& t) { return t.first == name; });
}

void NetworkParams::set_trainable(bool on) {
  for (auto& [n, v] : tensors_) {
    v.set_requires_grad(on);
    if (!on) v.zero_grad();
  }
}

void NetworkParams::zero_grad() {
  for (auto& [n, v] : tensors_) v.zero_grad();
}

size_t NetworkParams::parameter_count() const {
  size_t total = 0;
  for (const auto& [n, v] : tensors_) total += v.value().numel();
  return total;
}

uint64_t NetworkParams::checksum() const {
  uint64_t h = fnv1a64(architecture_id(arch_));
  for (const auto& [n, v] : tensors_) {
    h = fnv1a64(n, h);
    for (double d : v.value().values()) {
      const float f = static_cast<float>(d);
      char bytes[sizeof f];
      std::memcpy(bytes, &f, sizeof f);
      h = fnv1a64(std::string_view(bytes, sizeof bytes), h);
    }
  }
  return h;
}

void NetworkParams::require_finite() const {
  for (const auto& [n, v] : tensors_) {
    if (!v.value().all_finite()) {
      throw ValidationError(architecture_id(arch_) + ": non-finite value in tensor '" + n + "'");
    }
  }
}

NetworkParams NetworkParams::clone() const {
  NetworkParams out(arch_, preset_);
  for (size_t i = 0; i < tensors_.size(); ++i) {
    out.tensors_[i].second.mutable_value() = tensors_[i].second.value();
    out.tensors_[i].second.set_requires_grad(tensors_[i].second.requires_grad());
  }
  return out;
}

Var forward_domain_generator(const NetworkParams& params, const Var& x) {
  check_input(params, Architecture::kDomainGenerator, x);
  const int h = x.shape().h, w = x.shape().w;
  const int ph = round_up(h, 4), pw = round_up(w, 4);
  Var in = (ph == h && pw == w) ? x : ops::replicate_pad(x, ph - h, pw - w);
  Var out = ops::add(resnet_translator(params, in, 0), in);
  return (ph == h && pw == w) ? out : ops::crop(out, 0, 0, h, w);
}

Var forward_lr_generator(const NetworkParams& params, const Var& x) {
  check_input(params, Architecture::kLrGenerator, x);
  const int h = x.shape().h, w = x.shape().w;
  if (h % 4 != 0 || w % 4 != 0) {
    throw ValidationError("lr_generator: input extent must be divisible by 4, got " + x.shape().str());
  }
  const int ph = round_up(h, 16), pw = round_up(w, 16);
  Var in = (ph == h && pw == w) ? x : ops::replicate_pad(x, ph - h, pw - w);
  Var out = ops::add(resnet_translator(params, in, 2), ops::block_mean(in, 4));
  return (ph == h && pw == w) ? out : ops::crop(out, 0, 0, h / 4, w / 4);
}

Var forward_patch_discriminator(const NetworkParams& params, const Var& x) {
  check_input(params, Architecture::kPatchDiscriminator, x);
  Var h = ops::leaky_relu(conv(params, "conv1", x, 2, 1), kLeak);
  h = ops::leaky_relu(conv(params, "conv2", h, 2, 1), kLeak);
  h = ops::leaky_relu(conv(params, "conv3", h, 2, 1), kLeak);
  return conv(params, "score", h, 1, 1);
}

Var forward_sr(const NetworkParams& params, const Var& lr, bool color_adjustment) {
  check_input(params, Architecture::kSrGenerator, lr);
  const ArchConfig cfg = arch_config(params.preset());
  Var fea = conv(params, "conv_first", lr, 1, 1);
  Var trunk = fea;
  for (int b = 0; b < cfg.sr_blocks; ++b) trunk = rrdb(params, "RRDB_trunk." + std::to_string(b), trunk);
  fea = ops::add(fea, conv(params, "trunk_conv", trunk, 1, 1));
  fea = ops::leaky_relu(conv(params, "upconv1", ops::upsample_nearest(fea, 2), 1, 1), kLeak);
  fea = ops::leaky_relu(conv(params, "upconv2", ops::upsample_nearest(fea, 2), 1, 1), kLeak);
  Var out = conv(params, "conv_last", ops::leaky_relu(conv(params, "HRconv", fea, 1, 1), kLeak), 1, 1);
  return color_adjustment ? ops::color_adjust(out, lr, 4) : out;
}

Var forward_sr_critic(const NetworkParams& params, const Var& x) {
  check_input(params, Architecture::kSrCritic, x);
  const ArchConfig cfg = arch_config(params.preset());
  Var h = ops::leaky_relu(conv(params, "conv0_0", x, 1, 1), kLeak);
  h = ops::leaky_relu(conv(params, "conv0_1", h, 2, 1), kLeak);
  for (int s = 1; s < cfg.critic_stages; ++s) {
    const std::string p = "conv" + std::to_string(s);
    h = ops::leaky_relu(conv(params, p + "_0", h, 1, 1), kLeak);
    h = ops::leaky_relu(conv(params, p + "_1", h, 2, 1), kLeak);
  }
  if (h.shape().h != h.shape().w) {
    throw ValidationError("sr_critic: input must be square, got " + x.shape().str());
  }
  h = ops::block_mean(h, h.shape().h);
  const Conv l1 = conv_of(params, "linear1"), l2 = conv_of(params, "linear2");
  h = ops::leaky_relu(ops::dense(h, l1.w, l1.b), kLeak);
  return ops::dense(h, l2.w, l2.b);
}

FeatureExtractor::FeatureExtractor(Preset preset, uint64_t seed)
    : FeatureExtractor(NetworkParams::initialized(Architecture::kFeatureExtractor, preset, seed)) {}

FeatureExtractor::FeatureExtractor(NetworkParams params) : params_(std::move(params)) {
  if (params_.architecture() != Architecture::kFeatureExtractor) {
    throw ValidationError("feature extractor needs " + architecture_id(Architecture::kFeatureExtractor) +
                          " weights, got " + architecture_id(params_.architecture()));
  }
  params_.require_finite();
  params_.set_trainable(false);
}

Var FeatureExtractor::extract(const Var& images) const {
  check_input(params_, Architecture::kFeatureExtractor, images);
  static constexpr std::array<int, 5> kConvs = {2, 2, 4, 4, 4};
  Var h = ops::channel_normalize(images, kImagenetMean, kImagenetStd);
  int index = 0;
  for (size_t b = 0; b < kConvs.size(); ++b) {
    for (int c = 0; c < kConvs[b]; ++c) {
      h = ops::relu(conv(params_, "features." + std::to_string(index), h, 1, 1));
      index += 2;
    }
    if (b + 1 < kConvs.size()) {
      h = ops::max_pool2x(h);
      index += 1;
    }
  }
  return h;
}

}  // namespace realsr
