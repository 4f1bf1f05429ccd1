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

#include "realsr/train.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

#include "realsr/common.hpp"
#include "realsr/image_io.hpp"
#include "realsr/ops.hpp"
#include "realsr/optim.hpp"
#include "realsr/parallel.hpp"
#include "realsr/random.hpp"

namespace realsr {
namespace {

constexpr int kScale = 4;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ValidationError("config: bad value '" + v + "' for key '" + key + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ValidationError("config: bad boolean '" + v + "' for key '" + key + "'");
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  // Shortest form that still round-trips.
  for (int p = 1; p <= 17; ++p) {
    char shorter[32];
    std::snprintf(shorter, sizeof shorter, "%.*g", p, v);
    if (std::strtod(shorter, nullptr) == v) return shorter;
  }
  return buf;
}

Image hflip(const Image& img) {
  Image out(img.height(), img.width());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      for (int c = 0; c < Image::kChannels; ++c) out.set(y, img.width() - 1 - x, c, img.at(y, x, c));
    }
  }
  return out;
}

struct CropPick {
  int y0, x0;
  bool flip;
};

CropPick pick_crop(int h, int w, int size, Rng& rng) {
  CropPick p;
  p.y0 = static_cast<int>(rng.below(static_cast<uint64_t>(h - size + 1)));
  p.x0 = static_cast<int>(rng.below(static_cast<uint64_t>(w - size + 1)));
  p.flip = rng.below(2) == 1;
  return p;
}

Image apply_crop(const Image& img, int y0, int x0, int size, bool flip) {
  Image c = img.crop(y0, x0, size, size);
  return flip ? hflip(c) : c;
}

// Visits one domain in per-epoch permutations; sample k of the run is
// slot k % n of permutation k / n.
class DomainSampler {
 public:
  DomainSampler(size_t n, uint64_t seed) : n_(n), seed_(seed) {}

  size_t index(uint64_t k) {
    const uint64_t epoch = k / n_;
    if (epoch != cached_epoch_ || perm_.empty()) {
      perm_.resize(n_);
      std::iota(perm_.begin(), perm_.end(), size_t{0});
      Rng rng(derive_seed(seed_, epoch));
      for (size_t i = n_; i > 1; --i) std::swap(perm_[i - 1], perm_[rng.below(i)]);
      cached_epoch_ = epoch;
    }
    return perm_[k % n_];
  }

 private:
  size_t n_;
  uint64_t seed_;
  uint64_t cached_epoch_ = 0;
  std::vector<size_t> perm_;
};

Var batch_var(const std::vector<Image>& images) { return Var::constant(images_to_tensor(images)); }

std::vector<Image> to_images(const Tensor& t) {
  std::vector<Image> out;
  for (int n = 0; n < t.shape().n; ++n) out.push_back(tensor_to_image(t, n));
  return out;
}

void warn(const TrainHooks& hooks, const std::string& msg) {
  if (hooks.on_warning) hooks.on_warning(msg);
}

void add_optimizer(Checkpoint& ckpt, const std::string& role, const Adam& adam) {
  ckpt.extras.emplace_back("adam/" + role, adam.state());
  ckpt.meta["adam/" + role + "/t"] = std::to_string(adam.steps());
}

void restore_optimizer(const Checkpoint& ckpt, const std::string& role, Adam& adam) {
  const std::vector<NamedTensor>* state = ckpt.extra("adam/" + role);
  if (!state) throw ValidationError("checkpoint lacks optimiser state for '" + role + "'");
  adam.load_state(*state, std::stoull(ckpt.meta_or("adam/" + role + "/t", "0")));
}

NetworkParams restored_or_init(const Checkpoint* from, const std::string& role, Architecture arch,
                               const TrainConfig& cfg) {
  if (from) {
    const NetworkParams& p = from->network(role);
    if (p.architecture() != arch || p.preset() != cfg.preset) {
      throw ValidationError("checkpoint network '" + role + "' is " + architecture_id(p.architecture()) + "/" +
                            to_string(p.preset()) + ", expected " + architecture_id(arch) + "/" +
                            to_string(cfg.preset));
    }
    return p.clone();
  }
  return NetworkParams::initialized(arch, cfg.preset, derive_seed(cfg.seed, role, "init"));
}

Checkpoint base_checkpoint(const TrainConfig& cfg, uint64_t step) {
  Checkpoint ckpt;
  ckpt.step = step;
  ckpt.meta["tool_version"] = std::string(kToolVersion);
  ckpt.meta["stage"] = to_string(cfg.stage);
  ckpt.meta["mode"] = to_string(cfg.mode);
  ckpt.meta["preset"] = to_string(cfg.preset);
  ckpt.meta["config"] = cfg.dump();
  return ckpt;
}

void emit(const TrainHooks& hooks, TrainResult& result, std::string line) {
  if (hooks.on_log) hooks.on_log(line);
  result.log.push_back(std::move(line));
}

void write_checkpoint(const TrainHooks& hooks, const Checkpoint& ckpt, const std::filesystem::path& out) {
  if (!out.empty()) save_checkpoint(ckpt, out);
  if (hooks.on_checkpoint) hooks.on_checkpoint(ckpt);
}

bool should_save(const TrainConfig& cfg, const TrainHooks& hooks, uint64_t done, uint64_t total) {
  return done == total || (cfg.checkpoint_every > 0 && done % cfg.checkpoint_every == 0) ||
         (hooks.stop_after > 0 && done == hooks.stop_after);
}

FeatureExtractor make_extractor(const TrainConfig& cfg, const TrainHooks& hooks) {
  if (!cfg.vgg_weights.empty()) {
    const std::vector<uint8_t> raw = read_file(resolve_weight_file(cfg.vgg_weights));
    return FeatureExtractor(params_from_archive(decode_tensor_archive(std::string(raw.begin(), raw.end())),
                                                Architecture::kFeatureExtractor, cfg.preset));
  }
  warn(hooks, "no vgg_weights given: feature loss uses a seeded random frozen extractor");
  return FeatureExtractor(cfg.preset, derive_seed(cfg.seed, "phi", "init"));
}

void require_min_size(const std::vector<Image>& images, int size, const std::string& what) {
  for (size_t i = 0; i < images.size(); ++i) {
    if (images[i].height() < size || images[i].width() < size) {
      throw ValidationError(what + " image " + std::to_string(i) + " is " + std::to_string(images[i].height()) +
                            "x" + std::to_string(images[i].width()) + ", smaller than the crop size " +
                            std::to_string(size));
    }
  }
}

TrainResult run_ddl(const TrainConfig& cfg, const TrainingData& data, const std::filesystem::path& out,
                    const TrainHooks& hooks, const Checkpoint* from) {
  cfg.validate();
  if (cfg.stage != Stage::kDdl) throw ValidationError("train_ddl needs stage = ddl");
  if (data.x.empty()) throw ValidationError("domain stage: input-domain set {X} is empty");
  if (data.y.empty()) throw ValidationError("domain stage: output-domain set {Y} is empty");

  std::vector<Image> z(data.y.size());
  parallel_for(z.size(), cfg.workers, [&](size_t i) { z[i] = downsample(data.y[i], kScale); });
  require_min_size(data.x, cfg.ddl_crop, "input-domain");
  require_min_size(z, cfg.ddl_crop, "downsampled output-domain");

  const uint64_t per_epoch =
      (std::max(data.x.size(), z.size()) + static_cast<size_t>(cfg.batch_size) - 1) / cfg.batch_size;
  const uint64_t total = cfg.steps > 0 ? cfg.steps : per_epoch * static_cast<uint64_t>(cfg.epochs);

  NetworkParams g = restored_or_init(from, "G", Architecture::kDomainGenerator, cfg);
  NetworkParams f = restored_or_init(from, "F", Architecture::kDomainGenerator, cfg);
  NetworkParams dx = restored_or_init(from, "D_X", Architecture::kPatchDiscriminator, cfg);
  NetworkParams dz = restored_or_init(from, "D_Z", Architecture::kPatchDiscriminator, cfg);
  Adam opt_g(g, cfg.beta1, cfg.beta2), opt_f(f, cfg.beta1, cfg.beta2);
  Adam opt_dx(dx, cfg.beta1, cfg.beta2), opt_dz(dz, cfg.beta1, cfg.beta2);
  uint64_t start = 0;
  if (from) {
    start = from->step;
    restore_optimizer(*from, "G", opt_g);
    restore_optimizer(*from, "F", opt_f);
    restore_optimizer(*from, "D_X", opt_dx);
    restore_optimizer(*from, "D_Z", opt_dz);
  }

  DomainSampler sample_x(data.x.size(), derive_seed(cfg.seed, "ddl", "order_x"));
  DomainSampler sample_z(z.size(), derive_seed(cfg.seed, "ddl", "order_z"));
  const uint64_t crop_seed = derive_seed(cfg.seed, "ddl", "crop");
  const size_t batch = static_cast<size_t>(cfg.batch_size);

  TrainResult result;
  auto snapshot = [&](uint64_t step) {
    Checkpoint ckpt = base_checkpoint(cfg, step);
    ckpt.networks = {{"G", g.clone()}, {"F", f.clone()}, {"D_X", dx.clone()}, {"D_Z", dz.clone()}};
    add_optimizer(ckpt, "G", opt_g);
    add_optimizer(ckpt, "F", opt_f);
    add_optimizer(ckpt, "D_X", opt_dx);
    add_optimizer(ckpt, "D_Z", opt_dz);
    return ckpt;
  };

  for (uint64_t s = start; s < total; ++s) {
    const double lr = linear_decay_lr(s, total, cfg.lr);
    std::vector<size_t> xi(batch), zi(batch);
    for (size_t b = 0; b < batch; ++b) {
      xi[b] = sample_x.index(s * batch + b);
      zi[b] = sample_z.index(s * batch + b);
    }
    std::vector<Image> xs(batch), zs(batch);
    parallel_for(batch, cfg.workers, [&](size_t b) {
      Rng rng(derive_seed(crop_seed, s * batch + b));
      const Image& xim = data.x[xi[b]];
      const CropPick px = pick_crop(xim.height(), xim.width(), cfg.ddl_crop, rng);
      xs[b] = apply_crop(xim, px.y0, px.x0, cfg.ddl_crop, px.flip);
      const Image& zim = z[zi[b]];
      const CropPick pz = pick_crop(zim.height(), zim.width(), cfg.ddl_crop, rng);
      zs[b] = apply_crop(zim, pz.y0, pz.x0, cfg.ddl_crop, pz.flip);
    });
    const Var x = batch_var(xs), zv = batch_var(zs);

    // Generators against frozen discriminators.
    dx.set_trainable(false);
    dz.set_trainable(false);
    const Var fake_x = forward_domain_generator(g, zv);
    const Var fake_z = forward_domain_generator(f, x);
    const Var gan_g = gan_loss_g(forward_patch_discriminator(dx, fake_x), cfg.ddl_gan);
    const Var gan_f = gan_loss_g(forward_patch_discriminator(dz, fake_z), cfg.ddl_gan);
    const Var cyc = ops::add(l1_loss(forward_domain_generator(f, fake_x), zv),
                             l1_loss(forward_domain_generator(g, fake_z), x));
    Objective obj = ddl_objective(gan_g, gan_f, cyc, cfg.weights.lambda_cyc);
    obj.report.require_finite();
    obj.total.backward();
    opt_g.step(lr);
    opt_f.step(lr);

    // Discriminators on detached fakes.
    dx.set_trainable(true);
    dz.set_trainable(true);
    const Var d_x = gan_loss_d(forward_patch_discriminator(dx, x),
                               forward_patch_discriminator(dx, fake_x.detach()), cfg.ddl_gan);
    const Var d_z = gan_loss_d(forward_patch_discriminator(dz, zv),
                               forward_patch_discriminator(dz, fake_z.detach()), cfg.ddl_gan);
    Objective dobj = combine({{"d_x", 1.0, d_x}, {"d_z", 1.0, d_z}});
    dobj.report.require_finite();
    dobj.total.backward();
    opt_dx.step(lr);
    opt_dz.step(lr);

    const uint64_t done = s + 1;
    char extra[96];
    std::snprintf(extra, sizeof extra, " d_x=%.9g d_z=%.9g", d_x.value()[0], d_z.value()[0]);
    emit(hooks, result, obj.report.log_line(done, lr) + extra);
    if (should_save(cfg, hooks, done, total)) {
      result.checkpoint = snapshot(done);
      write_checkpoint(hooks, result.checkpoint, out);
    }
    if (hooks.stop_after > 0 && done >= hooks.stop_after) return result;
  }
  if (start >= total) result.checkpoint = snapshot(start);
  return result;
}

// LR/HR crops for one SR step.
struct SrBatch {
  std::vector<Image> lr, hr, lr_real;
};

TrainResult run_sr(const TrainConfig& cfg, const TrainingData& data, const Checkpoint* ddl,
                   const std::filesystem::path& out, const TrainHooks& hooks, const Checkpoint* from) {
  cfg.validate();
  if (cfg.stage != Stage::kSr) throw ValidationError("train_sr needs stage = sr");
  if (data.y.empty()) throw ValidationError("SR stage: output-domain set {Y} is empty");
  const bool needs_g = cfg.mode == Mode::kOurs;
  const bool needs_f = cfg.mode == Mode::kCleanInput;
  if ((needs_g || needs_f) && !ddl) {
    throw ValidationError("mode " + to_string(cfg.mode) + " requires a domain-stage checkpoint");
  }
  if (cfg.mode == Mode::kLrSupervision && data.x.empty()) {
    throw ValidationError("lr_supervision needs the input-domain set {X}");
  }
  const int lr_crop = cfg.hr_crop / kScale;
  require_min_size(data.y, cfg.hr_crop, "output-domain");
  if (cfg.mode == Mode::kLrSupervision) require_min_size(data.x, lr_crop, "input-domain");
  if (cfg.mode == Mode::kSupervised) {
    warn(hooks, "supervised mode uses the ground-truth degradation; results are reference-only");
  }

  std::optional<NetworkParams> g, f;
  uint64_t g_checksum = 0;
  if (ddl) {
    if (ddl->has_network("G")) {
      g = ddl->network("G").clone();
      g->set_trainable(false);
      g_checksum = g->checksum();
    }
    if (ddl->has_network("F")) {
      f = ddl->network("F").clone();
      f->set_trainable(false);
    }
    if ((needs_g && !g) || (needs_f && !f)) throw ValidationError("domain-stage checkpoint lacks G or F");
    if (g && g->preset() != cfg.preset) throw ValidationError("domain-stage checkpoint preset differs from config");
  }

  NetworkParams s_net = [&] {
    if (from) return restored_or_init(from, "S", Architecture::kSrGenerator, cfg);
    if (!cfg.sr_init.empty()) return load_sr_weights(resolve_weight_file(cfg.sr_init), cfg.preset);
    warn(hooks, "no sr_init given: S starts from random initialisation");
    return restored_or_init(nullptr, "S", Architecture::kSrGenerator, cfg);
  }();
  NetworkParams c_net = restored_or_init(from, "C", Architecture::kSrCritic, cfg);
  std::optional<NetworkParams> h_net;
  if (cfg.mode == Mode::kLrSupervision) h_net = restored_or_init(from, "H", Architecture::kLrGenerator, cfg);
  const FeatureExtractor phi = make_extractor(cfg, hooks);

  Adam opt_s(s_net, cfg.beta1, cfg.beta2), opt_c(c_net, cfg.beta1, cfg.beta2);
  std::optional<Adam> opt_h;
  if (h_net) opt_h.emplace(*h_net, cfg.beta1, cfg.beta2);
  uint64_t start = 0;
  if (from) {
    start = from->step;
    restore_optimizer(*from, "S", opt_s);
    restore_optimizer(*from, "C", opt_c);
    if (opt_h) restore_optimizer(*from, "H", *opt_h);
  }
  const uint64_t total = cfg.steps;

  // Optional pre-built (lr, hr) image pairs, cropped in aligned positions.
  std::vector<Image> pair_lr;
  if (cfg.materialize_pairs && cfg.mode != Mode::kLrSupervision) {
    pair_lr.resize(data.y.size());
    for (const Image& y : data.y) {
      if (y.height() % kScale != 0 || y.width() % kScale != 0) {
        throw ValidationError("materialize_pairs needs output-domain images divisible by 4");
      }
    }
    parallel_for(data.y.size(), cfg.workers, [&](size_t j) {
      Image lr = downsample(data.y[j], kScale);
      if (cfg.mode == Mode::kSupervised) {
        lr = apply_degradation(lr, data.recipe.with_seed(derive_seed(cfg.seed, "supervised", std::to_string(j))));
      }
      pair_lr[j] = std::move(lr);
    });
    if (needs_g) {
      NoGradGuard no_grad;
      for (Image& lr : pair_lr) lr = generate_training_pair(*g, lr, 1).first;
    }
  }

  DomainSampler sample_y(data.y.size(), derive_seed(cfg.seed, "sr", "order_y"));
  std::optional<DomainSampler> sample_x;
  if (cfg.mode == Mode::kLrSupervision) sample_x.emplace(data.x.size(), derive_seed(cfg.seed, "sr", "order_x"));
  const uint64_t crop_seed = derive_seed(cfg.seed, "sr", "crop");
  const uint64_t noise_seed = derive_seed(cfg.seed, "sr", "supervised");
  const size_t batch = static_cast<size_t>(cfg.batch_size);

  TrainResult result;
  auto snapshot = [&](uint64_t step) {
    Checkpoint ckpt = base_checkpoint(cfg, step);
    ckpt.networks = {{"S", s_net.clone()}, {"C", c_net.clone()}};
    if (h_net) ckpt.networks.emplace_back("H", h_net->clone());
    if (g) ckpt.networks.emplace_back("G", g->clone());
    if (f) ckpt.networks.emplace_back("F", f->clone());
    if (g) ckpt.meta["ddl_g_checksum"] = std::to_string(g_checksum);
    add_optimizer(ckpt, "S", opt_s);
    add_optimizer(ckpt, "C", opt_c);
    if (opt_h) add_optimizer(ckpt, "H", *opt_h);
    return ckpt;
  };

  for (uint64_t s = start; s < total; ++s) {
    const double lr = multistep_lr(s, total, cfg.lr);
    SrBatch bt;
    bt.lr.resize(batch);
    bt.hr.resize(batch);
    std::vector<size_t> yi(batch), xi(batch);
    for (size_t b = 0; b < batch; ++b) {
      yi[b] = sample_y.index(s * batch + b);
      if (sample_x) xi[b] = sample_x->index(s * batch + b);
    }
    if (sample_x) bt.lr_real.resize(batch);
    parallel_for(batch, cfg.workers, [&](size_t b) {
      const uint64_t k = s * batch + b;
      Rng rng(derive_seed(crop_seed, k));
      const Image& yim = data.y[yi[b]];
      if (!pair_lr.empty()) {
        const Image& lim = pair_lr[yi[b]];
        const CropPick p = pick_crop(lim.height(), lim.width(), lr_crop, rng);
        bt.lr[b] = apply_crop(lim, p.y0, p.x0, lr_crop, p.flip);
        bt.hr[b] = apply_crop(yim, p.y0 * kScale, p.x0 * kScale, cfg.hr_crop, p.flip);
      } else {
        const CropPick p = pick_crop(yim.height(), yim.width(), cfg.hr_crop, rng);
        bt.hr[b] = apply_crop(yim, p.y0, p.x0, cfg.hr_crop, p.flip);
        bt.lr[b] = downsample(bt.hr[b], kScale);
        if (cfg.mode == Mode::kSupervised) {
          bt.lr[b] = apply_degradation(bt.lr[b], data.recipe.with_seed(derive_seed(noise_seed, k)));
        }
      }
      if (sample_x) {
        const Image& xim = data.x[xi[b]];
        const CropPick p = pick_crop(xim.height(), xim.width(), lr_crop, rng);
        bt.lr_real[b] = apply_crop(xim, p.y0, p.x0, lr_crop, p.flip);
      }
    });
    if (needs_g && pair_lr.empty()) {
      NoGradGuard no_grad;
      bt.lr = to_images(forward_domain_generator(*g, batch_var(bt.lr)).value());
    }
    const Var x = batch_var(bt.lr), y = batch_var(bt.hr);

    // Generator side, critic frozen.
    c_net.set_trainable(false);
    const Var sr = forward_sr(s_net, x);
    Var real_scores;
    {
      NoGradGuard no_grad;
      real_scores = forward_sr_critic(c_net, y);
    }
    const Var fake_scores = forward_sr_critic(c_net, sr);
    std::vector<LossTerm> terms = {{"vgg", cfg.weights.perceptual, vgg_loss(phi, sr, y)},
                                   {"ragan", cfg.weights.lambda_gan, ragan_loss_g(real_scores, fake_scores)},
                                   {"l1", cfg.weights.eta_l1, l1_loss(sr, y)}};
    if (h_net) {
      const Var x_real = batch_var(bt.lr_real);
      const Var back = forward_lr_generator(*h_net, forward_sr(s_net, x_real));
      terms.push_back({"vgg_lr", cfg.weights.perceptual, vgg_loss(phi, back, x_real)});
      terms.push_back({"l1_lr", cfg.weights.eta_l1, l1_loss(back, x_real)});
    }
    Objective obj = combine(terms);
    obj.report.require_finite();
    obj.total.backward();
    opt_s.step(lr);
    if (opt_h) opt_h->step(lr);

    // Critic side on the detached output.
    c_net.set_trainable(true);
    const Var d = ragan_loss_d(forward_sr_critic(c_net, y), forward_sr_critic(c_net, sr.detach()));
    if (!std::isfinite(d.value()[0])) throw DivergenceError("critic loss is not finite");
    d.backward();
    opt_c.step(lr);

    const uint64_t done = s + 1;
    char extra[64];
    std::snprintf(extra, sizeof extra, " d=%.9g", d.value()[0]);
    emit(hooks, result, obj.report.log_line(done, lr) + extra);
    if (should_save(cfg, hooks, done, total)) {
      result.checkpoint = snapshot(done);
      write_checkpoint(hooks, result.checkpoint, out);
    }
    if (hooks.stop_after > 0 && done >= hooks.stop_after) return result;
  }
  if (start >= total) result.checkpoint = snapshot(start);
  return result;
}

}  // namespace

std::string to_string(Stage s) { return s == Stage::kDdl ? "ddl" : "sr"; }

Stage parse_stage(const std::string& s) {
  if (s == "ddl") return Stage::kDdl;
  if (s == "sr") return Stage::kSr;
  throw ValidationError("unknown stage '" + s + "' (expected ddl or sr)");
}

std::string to_string(Mode m) {
  switch (m) {
    case Mode::kOurs: return "ours";
    case Mode::kBaseline: return "baseline";
    case Mode::kCleanInput: return "clean_input";
    case Mode::kLrSupervision: return "lr_supervision";
    case Mode::kSupervised: return "supervised";
  }
  return "?";
}

Mode parse_mode(const std::string& s) {
  for (Mode m : {Mode::kOurs, Mode::kBaseline, Mode::kCleanInput, Mode::kLrSupervision, Mode::kSupervised}) {
    if (to_string(m) == s) return m;
  }
  throw ValidationError("unknown mode '" + s +
                        "' (expected ours, baseline, clean_input, lr_supervision or supervised)");
}

TrainConfig TrainConfig::defaults(Stage stage, Preset preset) {
  TrainConfig c;
  c.stage = stage;
  c.preset = preset;
  const bool full = preset == Preset::kFull;
  if (stage == Stage::kDdl) {
    c.lr = 2e-4;
    c.beta1 = 0.5;
    c.beta2 = 0.999;
    c.epochs = full ? 200 : 50;
    c.batch_size = full ? 1 : 4;
    c.ddl_crop = full ? 128 : 16;
  } else {
    c.lr = 1e-4;
    c.beta1 = 0.9;
    c.beta2 = 0.999;
    c.steps = full ? 50000 : 500;
    c.batch_size = full ? 16 : 4;
    c.hr_crop = full ? 128 : 64;
  }
  return c;
}

TrainConfig TrainConfig::parse(const std::string& text, const TrainConfig& base) {
  TrainConfig c = base;
  using Setter = void (*)(TrainConfig&, const std::string&, const std::string&);
  static const std::map<std::string, Setter> kSetters = {
      {"stage", [](TrainConfig& t, const std::string&, const std::string& v) { t.stage = parse_stage(v); }},
      {"mode", [](TrainConfig& t, const std::string&, const std::string& v) { t.mode = parse_mode(v); }},
      {"preset", [](TrainConfig& t, const std::string&, const std::string& v) { t.preset = parse_preset(v); }},
      {"seed", [](TrainConfig& t, const std::string& k, const std::string& v) { t.seed = parse_number<uint64_t>(k, v); }},
      {"batch_size", [](TrainConfig& t, const std::string& k, const std::string& v) { t.batch_size = parse_number<int>(k, v); }},
      {"hr_crop", [](TrainConfig& t, const std::string& k, const std::string& v) { t.hr_crop = parse_number<int>(k, v); }},
      {"ddl_crop", [](TrainConfig& t, const std::string& k, const std::string& v) { t.ddl_crop = parse_number<int>(k, v); }},
      {"lr", [](TrainConfig& t, const std::string& k, const std::string& v) { t.lr = parse_number<double>(k, v); }},
      {"beta1", [](TrainConfig& t, const std::string& k, const std::string& v) { t.beta1 = parse_number<double>(k, v); }},
      {"beta2", [](TrainConfig& t, const std::string& k, const std::string& v) { t.beta2 = parse_number<double>(k, v); }},
      {"epochs", [](TrainConfig& t, const std::string& k, const std::string& v) { t.epochs = parse_number<int>(k, v); }},
      {"steps", [](TrainConfig& t, const std::string& k, const std::string& v) { t.steps = parse_number<uint64_t>(k, v); }},
      {"lambda_cyc", [](TrainConfig& t, const std::string& k, const std::string& v) { t.weights.lambda_cyc = parse_number<double>(k, v); }},
      {"lambda_gan", [](TrainConfig& t, const std::string& k, const std::string& v) { t.weights.lambda_gan = parse_number<double>(k, v); }},
      {"eta_l1", [](TrainConfig& t, const std::string& k, const std::string& v) { t.weights.eta_l1 = parse_number<double>(k, v); }},
      {"perceptual", [](TrainConfig& t, const std::string& k, const std::string& v) { t.weights.perceptual = parse_number<double>(k, v); }},
      {"ddl_gan", [](TrainConfig& t, const std::string&, const std::string& v) { t.ddl_gan = parse_ddl_gan(v); }},
      {"checkpoint_every", [](TrainConfig& t, const std::string& k, const std::string& v) { t.checkpoint_every = parse_number<uint64_t>(k, v); }},
      {"workers", [](TrainConfig& t, const std::string& k, const std::string& v) { t.workers = parse_number<int>(k, v); }},
      {"sr_init", [](TrainConfig& t, const std::string&, const std::string& v) { t.sr_init = v; }},
      {"vgg_weights", [](TrainConfig& t, const std::string&, const std::string& v) { t.vgg_weights = v; }},
      {"materialize_pairs", [](TrainConfig& t, const std::string& k, const std::string& v) { t.materialize_pairs = parse_bool(k, v); }},
  };
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    auto it = kSetters.find(key);
    if (it == kSetters.end()) {
      throw ValidationError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    it->second(c, key, value);
  }
  return c;
}

std::string TrainConfig::dump() const {
  std::ostringstream o;
  o << "stage = " << to_string(stage) << "\n"
    << "mode = " << to_string(mode) << "\n"
    << "preset = " << to_string(preset) << "\n"
    << "seed = " << seed << "\n"
    << "batch_size = " << batch_size << "\n"
    << "hr_crop = " << hr_crop << "\n"
    << "ddl_crop = " << ddl_crop << "\n"
    << "lr = " << format_double(lr) << "\n"
    << "beta1 = " << format_double(beta1) << "\n"
    << "beta2 = " << format_double(beta2) << "\n"
    << "epochs = " << epochs << "\n"
    << "steps = " << steps << "\n"
    << "lambda_cyc = " << format_double(weights.lambda_cyc) << "\n"
    << "lambda_gan = " << format_double(weights.lambda_gan) << "\n"
    << "eta_l1 = " << format_double(weights.eta_l1) << "\n"
    << "perceptual = " << format_double(weights.perceptual) << "\n"
    << "ddl_gan = " << to_string(ddl_gan) << "\n"
    << "checkpoint_every = " << checkpoint_every << "\n"
    << "workers = " << workers << "\n"
    << "sr_init = " << sr_init << "\n"
    << "vgg_weights = " << vgg_weights << "\n"
    << "materialize_pairs = " << (materialize_pairs ? "true" : "false") << "\n";
  return o.str();
}

void TrainConfig::validate() const {
  weights.validate();
  if (stage == Stage::kDdl && mode != Mode::kOurs) {
    throw ValidationError("mode " + to_string(mode) + " is only valid for stage sr");
  }
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (workers < 1) throw ValidationError("workers must be >= 1");
  if (!(lr > 0) || !std::isfinite(lr)) throw ValidationError("lr must be positive");
  if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1)) {
    throw ValidationError("beta1 and beta2 must lie in [0, 1)");
  }
  if (stage == Stage::kDdl) {
    if (steps == 0 && epochs <= 0) throw ValidationError("domain stage needs epochs > 0 or steps > 0");
    if (ddl_crop < min_input_size(Architecture::kPatchDiscriminator)) {
      throw ValidationError("ddl_crop must be >= " + std::to_string(min_input_size(Architecture::kPatchDiscriminator)));
    }
  } else {
    if (steps == 0) throw ValidationError("SR stage needs steps > 0");
    if (hr_crop % kScale != 0) throw ValidationError("hr_crop must be divisible by 4");
    const int min_crop = mode == Mode::kLrSupervision ? 64 : 16;
    if (hr_crop < min_crop) {
      throw ValidationError("hr_crop must be >= " + std::to_string(min_crop) + " for mode " + to_string(mode));
    }
  }
}

TrainingData TrainingData::from_benchmark(const std::filesystem::path& dir) {
  const DatasetManifest m = load_manifest(dir);
  TrainingData d;
  d.recipe = m.recipe;
  d.scenario = m.scenario;
  d.scale = m.scale;
  for (const ManifestEntry* e : m.with_role(kTrainInputX)) d.x.push_back(read_png(dir / e->path));
  for (const ManifestEntry* e : m.with_role(kTrainOutputY)) d.y.push_back(read_png(dir / e->path));
  if (d.scale != kScale) throw ValidationError("training needs a x4 benchmark, manifest says x" + std::to_string(d.scale));
  return d;
}

TrainResult train_ddl(const TrainConfig& config, const TrainingData& data, const std::filesystem::path& out,
                      const TrainHooks& hooks) {
  return run_ddl(config, data, out, hooks, nullptr);
}

TrainResult train_sr(const TrainConfig& config, const TrainingData& data, const Checkpoint* ddl,
                     const std::filesystem::path& out, const TrainHooks& hooks) {
  return run_sr(config, data, ddl, out, hooks, nullptr);
}

TrainResult resume_training(const Checkpoint& from, const TrainingData& data, const std::filesystem::path& out,
                            const TrainHooks& hooks) {
  const Stage stage = parse_stage(from.meta_or("stage", ""));
  const Preset preset = parse_preset(from.meta_or("preset", ""));
  const TrainConfig cfg = TrainConfig::parse(from.meta_or("config", ""), TrainConfig::defaults(stage, preset));
  if (stage == Stage::kDdl) return run_ddl(cfg, data, out, hooks, &from);
  Checkpoint ddl;
  for (const char* role : {"G", "F"}) {
    if (from.has_network(role)) ddl.set_network(role, from.network(role));
  }
  const bool has_ddl = !ddl.networks.empty();
  TrainResult r = run_sr(cfg, data, has_ddl ? &ddl : nullptr, out, hooks, &from);
  return r;
}

std::pair<Image, Image> generate_training_pair(const NetworkParams& g, const Image& y, int scale) {
  if (g.architecture() != Architecture::kDomainGenerator) {
    throw ValidationError("generate_training_pair needs a domain generator");
  }
  NoGradGuard no_grad;
  const Image lr = scale == 1 ? y : downsample(y, scale);
  const Tensor out = forward_domain_generator(g, Var::constant(image_to_tensor(lr))).value();
  return {tensor_to_image(out), y};
}

SrModel::SrModel(const Checkpoint& ckpt, std::optional<Mode> mode, std::optional<Preset> runtime_preset)
    : s_(ckpt.network("S").clone()),
      mode_(mode ? *mode : parse_mode(ckpt.meta_or("mode", "baseline"))) {
  if (s_.architecture() != Architecture::kSrGenerator) {
    throw ValidationError("checkpoint network 'S' is " + architecture_id(s_.architecture()) + ", not rrdb_sr");
  }
  if (runtime_preset && *runtime_preset != s_.preset()) {
    throw ValidationError("checkpoint preset is " + to_string(s_.preset()) + ", runtime preset is " +
                          to_string(*runtime_preset));
  }
  s_.set_trainable(false);
  if (mode_ == Mode::kCleanInput) {
    if (!ckpt.has_network("F")) throw ValidationError("clean_input inference needs F in the checkpoint");
    f_ = ckpt.network("F").clone();
    if (f_->architecture() != Architecture::kDomainGenerator || f_->preset() != s_.preset()) {
      throw ValidationError("checkpoint network 'F' does not match the SR preset");
    }
    f_->set_trainable(false);
  }
}

Image SrModel::infer(const Image& lr) const {
  if (lr.empty()) throw ValidationError("infer: empty image");
  NoGradGuard no_grad;
  Image in = lr;
  if (f_) {
    if (in.height() < min_input_size(Architecture::kDomainGenerator) ||
        in.width() < min_input_size(Architecture::kDomainGenerator)) {
      throw ValidationError("clean_input inference needs inputs of at least 8x8");
    }
    in = tensor_to_image(forward_domain_generator(*f_, Var::constant(image_to_tensor(in))).value());
  }
  constexpr int kTile = 48, kMargin = 8;
  const int h = in.height(), w = in.width();
  if (h <= kTile + 2 * kMargin && w <= kTile + 2 * kMargin) {
    return tensor_to_image(forward_sr(s_, Var::constant(image_to_tensor(in))).value());
  }
  Image out(h * kScale, w * kScale);
  for (int ty = 0; ty < h; ty += kTile) {
    for (int tx = 0; tx < w; tx += kTile) {
      const int th = std::min(kTile, h - ty), tw = std::min(kTile, w - tx);
      const int y0 = std::max(0, ty - kMargin), x0 = std::max(0, tx - kMargin);
      const int y1 = std::min(h, ty + th + kMargin), x1 = std::min(w, tx + tw + kMargin);
      const Image tile = in.crop(y0, x0, y1 - y0, x1 - x0);
      const Image sr = tensor_to_image(forward_sr(s_, Var::constant(image_to_tensor(tile))).value());
      for (int y = 0; y < th * kScale; ++y) {
        for (int x = 0; x < tw * kScale; ++x) {
          for (int c = 0; c < Image::kChannels; ++c) {
            out.set(ty * kScale + y, tx * kScale + x, c,
                    sr.at((ty - y0) * kScale + y, (tx - x0) * kScale + x, c));
          }
        }
      }
    }
  }
  return out;
}

std::string SrModel::id() const {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(s_.checksum()));
  return "rrdb_sr/" + to_string(s_.preset()) + "/" + to_string(mode_) + "/" + buf;
}

Image infer(const Checkpoint& ckpt, const Image& img, std::optional<Mode> mode) {
  return SrModel(ckpt, mode).infer(img);
}

}  // namespace realsr
