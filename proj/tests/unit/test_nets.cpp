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
#include <random>

#include "../support/oracles.hpp"
#include "realsr/checkpoint.hpp"
#include "realsr/common.hpp"
#include "realsr/nets.hpp"
#include "realsr/ops.hpp"

using namespace realsr;

namespace {

Var input(int n, int h, int w, uint64_t seed, double lo = 0.0, double hi = 1.0) {
  return Var::constant(oracle::random_tensor({n, 3, h, w}, seed, lo, hi));
}

// Replaces every tensor with small random values so no layer is inert.
void scramble(NetworkParams& p, uint64_t seed, double scale) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> n(0.0, scale);
  for (auto& [name, v] : p.tensors()) {
    for (double& x : v.mutable_value().values()) x = n(gen);
  }
}

// Projection of the output onto fixed random weights.
Var probe(const Var& out, uint64_t seed) {
  return ops::weighted_sum(out, oracle::random_tensor(out.shape(), seed));
}

// Every parameter tensor of `p` against central differences.
void check_fd(NetworkParams& p, const std::function<Var()>& loss, int samples) {
  p.set_trainable(true);
  for (auto& [name, v] : p.tensors()) {
    // A small step keeps the probe away from activation kinks.
    const double e = oracle::fd_relative_error(loss, v, samples, 1e-6, 1e-3);
    CHECK_MESSAGE(e < 1e-3, name << " rel err " << e);
  }
}

}  // namespace

TEST_CASE("architecture ids and presets") {
  for (auto a : {Architecture::kDomainGenerator, Architecture::kLrGenerator, Architecture::kPatchDiscriminator,
                 Architecture::kSrGenerator, Architecture::kSrCritic, Architecture::kFeatureExtractor}) {
    CHECK(parse_architecture(architecture_id(a)) == a);
    for (auto preset : {Preset::kDesk, Preset::kFull}) {
      const auto s = schema(a, preset);
      CHECK_FALSE(s.empty());
      const auto p = NetworkParams::initialized(a, preset, 1);
      CHECK(p.tensors().size() == s.size());
    }
  }
  const ArchConfig desk = arch_config(Preset::kDesk), full = arch_config(Preset::kFull);
  CHECK(desk.domain_blocks == 3);
  CHECK(desk.sr_blocks == 2);
  CHECK(desk.sr_channels == 32);
  CHECK(full.domain_blocks == 9);
  CHECK(full.sr_blocks == 23);
  CHECK(full.sr_channels == 64);
  CHECK(parse_preset("desk") == Preset::kDesk);
  CHECK_THROWS_AS(parse_preset("tiny"), ValidationError);
}

TEST_CASE("initialisation is seeded") {
  const auto a = NetworkParams::initialized(Architecture::kSrGenerator, Preset::kDesk, 3);
  const auto b = NetworkParams::initialized(Architecture::kSrGenerator, Preset::kDesk, 3);
  const auto c = NetworkParams::initialized(Architecture::kSrGenerator, Preset::kDesk, 4);
  CHECK(a.checksum() == b.checksum());
  CHECK(a.checksum() != c.checksum());
}

TEST_CASE("domain generator: shape, identity at zero head, linear output") {
  const auto g = NetworkParams::initialized(Architecture::kDomainGenerator, Preset::kDesk, 5);
  const Var x = input(1, 32, 32, 1);
  const Var y = forward_domain_generator(g, x);
  CHECK(y.shape() == x.shape());
  CHECK(y.value() == x.value());
  // Odd sizes are padded internally and cropped back.
  CHECK(forward_domain_generator(g, input(2, 18, 21, 2)).shape() == Shape{2, 3, 18, 21});
  // No saturating output: inputs far outside [0, 1] come back unchanged.
  const Var wide = input(1, 16, 16, 3, -40.0, 40.0);
  CHECK(forward_domain_generator(g, wide).value() == wide.value());
  auto scrambled = g.clone();
  scramble(scrambled, 9, 0.05);
  const Var big = input(1, 16, 16, 4, 50.0, 60.0);
  const Tensor out = forward_domain_generator(scrambled, big).value();
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : out.values()) mx = std::max(mx, v);
  CHECK(mx > 1.5);
}

TEST_CASE("domain generator gradients match finite differences") {
  auto g = NetworkParams::initialized(Architecture::kDomainGenerator, Preset::kDesk, 6);
  scramble(g, 7, 0.2);
  const Var x = input(1, 16, 16, 8);
  check_fd(g, [&] { return probe(forward_domain_generator(g, x), 9); }, 6);
}

TEST_CASE("lr generator halves twice and has finite-difference gradients") {
  auto h = NetworkParams::initialized(Architecture::kLrGenerator, Preset::kDesk, 6);
  const Var x = input(1, 32, 32, 10);
  CHECK(forward_lr_generator(h, x).shape() == Shape{1, 3, 8, 8});
  CHECK_THROWS_AS(forward_lr_generator(h, input(1, 34, 34, 1)), ValidationError);
  scramble(h, 11, 0.2);
  check_fd(h, [&] { return probe(forward_lr_generator(h, x), 12); }, 4);
}

TEST_CASE("patch discriminator is patch-level, convolutional and deterministic") {
  const auto d = NetworkParams::initialized(Architecture::kPatchDiscriminator, Preset::kDesk, 7);
  const Var x = input(1, 70, 70, 13);
  const Var s = forward_patch_discriminator(d, x);
  CHECK(s.shape().c == 1);
  CHECK(s.shape().h > 1);
  CHECK(s.shape().w > 1);
  CHECK(forward_patch_discriminator(d, x).value() == s.value());
  // Shift by one stride unit (8 pixels) of the whole network.
  const Var big = input(1, 64, 72, 14);
  const Var left = ops::crop(big, 0, 0, 64, 64), right = ops::crop(big, 0, 8, 64, 64);
  const Tensor a = forward_patch_discriminator(d, left).value();
  const Tensor b = forward_patch_discriminator(d, right).value();
  const Shape sh = a.shape();
  for (int y = 2; y < sh.h - 2; ++y)
    for (int xx = 2; xx < sh.w - 3; ++xx) CHECK(a.at(0, 0, y, xx + 1) == doctest::Approx(b.at(0, 0, y, xx)).epsilon(1e-9));
  CHECK_THROWS_AS(forward_patch_discriminator(d, input(1, 12, 12, 1)), ValidationError);
}

TEST_CASE("patch discriminator gradients match finite differences") {
  auto d = NetworkParams::initialized(Architecture::kPatchDiscriminator, Preset::kDesk, 8);
  const Var x = input(2, 24, 24, 15);
  check_fd(d, [&] { return probe(forward_patch_discriminator(d, x), 16); }, 6);
}

TEST_CASE("sr generator: x4 shape and constant input") {
  const auto s = NetworkParams::initialized(Architecture::kSrGenerator, Preset::kDesk, 9);
  CHECK(forward_sr(s, input(1, 16, 16, 17)).shape() == Shape{1, 3, 64, 64});
  CHECK(forward_sr(s, input(2, 5, 7, 18)).shape() == Shape{2, 3, 20, 28});
  // Zero residual: the colour adjustment returns the LR mean.
  auto zero = s.clone();
  for (auto& [name, v] : zero.tensors()) v.mutable_value().fill(0.0);
  const Var gray = Var::constant(Tensor({1, 3, 8, 8}, 0.42));
  const Tensor flat = forward_sr(zero, gray).value();
  for (double v : flat.values()) CHECK(v == doctest::Approx(0.42).epsilon(1e-12));
}

TEST_CASE("sr generator gradients match finite differences") {
  auto s = NetworkParams::initialized(Architecture::kSrGenerator, Preset::kDesk, 10);
  scramble(s, 19, 0.1);
  const Var x = input(1, 4, 4, 20);
  check_fd(s, [&] { return probe(forward_sr(s, x), 21); }, 3);
}

TEST_CASE("sr critic gives one score per image and exact gradients") {
  auto c = NetworkParams::initialized(Architecture::kSrCritic, Preset::kDesk, 11);
  const Var x = input(3, 32, 32, 22);
  CHECK(forward_sr_critic(c, x).shape().numel() == 3);
  check_fd(c, [&] { return probe(forward_sr_critic(c, x), 23); }, 4);
}

TEST_CASE("colour adjustment invariants") {
  // Fixed point.
  const Var lr = input(1, 4, 4, 24);
  const Var up = ops::upsample_nearest(lr, 4);
  const Tensor fixed = ops::color_adjust(up, lr).value();
  for (size_t k = 0; k < fixed.numel(); ++k) CHECK(std::fabs(fixed[k] - up.value()[k]) < 1e-12);
  // Mean shift.
  const Var a = Var::constant(Tensor({1, 3, 8, 8}, 0.8)), b = Var::constant(Tensor({1, 3, 2, 2}, 0.3));
  const Tensor shifted = ops::color_adjust(a, b).value();
  for (double v : shifted.values()) CHECK(v == doctest::Approx(0.3).epsilon(1e-12));
  // Block means and idempotence.
  for (int i = 0; i < 10; ++i) {
    const Var sr = input(2, 16, 12, 100 + i, -0.5, 1.5), l = input(2, 4, 3, 200 + i);
    const Var out = ops::color_adjust(sr, l);
    for (int n = 0; n < 2; ++n)
      for (int c = 0; c < 3; ++c) {
        const auto m = oracle::block_means(out.value(), n, c, 4);
        for (size_t k = 0; k < m.size(); ++k) CHECK(std::fabs(m[k] - l.value().plane(n, c)[k]) < 1e-6);
      }
    const Tensor twice = ops::color_adjust(out, l).value();
    for (size_t k = 0; k < twice.numel(); ++k) CHECK(std::fabs(twice[k] - out.value()[k]) < 1e-6);
  }
  CHECK_THROWS_AS(ops::color_adjust(input(1, 16, 16, 1), input(1, 5, 4, 1)), ValidationError);
}

TEST_CASE("feature extractor: stride, determinism, Lipschitz smoke, frozen") {
  const FeatureExtractor phi(Preset::kDesk, 12);
  const Var x = input(1, 64, 48, 25);
  const Tensor f = phi.extract(x).value();
  CHECK(f.shape().h == 64 / FeatureExtractor::kStride);
  CHECK(f.shape().w == 48 / FeatureExtractor::kStride);
  CHECK(phi.extract(x).value() == f);
  Tensor shifted = x.value();
  const Tensor dir = oracle::random_tensor(shifted.shape(), 26);
  double dn = 0.0;
  for (size_t i = 0; i < shifted.numel(); ++i) dn += dir[i] * dir[i];
  const double eps = 1e-3 / std::sqrt(dn);
  for (size_t i = 0; i < shifted.numel(); ++i) shifted[i] += eps * dir[i];
  const Tensor g = phi.extract(Var::constant(shifted)).value();
  double d2 = 0.0;
  for (size_t i = 0; i < f.numel(); ++i) d2 += (f[i] - g[i]) * (f[i] - g[i]);
  CHECK(std::sqrt(d2) < 1.0);  // O(eps) with a generous constant
  CHECK(std::sqrt(d2) > 0.0);
  for (const auto& [name, v] : phi.params().tensors()) CHECK_FALSE(v.requires_grad());
  CHECK_THROWS_AS(phi.extract(input(1, 8, 8, 1)), ValidationError);
}

TEST_CASE("non-finite parameters and inputs are rejected by name") {
  auto g = NetworkParams::initialized(Architecture::kDomainGenerator, Preset::kDesk, 13);
  g["block1.conv2.weight"].mutable_value()[3] = std::nan("");
  CHECK_THROWS_WITH_AS(forward_domain_generator(g, input(1, 16, 16, 1)), doctest::Contains("block1.conv2.weight"),
                       ValidationError);
  const auto ok = NetworkParams::initialized(Architecture::kDomainGenerator, Preset::kDesk, 13);
  Tensor bad = input(1, 16, 16, 1).value();
  bad[0] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_WITH_AS(forward_domain_generator(ok, Var::constant(bad)), doctest::Contains("input"),
                       ValidationError);
}

TEST_CASE("checkpoint save and load reproduce outputs bit-identically") {
  const auto dir = oracle::scratch_dir("nets_ckpt");
  Checkpoint ck;
  ck.step = 17;
  ck.meta["stage"] = "sr";
  auto s = NetworkParams::initialized(Architecture::kSrGenerator, Preset::kDesk, 14);
  scramble(s, 27, 0.05);
  for (auto& [name, v] : s.tensors()) v.mutable_value().round_to_float();
  ck.set_network("S", s);
  ck.extras.push_back({"adam/S", {{"m/conv_first.weight", Tensor({1, 1, 1, 2}, 0.25)}}});
  save_checkpoint(ck, dir / "a.ckpt");
  const Checkpoint back = load_checkpoint(dir / "a.ckpt");
  CHECK(back.step == 17);
  CHECK(back.meta_or("stage", "") == "sr");
  CHECK(back.network("S").checksum() == s.checksum());
  const Var x = input(1, 8, 8, 28);
  CHECK(forward_sr(back.network("S"), x).value() == forward_sr(s, x).value());
  REQUIRE(back.extra("adam/S") != nullptr);
  CHECK(back.extra("adam/S")->at(0).value[1] == 0.25);
  CHECK(encode_checkpoint(back) == encode_checkpoint(ck));
}

TEST_CASE("checkpoint decoding rejects corruption and schema mismatches") {
  Checkpoint ck;
  ck.set_network("D_X", NetworkParams::initialized(Architecture::kPatchDiscriminator, Preset::kDesk, 1));
  std::string bytes = encode_checkpoint(ck);
  CHECK_THROWS_AS(decode_checkpoint(bytes.substr(0, bytes.size() / 2)), ValidationError);
  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(decode_checkpoint(bad_magic), ValidationError);
  CHECK_THROWS_AS(load_checkpoint("/nonexistent/realsr.ckpt"), IoError);
  // A tensor archive with a wrong shape cannot become a parameter set.
  std::vector<NamedTensor> state;
  for (const auto& spec : schema(Architecture::kPatchDiscriminator, Preset::kDesk)) {
    state.push_back({spec.name, Tensor(spec.shape, 0.0)});
  }
  CHECK_NOTHROW(params_from_archive(state, Architecture::kPatchDiscriminator, Preset::kDesk));
  state[0].value = Tensor({1, 1, 1, 1}, 0.0);
  CHECK_THROWS_AS(params_from_archive(state, Architecture::kPatchDiscriminator, Preset::kDesk), ValidationError);
  state.pop_back();
  CHECK_THROWS_AS(params_from_archive(state, Architecture::kPatchDiscriminator, Preset::kDesk), ValidationError);
}

TEST_CASE("ESRGAN tensor names import onto the SR schema") {
  std::vector<NamedTensor> state;
  for (const auto& spec : schema(Architecture::kSrGenerator, Preset::kDesk)) {
    std::string n = spec.name;
    auto replace = [&](const std::string& from, const std::string& to) {
      const auto at = n.find(from);
      if (at != std::string::npos) n.replace(at, from.size(), to);
    };
    replace("RRDB_trunk.", "body.");
    replace(".RDB", ".rdb");
    replace("trunk_conv", "conv_body");
    replace("upconv", "conv_up");
    replace("HRconv", "conv_hr");
    Shape sh = spec.shape;
    Tensor t(sh, 0.5);
    if (n.ends_with(".bias")) t = Tensor({sh.c, 1, 1, 1}, 0.5);
    state.push_back({"module." + n, t});
  }
  const NetworkParams p = import_esrgan(state, Preset::kDesk);
  CHECK(p.architecture() == Architecture::kSrGenerator);
  CHECK(p["RRDB_trunk.1.RDB3.conv5.weight"].value()[0] == 0.5);
  const std::string archive = encode_tensor_archive(state);
  CHECK(is_tensor_archive(archive));
  CHECK(decode_tensor_archive(archive).size() == state.size());
}
