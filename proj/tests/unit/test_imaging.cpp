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
#include "realsr/image.hpp"
#include "realsr/image_io.hpp"

using namespace realsr;

TEST_CASE("bicubic kernel reproduces identity at integer offsets and sums to one") {
  const ResampleKernel k = ResampleKernel::bicubic();
  CHECK(k(0.0) == 1.0);
  CHECK(k(1.0) == 0.0);
  CHECK(k(-1.0) == 0.0);
  CHECK(k(2.0) == 0.0);
  CHECK(k(-2.0) == 0.0);
  for (double frac = 0.0; frac < 1.0; frac += 0.0625) {
    double s = 0.0;
    for (int i = -2; i <= 2; ++i) s += k(frac - i);
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }
  for (double t = -2.5; t <= 2.5; t += 0.125) CHECK(k(t) == doctest::Approx(oracle::keys(t)));
}

TEST_CASE("constant image stays constant at any factor") {
  for (int f : {1, 2, 4}) {
    const Image c(16, 16, 0.37f);
    const Image down = resample(c, 1, f);
    for (float v : down.samples()) CHECK(std::fabs(v - 0.37f) < 1e-6);
    const Image up = resample(c, f, 1);
    for (float v : up.samples()) CHECK(std::fabs(v - 0.37f) < 1e-6);
  }
}

TEST_CASE("resample shape contract and identity") {
  const Image img = oracle::random_image(64, 64, 1);
  const Image d = resample(img, 1, 4);
  CHECK(d.height() == 16);
  CHECK(d.width() == 16);
  CHECK(resample(img, 1, 1) == img);
  CHECK(resample(img, 3, 3, ResampleKernel::bilinear()) == img);
  CHECK_THROWS_AS(resample(oracle::random_image(10, 12, 2), 1, 4), ValidationError);
  CHECK_THROWS_WITH_AS(resample(oracle::random_image(10, 12, 2), 1, 4), doctest::Contains("divisible by 4"),
                       ValidationError);
}

TEST_CASE("bicubic downscale matches the dense convolution oracle") {
  // 8x8 linear ramp first, then random images.
  std::vector<float> ramp(8 * 8 * 3);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x)
      for (int c = 0; c < 3; ++c) ramp[(y * 8 + x) * 3 + c] = static_cast<float>((x + y + c) / 20.0);
  const Image r(8, 8, ramp);
  CHECK(oracle::max_abs_diff(downsample(r, 4), oracle::dense_bicubic_downscale(r, 4)) < 1e-6);
  for (int i = 0; i < 10; ++i) {
    const int h = 4 * (1 + i % 4), w = 4 * (1 + (i / 2) % 4);
    const Image img = oracle::random_image(h, w, 100 + i);
    CHECK(oracle::max_abs_diff(downsample(img, 4), oracle::dense_bicubic_downscale(img, 4)) < 1e-6);
    if (h % 2 == 0 && w % 2 == 0) {
      CHECK(oracle::max_abs_diff(resample(img, 1, 2), oracle::dense_bicubic_downscale(img, 2)) < 1e-6);
    }
  }
}

TEST_CASE("resampling is separable: rows then columns equals columns then rows") {
  const Image img = oracle::random_image(16, 12, 9);
  // Transposing, resampling and transposing back swaps the pass order.
  auto transpose = [](const Image& a) {
    Image t(a.width(), a.height());
    for (int y = 0; y < a.height(); ++y)
      for (int x = 0; x < a.width(); ++x)
        for (int c = 0; c < 3; ++c) t.set(x, y, c, a.at(y, x, c));
    return t;
  };
  const Image a = resample(img, 1, 4);
  const Image b = transpose(resample(transpose(img), 1, 4));
  CHECK(oracle::max_abs_diff(a, b) < 1e-6);
}

TEST_CASE("psnr closed forms") {
  const Image a = oracle::random_image(8, 8, 3);
  CHECK(psnr(a, a) == std::numeric_limits<double>::infinity());
  const Image g(32, 32, 0.5f);
  const Image h(32, 32, 0.5f + 16.0f / 255.0f);
  CHECK(psnr(g, h) == doctest::Approx(20.0 * std::log10(255.0 / 16.0)).epsilon(1e-6));
  CHECK(psnr(g, h) == doctest::Approx(24.0484).epsilon(1e-4));
  const Image z(1, 1, 0.0f), o(1, 1, 1.0f);
  CHECK(psnr(z, o) == 0.0);
  CHECK_THROWS_AS(psnr(g, Image(8, 8)), ValidationError);
}

TEST_CASE("psnr is symmetric and decreases with noise amplitude") {
  const Image base = oracle::random_image(24, 24, 4);
  const Image noise = oracle::random_image(24, 24, 5);
  double prev = std::numeric_limits<double>::infinity();
  for (double amp : {0.01, 0.02, 0.05, 0.1}) {
    std::vector<float> v(base.size());
    for (size_t i = 0; i < v.size(); ++i) {
      v[i] = static_cast<float>(0.25 + 0.5 * base.samples()[i] + amp * (noise.samples()[i] - 0.5));
    }
    std::vector<float> c(base.size());
    for (size_t i = 0; i < c.size(); ++i) c[i] = static_cast<float>(0.25 + 0.5 * base.samples()[i]);
    const Image ref(24, 24, c), noisy(24, 24, v);
    const double p = psnr(ref, noisy);
    CHECK(p == doctest::Approx(psnr(noisy, ref)));
    CHECK(p == doctest::Approx(10.0 * std::log10(1.0 / oracle::mse(ref, noisy))));
    CHECK(p < prev);
    prev = p;
  }
}

TEST_CASE("ssim identities") {
  const Image a = oracle::random_image(16, 16, 6);
  CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ssim(Image(16, 16, 0.4f), Image(16, 16, 0.4f)) == doctest::Approx(1.0).epsilon(1e-12));
  // Negative contrast on a high-variance checker pattern.
  Image pat(16, 16);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x)
      for (int c = 0; c < 3; ++c) pat.set(y, x, c, ((x + y) % 2) ? 0.9f : 0.1f);
  Image neg(16, 16);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x)
      for (int c = 0; c < 3; ++c) neg.set(y, x, c, 1.0f - pat.at(y, x, c));
  CHECK(ssim(pat, neg) < 0.0);
  const Image b = oracle::random_image(16, 16, 7);
  CHECK(ssim(a, b) == doctest::Approx(ssim(b, a)).epsilon(1e-12));
  CHECK(std::fabs(ssim(a, b)) <= 1.0);
  CHECK_THROWS_AS(ssim(Image(8, 8), Image(8, 8)), ValidationError);
}

TEST_CASE("ssim matches a direct single-window evaluation") {
  // With an 11x11 image there is one window position; evaluate the formula
  // with the Gaussian weights written out here.
  const Image a = oracle::random_image(11, 11, 8), b = oracle::random_image(11, 11, 9);
  double total = 0.0;
  std::vector<double> g(11);
  double gs = 0.0;
  for (int i = 0; i < 11; ++i) gs += g[i] = std::exp(-(i - 5.0) * (i - 5.0) / (2 * 1.5 * 1.5));
  for (int c = 0; c < 3; ++c) {
    double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
    for (int y = 0; y < 11; ++y)
      for (int x = 0; x < 11; ++x) {
        const double w = g[y] * g[x] / (gs * gs);
        const double va = a.at(y, x, c), vb = b.at(y, x, c);
        ma += w * va;
        mb += w * vb;
        saa += w * va * va;
        sbb += w * vb * vb;
        sab += w * va * vb;
      }
    const double c1 = 0.0001, c2 = 0.0009;
    const double vara = saa - ma * ma, varb = sbb - mb * mb, cov = sab - ma * mb;
    total += (2 * ma * mb + c1) * (2 * cov + c2) / ((ma * ma + mb * mb + c1) * (vara + varb + c2));
  }
  CHECK(ssim(a, b) == doctest::Approx(total / 3).epsilon(1e-9));
}

TEST_CASE("images clamp into the unit range and reject NaN") {
  const Image a(1, 1, std::vector<float>{-0.5f, 0.5f, 2.0f});
  CHECK(a.at(0, 0, 0) == 0.0f);
  CHECK(a.at(0, 0, 2) == 1.0f);
  CHECK_THROWS_AS(Image(1, 1, std::vector<float>{std::nanf(""), 0.0f, 0.0f}), ValidationError);
  CHECK_THROWS_AS(Image(0, 3), ValidationError);
}

TEST_CASE("png round trip is exact on the 8-bit grid") {
  const Image q = quantize8(oracle::random_image(13, 7, 10));
  const Image back = decode_png(encode_png(q));
  CHECK(back == q);
  CHECK(to_byte(-1.0f) == 0);
  CHECK(to_byte(3.0f) == 255);
}

TEST_CASE("shave and high-pass energy") {
  const Image a = oracle::random_image(10, 10, 11);
  CHECK(shave(a, 2).height() == 6);
  CHECK(shave(a, 0) == a);
  CHECK_THROWS_AS(shave(a, 5), ValidationError);
  CHECK(high_pass_energy(Image(8, 8, 0.3f)) == 0.0);
  CHECK(high_pass_energy(a) > high_pass_energy(resample(resample(a, 1, 2), 2, 1)));
}
