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

// Reference implementations used by the tests. They are written from the
// definitions, without sharing code with the library.

#ifndef REALSR_TESTS_ORACLES_HPP_
#define REALSR_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "realsr/autograd.hpp"
#include "realsr/image.hpp"
#include "realsr/tensor.hpp"

namespace oracle {

using realsr::Image;
using realsr::Tensor;
using realsr::Var;

inline Image random_image(int h, int w, uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<float> v(static_cast<size_t>(h) * w * 3);
  for (float& x : v) x = static_cast<float>(u(gen));
  return Image(h, w, std::move(v));
}

inline Tensor random_tensor(realsr::Shape s, uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t(s);
  for (double& x : t.values()) x = u(gen);
  return t;
}

// Keys cubic with a = -0.5.
inline double keys(double t) {
  t = std::fabs(t);
  if (t < 1.0) return 1.5 * t * t * t - 2.5 * t * t + 1.0;
  if (t < 2.0) return -0.5 * t * t * t + 2.5 * t * t - 4.0 * t + 2.0;
  return 0.0;
}

// Bicubic 1/factor downscale as one dense 2-D sum over a virtual source
// grid with replicate borders: every output pixel is the normalised sum of
// w(dy) * w(dx) * src over all source positions.
inline Image dense_bicubic_downscale(const Image& src, int factor) {
  const int H = src.height(), W = src.width();
  const int oh = H / factor, ow = W / factor;
  const double s = factor;
  const int reach = 3 * factor;
  std::vector<float> out(static_cast<size_t>(oh) * ow * 3);
  for (int oy = 0; oy < oh; ++oy)
    for (int ox = 0; ox < ow; ++ox) {
      const double cy = (oy + 0.5) * s - 0.5, cx = (ox + 0.5) * s - 0.5;
      double acc[3] = {0, 0, 0}, norm = 0.0;
      for (int iy = -reach; iy < H + reach; ++iy)
        for (int ix = -reach; ix < W + reach; ++ix) {
          const double w = keys((cy - iy) / s) * keys((cx - ix) / s);
          if (w == 0.0) continue;
          norm += w;
          const int sy = std::clamp(iy, 0, H - 1), sx = std::clamp(ix, 0, W - 1);
          for (int c = 0; c < 3; ++c) acc[c] += w * src.at(sy, sx, c);
        }
      for (int c = 0; c < 3; ++c) {
        out[(static_cast<size_t>(oy) * ow + ox) * 3 + c] =
            static_cast<float>(std::clamp(acc[c] / norm, 0.0, 1.0));
      }
    }
  return Image(oh, ow, std::move(out));
}

inline double mse(const Image& a, const Image& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a.samples()[i]) - b.samples()[i];
    s += d * d;
  }
  return s / static_cast<double>(a.size());
}

inline double mean_abs(const Image& a, const Image& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += std::fabs(static_cast<double>(a.samples()[i]) - b.samples()[i]);
  return s / static_cast<double>(a.size());
}

inline double max_abs_diff(const Image& a, const Image& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::fabs(static_cast<double>(a.samples()[i]) - b.samples()[i]));
  }
  return m;
}

// Energy of the residual left after a 3x3 box blur (replicate borders).
inline double box_residual_energy(const Image& img) {
  const int H = img.height(), W = img.width();
  double e = 0.0;
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        double blur = 0.0;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            blur += img.at(std::clamp(y + dy, 0, H - 1), std::clamp(x + dx, 0, W - 1), c);
          }
        const double r = img.at(y, x, c) - blur / 9.0;
        e += r * r;
      }
  return e / static_cast<double>(img.size());
}

// 4x4 block means of channel c of sample n.
inline std::vector<double> block_means(const Tensor& t, int n, int c, int f) {
  const auto& s = t.shape();
  std::vector<double> out;
  for (int by = 0; by < s.h / f; ++by)
    for (int bx = 0; bx < s.w / f; ++bx) {
      double acc = 0.0;
      for (int y = 0; y < f; ++y)
        for (int x = 0; x < f; ++x) acc += t.at(n, c, by * f + y, bx * f + x);
      out.push_back(acc / (f * f));
    }
  return out;
}

inline double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Central-difference check of d loss / d param on `samples` evenly spread
// entries. Returns ||analytic - numeric|| / max(||analytic||, ||numeric||).
inline double fd_relative_error(const std::function<Var()>& loss, Var& param, int samples,
                                double eps = 1e-4, double abs_floor = 1e-6) {
  param.zero_grad();
  Var l = loss();
  l.backward();
  const Tensor grad = param.grad();
  Tensor& value = param.mutable_value();
  const size_t n = value.numel();
  const size_t stride = std::max<size_t>(1, n / static_cast<size_t>(samples));
  double diff = 0.0, na = 0.0, nn = 0.0;
  for (size_t i = (stride / 2) % n; i < n; i += stride) {
    const double keep = value[i];
    value[i] = keep + eps;
    const double up = loss().value()[0];
    value[i] = keep - eps;
    const double down = loss().value()[0];
    value[i] = keep;
    const double num = (up - down) / (2.0 * eps);
    diff += (grad[i] - num) * (grad[i] - num);
    na += grad[i] * grad[i];
    nn += num * num;
  }
  param.zero_grad();
  // Parameters that cannot influence the loss (a bias in front of a
  // normalisation) have a zero gradient; compare those absolutely.
  const double scale = std::max(std::sqrt(std::max(na, nn)), abs_floor);
  return std::sqrt(diff) / scale;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("realsr_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace oracle

#endif  // REALSR_TESTS_ORACLES_HPP_
