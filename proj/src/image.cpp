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

#include "realsr/image.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "realsr/common.hpp"

namespace realsr {
namespace {

float clamp_unit(float v) {
  if (std::isnan(v)) throw ValidationError("image sample is NaN");
  return std::clamp(v, 0.0f, 1.0f);
}

void require_same_shape(const Image& a, const Image& b, const char* what) {
  if (a.height() != b.height() || a.width() != b.width()) {
    throw ValidationError(std::string(what) + ": shape mismatch " + std::to_string(a.height()) +
                          "x" + std::to_string(a.width()) + " vs " +
                          std::to_string(b.height()) + "x" + std::to_string(b.width()));
  }
}

// Per output sample: first contributing source index and its weights.
struct AxisWeights {
  std::vector<int> first;
  std::vector<std::vector<double>> weights;
};

AxisWeights axis_weights(int out_size, double scale, const ResampleKernel& kernel) {
  AxisWeights aw;
  aw.first.resize(out_size);
  aw.weights.resize(out_size);
  const double stretch = scale < 1.0 ? 1.0 / scale : 1.0;
  const double radius = kernel.support() * stretch;
  for (int o = 0; o < out_size; ++o) {
    const double centre = (o + 0.5) / scale - 0.5;
    const int lo = static_cast<int>(std::floor(centre - radius));
    const int hi = static_cast<int>(std::ceil(centre + radius));
    std::vector<double> w;
    w.reserve(hi - lo + 1);
    double total = 0.0;
    for (int i = lo; i <= hi; ++i) {
      const double v = kernel((centre - i) / stretch);
      w.push_back(v);
      total += v;
    }
    for (double& v : w) v /= total;
    aw.first[o] = lo;
    aw.weights[o] = std::move(w);
  }
  return aw;
}

}  // namespace

Image::Image(int height, int width, float fill) : height_(height), width_(width) {
  if (height < 1 || width < 1) throw ValidationError("image dimensions must be >= 1");
  samples_.assign(static_cast<size_t>(height) * width * kChannels, clamp_unit(fill));
}

Image::Image(int height, int width, std::vector<float> samples)
    : height_(height), width_(width), samples_(std::move(samples)) {
  if (height < 1 || width < 1) throw ValidationError("image dimensions must be >= 1");
  if (samples_.size() != static_cast<size_t>(height) * width * kChannels) {
    throw ValidationError("sample count does not match " + std::to_string(height) + "x" +
                          std::to_string(width) + "x3");
  }
  for (float& v : samples_) v = clamp_unit(v);
}

void Image::set(int y, int x, int c, float v) { samples_[index(y, x, c)] = clamp_unit(v); }

Image Image::crop(int y0, int x0, int h, int w) const {
  if (y0 < 0 || x0 < 0 || h < 1 || w < 1 || y0 + h > height_ || x0 + w > width_) {
    throw ValidationError("crop rectangle outside image");
  }
  Image out(h, w);
  for (int y = 0; y < h; ++y) {
    const float* src = samples_.data() + index(y0 + y, x0, 0);
    std::copy(src, src + static_cast<size_t>(w) * kChannels,
              out.samples_.begin() + static_cast<ptrdiff_t>(out.index(y, 0, 0)));
  }
  return out;
}

double ResampleKernel::operator()(double t) const {
  const double x = std::abs(t);
  if (kind == Kind::kBilinear) return x < 1.0 ? 1.0 - x : 0.0;
  const double a = bicubic_a;
  if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
  return 0.0;
}

Image resample(const Image& img, int scale_num, int scale_den, const ResampleKernel& kernel) {
  if (scale_num < 1 || scale_den < 1) throw ValidationError("scale terms must be >= 1");
  if (scale_num == scale_den) return img;
  if (img.height() % scale_den != 0 || img.width() % scale_den != 0) {
    throw ValidationError("resample: input " + std::to_string(img.height()) + "x" +
                          std::to_string(img.width()) + " must be divisible by " +
                          std::to_string(scale_den));
  }
  const double scale = static_cast<double>(scale_num) / scale_den;
  const int out_h = static_cast<int>(std::lround(img.height() * scale));
  const int out_w = static_cast<int>(std::lround(img.width() * scale));
  const AxisWeights rows = axis_weights(out_h, scale, kernel);
  const AxisWeights cols = axis_weights(out_w, scale, kernel);
  constexpr int C = Image::kChannels;

  // Horizontal pass into a double buffer, then vertical.
  std::vector<double> tmp(static_cast<size_t>(img.height()) * out_w * C, 0.0);
  const auto src = img.samples();
  for (int y = 0; y < img.height(); ++y) {
    for (int ox = 0; ox < out_w; ++ox) {
      const auto& w = cols.weights[ox];
      double acc[C] = {0.0, 0.0, 0.0};
      for (size_t k = 0; k < w.size(); ++k) {
        const int sx = std::clamp(cols.first[ox] + static_cast<int>(k), 0, img.width() - 1);
        const float* p = &src[(static_cast<size_t>(y) * img.width() + sx) * C];
        for (int c = 0; c < C; ++c) acc[c] += w[k] * p[c];
      }
      for (int c = 0; c < C; ++c) tmp[(static_cast<size_t>(y) * out_w + ox) * C + c] = acc[c];
    }
  }
  std::vector<float> out(static_cast<size_t>(out_h) * out_w * C);
  for (int oy = 0; oy < out_h; ++oy) {
    const auto& w = rows.weights[oy];
    for (int ox = 0; ox < out_w; ++ox) {
      double acc[C] = {0.0, 0.0, 0.0};
      for (size_t k = 0; k < w.size(); ++k) {
        const int sy = std::clamp(rows.first[oy] + static_cast<int>(k), 0, img.height() - 1);
        const double* p = &tmp[(static_cast<size_t>(sy) * out_w + ox) * C];
        for (int c = 0; c < C; ++c) acc[c] += w[k] * p[c];
      }
      for (int c = 0; c < C; ++c) {
        out[(static_cast<size_t>(oy) * out_w + ox) * C + c] =
            static_cast<float>(std::clamp(acc[c], 0.0, 1.0));
      }
    }
  }
  return Image(out_h, out_w, std::move(out));
}

Image downsample(const Image& img, int factor) {
  return resample(img, 1, factor, ResampleKernel::bicubic());
}

double psnr(const Image& a, const Image& b) {
  require_same_shape(a, b, "psnr");
  const auto sa = a.samples();
  const auto sb = b.samples();
  double sum = 0.0;
  for (size_t i = 0; i < sa.size(); ++i) {
    const double d = static_cast<double>(sa[i]) - sb[i];
    sum += d * d;
  }
  const double mse = sum / static_cast<double>(sa.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

double ssim(const Image& a, const Image& b, const SsimOptions& opt) {
  require_same_shape(a, b, "ssim");
  const int win = opt.window;
  if (a.height() < win || a.width() < win) {
    throw ValidationError("ssim: image " + std::to_string(a.height()) + "x" +
                          std::to_string(a.width()) + " smaller than the " + std::to_string(win) +
                          "x" + std::to_string(win) + " window");
  }
  std::vector<double> g(win);
  double gsum = 0.0;
  for (int i = 0; i < win; ++i) {
    const double d = i - (win - 1) / 2.0;
    g[i] = std::exp(-d * d / (2.0 * opt.sigma * opt.sigma));
    gsum += g[i];
  }
  for (double& v : g) v /= gsum;
  const double c1 = (opt.k1 * 1.0) * (opt.k1 * 1.0);
  const double c2 = (opt.k2 * 1.0) * (opt.k2 * 1.0);
  const int H = a.height(), W = a.width();
  const int oh = H - win + 1, ow = W - win + 1;

  // Valid-mode separable Gaussian filter of a single-channel plane.
  auto filter = [&](const std::vector<double>& plane) {
    std::vector<double> tmp(static_cast<size_t>(H) * ow);
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < ow; ++x) {
        double s = 0.0;
        for (int k = 0; k < win; ++k) s += g[k] * plane[static_cast<size_t>(y) * W + x + k];
        tmp[static_cast<size_t>(y) * ow + x] = s;
      }
    std::vector<double> out(static_cast<size_t>(oh) * ow);
    for (int y = 0; y < oh; ++y)
      for (int x = 0; x < ow; ++x) {
        double s = 0.0;
        for (int k = 0; k < win; ++k) s += g[k] * tmp[static_cast<size_t>(y + k) * ow + x];
        out[static_cast<size_t>(y) * ow + x] = s;
      }
    return out;
  };

  double total = 0.0;
  for (int c = 0; c < Image::kChannels; ++c) {
    std::vector<double> pa(static_cast<size_t>(H) * W), pb(pa.size()), paa(pa.size()),
        pbb(pa.size()), pab(pa.size());
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        const size_t i = static_cast<size_t>(y) * W + x;
        pa[i] = a.at(y, x, c);
        pb[i] = b.at(y, x, c);
        paa[i] = pa[i] * pa[i];
        pbb[i] = pb[i] * pb[i];
        pab[i] = pa[i] * pb[i];
      }
    const auto mu_a = filter(pa), mu_b = filter(pb);
    const auto e_aa = filter(paa), e_bb = filter(pbb), e_ab = filter(pab);
    double sum = 0.0;
    for (size_t i = 0; i < mu_a.size(); ++i) {
      const double va = e_aa[i] - mu_a[i] * mu_a[i];
      const double vb = e_bb[i] - mu_b[i] * mu_b[i];
      const double cov = e_ab[i] - mu_a[i] * mu_b[i];
      const double num = (2.0 * mu_a[i] * mu_b[i] + c1) * (2.0 * cov + c2);
      const double den = (mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (va + vb + c2);
      sum += num / den;
    }
    total += sum / static_cast<double>(mu_a.size());
  }
  return total / Image::kChannels;
}

double high_pass_energy(const Image& img) {
  const int H = img.height(), W = img.width();
  double sum = 0.0;
  for (int c = 0; c < Image::kChannels; ++c)
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        const double centre = img.at(y, x, c);
        const double lap = img.at(std::max(y - 1, 0), x, c) + img.at(std::min(y + 1, H - 1), x, c) +
                           img.at(y, std::max(x - 1, 0), c) + img.at(y, std::min(x + 1, W - 1), c) -
                           4.0 * centre;
        sum += lap * lap;
      }
  return sum / static_cast<double>(img.size());
}

Image shave(const Image& img, int border) {
  if (border <= 0) return img;
  if (2 * border >= img.height() || 2 * border >= img.width()) {
    throw ValidationError("shave border " + std::to_string(border) + " too large for image");
  }
  return img.crop(border, border, img.height() - 2 * border, img.width() - 2 * border);
}

Image quantize8(const Image& img) {
  std::vector<float> out(img.samples().begin(), img.samples().end());
  for (float& v : out) v = static_cast<float>(std::lround(static_cast<double>(v) * 255.0)) / 255.0f;
  return Image(img.height(), img.width(), std::move(out));
}

}  // namespace realsr
