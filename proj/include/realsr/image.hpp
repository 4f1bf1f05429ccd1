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

#ifndef REALSR_IMAGE_HPP_
#define REALSR_IMAGE_HPP_

#include <cstddef>
#include <span>
#include <vector>

namespace realsr {

/// Interleaved sRGB raster with three float channels in [0, 1].
///
/// Every public operation that returns an Image leaves it finite and inside
/// [0, 1]; the constructor from raw samples clamps (and rejects NaN).
class Image {
 public:
  static constexpr int kChannels = 3;

  Image() = default;
  Image(int height, int width, float fill = 0.0f);
  Image(int height, int width, std::vector<float> samples);

  int height() const { return height_; }
  int width() const { return width_; }
  bool empty() const { return samples_.empty(); }
  size_t size() const { return samples_.size(); }

  float at(int y, int x, int c) const { return samples_[index(y, x, c)]; }
  void set(int y, int x, int c, float v);

  std::span<const float> samples() const { return samples_; }

  // Copy of the rectangle [y0, y0+h) x [x0, x0+w).
  Image crop(int y0, int x0, int h, int w) const;

  friend bool operator==(const Image&, const Image&) = default;

 private:
  size_t index(int y, int x, int c) const {
    return (static_cast<size_t>(y) * width_ + x) * kChannels + c;
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<float> samples_;
};

struct ResampleKernel {
  enum class Kind { kBicubic, kBilinear };
  Kind kind = Kind::kBicubic;
  double bicubic_a = -0.5;

  static ResampleKernel bicubic() { return {}; }
  static ResampleKernel bilinear() { return {Kind::kBilinear, -0.5}; }

  // Continuous kernel value at offset t (in source pixels at unit scale).
  double operator()(double t) const;
  // Half-width of the support at unit scale.
  double support() const { return kind == Kind::kBicubic ? 2.0 : 1.0; }
};

// Resizes by scale_num/scale_den with half-pixel-centre alignment and
// clamp-to-edge borders. When shrinking, the kernel is stretched by the
// inverse scale (antialiasing). Weights are renormalised to sum to one.
// The result is clamped to [0, 1].
Image resample(const Image& img, int scale_num, int scale_den,
               const ResampleKernel& kernel = ResampleKernel::bicubic());

// Bicubic downsampling by an integer factor.
Image downsample(const Image& img, int factor);

// Peak signal-to-noise ratio in dB with MAX = 1; +infinity for identical images.
double psnr(const Image& a, const Image& b);

struct SsimOptions {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
};

// Mean SSIM over the valid-window map of each channel, averaged over channels.
double ssim(const Image& a, const Image& b, const SsimOptions& options = {});

// Mean squared 4-neighbour Laplacian response (replicate borders), averaged
// over channels. Used to compare how much high-frequency content two images
// carry.
double high_pass_energy(const Image& img);

// Drops `border` pixels from every side.
Image shave(const Image& img, int border);

// Rounds to the 8-bit grid (half away from zero) and back.
Image quantize8(const Image& img);

}  // namespace realsr

#endif  // REALSR_IMAGE_HPP_
