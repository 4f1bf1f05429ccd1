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

#include "realsr/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "realsr/common.hpp"

namespace realsr {

std::string Shape::str() const {
  return "[" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) + "," +
         std::to_string(w) + "]";
}

Tensor::Tensor(Shape shape, double fill) : shape_(shape), data_(shape.numel(), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> values) : shape_(shape), data_(values.begin(), values.end()) {
  if (data_.size() != shape_.numel()) {
    throw ValidationError("tensor value count " + std::to_string(data_.size()) +
                          " does not match shape " + shape_.str());
  }
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double Tensor::sum() const { return std::accumulate(data_.begin(), data_.end(), 0.0); }

Tensor& Tensor::operator+=(const Tensor& other) {
  if (!(other.shape_ == shape_)) {
    throw ValidationError("tensor add: shape " + other.shape_.str() + " vs " + shape_.str());
  }
  for (size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

void Tensor::round_to_float() {
  for (double& v : data_) v = static_cast<double>(static_cast<float>(v));
}

Tensor images_to_tensor(std::span<const Image> images) {
  if (images.empty()) throw ValidationError("empty image batch");
  const int h = images[0].height(), w = images[0].width();
  Tensor t({static_cast<int>(images.size()), Image::kChannels, h, w});
  for (size_t n = 0; n < images.size(); ++n) {
    const Image& img = images[n];
    if (img.height() != h || img.width() != w) {
      throw ValidationError("image batch with mixed dimensions");
    }
    for (int c = 0; c < Image::kChannels; ++c) {
      double* p = t.plane(static_cast<int>(n), c);
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) p[static_cast<size_t>(y) * w + x] = img.at(y, x, c);
    }
  }
  return t;
}

Tensor image_to_tensor(const Image& image) { return images_to_tensor(std::span(&image, 1)); }

Image tensor_to_image(const Tensor& t, int index) {
  const Shape& s = t.shape();
  if (s.c != Image::kChannels || index < 0 || index >= s.n) {
    throw ValidationError("tensor " + s.str() + " is not an RGB batch containing index " +
                          std::to_string(index));
  }
  if (!t.all_finite()) throw ValidationError("tensor holds non-finite values");
  std::vector<float> samples(static_cast<size_t>(s.h) * s.w * Image::kChannels);
  for (int c = 0; c < s.c; ++c) {
    const double* p = t.plane(index, c);
    for (size_t i = 0; i < s.plane(); ++i) {
      samples[i * Image::kChannels + c] = static_cast<float>(std::clamp(p[i], 0.0, 1.0));
    }
  }
  return Image(s.h, s.w, std::move(samples));
}

}  // namespace realsr
