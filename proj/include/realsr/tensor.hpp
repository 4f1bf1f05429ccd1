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

#ifndef REALSR_TENSOR_HPP_
#define REALSR_TENSOR_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "realsr/image.hpp"

namespace realsr {

// NCHW extent. Convolution weights use (out, in, kh, kw) in the same slots.
struct Shape {
  int n = 1, c = 1, h = 1, w = 1;

  size_t numel() const { return static_cast<size_t>(n) * c * h * w; }
  size_t plane() const { return static_cast<size_t>(h) * w; }
  std::string str() const;
  friend bool operator==(const Shape&, const Shape&) = default;
};

// Dense row-major double tensor. Training arithmetic runs in double;
// parameters are kept representable in float32 (see round_to_float).
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  const Shape& shape() const { return shape_; }
  size_t numel() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  double& operator[](size_t i) { return data_[i]; }
  double operator[](size_t i) const { return data_[i]; }
  double& at(int n, int c, int h, int w) { return data_[offset(n, c, h, w)]; }
  double at(int n, int c, int h, int w) const { return data_[offset(n, c, h, w)]; }

  // Pointer to the (n, c) plane.
  double* plane(int n, int c) { return data_.data() + offset(n, c, 0, 0); }
  const double* plane(int n, int c) const { return data_.data() + offset(n, c, 0, 0); }

  void fill(double v);
  bool all_finite() const;
  double sum() const;
  Tensor& operator+=(const Tensor& other);

  // Round every value to the nearest float32.
  void round_to_float();

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  size_t offset(int n, int c, int h, int w) const {
    return ((static_cast<size_t>(n) * shape_.c + c) * shape_.h + h) * shape_.w + w;
  }

  Shape shape_{0, 0, 0, 0};
  // Fixed base alignment keeps vectorised kernels bit-reproducible.
  std::vector<double, Eigen::aligned_allocator<double>> data_;
};

// Image batch <-> NCHW tensor. tensor_to_image clamps to [0, 1].
Tensor images_to_tensor(std::span<const Image> images);
Tensor image_to_tensor(const Image& image);
Image tensor_to_image(const Tensor& t, int index = 0);

}  // namespace realsr

#endif  // REALSR_TENSOR_HPP_
