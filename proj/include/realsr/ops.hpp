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

#ifndef REALSR_OPS_HPP_
#define REALSR_OPS_HPP_

#include <span>
#include <vector>

#include "realsr/autograd.hpp"

// Differentiable NCHW primitives. Every op validates its shapes and throws
// ValidationError on mismatch.
namespace realsr::ops {

// Zero-padded cross-correlation. weight is (out, in, k, k); bias is
// (1, out, 1, 1) or undefined.
Var conv2d(const Var& x, const Var& weight, const Var& bias, int stride, int pad);

// Fully connected layer over the flattened C*H*W features of each sample.
// weight is (out, in, 1, 1); result is (N, out, 1, 1).
Var dense(const Var& x, const Var& weight, const Var& bias);

Var reflect_pad(const Var& x, int pad);
Var replicate_pad(const Var& x, int bottom, int right);
Var crop(const Var& x, int y0, int x0, int h, int w);

// Per-sample, per-channel normalisation without affine parameters.
Var instance_norm(const Var& x, double eps = 1e-5);

Var relu(const Var& x);
Var leaky_relu(const Var& x, double slope);

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var scale(const Var& a, double s);
// (x - shift[c]) / div[c] with constant per-channel terms.
Var channel_normalize(const Var& x, std::span<const double> shift, std::span<const double> div);

Var concat_channels(const std::vector<Var>& xs);

// x2 bilinear, half-pixel centres, clamped borders.
Var upsample_bilinear2x(const Var& x);
Var upsample_nearest(const Var& x, int factor);
// Non-overlapping factor x factor block averages.
Var block_mean(const Var& x, int factor);
Var max_pool2x(const Var& x);

// Scalar reductions.
Var mean(const Var& x);
Var weighted_sum(const Var& x, const Tensor& weights);

// Shifts the local (4x4 block) mean of every sr channel onto the
// corresponding lr pixel: sr - up(blockmean(sr)) + up(lr).
Var color_adjust(const Var& sr, const Var& lr, int factor = 4);

}  // namespace realsr::ops

#endif  // REALSR_OPS_HPP_
