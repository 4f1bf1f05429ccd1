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

#include "realsr/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "realsr/random.hpp"

namespace realsr {

Image synth_image(int height, int width, uint64_t seed) {
  Rng rng(seed);
  using Rgb = std::array<double, 3>;
  auto colour = [&] { return Rgb{rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9)}; };
  const Rgb c0 = colour(), c1 = colour();
  const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double gx = std::cos(angle), gy = std::sin(angle);
  const double diag = std::hypot(height, width);

  std::vector<double> px(static_cast<size_t>(height) * width * 3);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const double t = 0.5 + ((x - width / 2.0) * gx + (y - height / 2.0) * gy) / diag;
      for (int c = 0; c < 3; ++c)
        px[(static_cast<size_t>(y) * width + x) * 3 + c] = c0[c] * (1 - t) + c1[c] * t;
    }

  struct Shape {
    bool ellipse;
    double cy, cx, ry, rx, soft;
    Rgb rgb;
    double freq, orient, amp;
  };
  const int n_shapes = 4 + static_cast<int>(rng.below(5));
  std::vector<Shape> shapes;
  for (int i = 0; i < n_shapes; ++i) {
    Shape s;
    s.ellipse = rng.uniform() < 0.5;
    s.cy = rng.uniform(0, height);
    s.cx = rng.uniform(0, width);
    s.ry = rng.uniform(0.08, 0.35) * height;
    s.rx = rng.uniform(0.08, 0.35) * width;
    s.soft = rng.uniform(0.5, 2.5);
    s.rgb = colour();
    s.freq = rng.uniform() < 0.5 ? rng.uniform(0.15, 0.9) : 0.0;
    s.orient = rng.uniform(0.0, std::numbers::pi);
    s.amp = rng.uniform(0.05, 0.2);
    shapes.push_back(s);
  }
  for (const auto& s : shapes) {
    const double co = std::cos(s.orient), so = std::sin(s.orient);
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) {
        const double dy = (y - s.cy) / s.ry, dx = (x - s.cx) / s.rx;
        // signed distance proxy in pixels
        const double d = s.ellipse ? (std::sqrt(dx * dx + dy * dy) - 1.0) * std::min(s.rx, s.ry)
                                   : (std::max(std::abs(dx), std::abs(dy)) - 1.0) * std::min(s.rx, s.ry);
        const double alpha = 1.0 / (1.0 + std::exp(d / s.soft));
        if (alpha < 1e-4) continue;
        const double tex = s.freq > 0 ? s.amp * std::sin(s.freq * (x * co + y * so)) : 0.0;
        for (int c = 0; c < 3; ++c) {
          double& v = px[(static_cast<size_t>(y) * width + x) * 3 + c];
          v = v * (1 - alpha) + (s.rgb[c] + tex) * alpha;
        }
      }
  }
  std::vector<float> out(px.size());
  for (size_t i = 0; i < px.size(); ++i) out[i] = static_cast<float>(std::clamp(px[i], 0.0, 1.0));
  return Image(height, width, std::move(out));
}

}  // namespace realsr
