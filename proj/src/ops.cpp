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

#include "realsr/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <string>

#include "realsr/common.hpp"

namespace realsr::ops {
namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapR = Eigen::Map<RowMajor>;
using ConstMapR = Eigen::Map<const RowMajor>;
using Buffer = std::vector<double, Eigen::aligned_allocator<double>>;

Tensor* sink(detail::Node& self, size_t i) {
  auto& p = self.parents[i];
  return p ? detail::Node::sink(*p) : nullptr;
}

const Tensor& parent_value(detail::Node& self, size_t i) { return self.parents[i]->value; }

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

struct ConvGeometry {
  int cin, k, stride, pad, h, w, ho, wo;
  size_t rows() const { return static_cast<size_t>(cin) * k * k; }
  size_t cols() const { return static_cast<size_t>(ho) * wo; }
  bool pointwise() const { return k == 1 && stride == 1 && pad == 0; }
};

void im2col(const double* x, const ConvGeometry& g, double* col) {
  const size_t P = g.cols();
  for (int c = 0; c < g.cin; ++c)
    for (int ki = 0; ki < g.k; ++ki)
      for (int kj = 0; kj < g.k; ++kj) {
        double* row = col + ((static_cast<size_t>(c) * g.k + ki) * g.k + kj) * P;
        const double* plane = x + static_cast<size_t>(c) * g.h * g.w;
        for (int oy = 0; oy < g.ho; ++oy) {
          const int iy = oy * g.stride - g.pad + ki;
          double* dst = row + static_cast<size_t>(oy) * g.wo;
          if (iy < 0 || iy >= g.h) {
            std::fill(dst, dst + g.wo, 0.0);
            continue;
          }
          const double* src = plane + static_cast<size_t>(iy) * g.w;
          if (g.stride == 1) {
            const int lo = std::min(std::max(0, g.pad - kj), g.wo);
            const int hi = std::max(std::min(g.wo, g.w + g.pad - kj), lo);
            std::fill(dst, dst + lo, 0.0);
            for (int ox = lo; ox < hi; ++ox) dst[ox] = src[ox - g.pad + kj];
            std::fill(dst + hi, dst + g.wo, 0.0);
          } else {
            for (int ox = 0; ox < g.wo; ++ox) {
              const int ix = ox * g.stride - g.pad + kj;
              dst[ox] = (ix >= 0 && ix < g.w) ? src[ix] : 0.0;
            }
          }
        }
      }
}

void col2im_add(const double* col, const ConvGeometry& g, double* x) {
  const size_t P = g.cols();
  for (int c = 0; c < g.cin; ++c)
    for (int ki = 0; ki < g.k; ++ki)
      for (int kj = 0; kj < g.k; ++kj) {
        const double* row = col + ((static_cast<size_t>(c) * g.k + ki) * g.k + kj) * P;
        double* plane = x + static_cast<size_t>(c) * g.h * g.w;
        for (int oy = 0; oy < g.ho; ++oy) {
          const int iy = oy * g.stride - g.pad + ki;
          if (iy < 0 || iy >= g.h) continue;
          const double* src = row + static_cast<size_t>(oy) * g.wo;
          double* dst = plane + static_cast<size_t>(iy) * g.w;
          for (int ox = 0; ox < g.wo; ++ox) {
            const int ix = ox * g.stride - g.pad + kj;
            if (ix >= 0 && ix < g.w) dst[ix] += src[ox];
          }
        }
      }
}

// Source taps for x2 bilinear upsampling along one axis.
struct Taps {
  std::vector<int> i0, i1;
  std::vector<double> w1;
};

Taps bilinear_taps(int in, int out) {
  Taps t;
  t.i0.resize(out);
  t.i1.resize(out);
  t.w1.resize(out);
  for (int o = 0; o < out; ++o) {
    const double src = (o + 0.5) / 2.0 - 0.5;
    const int lo = static_cast<int>(std::floor(src));
    t.w1[o] = src - lo;
    t.i0[o] = std::clamp(lo, 0, in - 1);
    t.i1[o] = std::clamp(lo + 1, 0, in - 1);
  }
  return t;
}

}  // namespace

Var conv2d(const Var& x, const Var& weight, const Var& bias, int stride, int pad) {
  const Shape xs = x.shape(), ws = weight.shape();
  require(ws.c == xs.c && ws.h == ws.w,
          "conv2d: weight " + ws.str() + " incompatible with input " + xs.str());
  require(!bias.defined() || bias.shape() == Shape{1, ws.n, 1, 1}, "conv2d: bad bias shape");
  ConvGeometry g{xs.c, ws.h, stride, pad, xs.h, xs.w, 0, 0};
  g.ho = (xs.h + 2 * pad - g.k) / stride + 1;
  g.wo = (xs.w + 2 * pad - g.k) / stride + 1;
  require(xs.h + 2 * pad >= g.k && xs.w + 2 * pad >= g.k && g.ho >= 1 && g.wo >= 1,
          "conv2d: input " + xs.str() + " too small for kernel " + std::to_string(g.k));
  const int cout = ws.n;
  const size_t K = g.rows(), P = g.cols();
  Tensor out({xs.n, cout, g.ho, g.wo});
  Buffer col(g.pointwise() ? 0 : K * P);
  const ConstMapR W(weight.value().data(), cout, static_cast<Eigen::Index>(K));
  for (int n = 0; n < xs.n; ++n) {
    const double* cp = x.value().plane(n, 0);
    if (!g.pointwise()) {
      im2col(cp, g, col.data());
      cp = col.data();
    }
    MapR O(out.plane(n, 0), cout, static_cast<Eigen::Index>(P));
    O.noalias() = W * ConstMapR(cp, static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(P));
    if (bias.defined()) {
      for (int co = 0; co < cout; ++co) O.row(co).array() += bias.value()[co];
    }
  }
  return make_op(std::move(out), {x, weight, bias}, [g, cout](detail::Node& self) {
    const Tensor& xv = parent_value(self, 0);
    const Tensor& wv = parent_value(self, 1);
    Tensor* gx = sink(self, 0);
    Tensor* gw = sink(self, 1);
    Tensor* gb = sink(self, 2);
    const size_t K = g.rows(), P = g.cols();
    const auto k = static_cast<Eigen::Index>(K), p = static_cast<Eigen::Index>(P);
    Buffer col(g.pointwise() ? 0 : K * P);
    Buffer dcol(gx && !g.pointwise() ? K * P : 0);
    const ConstMapR W(wv.data(), cout, k);
    for (int n = 0; n < xv.shape().n; ++n) {
      const ConstMapR G(self.grad.plane(n, 0), cout, p);
      if (gw) {
        const double* cp = xv.plane(n, 0);
        if (!g.pointwise()) {
          im2col(cp, g, col.data());
          cp = col.data();
        }
        MapR(gw->data(), cout, k).noalias() += G * ConstMapR(cp, k, p).transpose();
      }
      if (gb) {
        // Plain loops: Eigen's vectorised sums depend on pointer alignment,
        // which would make runs differ in the last bits.
        for (int co = 0; co < cout; ++co) {
          const double* row = self.grad.plane(n, co);
          double acc = 0.0;
          for (size_t i = 0; i < P; ++i) acc += row[i];
          (*gb)[co] += acc;
        }
      }
      if (gx) {
        if (g.pointwise()) {
          MapR(gx->plane(n, 0), k, p).noalias() += W.transpose() * G;
        } else {
          MapR(dcol.data(), k, p).noalias() = W.transpose() * G;
          col2im_add(dcol.data(), g, gx->plane(n, 0));
        }
      }
    }
  });
}

Var dense(const Var& x, const Var& weight, const Var& bias) {
  const Shape xs = x.shape(), ws = weight.shape();
  const auto features = static_cast<Eigen::Index>(static_cast<size_t>(xs.c) * xs.h * xs.w);
  require(ws.c == features && ws.h == 1 && ws.w == 1,
          "dense: weight " + ws.str() + " incompatible with input " + xs.str());
  require(!bias.defined() || bias.shape() == Shape{1, ws.n, 1, 1}, "dense: bad bias shape");
  Tensor out({xs.n, ws.n, 1, 1});
  const ConstMapR X(x.value().data(), xs.n, features);
  const ConstMapR W(weight.value().data(), ws.n, features);
  MapR O(out.data(), xs.n, ws.n);
  O.noalias() = X * W.transpose();
  if (bias.defined()) {
    for (int n = 0; n < xs.n; ++n)
      for (int o = 0; o < ws.n; ++o) O(n, o) += bias.value()[o];
  }
  return make_op(std::move(out), {x, weight, bias}, [features, xs, ws](detail::Node& self) {
    const ConstMapR G(self.grad.data(), xs.n, ws.n);
    if (Tensor* gw = sink(self, 1)) {
      MapR(gw->data(), ws.n, features).noalias() +=
          G.transpose() * ConstMapR(parent_value(self, 0).data(), xs.n, features);
    }
    if (Tensor* gx = sink(self, 0)) {
      MapR(gx->data(), xs.n, features).noalias() +=
          G * ConstMapR(parent_value(self, 1).data(), ws.n, features);
    }
    if (Tensor* gb = sink(self, 2)) {
      for (int o = 0; o < ws.n; ++o) {
        double acc = 0.0;
        for (int n = 0; n < xs.n; ++n) acc += G(n, o);
        (*gb)[o] += acc;
      }
    }
  });
}

namespace {

// Shared implementation for index-remapping ops: out[i] = in[src[i]].
Var gather_planes(const Var& x, Shape out_shape, std::vector<int> src_index) {
  const Shape xs = x.shape();
  Tensor out(out_shape);
  const size_t in_plane = xs.plane(), out_plane = out_shape.plane();
  for (int n = 0; n < xs.n; ++n)
    for (int c = 0; c < xs.c; ++c) {
      const double* s = x.value().plane(n, c);
      double* d = out.plane(n, c);
      for (size_t i = 0; i < out_plane; ++i) d[i] = s[src_index[i]];
    }
  return make_op(std::move(out), {x},
                 [src_index = std::move(src_index), in_plane, out_plane](detail::Node& self) {
                   Tensor* gx = sink(self, 0);
                   const Shape& s = self.grad.shape();
                   for (int n = 0; n < s.n; ++n)
                     for (int c = 0; c < s.c; ++c) {
                       const double* g = self.grad.plane(n, c);
                       double* d = gx->plane(n, c);
                       for (size_t i = 0; i < out_plane; ++i) d[src_index[i]] += g[i];
                     }
                   (void)in_plane;
                 });
}

}  // namespace

Var reflect_pad(const Var& x, int pad) {
  const Shape xs = x.shape();
  require(pad >= 0 && pad < xs.h && pad < xs.w,
          "reflect_pad: pad " + std::to_string(pad) + " too large for " + xs.str());
  const int oh = xs.h + 2 * pad, ow = xs.w + 2 * pad;
  auto reflect = [](int i, int n) { return i < 0 ? -i : (i >= n ? 2 * n - 2 - i : i); };
  std::vector<int> idx(static_cast<size_t>(oh) * ow);
  for (int y = 0; y < oh; ++y)
    for (int xx = 0; xx < ow; ++xx)
      idx[static_cast<size_t>(y) * ow + xx] =
          reflect(y - pad, xs.h) * xs.w + reflect(xx - pad, xs.w);
  return gather_planes(x, {xs.n, xs.c, oh, ow}, std::move(idx));
}

Var replicate_pad(const Var& x, int bottom, int right) {
  const Shape xs = x.shape();
  require(bottom >= 0 && right >= 0, "replicate_pad: negative padding");
  if (bottom == 0 && right == 0) return x;
  const int oh = xs.h + bottom, ow = xs.w + right;
  std::vector<int> idx(static_cast<size_t>(oh) * ow);
  for (int y = 0; y < oh; ++y)
    for (int xx = 0; xx < ow; ++xx)
      idx[static_cast<size_t>(y) * ow + xx] = std::min(y, xs.h - 1) * xs.w + std::min(xx, xs.w - 1);
  return gather_planes(x, {xs.n, xs.c, oh, ow}, std::move(idx));
}

Var crop(const Var& x, int y0, int x0, int h, int w) {
  const Shape xs = x.shape();
  require(y0 >= 0 && x0 >= 0 && h >= 1 && w >= 1 && y0 + h <= xs.h && x0 + w <= xs.w,
          "crop: rectangle outside " + xs.str());
  if (y0 == 0 && x0 == 0 && h == xs.h && w == xs.w) return x;
  std::vector<int> idx(static_cast<size_t>(h) * w);
  for (int y = 0; y < h; ++y)
    for (int xx = 0; xx < w; ++xx) idx[static_cast<size_t>(y) * w + xx] = (y + y0) * xs.w + xx + x0;
  return gather_planes(x, {xs.n, xs.c, h, w}, std::move(idx));
}

Var instance_norm(const Var& x, double eps) {
  const Shape xs = x.shape();
  const size_t P = xs.plane();
  Tensor out(xs);
  std::vector<double> inv_std(static_cast<size_t>(xs.n) * xs.c);
  for (int n = 0; n < xs.n; ++n)
    for (int c = 0; c < xs.c; ++c) {
      const double* s = x.value().plane(n, c);
      double mean = 0.0;
      for (size_t i = 0; i < P; ++i) mean += s[i];
      mean /= static_cast<double>(P);
      double var = 0.0;
      for (size_t i = 0; i < P; ++i) var += (s[i] - mean) * (s[i] - mean);
      var /= static_cast<double>(P);
      const double is = 1.0 / std::sqrt(var + eps);
      inv_std[static_cast<size_t>(n) * xs.c + c] = is;
      double* d = out.plane(n, c);
      for (size_t i = 0; i < P; ++i) d[i] = (s[i] - mean) * is;
    }
  return make_op(std::move(out), {x}, [inv_std = std::move(inv_std), P](detail::Node& self) {
    Tensor* gx = sink(self, 0);
    const Shape& s = self.value.shape();
    for (int n = 0; n < s.n; ++n)
      for (int c = 0; c < s.c; ++c) {
        const double* y = self.value.plane(n, c);
        const double* g = self.grad.plane(n, c);
        double mg = 0.0, mgy = 0.0;
        for (size_t i = 0; i < P; ++i) {
          mg += g[i];
          mgy += g[i] * y[i];
        }
        mg /= static_cast<double>(P);
        mgy /= static_cast<double>(P);
        const double is = inv_std[static_cast<size_t>(n) * s.c + c];
        double* d = gx->plane(n, c);
        for (size_t i = 0; i < P; ++i) d[i] += is * (g[i] - mg - y[i] * mgy);
      }
  });
}

Var leaky_relu(const Var& x, double slope) {
  Tensor out(x.shape());
  const Tensor& v = x.value();
  for (size_t i = 0; i < v.numel(); ++i) out[i] = v[i] > 0.0 ? v[i] : slope * v[i];
  return make_op(std::move(out), {x}, [slope](detail::Node& self) {
    Tensor* gx = sink(self, 0);
    const Tensor& v = parent_value(self, 0);
    for (size_t i = 0; i < v.numel(); ++i) (*gx)[i] += v[i] > 0.0 ? self.grad[i] : slope * self.grad[i];
  });
}

Var relu(const Var& x) { return leaky_relu(x, 0.0); }

Var add(const Var& a, const Var& b) {
  require(a.shape() == b.shape(), "add: shape " + a.shape().str() + " vs " + b.shape().str());
  Tensor out = a.value();
  out += b.value();
  return make_op(std::move(out), {a, b}, [](detail::Node& self) {
    if (Tensor* ga = sink(self, 0)) *ga += self.grad;
    if (Tensor* gb = sink(self, 1)) *gb += self.grad;
  });
}

Var sub(const Var& a, const Var& b) {
  require(a.shape() == b.shape(), "sub: shape " + a.shape().str() + " vs " + b.shape().str());
  Tensor out = a.value();
  for (size_t i = 0; i < out.numel(); ++i) out[i] -= b.value()[i];
  return make_op(std::move(out), {a, b}, [](detail::Node& self) {
    if (Tensor* ga = sink(self, 0)) *ga += self.grad;
    if (Tensor* gb = sink(self, 1)) {
      for (size_t i = 0; i < gb->numel(); ++i) (*gb)[i] -= self.grad[i];
    }
  });
}

Var scale(const Var& a, double s) {
  Tensor out = a.value();
  for (double& v : out.values()) v *= s;
  return make_op(std::move(out), {a}, [s](detail::Node& self) {
    Tensor* ga = sink(self, 0);
    for (size_t i = 0; i < ga->numel(); ++i) (*ga)[i] += s * self.grad[i];
  });
}

Var channel_normalize(const Var& x, std::span<const double> shift, std::span<const double> div) {
  const Shape xs = x.shape();
  require(shift.size() == static_cast<size_t>(xs.c) && div.size() == shift.size(),
          "channel_normalize: expected " + std::to_string(xs.c) + " channel terms");
  std::vector<double> inv(div.size());
  for (size_t c = 0; c < div.size(); ++c) inv[c] = 1.0 / div[c];
  Tensor out(xs);
  for (int n = 0; n < xs.n; ++n)
    for (int c = 0; c < xs.c; ++c) {
      const double* s = x.value().plane(n, c);
      double* d = out.plane(n, c);
      for (size_t i = 0; i < xs.plane(); ++i) d[i] = (s[i] - shift[c]) * inv[c];
    }
  return make_op(std::move(out), {x}, [inv = std::move(inv)](detail::Node& self) {
    Tensor* gx = sink(self, 0);
    const Shape& s = self.grad.shape();
    for (int n = 0; n < s.n; ++n)
      for (int c = 0; c < s.c; ++c) {
        const double* g = self.grad.plane(n, c);
        double* d = gx->plane(n, c);
        for (size_t i = 0; i < s.plane(); ++i) d[i] += g[i] * inv[c];
      }
  });
}

Var concat_channels(const std::vector<Var>& xs) {
  require(!xs.empty(), "concat_channels: no inputs");
  Shape s = xs[0].shape();
  int total = 0;
  std::vector<int> offsets;
  for (const auto& v : xs) {
    const Shape& vs = v.shape();
    require(vs.n == s.n && vs.h == s.h && vs.w == s.w,
            "concat_channels: shape " + vs.str() + " vs " + s.str());
    offsets.push_back(total);
    total += vs.c;
  }
  s.c = total;
  Tensor out(s);
  for (size_t k = 0; k < xs.size(); ++k) {
    const Tensor& v = xs[k].value();
    for (int n = 0; n < s.n; ++n)
      std::copy(v.plane(n, 0), v.plane(n, 0) + v.shape().c * s.plane(), out.plane(n, offsets[k]));
  }
  return make_op(std::move(out), xs, [offsets](detail::Node& self) {
    const Shape& s = self.grad.shape();
    for (size_t k = 0; k < offsets.size(); ++k) {
      Tensor* g = sink(self, k);
      if (!g) continue;
      const int ck = g->shape().c;
      for (int n = 0; n < s.n; ++n) {
        const double* src = self.grad.plane(n, offsets[k]);
        double* dst = g->plane(n, 0);
        for (size_t i = 0; i < static_cast<size_t>(ck) * s.plane(); ++i) dst[i] += src[i];
      }
    }
  });
}

Var upsample_bilinear2x(const Var& x) {
  const Shape xs = x.shape();
  const int oh = xs.h * 2, ow = xs.w * 2;
  const Taps ty = bilinear_taps(xs.h, oh), tx = bilinear_taps(xs.w, ow);
  Tensor out({xs.n, xs.c, oh, ow});
  for (int n = 0; n < xs.n; ++n)
    for (int c = 0; c < xs.c; ++c) {
      const double* s = x.value().plane(n, c);
      double* d = out.plane(n, c);
      for (int y = 0; y < oh; ++y) {
        const double* r0 = s + static_cast<size_t>(ty.i0[y]) * xs.w;
        const double* r1 = s + static_cast<size_t>(ty.i1[y]) * xs.w;
        const double wy = ty.w1[y];
        for (int xx = 0; xx < ow; ++xx) {
          const double wx = tx.w1[xx];
          const double top = r0[tx.i0[xx]] * (1 - wx) + r0[tx.i1[xx]] * wx;
          const double bot = r1[tx.i0[xx]] * (1 - wx) + r1[tx.i1[xx]] * wx;
          d[static_cast<size_t>(y) * ow + xx] = top * (1 - wy) + bot * wy;
        }
      }
    }
  return make_op(std::move(out), {x}, [ty, tx, xs, oh, ow](detail::Node& self) {
    Tensor* gx = sink(self, 0);
    for (int n = 0; n < xs.n; ++n)
      for (int c = 0; c < xs.c; ++c) {
        const double* g = self.grad.plane(n, c);
        double* d = gx->plane(n, c);
        for (int y = 0; y < oh; ++y) {
          double* r0 = d + static_cast<size_t>(ty.i0[y]) * xs.w;
          double* r1 = d + static_cast<size_t>(ty.i1[y]) * xs.w;
          const double wy = ty.w1[y];
          for (int xx = 0; xx < ow; ++xx) {
            const double gv = g[static_cast<size_t>(y) * ow + xx];
            const double wx = tx.w1[xx];
            r0[tx.i0[xx]] += gv * (1 - wy) * (1 - wx);
            r0[tx.i1[xx]] += gv * (1 - wy) * wx;
            r1[tx.i0[xx]] += gv * wy * (1 - wx);
            r1[tx.i1[xx]] += gv * wy * wx;
          }
        }
      }
  });
}

Var upsample_nearest(const Var& x, int factor) {
  require(factor >= 1, "upsample_nearest: factor must be >= 1");
  if (factor == 1) return x;
  const Shape xs = x.shape();
  const int oh = xs.h * factor, ow = xs.w * factor;
  std::vector<int> idx(static_cast<size_t>(oh) * ow);
  for (int y = 0; y < oh; ++y)
    for (int xx = 0; xx < ow; ++xx) idx[static_cast<size_t>(y) * ow + xx] = (y / factor) * xs.w + xx / factor;
  return gather_planes(x, {xs.n, xs.c, oh, ow}, std::move(idx));
}

Var block_mean(const Var& x, int factor) {
  const Shape xs = x.shape();
  require(factor >= 1 && xs.h % factor == 0 && xs.w % factor == 0,
          "block_mean: " + xs.str() + " not divisible by " + std::to_string(factor));
  const int oh = xs.h / factor, ow = xs.w / factor;
  const double inv = 1.0 / (factor * factor);
  Tensor out({xs.n, xs.c, oh, ow});
  for (int n = 0; n < xs.n; ++n)
    for (int c = 0; c < xs.c; ++c) {
      const double* s = x.value().plane(n, c);
      double* d = out.plane(n, c);
      for (int y = 0; y < xs.h; ++y)
        for (int xx = 0; xx < xs.w; ++xx)
          d[static_cast<size_t>(y / factor) * ow + xx / factor] += s[static_cast<size_t>(y) * xs.w + xx];
      for (size_t i = 0; i < static_cast<size_t>(oh) * ow; ++i) d[i] *= inv;
    }
  return make_op(std::move(out), {x}, [xs, factor, ow, inv](detail::Node& self) {
    Tensor* gx = sink(self, 0);
    for (int n = 0; n < xs.n; ++n)
      for (int c = 0; c < xs.c; ++c) {
        const double* g = self.grad.plane(n, c);
        double* d = gx->plane(n, c);
        for (int y = 0; y < xs.h; ++y)
          for (int xx = 0; xx < xs.w; ++xx)
            d[static_cast<size_t>(y) * xs.w + xx] += inv * g[static_cast<size_t>(y / factor) * ow + xx / factor];
      }
  });
}

Var max_pool2x(const Var& x) {
  const Shape xs = x.shape();
  require(xs.h >= 2 && xs.w >= 2, "max_pool2x: input " + xs.str() + " too small");
  const int oh = xs.h / 2, ow = xs.w / 2;
  Tensor out({xs.n, xs.c, oh, ow});
  std::vector<int> arg(out.numel());
  size_t k = 0;
  for (int n = 0; n < xs.n; ++n)
    for (int c = 0; c < xs.c; ++c) {
      const double* s = x.value().plane(n, c);
      double* d = out.plane(n, c);
      for (int y = 0; y < oh; ++y)
        for (int xx = 0; xx < ow; ++xx, ++k) {
          int best = (2 * y) * xs.w + 2 * xx;
          for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx) {
              const int i = (2 * y + dy) * xs.w + 2 * xx + dx;
              if (s[i] > s[best]) best = i;
            }
          arg[k] = best;
          d[static_cast<size_t>(y) * ow + xx] = s[best];
        }
    }
  return make_op(std::move(out), {x}, [arg = std::move(arg)](detail::Node& self) {
    Tensor* gx = sink(self, 0);
    const Shape& s = self.grad.shape();
    size_t k = 0;
    for (int n = 0; n < s.n; ++n)
      for (int c = 0; c < s.c; ++c) {
        const double* g = self.grad.plane(n, c);
        double* d = gx->plane(n, c);
        for (size_t i = 0; i < s.plane(); ++i, ++k) d[arg[k]] += g[i];
      }
  });
}

Var mean(const Var& x) {
  const double inv = 1.0 / static_cast<double>(x.value().numel());
  Tensor out({1, 1, 1, 1}, x.value().sum() * inv);
  return make_op(std::move(out), {x}, [inv](detail::Node& self) {
    Tensor* gx = sink(self, 0);
    const double g = self.grad[0] * inv;
    for (double& v : gx->values()) v += g;
  });
}

Var weighted_sum(const Var& x, const Tensor& weights) {
  require(weights.shape() == x.shape(), "weighted_sum: weight shape mismatch");
  double acc = 0.0;
  for (size_t i = 0; i < weights.numel(); ++i) acc += weights[i] * x.value()[i];
  return make_op(Tensor({1, 1, 1, 1}, acc), {x}, [weights](detail::Node& self) {
    Tensor* gx = sink(self, 0);
    for (size_t i = 0; i < gx->numel(); ++i) (*gx)[i] += self.grad[0] * weights[i];
  });
}

Var color_adjust(const Var& sr, const Var& lr, int factor) {
  const Shape s = sr.shape(), l = lr.shape();
  require(s.n == l.n && s.c == l.c && s.h == l.h * factor && s.w == l.w * factor,
          "color_adjust: sr " + s.str() + " must be " + std::to_string(factor) + "x lr " + l.str());
  const Var local_mean = upsample_nearest(block_mean(sr, factor), factor);
  return add(sub(sr, local_mean), upsample_nearest(lr, factor));
}

}  // namespace realsr::ops
