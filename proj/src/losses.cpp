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

#include "realsr/losses.hpp"

#include <cmath>
#include <cstdio>

#include "realsr/common.hpp"
#include "realsr/ops.hpp"

namespace realsr {
namespace {

void require_finite_scores(const Var& v, const char* what) {
  if (!v.defined() || v.value().numel() == 0) throw ValidationError(std::string(what) + ": empty scores");
  if (!v.value().all_finite()) throw ValidationError(std::string(what) + ": non-finite score");
}

void require_same_shape(const Var& a, const Var& b, const char* what) {
  if (!(a.shape() == b.shape())) {
    throw ValidationError(std::string(what) + ": shape mismatch " + a.shape().str() + " vs " + b.shape().str());
  }
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }
double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// mean(softplus(sign * x)), i.e. -mean log sigmoid(-sign * x).
Var mean_softplus(const Var& x, double sign) {
  const size_t n = x.value().numel();
  double acc = 0.0;
  for (double v : x.value().values()) acc += softplus(sign * v);
  Tensor out(Shape{1, 1, 1, 1}, acc / static_cast<double>(n));
  return make_op(std::move(out), {x}, [x, sign, n](detail::Node& self) {
    Tensor* gx = detail::Node::sink(*x.node());
    const double g = self.grad[0] / static_cast<double>(n);
    const Tensor& xv = x.value();
    for (size_t i = 0; i < n; ++i) (*gx)[i] += g * sign * sigmoid(sign * xv[i]);
  });
}

// mean((x - t)^2) against a constant target t.
Var mean_sq_to(const Var& x, double t) {
  const size_t n = x.value().numel();
  double acc = 0.0;
  for (double v : x.value().values()) acc += (v - t) * (v - t);
  Tensor out(Shape{1, 1, 1, 1}, acc / static_cast<double>(n));
  return make_op(std::move(out), {x}, [x, t, n](detail::Node& self) {
    Tensor* gx = detail::Node::sink(*x.node());
    const double g = 2.0 * self.grad[0] / static_cast<double>(n);
    const Tensor& xv = x.value();
    for (size_t i = 0; i < n; ++i) (*gx)[i] += g * (xv[i] - t);
  });
}

// a - mean(b), broadcast over a.
Var sub_mean(const Var& a, const Var& b) {
  const double mb = b.value().sum() / static_cast<double>(b.value().numel());
  Tensor out = a.value();
  for (double& v : out.values()) v -= mb;
  return make_op(std::move(out), {a, b}, [a, b](detail::Node& self) {
    const double total = self.grad.sum();
    if (Tensor* ga = detail::Node::sink(*a.node())) *ga += self.grad;
    if (Tensor* gb = detail::Node::sink(*b.node())) {
      const double share = total / static_cast<double>(gb->numel());
      for (double& v : gb->values()) v -= share;
    }
  });
}

Var sigmoid_op(const Var& x) {
  Tensor out = x.value();
  for (double& v : out.values()) v = sigmoid(v);
  Tensor y = out;
  return make_op(std::move(out), {x}, [x, y](detail::Node& self) {
    Tensor* gx = detail::Node::sink(*x.node());
    for (size_t i = 0; i < y.numel(); ++i) (*gx)[i] += self.grad[i] * y[i] * (1.0 - y[i]);
  });
}

}  // namespace

void LossWeights::validate() const {
  for (double v : {lambda_cyc, lambda_gan, eta_l1, perceptual}) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("loss weights must be finite and >= 0");
  }
}

std::string to_string(DdlGan g) { return g == DdlGan::kLogistic ? "logistic" : "least_squares"; }

DdlGan parse_ddl_gan(const std::string& s) {
  if (s == "logistic") return DdlGan::kLogistic;
  if (s == "least_squares") return DdlGan::kLeastSquares;
  throw ValidationError("unknown ddl_gan '" + s + "' (expected logistic or least_squares)");
}

double LossReport::value(const std::string& name) const {
  for (const auto& c : components) {
    if (c.name == name) return c.value;
  }
  throw ValidationError("loss report has no component '" + name + "'");
}

void LossReport::require_finite() const {
  for (const auto& c : components) {
    if (!std::isfinite(c.value)) throw DivergenceError("loss component '" + c.name + "' is not finite");
  }
  if (!std::isfinite(total)) throw DivergenceError("total loss is not finite");
}

std::string LossReport::log_line(uint64_t step, double lr) const {
  char buf[64];
  std::string out = "step=" + std::to_string(step);
  std::snprintf(buf, sizeof buf, " lr=%.9g", lr);
  out += buf;
  for (const auto& c : components) {
    std::snprintf(buf, sizeof buf, "=%.9g", c.value);
    out += " " + c.name + buf;
  }
  std::snprintf(buf, sizeof buf, " total=%.9g", total);
  return out + buf;
}

Objective combine(const std::vector<LossTerm>& terms) {
  if (terms.empty()) throw ValidationError("objective needs at least one term");
  Objective out;
  std::vector<Var> parts;
  for (const LossTerm& t : terms) {
    if (t.value.value().numel() != 1) throw ValidationError("loss term '" + t.name + "' is not a scalar");
    out.report.components.push_back({t.name, t.weight, t.value.value()[0]});
    out.report.total += t.weight * t.value.value()[0];
    parts.push_back(t.weight == 1.0 ? t.value : ops::scale(t.value, t.weight));
  }
  out.total = parts[0];
  for (size_t i = 1; i < parts.size(); ++i) out.total = ops::add(out.total, parts[i]);
  return out;
}

Var gan_loss_d(const Var& real_scores, const Var& fake_scores, DdlGan kind) {
  require_finite_scores(real_scores, "gan_loss_d");
  require_finite_scores(fake_scores, "gan_loss_d");
  if (kind == DdlGan::kLeastSquares) return ops::add(mean_sq_to(real_scores, 1.0), mean_sq_to(fake_scores, 0.0));
  return ops::add(mean_softplus(real_scores, -1.0), mean_softplus(fake_scores, 1.0));
}

Var gan_loss_g(const Var& fake_scores, DdlGan kind) {
  require_finite_scores(fake_scores, "gan_loss_g");
  if (kind == DdlGan::kLeastSquares) return mean_sq_to(fake_scores, 1.0);
  return mean_softplus(fake_scores, -1.0);
}

Var cycle_loss(const Translator& f, const Translator& g, const Translator& b, const Var& x, const Var& y) {
  const Var z = b(y);
  const Var zc = f(g(z));
  const Var xc = g(f(x));
  require_same_shape(zc, z, "cycle_loss (output side)");
  require_same_shape(xc, x, "cycle_loss (input side)");
  return ops::add(l1_loss(zc, z), l1_loss(xc, x));
}

Objective ddl_objective(const Var& gan_g, const Var& gan_f, const Var& cyc, double lambda_cyc) {
  return combine({{"gan_g", 1.0, gan_g}, {"gan_f", 1.0, gan_f}, {"cyc", lambda_cyc, cyc}});
}

Var l1_loss(const Var& pred, const Var& target) {
  require_same_shape(pred, target, "l1_loss");
  const size_t n = pred.value().numel();
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) acc += std::abs(pred.value()[i] - target.value()[i]);
  Tensor out(Shape{1, 1, 1, 1}, acc / static_cast<double>(n));
  return make_op(std::move(out), {pred, target}, [pred, target, n](detail::Node& self) {
    const double g = self.grad[0] / static_cast<double>(n);
    Tensor* gp = detail::Node::sink(*pred.node());
    Tensor* gt = detail::Node::sink(*target.node());
    for (size_t i = 0; i < n; ++i) {
      const double d = pred.value()[i] - target.value()[i];
      const double s = d > 0 ? g : (d < 0 ? -g : 0.0);
      if (gp) (*gp)[i] += s;
      if (gt) (*gt)[i] -= s;
    }
  });
}

Var mse_loss(const Var& pred, const Var& target) {
  require_same_shape(pred, target, "mse_loss");
  const size_t n = pred.value().numel();
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double d = pred.value()[i] - target.value()[i];
    acc += d * d;
  }
  Tensor out(Shape{1, 1, 1, 1}, acc / static_cast<double>(n));
  return make_op(std::move(out), {pred, target}, [pred, target, n](detail::Node& self) {
    const double g = 2.0 * self.grad[0] / static_cast<double>(n);
    Tensor* gp = detail::Node::sink(*pred.node());
    Tensor* gt = detail::Node::sink(*target.node());
    for (size_t i = 0; i < n; ++i) {
      const double d = g * (pred.value()[i] - target.value()[i]);
      if (gp) (*gp)[i] += d;
      if (gt) (*gt)[i] -= d;
    }
  });
}

Var vgg_loss(const FeatureExtractor& extractor, const Var& pred, const Var& target) {
  require_same_shape(pred, target, "vgg_loss");
  Var target_features;
  {
    NoGradGuard no_grad;
    target_features = extractor.extract(target);
  }
  return mse_loss(extractor.extract(pred), target_features);
}

Var relativistic_score(const Var& c_real, const Var& c_fake) {
  require_finite_scores(c_real, "relativistic_score");
  require_finite_scores(c_fake, "relativistic_score");
  return sigmoid_op(sub_mean(c_real, c_fake));
}

Var ragan_loss_g(const Var& c_real, const Var& c_fake) {
  require_finite_scores(c_real, "ragan_loss_g");
  require_finite_scores(c_fake, "ragan_loss_g");
  // -log(1 - sigmoid(z)) = softplus(z); -log sigmoid(z) = softplus(-z).
  return ops::add(mean_softplus(sub_mean(c_real, c_fake), 1.0), mean_softplus(sub_mean(c_fake, c_real), -1.0));
}

Var ragan_loss_d(const Var& c_real, const Var& c_fake) {
  require_finite_scores(c_real, "ragan_loss_d");
  require_finite_scores(c_fake, "ragan_loss_d");
  return ops::add(mean_softplus(sub_mean(c_real, c_fake), -1.0), mean_softplus(sub_mean(c_fake, c_real), 1.0));
}

Objective sr_total_loss(const LossWeights& w, const Var& vgg, const Var& ragan, const Var& l1) {
  w.validate();
  return combine({{"vgg", w.perceptual, vgg}, {"ragan", w.lambda_gan, ragan}, {"l1", w.eta_l1, l1}});
}

}  // namespace realsr
