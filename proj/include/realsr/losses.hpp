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

#ifndef REALSR_LOSSES_HPP_
#define REALSR_LOSSES_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "realsr/autograd.hpp"
#include "realsr/nets.hpp"

namespace realsr {

struct LossWeights {
  double lambda_cyc = 10.0;    // cycle term of the domain objective
  double lambda_gan = 0.005;   // adversarial term of the SR objective
  double eta_l1 = 0.01;        // pixel term of the SR objective
  double perceptual = 1.0;     // feature term of the SR objective

  void validate() const;
};

enum class DdlGan { kLogistic, kLeastSquares };
std::string to_string(DdlGan g);
DdlGan parse_ddl_gan(const std::string& s);

struct LossComponent {
  std::string name;
  double weight;
  double value;
};

// Scalar breakdown of one objective evaluation.
struct LossReport {
  std::vector<LossComponent> components;
  double total = 0.0;

  double value(const std::string& name) const;
  // Throws DivergenceError if any value is non-finite.
  void require_finite() const;
  // "step=N lr=X name=value ... total=value", fixed formatting.
  std::string log_line(uint64_t step, double lr) const;
};

// Differentiable weighted sum plus its report. Terms with weight 0 are
// still reported.
struct Objective {
  Var total;
  LossReport report;
};

struct LossTerm {
  std::string name;
  double weight;
  Var value;
};
Objective combine(const std::vector<LossTerm>& terms);

// Adversarial terms over raw score maps.
Var gan_loss_d(const Var& real_scores, const Var& fake_scores, DdlGan kind = DdlGan::kLogistic);
Var gan_loss_g(const Var& fake_scores, DdlGan kind = DdlGan::kLogistic);

using Translator = std::function<Var(const Var&)>;
// mean|F(G(B(y))) - B(y)| + mean|G(F(x)) - x|.
Var cycle_loss(const Translator& f, const Translator& g, const Translator& b, const Var& x, const Var& y);

// gan(G, D_X) + gan(F, D_Z) + lambda * cyc.
Objective ddl_objective(const Var& gan_g, const Var& gan_f, const Var& cyc, double lambda_cyc);

Var l1_loss(const Var& pred, const Var& target);
Var mse_loss(const Var& pred, const Var& target);
// Mean squared feature distance; the target branch is not differentiated.
Var vgg_loss(const FeatureExtractor& extractor, const Var& pred, const Var& target);

// sigmoid(c_real - mean(c_fake)), element-wise over c_real.
Var relativistic_score(const Var& c_real, const Var& c_fake);
// -mean log(1 - D(real, fake)) - mean log D(fake, real)
Var ragan_loss_g(const Var& c_real, const Var& c_fake);
// -mean log D(real, fake) - mean log(1 - D(fake, real))
Var ragan_loss_d(const Var& c_real, const Var& c_fake);

// vgg + lambda * ragan + eta * l1.
Objective sr_total_loss(const LossWeights& w, const Var& vgg, const Var& ragan, const Var& l1);

}  // namespace realsr

#endif  // REALSR_LOSSES_HPP_
