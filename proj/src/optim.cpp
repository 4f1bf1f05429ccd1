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

#include "realsr/optim.hpp"

#include <array>
#include <cmath>

#include "realsr/common.hpp"

namespace realsr {

Adam::Adam(NetworkParams& params, double beta1, double beta2, double eps)
    : params_(&params), beta1_(beta1), beta2_(beta2), eps_(eps) {
  if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1) || !(eps > 0)) {
    throw ValidationError("Adam: betas must lie in [0, 1) and eps must be positive");
  }
  for (const auto& [name, var] : params.tensors()) {
    m_.emplace_back(var.shape());
    v_.emplace_back(var.shape());
  }
}

void Adam::step(double lr) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  auto& tensors = params_->tensors();
  for (size_t k = 0; k < tensors.size(); ++k) {
    Var& p = tensors[k].second;
    if (!p.requires_grad()) continue;
    const Tensor g = p.grad();
    if (!g.all_finite()) throw DivergenceError("non-finite gradient for '" + tensors[k].first + "'");
    Tensor& w = p.mutable_value();
    Tensor& m = m_[k];
    Tensor& v = v_[k];
    for (size_t i = 0; i < w.numel(); ++i) {
      m[i] = static_cast<float>(beta1_ * m[i] + (1.0 - beta1_) * g[i]);
      v[i] = static_cast<float>(beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i]);
      const double update = lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps_);
      w[i] = static_cast<float>(w[i] - update);
    }
    p.zero_grad();
  }
}

std::vector<NamedTensor> Adam::state() const {
  std::vector<NamedTensor> out;
  const auto& tensors = params_->tensors();
  for (size_t k = 0; k < tensors.size(); ++k) {
    out.push_back({"m/" + tensors[k].first, m_[k]});
    out.push_back({"v/" + tensors[k].first, v_[k]});
  }
  return out;
}

void Adam::load_state(const std::vector<NamedTensor>& state, uint64_t steps) {
  const auto& tensors = params_->tensors();
  if (state.size() != 2 * tensors.size()) {
    throw ValidationError("optimiser state has " + std::to_string(state.size()) + " tensors, expected " +
                          std::to_string(2 * tensors.size()));
  }
  for (size_t k = 0; k < tensors.size(); ++k) {
    const NamedTensor& m = state[2 * k];
    const NamedTensor& v = state[2 * k + 1];
    if (m.name != "m/" + tensors[k].first || v.name != "v/" + tensors[k].first ||
        !(m.value.shape() == tensors[k].second.shape()) || !(v.value.shape() == tensors[k].second.shape())) {
      throw ValidationError("optimiser state does not match parameter '" + tensors[k].first + "'");
    }
    m_[k] = m.value;
    v_[k] = v.value;
  }
  t_ = steps;
}

double linear_decay_lr(uint64_t step, uint64_t total, double base) {
  if (total == 0) throw ValidationError("schedule total must be positive");
  const uint64_t half = total / 2;
  if (step < half) return base;
  if (step >= total) return 0.0;
  return base * static_cast<double>(total - step) / static_cast<double>(total - half);
}

double multistep_lr(uint64_t step, uint64_t total, double base) {
  if (total == 0) throw ValidationError("schedule total must be positive");
  static constexpr std::array<uint64_t, 4> kPercent = {10, 20, 40, 60};
  double lr = base;
  for (uint64_t p : kPercent) {
    if (step * 100 >= p * total) lr *= 0.5;
  }
  return lr;
}

}  // namespace realsr
