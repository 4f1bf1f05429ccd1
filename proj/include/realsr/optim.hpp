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

#ifndef REALSR_OPTIM_HPP_
#define REALSR_OPTIM_HPP_

#include <cstdint>
#include <vector>

#include "realsr/checkpoint.hpp"
#include "realsr/nets.hpp"

namespace realsr {

// Adam over one parameter set. Parameters and both moments are rounded to
// float32 after every update, so a checkpoint round trip is exact and a
// resumed run continues bit-for-bit.
class Adam {
 public:
  Adam(NetworkParams& params, double beta1, double beta2, double eps = 1e-8);

  // Applies one update from the accumulated gradients, then clears them.
  void step(double lr);
  uint64_t steps() const { return t_; }

  // Moments as "m/<name>" and "v/<name>" tensors.
  std::vector<NamedTensor> state() const;
  void load_state(const std::vector<NamedTensor>& state, uint64_t steps);

 private:
  NetworkParams* params_;
  double beta1_, beta2_, eps_;
  uint64_t t_ = 0;
  std::vector<Tensor> m_, v_;
};

// Constant for the first half of `total`, then linear decay reaching 0 at
// `total`.
double linear_decay_lr(uint64_t step, uint64_t total, double base);

// base * 0.5^k, k = number of breakpoints {10, 20, 40, 60}% of total that
// `step` has reached.
double multistep_lr(uint64_t step, uint64_t total, double base);

}  // namespace realsr

#endif  // REALSR_OPTIM_HPP_
