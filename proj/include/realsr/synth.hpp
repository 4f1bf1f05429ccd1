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

#ifndef REALSR_SYNTH_HPP_
#define REALSR_SYNTH_HPP_

#include <cstdint>

#include "realsr/image.hpp"

namespace realsr {

// Deterministic procedural "photo": smooth colour gradient, overlapping
// shapes with soft edges, and oriented sinusoidal texture patches. Used as
// source material for demos and tests where no image dataset is available.
Image synth_image(int height, int width, uint64_t seed);

}  // namespace realsr

#endif  // REALSR_SYNTH_HPP_
