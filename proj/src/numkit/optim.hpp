// Copyright 2026 The hprior Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>

#include "common/rng.hpp"
#include "numkit/graph.hpp"
#include "numkit/tensor.hpp"

namespace hprior::numkit {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::uint64_t step = 0;
  TensorMap m;
  TensorMap v;
};

/// One bias-corrected Adam update of `params` in place. Gradients are
/// validated (shape and finiteness) before anything is modified.
void adam_step(AdamState& state, TensorMap& params, const GradientMap& grads);

/// Inverted-dropout mask: entries are 0 with probability `rate` and
/// 1/(1-rate) otherwise. With `training == false` the mask is all ones and
/// no random numbers are consumed.
Tensor dropout_mask(const Shape& shape, double rate, Rng& rng, bool training = true);

inline constexpr double kLogSigmaMin = -10.0;
inline constexpr double kLogSigmaMax = 10.0;

/// mu + exp(clamp(log_sigma)) * eps with eps ~ N(0, I), drawn row-major.
Tensor gaussian_sample(const Tensor& mu, const Tensor& log_sigma, Rng& rng);

Tensor standard_normal(const Shape& shape, Rng& rng);

/// Uniform in +-sqrt(6/(fan_in+fan_out)) for a [fan_in x fan_out] weight.
Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng);

}  // namespace hprior::numkit
