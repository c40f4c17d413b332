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

#include "numkit/optim.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"

namespace hprior::numkit {

void adam_step(AdamState& state, TensorMap& params, const GradientMap& grads) {
  for (const auto& [name, g] : grads) {
    auto it = params.find(name);
    require(it != params.end(), ErrorKind::Argument, "adam: gradient for unknown parameter '",
            name, "'");
    require(it->second.shape() == g.shape(), ErrorKind::Shape, "adam: gradient for '", name,
            "' has shape ", shape_str(g.shape()), ", parameter has ",
            shape_str(it->second.shape()));
    require(g.all_finite(), ErrorKind::Numeric, "adam: non-finite gradient for '", name,
            "', update aborted");
  }

  const AdamConfig& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);

  for (const auto& [name, g] : grads) {
    Tensor& p = params.at(name);
    auto [mit, m_new] = state.m.try_emplace(name, g.shape());
    auto [vit, v_new] = state.v.try_emplace(name, g.shape());
    Tensor& m = mit->second;
    Tensor& v = vit->second;
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = c.beta1 * m[k] + (1.0 - c.beta1) * g[k];
      v[k] = c.beta2 * v[k] + (1.0 - c.beta2) * g[k] * g[k];
      const double mhat = m[k] / bc1;
      const double vhat = v[k] / bc2;
      p[k] -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
    }
  }
}

Tensor dropout_mask(const Shape& shape, double rate, Rng& rng, bool training) {
  require(rate >= 0.0 && rate < 1.0, ErrorKind::Argument, "dropout rate ", rate,
          " outside [0, 1)");
  Tensor mask(shape, 1.0);
  if (!training || rate == 0.0) return mask;
  const double keep_scale = 1.0 / (1.0 - rate);
  for (auto& v : mask.values()) v = rng.uniform() < rate ? 0.0 : keep_scale;
  return mask;
}

Tensor standard_normal(const Shape& shape, Rng& rng) {
  Tensor t(shape);
  for (auto& v : t.values()) v = rng.normal();
  return t;
}

Tensor gaussian_sample(const Tensor& mu, const Tensor& log_sigma, Rng& rng) {
  require(mu.shape() == log_sigma.shape(), ErrorKind::Argument,
          "gaussian_sample: mu ", shape_str(mu.shape()), " vs log_sigma ",
          shape_str(log_sigma.shape()));
  Tensor out(mu.shape());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double ls = std::clamp(log_sigma[k], kLogSigmaMin, kLogSigmaMax);
    out[k] = mu[k] + std::exp(ls) * rng.normal();
  }
  return out;
}

Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor w({fan_in, fan_out});
  for (auto& v : w.values()) v = (2.0 * rng.uniform() - 1.0) * limit;
  return w;
}

}  // namespace hprior::numkit
