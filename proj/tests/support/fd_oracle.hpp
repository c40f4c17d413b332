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

// Central finite-difference oracle. Test-only: it never touches backward()
// and only re-runs forward passes with perturbed parameters.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "numkit/graph.hpp"

namespace hprior::testing {

struct GradCheck {
  double max_rel_error = 0.0;
  std::string worst;
};

inline double rel_error(double a, double b) {
  const double denom = std::max({std::abs(a), std::abs(b), 1e-8});
  return std::abs(a - b) / denom;
}

/// `loss_fn` evaluates the scalar loss for a given parameter map.
inline GradCheck compare_with_finite_differences(
    const std::function<double(const numkit::TensorMap&)>& loss_fn,
    const numkit::TensorMap& params, const numkit::GradientMap& analytic,
    double h = 1e-5) {
  GradCheck out;
  numkit::TensorMap probe = params;
  for (auto& [name, tensor] : probe) {
    const numkit::Tensor& g = analytic.at(name);
    for (std::size_t k = 0; k < tensor.size(); ++k) {
      const double orig = tensor[k];
      tensor[k] = orig + h;
      const double up = loss_fn(probe);
      tensor[k] = orig - h;
      const double down = loss_fn(probe);
      tensor[k] = orig;
      const double numeric = (up - down) / (2.0 * h);
      const double err = rel_error(g[k], numeric);
      if (err > out.max_rel_error) {
        out.max_rel_error = err;
        out.worst = name + "[" + std::to_string(k) + "] analytic=" + std::to_string(g[k]) +
                    " numeric=" + std::to_string(numeric);
      }
    }
  }
  return out;
}

}  // namespace hprior::testing
