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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "common/rng.hpp"
#include "corpus/matrix.hpp"
#include "numkit/graph.hpp"
#include "numkit/tensor.hpp"
#include "textprior/prior.hpp"

namespace hprior::hpvae {

using numkit::NodeId;
using numkit::Tensor;
using numkit::TensorMap;

enum class Mode { MultVae, HPrior, Rp, Tr, Dae };

const char* mode_name(Mode m);
Mode parse_mode(std::string_view name);
inline bool is_variational(Mode m) { return m != Mode::Dae; }
/// Modes whose prior comes from a text-derived prior table.
inline bool needs_prior_table(Mode m) { return m == Mode::HPrior || m == Mode::Tr; }

struct Architecture {
  std::size_t n_items = 0;
  std::size_t latent = 300;
  std::size_t hidden = 600;
};

struct VaeModel {
  Architecture arch;
  Mode mode = Mode::MultVae;
  TensorMap params;
};

/// Glorot-uniform weights and zero biases.
VaeModel init_model(const Architecture& arch, Mode mode, std::uint64_t seed);

/// Per-batch host inputs. Prior columns hold t, log s and 1/(2 s^2) for
/// the KL term; `t_reg` is the text mean used by the distance regularizer.
struct BatchFeed {
  std::size_t batch = 0;
  Tensor x;        // targets
  Tensor x_in;     // normalized and corrupted encoder input
  Tensor eps;      // reparameterization noise (variational modes)
  Tensor t, log_s, inv_2s2;
  Tensor t_reg;    // distance-regularized mode only
};

struct FeedOptions {
  bool training = true;  // dropout on and z sampled
  double dropout = 0.5;
  bool normalize_input = true;
};

/// Builds a feed for `users` (matrix row indices). Random numbers are drawn
/// in a fixed order: dropout mask, then noise.
BatchFeed make_feed(const VaeModel& model, const corpus::InteractionMatrix& m, std::span<const std::uint32_t> users,
                    std::span<const textprior::UserPrior> priors, const FeedOptions& opts, Rng& rng);

/// Same as make_feed for explicit bag-of-items rows.
BatchFeed make_feed_rows(const VaeModel& model, std::span<const corpus::ItemList> rows,
                         std::span<const textprior::UserPrior* const> priors, const FeedOptions& opts, Rng& rng);

void l2_normalize_rows(Tensor& x);

struct LossGraph {
  numkit::ComputeGraph graph;
  NodeId loss, recon, kl, dist, mu, log_sigma, z, log_probs;
};

/// Graph for the per-mode objective averaged over the batch.
LossGraph build_loss_graph(const Architecture& arch, Mode mode, std::size_t batch, double beta, double gamma);

struct LossTerms {
  double loss = 0.0;
  double recon = 0.0;  // negative log-likelihood per user
  double kl = 0.0;     // per user, reported even when beta == 0
  double dist = 0.0;   // per user
  double beta = 0.0;
};

struct StepOutput {
  LossTerms terms;
  numkit::GradientMap grads;
};

/// Forward (and optionally backward) pass of the loss on one feed.
StepOutput evaluate_loss(const VaeModel& model, const BatchFeed& feed, double beta, double gamma, bool backward);

/// Sum_k [log s - log sigma + (sigma^2 + (mu - t)^2) / (2 s^2) - 1/2],
/// evaluated by the same graph builder the trainer uses.
double kl_diag_gaussians(std::span<const double> mu, std::span<const double> log_sigma,
                         const textprior::UserPrior& prior);

/// Sum_i x_i log pi_i.
double multinomial_ll(std::span<const double> x, std::span<const double> log_pi);

struct Posterior {
  Tensor mu;
  Tensor log_sigma;  // empty for the denoising model
};

/// Encoder output for explicit rows with dropout off.
Posterior encode(const VaeModel& model, std::span<const corpus::ItemList> rows, bool normalize_input = true);
/// Row-wise log-softmax decoder output for latent codes [n x K].
Tensor decode_log_probs(const VaeModel& model, const Tensor& z);

}  // namespace hprior::hpvae
