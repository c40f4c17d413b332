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
#include <functional>
#include <string>
#include <vector>

#include "corpus/matrix.hpp"
#include "evalkit/report.hpp"
#include "hpvae/model.hpp"
#include "numkit/checkpoint.hpp"
#include "numkit/optim.hpp"

namespace hprior::hpvae {

struct BetaSchedule {
  double beta_max = 1.0;
  std::size_t anneal_steps = 0;
};

/// Linear from 0 to beta_max over anneal_steps, then constant.
double anneal_beta(std::size_t step, const BetaSchedule& s);

struct TrainConfig {
  Mode mode = Mode::MultVae;
  std::size_t latent = 300;
  std::size_t hidden = 600;
  std::size_t batch_size = 500;
  std::size_t epochs = 50;
  double beta_max = 1.0;
  double anneal_fraction = 0.8;  // of total steps, used when anneal_steps == 0
  std::size_t anneal_steps = 0;
  double gamma = 0.01;
  double dropout = 0.5;
  bool normalize_input = true;
  std::uint64_t seed = 0;
  numkit::AdamConfig adam;
  std::size_t max_steps = 0;  // 0 = no limit
  bool sample_at_eval = false;
};

struct TrainData {
  const corpus::InteractionMatrix* matrix = nullptr;
  std::vector<std::uint32_t> train_users;
  const corpus::EvalPartition* validation = nullptr;
  /// Indexed by matrix user; required for hprior and tr, generated for rp.
  std::vector<textprior::UserPrior> priors;
};

struct EpochLog {
  std::size_t epoch = 0;
  double loss = 0.0;
  double recon = 0.0;
  double kl = 0.0;
  double dist = 0.0;
  double beta = 0.0;
  bool has_val = false;
  double val_ndcg100 = 0.0;
};

std::string format_epoch(const EpochLog& e);

struct TrainResult {
  VaeModel best;
  numkit::AdamState best_adam;
  std::string best_rng_state;
  std::size_t best_epoch = 0;
  double best_val = -1.0;
  std::vector<EpochLog> log;
  std::vector<double> step_losses;
  bool faulted = false;
  std::string fault;
};

/// Random priors for every user of a random-prior run.
std::vector<textprior::UserPrior> random_priors(std::size_t n_users, std::size_t dim, std::uint64_t seed);

TrainResult train(const TrainData& data, const TrainConfig& config,
                  const std::function<void(const EpochLog&)>& on_epoch = {});

/// Ranks fold-in users by decoded log-probabilities of z = mu (or a sample
/// when `sample` is set).
class VaeRanker : public evalkit::Ranker {
 public:
  VaeRanker(const VaeModel& model, bool normalize_input = true, bool sample = false, std::uint64_t seed = 0)
      : model_(model), normalize_(normalize_input), sample_(sample), rng_(derive_seed(seed, 0xe7a1)) {}
  void rank(std::span<const corpus::EvalUser> users, std::vector<evalkit::Ranking>& out) override;

 private:
  const VaeModel& model_;
  bool normalize_;
  bool sample_;
  Rng rng_;
};

/// z = mu(x) for each row, or a reparameterized sample when `rng` is given.
Tensor represent_users(const VaeModel& model, std::span<const corpus::ItemList> rows, bool normalize_input,
                       Rng* rng = nullptr);

evalkit::Ranking rank_items(std::span<const double> log_probs, const corpus::ItemList& exclude);

numkit::Checkpoint to_checkpoint(const TrainResult& r, const TrainConfig& c, const std::string& config_hash);
VaeModel model_from_checkpoint(const numkit::Checkpoint& ck);

}  // namespace hprior::hpvae
