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

#include "hpvae/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "common/error.hpp"
#include "common/log.hpp"
#include "evalkit/metrics.hpp"

namespace hprior::hpvae {

double anneal_beta(std::size_t step, const BetaSchedule& s) {
  if (s.anneal_steps == 0 || step >= s.anneal_steps) return s.beta_max;
  return s.beta_max * static_cast<double>(step) / static_cast<double>(s.anneal_steps);
}

std::string format_epoch(const EpochLog& e) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "epoch=%zu loss=%.6f recon=%.6f kl=%.6f dist=%.6f beta=%.6f", e.epoch, e.loss,
                e.recon, e.kl, e.dist, e.beta);
  std::string s = buf;
  if (e.has_val) {
    std::snprintf(buf, sizeof buf, " val_ndcg@100=%.6f", e.val_ndcg100);
    s += buf;
  } else {
    s += " val_ndcg@100=-";
  }
  return s;
}

std::vector<textprior::UserPrior> random_priors(std::size_t n_users, std::size_t dim, std::uint64_t seed) {
  std::vector<textprior::UserPrior> out;
  out.reserve(n_users);
  for (std::size_t u = 0; u < n_users; ++u) {
    out.push_back(textprior::user_prior_random(seed, static_cast<std::uint32_t>(u), dim));
  }
  return out;
}

namespace {

void check_data(const TrainData& d, const TrainConfig& c) {
  require(d.matrix != nullptr, ErrorKind::Argument, "training needs a matrix");
  require(!d.train_users.empty(), ErrorKind::Data, "no training users");
  require(c.batch_size > 0 && c.epochs > 0, ErrorKind::Config, "batch size and epochs must be positive");
  require(c.beta_max >= 0.0 && c.gamma >= 0.0, ErrorKind::Config, "beta_max and gamma must be non-negative");
  require(c.dropout >= 0.0 && c.dropout < 1.0, ErrorKind::Config, "dropout must lie in [0, 1)");
  if (needs_prior_table(c.mode)) {
    require(d.priors.size() == d.matrix->n_users, ErrorKind::Config, "mode ", mode_name(c.mode),
            " needs a prior for each of the ", d.matrix->n_users, " users, got ", d.priors.size());
  }
  for (const auto& p : d.priors) {
    require(p.dim() == c.latent, ErrorKind::Config, "prior dimension ", p.dim(), " does not match latent dimension ",
            c.latent);
  }
}

double validation_ndcg(const VaeModel& model, const corpus::EvalPartition& part, const TrainConfig& c) {
  VaeRanker ranker(model, c.normalize_input, c.sample_at_eval, c.seed);
  return evalkit::evaluate(ranker, part, model.arch.n_items).ndcg100.mean;
}

}  // namespace

TrainResult train(const TrainData& data, const TrainConfig& c, const std::function<void(const EpochLog&)>& on_epoch) {
  check_data(data, c);
  const auto& m = *data.matrix;
  std::vector<textprior::UserPrior> generated;
  std::span<const textprior::UserPrior> priors;
  if (c.mode == Mode::HPrior || c.mode == Mode::Tr) {
    priors = data.priors;
  } else if (c.mode == Mode::Rp) {
    if (data.priors.empty()) generated = random_priors(m.n_users, c.latent, c.seed);
    priors = generated.empty() ? std::span<const textprior::UserPrior>(data.priors) : generated;
    require(priors.size() == m.n_users, ErrorKind::Config, "random-prior run needs one prior per user");
  }

  VaeModel model = init_model({m.n_items, c.latent, c.hidden}, c.mode, c.seed);
  numkit::AdamState adam{c.adam, 0, {}, {}};
  Rng rng(derive_seed(c.seed, 0x7a1));

  const std::size_t n = data.train_users.size();
  const std::size_t batches = (n + c.batch_size - 1) / c.batch_size;
  std::size_t total_steps = batches * c.epochs;
  if (c.max_steps) total_steps = std::min(total_steps, c.max_steps);
  BetaSchedule sched{c.beta_max, c.anneal_steps ? c.anneal_steps
                                                : static_cast<std::size_t>(c.anneal_fraction * total_steps)};
  const FeedOptions opts{.training = true, .dropout = c.dropout, .normalize_input = c.normalize_input};

  TrainResult result;
  result.best = model;
  result.best_adam = adam;
  result.best_rng_state = rng.state();
  std::vector<std::uint32_t> order = data.train_users;
  std::size_t step = 0;
  bool stop = false;
  for (std::size_t epoch = 1; epoch <= c.epochs && !stop; ++epoch) {
    rng.shuffle(order);
    EpochLog log;
    log.epoch = epoch;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < n; start += c.batch_size) {
      if (c.max_steps && step >= c.max_steps) {
        stop = true;
        break;
      }
      const std::size_t end = std::min(n, start + c.batch_size);
      std::span<const std::uint32_t> batch(order.data() + start, end - start);
      const double beta = anneal_beta(step, sched);
      try {
        BatchFeed feed = make_feed(model, m, batch, priors, opts, rng);
        StepOutput out = evaluate_loss(model, feed, beta, c.gamma, true);
        numkit::adam_step(adam, model.params, out.grads);
        const double w = static_cast<double>(batch.size());
        log.loss += out.terms.loss * w;
        log.recon += out.terms.recon * w;
        log.kl += out.terms.kl * w;
        log.dist += out.terms.dist * w;
        log.beta = is_variational(c.mode) ? beta : 0.0;
        result.step_losses.push_back(out.terms.loss);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::Numeric) throw;
        result.faulted = true;
        result.fault = detail::concat("numeric fault at epoch ", epoch, " step ", step + 1, " (beta ", beta,
                                      "): ", e.what());
        log_info(result.fault);
        stop = true;
        break;
      }
      seen += batch.size();
      ++step;
    }
    if (seen == 0) break;
    const double inv = 1.0 / static_cast<double>(seen);
    log.loss *= inv;
    log.recon *= inv;
    log.kl *= inv;
    log.dist *= inv;
    if (data.validation && !data.validation->users.empty()) {
      log.has_val = true;
      log.val_ndcg100 = validation_ndcg(model, *data.validation, c);
    }
    const double score = log.has_val ? log.val_ndcg100 : static_cast<double>(epoch);
    if (!result.faulted || seen == n) {
      if (!log.has_val || score > result.best_val) {
        result.best = model;
        result.best_adam = adam;
        result.best_rng_state = rng.state();
        result.best_epoch = epoch;
        result.best_val = log.has_val ? score : -1.0;
      }
    }
    result.log.push_back(log);
    log_info(mode_name(c.mode), " ", format_epoch(log));
    if (on_epoch) on_epoch(log);
  }
  if (result.faulted && result.best_epoch == 0) {
    // Nothing finished cleanly; keep the last parameters that passed checks.
    result.best = model;
    result.best_adam = adam;
  }
  return result;
}

Tensor represent_users(const VaeModel& model, std::span<const corpus::ItemList> rows, bool normalize_input,
                       Rng* rng) {
  Posterior p = encode(model, rows, normalize_input);
  if (!rng || !is_variational(model.mode)) return p.mu;
  Tensor z = numkit::gaussian_sample(p.mu, p.log_sigma, *rng);
  return z;
}

evalkit::Ranking rank_items(std::span<const double> log_probs, const corpus::ItemList& exclude) {
  return evalkit::rank_by_scores(log_probs, exclude);
}

void VaeRanker::rank(std::span<const corpus::EvalUser> users, std::vector<evalkit::Ranking>& out) {
  if (users.empty()) return;
  std::vector<corpus::ItemList> rows;
  rows.reserve(users.size());
  for (const auto& u : users) rows.push_back(u.pair.observed);
  Tensor z = represent_users(model_, rows, normalize_, sample_ ? &rng_ : nullptr);
  Tensor lp = decode_log_probs(model_, z);
  for (std::size_t i = 0; i < users.size(); ++i) out.push_back(rank_items(lp.row_view(i), users[i].pair.observed));
}

numkit::Checkpoint to_checkpoint(const TrainResult& r, const TrainConfig& c, const std::string& config_hash) {
  numkit::Checkpoint ck;
  ck.mode = mode_name(c.mode);
  ck.config_hash = config_hash;
  ck.params = r.best.params;
  ck.adam = r.best_adam;
  ck.rng_state = r.best_rng_state;
  ck.meta["n_items"] = std::to_string(r.best.arch.n_items);
  ck.meta["latent"] = std::to_string(r.best.arch.latent);
  ck.meta["hidden"] = std::to_string(r.best.arch.hidden);
  ck.meta["normalize_input"] = c.normalize_input ? "1" : "0";
  ck.meta["best_epoch"] = std::to_string(r.best_epoch);
  ck.meta["epochs_run"] = std::to_string(r.log.size());
  ck.meta["faulted"] = r.faulted ? "1" : "0";
  return ck;
}

VaeModel model_from_checkpoint(const numkit::Checkpoint& ck) {
  VaeModel m;
  m.mode = parse_mode(ck.mode);
  auto num = [&](const char* key) -> std::size_t {
    auto it = ck.meta.find(key);
    require(it != ck.meta.end(), ErrorKind::Format, "checkpoint lacks '", key, "'");
    try {
      return std::stoull(it->second);
    } catch (const std::exception&) {
      raise(ErrorKind::Format, "checkpoint field '", key, "' is not a number");
    }
  };
  m.arch = {num("n_items"), num("latent"), num("hidden")};
  VaeModel shape_ref = init_model(m.arch, m.mode, 0);
  for (const auto& [name, t] : shape_ref.params) {
    auto it = ck.params.find(name);
    require(it != ck.params.end(), ErrorKind::Format, "checkpoint lacks parameter '", name, "'");
    require(it->second.shape() == t.shape(), ErrorKind::Format, "checkpoint parameter '", name, "' has shape ",
            numkit::shape_str(it->second.shape()), ", expected ", numkit::shape_str(t.shape()));
  }
  m.params = ck.params;
  return m;
}

}  // namespace hprior::hpvae
