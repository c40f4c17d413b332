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

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "doctest.h"

#include "../support/fd_oracle.hpp"
#include "../support/synthetic.hpp"
#include "common/error.hpp"
#include "common/rng.hpp"
#include "evalkit/metrics.hpp"
#include "hpvae/model.hpp"
#include "hpvae/trainer.hpp"
#include "numkit/checkpoint.hpp"

using namespace hprior;
using namespace hprior::hpvae;
using numkit::Tensor;
using textprior::UserPrior;

namespace {

double logsumexp(std::span<const double> v) {
  const double mx = *std::max_element(v.begin(), v.end());
  double s = 0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

std::vector<UserPrior> text_like_priors(std::size_t users, std::size_t k, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<UserPrior> out;
  for (std::size_t u = 0; u < users; ++u) {
    UserPrior p{std::vector<double>(k), std::vector<double>(k), textprior::PriorSource::Embedding};
    for (std::size_t j = 0; j < k; ++j) {
      p.mean[j] = rng.normal();
      p.std[j] = 0.1 + rng.uniform();
    }
    out.push_back(p);
  }
  return out;
}

TrainConfig small_config(Mode mode) {
  TrainConfig c;
  c.mode = mode;
  c.latent = 4;
  c.hidden = 16;
  c.batch_size = 20;
  c.epochs = 3;
  c.seed = 11;
  return c;
}

}  // namespace

TEST_CASE("decoder output is a log-distribution") {
  auto model = init_model({7, 3, 5}, Mode::MultVae, 1);
  Rng rng(2);
  Tensor z = numkit::standard_normal({10, 3}, rng);
  for (auto& v : z.values()) v *= 5;
  Tensor lp = decode_log_probs(model, z);
  for (std::size_t r = 0; r < 10; ++r) CHECK(std::abs(logsumexp(lp.row_view(r))) < 1e-9);

  for (auto& [name, t] : model.params) t.fill(0.0);
  lp = decode_log_probs(model, z);
  for (double v : lp.values()) CHECK(v == doctest::Approx(std::log(1.0 / 7)).epsilon(1e-12));
}

TEST_CASE("argmax is invariant to a constant output-bias shift") {
  auto model = init_model({9, 2, 4}, Mode::MultVae, 3);
  Rng rng(5);
  Tensor z = numkit::standard_normal({6, 2}, rng);
  Tensor a = decode_log_probs(model, z);
  for (auto& b : model.params.at("dec.out.b").values()) b += 3.5;
  Tensor b = decode_log_probs(model, z);
  for (std::size_t r = 0; r < 6; ++r) {
    auto ra = a.row_view(r), rb = b.row_view(r);
    CHECK(std::max_element(ra.begin(), ra.end()) - ra.begin() == std::max_element(rb.begin(), rb.end()) - rb.begin());
  }
}

TEST_CASE("multinomial log-likelihood") {
  const std::vector<double> lp{std::log(0.5), std::log(0.25), std::log(0.25)};
  CHECK(multinomial_ll(std::vector<double>{1, 0, 1}, lp) == doctest::Approx(-2.0794).epsilon(1e-4));
  CHECK(multinomial_ll(std::vector<double>{0, 0, 0}, lp) == 0.0);
  const std::vector<double> uni(10, std::log(0.1));
  CHECK(multinomial_ll(std::vector<double>{1, 1, 1, 0, 0, 0, 0, 0, 0, 0}, uni) ==
        doctest::Approx(3 * std::log(0.1)).epsilon(1e-14));
}

TEST_CASE("closed-form KL") {
  UserPrior std_prior = textprior::standard_prior(3);
  CHECK(kl_diag_gaussians(std::vector<double>{1, 1, 1}, std::vector<double>{0, 0, 0}, std_prior) ==
        doctest::Approx(1.5).epsilon(1e-12));
  UserPrior p{{0.3, -1.2}, {0.5, 2.0}, textprior::PriorSource::Embedding};
  CHECK(std::abs(kl_diag_gaussians(p.mean, std::vector<double>{std::log(0.5), std::log(2.0)}, p)) < 1e-12);
  Rng rng(8);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> mu(4), ls(4);
    for (auto& v : mu) v = 3 * rng.normal();
    for (auto& v : ls) v = rng.normal();
    UserPrior q{{rng.normal(), rng.normal(), rng.normal(), rng.normal()},
                {0.1 + rng.uniform(), 0.1 + rng.uniform(), 1 + rng.uniform(), 2.0},
                textprior::PriorSource::Lda};
    CHECK(kl_diag_gaussians(mu, ls, q) >= 0.0);
  }
  CHECK_THROWS_AS(kl_diag_gaussians(std::vector<double>{1}, std::vector<double>{0, 0}, std_prior), Error);
}

TEST_CASE("input normalization makes the posterior scale-free") {
  auto model = init_model({8, 2, 6}, Mode::MultVae, 4);
  std::vector<corpus::ItemList> rows{{0, 3, 5}, {0, 3, 5}, {}};
  auto p = encode(model, rows);
  CHECK(p.mu.row_view(0)[0] == p.mu.row_view(1)[0]);
  CHECK(p.mu.all_finite());
  CHECK(p.log_sigma.all_finite());

  BatchFeed f;
  Tensor x({1, 4}, std::vector<double>{1, 0, 1, 1});
  Tensor x2({1, 4}, std::vector<double>{2, 0, 2, 2});
  l2_normalize_rows(x);
  l2_normalize_rows(x2);
  for (std::size_t i = 0; i < 4; ++i) CHECK(x[i] == doctest::Approx(x2[i]).epsilon(1e-15));
}

TEST_CASE("beta schedule is linear then flat") {
  BetaSchedule s{1.0, 100};
  CHECK(anneal_beta(0, s) == 0.0);
  CHECK(anneal_beta(50, s) == 0.5);
  CHECK(anneal_beta(100, s) == 1.0);
  CHECK(anneal_beta(1000, s) == 1.0);
  CHECK(anneal_beta(25, {0.4, 100}) == doctest::Approx(0.1));
}

TEST_CASE("loss at beta 0 equals the reconstruction term") {
  auto m = testing::cluster_matrix(12, 10, 2, 4, 0.9, 1);
  auto model = init_model({10, 3, 8}, Mode::HPrior, 2);
  auto priors = text_like_priors(12, 3, 3);
  Rng rng(1);
  auto users = testing::iota_users(6);
  auto feed = make_feed(model, m, users, priors, {}, rng);
  auto out = evaluate_loss(model, feed, 0.0, 0.0, false);
  CHECK(out.terms.loss == doctest::Approx(out.terms.recon).epsilon(1e-14));
  CHECK(out.terms.kl > 0.0);
  auto out1 = evaluate_loss(model, feed, 1.0, 0.0, false);
  CHECK(out1.terms.loss == doctest::Approx(out.terms.recon + out.terms.kl).epsilon(1e-12));
}

TEST_CASE("full-loss gradients match finite differences in every mode") {
  auto m = testing::cluster_matrix(3, 6, 2, 3, 0.8, 9);
  const auto users = testing::iota_users(3);
  for (Mode mode : {Mode::MultVae, Mode::HPrior, Mode::Rp, Mode::Tr, Mode::Dae}) {
    for (int inst = 0; inst < 4; ++inst) {
      auto model = init_model({6, 2, 5}, mode, 100 + inst);
      Rng prng(inst);
      for (auto& [name, t] : model.params) {
        for (auto& v : t.values()) v += 0.3 * prng.normal();
      }
      auto priors = text_like_priors(3, 2, 50 + inst);
      Rng rng(7 + inst);
      auto feed = make_feed(model, m, users, priors, {.training = true, .dropout = 0.0}, rng);
      auto out = evaluate_loss(model, feed, 0.7, 0.3, true);
      auto loss = [&](const numkit::TensorMap& p) {
        VaeModel probe{model.arch, mode, p};
        return evaluate_loss(probe, feed, 0.7, 0.3, false).terms.loss;
      };
      auto check = testing::compare_with_finite_differences(loss, model.params, out.grads);
      INFO(mode_name(mode), " ", check.worst);
      CHECK(check.max_rel_error < 1e-4);
    }
  }
}

TEST_CASE("mode reductions are bitwise under a shared seed") {
  auto m = testing::cluster_matrix(60, 20, 4, 6, 0.8, 2);
  TrainData base{&m, testing::iota_users(60), nullptr, {}};
  auto cfg = small_config(Mode::MultVae);
  cfg.epochs = 10;
  auto ref = train(base, cfg);
  REQUIRE(ref.step_losses.size() == 30);

  TrainData std_priors = base;
  for (int u = 0; u < 60; ++u) {
    auto p = textprior::standard_prior(4);
    p.source = textprior::PriorSource::Embedding;
    std_priors.priors.push_back(p);
  }
  cfg.mode = Mode::HPrior;
  CHECK(train(std_priors, cfg).step_losses == ref.step_losses);

  TrainData tr = base;
  tr.priors = text_like_priors(60, 4, 1);
  cfg.mode = Mode::Tr;
  cfg.gamma = 0.0;
  auto tr_run = train(tr, cfg);
  CHECK(tr_run.step_losses == ref.step_losses);
  cfg.gamma = 0.5;
  CHECK(train(tr, cfg).step_losses != ref.step_losses);
}

TEST_CASE("training is deterministic and improves the loss") {
  auto m = testing::cluster_matrix(200, 40, 4, 8, 0.9, 3);
  corpus::EvalPartition val;
  for (std::uint32_t u = 160; u < 200; ++u) val.users.push_back({u, corpus::fold_in_split(m.rows[u], 0.8, u)});
  TrainData d{&m, testing::iota_users(160), &val, {}};
  auto cfg = small_config(Mode::MultVae);
  cfg.epochs = 30;
  cfg.beta_max = 0.2;
  auto a = train(d, cfg), b = train(d, cfg);
  REQUIRE(a.log.size() == 30);
  for (std::size_t e = 0; e < 30; ++e) {
    CHECK(a.log[e].val_ndcg100 == b.log[e].val_ndcg100);
    CHECK(a.log[e].loss == b.log[e].loss);
  }
  CHECK(a.best.params == b.best.params);
  // Reconstruction term smoothed over 5 epochs trends down.
  auto window = [&](std::size_t end) {
    double s = 0;
    for (std::size_t e = end - 5; e < end; ++e) s += a.log[e].recon;
    return s / 5;
  };
  for (std::size_t end = 10; end <= 30; end += 5) CHECK(window(end) <= window(end - 5));
  CHECK(a.best_val > 0.5);
  CHECK(a.best_epoch >= 1);
}

TEST_CASE("beta frozen at zero still reports the KL term") {
  auto m = testing::cluster_matrix(40, 12, 2, 4, 0.9, 4);
  TrainData d{&m, testing::iota_users(40), nullptr, {}};
  auto cfg = small_config(Mode::MultVae);
  cfg.beta_max = 0.0;
  auto r = train(d, cfg);
  for (const auto& e : r.log) {
    CHECK(e.beta == 0.0);
    CHECK(e.kl > 0.0);
    CHECK(e.loss == doctest::Approx(e.recon).epsilon(1e-12));
  }
}

TEST_CASE("prior-table modes validate their priors") {
  auto m = testing::cluster_matrix(20, 10, 2, 3, 0.9, 5);
  TrainData d{&m, testing::iota_users(20), nullptr, {}};
  CHECK_THROWS_AS(train(d, small_config(Mode::HPrior)), Error);
  CHECK_THROWS_AS(train(d, small_config(Mode::Tr)), Error);
  d.priors = text_like_priors(20, 3, 1);
  CHECK_THROWS_AS(train(d, small_config(Mode::HPrior)), Error);
  d.priors = text_like_priors(20, 4, 1);
  CHECK_NOTHROW(train(d, small_config(Mode::HPrior)));
  d.priors.clear();
  CHECK_NOTHROW(train(d, small_config(Mode::Rp)));
  CHECK_NOTHROW(train(d, small_config(Mode::Dae)));
}

TEST_CASE("numeric faults abort with the last good parameters") {
  auto m = testing::cluster_matrix(40, 12, 2, 4, 0.9, 6);
  TrainData d{&m, testing::iota_users(40), nullptr, {}};
  auto cfg = small_config(Mode::MultVae);
  cfg.adam.lr = 1e300;
  cfg.epochs = 5;
  auto r = train(d, cfg);
  CHECK(r.faulted);
  CHECK(r.fault.find("numeric fault") != std::string::npos);
  for (const auto& [name, t] : r.best.params) CHECK(t.all_finite());
}

TEST_CASE("ranking follows decoded log-probabilities") {
  CHECK(rank_items(std::vector<double>{-1, -2, -0.5}, {}) == evalkit::Ranking{2, 0, 1});
  CHECK(rank_items(std::vector<double>{-1, -2, -0.5}, {0, 2})[0] == 1);
  CHECK(rank_items(std::vector<double>(4, -1.0), {1}) == evalkit::Ranking{0, 2, 3, 1});

  auto model = init_model({15, 3, 8}, Mode::MultVae, 9);
  std::vector<corpus::ItemList> rows{{1, 2}, {1, 2}, {}};
  Tensor z1 = represent_users(model, rows, true), z2 = represent_users(model, rows, true);
  CHECK(z1 == z2);
  CHECK(z1.all_finite());
  Rng rng(1);
  Tensor zs = represent_users(model, rows, true, &rng);
  CHECK(zs != z1);

  corpus::EvalPartition part;
  part.users.push_back({0, {{1, 2}, {5}}});
  part.users.push_back({1, {{0}, {3, 4}}});
  VaeRanker ranker(model);
  std::vector<evalkit::Ranking> out;
  ranker.rank(part.users, out);
  REQUIRE(out.size() == 2);
  evalkit::check_ranking(out[0], 15, {1, 2});
  evalkit::check_ranking(out[1], 15, {0});
}

TEST_CASE("checkpoints restore the trained model") {
  auto m = testing::cluster_matrix(40, 12, 2, 4, 0.9, 7);
  TrainData d{&m, testing::iota_users(40), nullptr, {}};
  auto cfg = small_config(Mode::Dae);
  auto r = train(d, cfg);
  auto path = (std::filesystem::temp_directory_path() / "hprior_vae.ckpt").string();
  numkit::save_checkpoint(path, to_checkpoint(r, cfg, "hash1"));
  auto ck = numkit::load_checkpoint(path);
  CHECK(ck.config_hash == "hash1");
  auto model = model_from_checkpoint(ck);
  CHECK(model.mode == Mode::Dae);
  CHECK(model.params == r.best.params);
  CHECK(model.arch.latent == 4);
  ck.params.erase("dec.out.b");
  CHECK_THROWS_AS(model_from_checkpoint(ck), Error);
}

TEST_CASE("mode names round-trip") {
  for (Mode mode : {Mode::MultVae, Mode::HPrior, Mode::Rp, Mode::Tr, Mode::Dae}) {
    CHECK(parse_mode(mode_name(mode)) == mode);
  }
  CHECK_THROWS_AS(parse_mode("vae"), Error);
}
