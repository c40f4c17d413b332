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

#include "hpvae/model.hpp"

#include <cmath>

#include "common/error.hpp"
#include "numkit/optim.hpp"

namespace hprior::hpvae {

using numkit::ComputeGraph;
using numkit::Shape;

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::MultVae: return "mult_vae";
    case Mode::HPrior: return "hprior";
    case Mode::Rp: return "rp";
    case Mode::Tr: return "tr";
    case Mode::Dae: return "dae";
  }
  return "?";
}

Mode parse_mode(std::string_view name) {
  if (name == "mult_vae") return Mode::MultVae;
  if (name == "hprior") return Mode::HPrior;
  if (name == "rp") return Mode::Rp;
  if (name == "tr") return Mode::Tr;
  if (name == "dae") return Mode::Dae;
  raise(ErrorKind::Config, "unknown model mode '", name, "' (expected mult_vae, hprior, rp, tr or dae)");
}

VaeModel init_model(const Architecture& arch, Mode mode, std::uint64_t seed) {
  require(arch.n_items > 0 && arch.latent > 0 && arch.hidden > 0, ErrorKind::Argument,
          "architecture dimensions must be positive");
  VaeModel m{arch, mode, {}};
  Rng rng(derive_seed(seed, 0x1417));
  auto dense = [&](const std::string& name, std::size_t in, std::size_t out) {
    m.params[name + ".w"] = numkit::glorot_uniform(in, out, rng);
    m.params[name + ".b"] = Tensor(Shape{1, out});
  };
  dense("enc.h", arch.n_items, arch.hidden);
  dense("enc.mu", arch.hidden, arch.latent);
  if (is_variational(mode)) dense("enc.logsigma", arch.hidden, arch.latent);
  dense("dec.h", arch.latent, arch.hidden);
  dense("dec.out", arch.hidden, arch.n_items);
  return m;
}

namespace {

NodeId dense(ComputeGraph& g, NodeId x, const std::string& name, std::size_t in, std::size_t out) {
  NodeId w = g.param(name + ".w", {in, out});
  NodeId b = g.param(name + ".b", {1, out});
  return g.add_bias(g.matmul(x, w), b);
}

struct Encoded {
  NodeId mu, log_sigma;
};

Encoded build_encoder(ComputeGraph& g, NodeId x_in, const Architecture& a, bool variational) {
  NodeId h = g.tanh(dense(g, x_in, "enc.h", a.n_items, a.hidden));
  Encoded e;
  e.mu = dense(g, h, "enc.mu", a.hidden, a.latent);
  if (variational) {
    e.log_sigma = g.clamp(dense(g, h, "enc.logsigma", a.hidden, a.latent), numkit::kLogSigmaMin,
                          numkit::kLogSigmaMax);
  }
  return e;
}

NodeId build_decoder(ComputeGraph& g, NodeId z, const Architecture& a) {
  NodeId h = g.tanh(dense(g, z, "dec.h", a.latent, a.hidden));
  return g.log_softmax(dense(g, h, "dec.out", a.hidden, a.n_items));
}

NodeId square(ComputeGraph& g, NodeId a) { return g.mul(a, a); }

NodeId build_kl(ComputeGraph& g, NodeId mu, NodeId ls, NodeId t, NodeId log_s, NodeId inv_2s2) {
  NodeId var = g.exp(g.scale(ls, 2.0));
  NodeId quad = g.mul(g.add(var, square(g, g.sub(mu, t))), inv_2s2);
  return g.reduce_sum(g.add_scalar(g.add(g.sub(log_s, ls), quad), -0.5));
}

}  // namespace

void l2_normalize_rows(Tensor& x) {
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto row = x.row_view(r);
    double ss = 0.0;
    for (double v : row) ss += v * v;
    if (ss == 0.0) continue;
    const double inv = 1.0 / std::sqrt(ss);
    for (double& v : row) v *= inv;
  }
}

BatchFeed make_feed_rows(const VaeModel& model, std::span<const corpus::ItemList> rows,
                         std::span<const textprior::UserPrior* const> priors, const FeedOptions& opts, Rng& rng) {
  const auto& a = model.arch;
  const std::size_t b = rows.size(), k = a.latent;
  require(b > 0, ErrorKind::Argument, "empty batch");
  require(priors.empty() || priors.size() == b, ErrorKind::Argument, "batch has ", b, " rows but ",
          priors.size(), " priors");
  BatchFeed f;
  f.batch = b;
  f.x = Tensor(Shape{b, a.n_items});
  for (std::size_t r = 0; r < b; ++r) {
    for (auto item : rows[r]) {
      require(item < a.n_items, ErrorKind::Argument, "item ", item, " outside ", a.n_items, " items");
      f.x.at(r, item) = 1.0;
    }
  }
  f.x_in = f.x;
  if (opts.normalize_input) l2_normalize_rows(f.x_in);
  const Tensor mask = numkit::dropout_mask(f.x_in.shape(), opts.dropout, rng, opts.training);
  for (std::size_t i = 0; i < f.x_in.size(); ++i) f.x_in[i] *= mask[i];

  if (!is_variational(model.mode)) return f;
  if (opts.training) f.eps = numkit::standard_normal({b, k}, rng);

  f.t = Tensor(Shape{b, k});
  f.log_s = Tensor(Shape{b, k});
  f.inv_2s2 = Tensor(Shape{b, k}, 0.5);
  const bool prior_kl = model.mode == Mode::HPrior || model.mode == Mode::Rp;
  if (model.mode == Mode::Tr) f.t_reg = Tensor(Shape{b, k});
  for (std::size_t r = 0; r < b; ++r) {
    const textprior::UserPrior* p = priors.empty() ? nullptr : priors[r];
    if (!p) continue;
    require(p->dim() == k, ErrorKind::Config, "prior dimension ", p->dim(), " does not match latent dimension ", k);
    if (prior_kl) {
      for (std::size_t j = 0; j < k; ++j) {
        const double s = p->std[j];
        f.t.at(r, j) = p->mean[j];
        f.log_s.at(r, j) = std::log(s);
        f.inv_2s2.at(r, j) = 1.0 / (2.0 * s * s);
      }
    } else if (model.mode == Mode::Tr) {
      for (std::size_t j = 0; j < k; ++j) f.t_reg.at(r, j) = p->mean[j];
    }
  }
  return f;
}

BatchFeed make_feed(const VaeModel& model, const corpus::InteractionMatrix& m, std::span<const std::uint32_t> users,
                    std::span<const textprior::UserPrior> priors, const FeedOptions& opts, Rng& rng) {
  std::vector<corpus::ItemList> rows;
  std::vector<const textprior::UserPrior*> ps;
  rows.reserve(users.size());
  for (auto u : users) {
    require(u < m.n_users, ErrorKind::Argument, "user ", u, " outside ", m.n_users, " users");
    rows.push_back(m.rows[u]);
    if (!priors.empty()) {
      require(u < priors.size(), ErrorKind::Config, "no prior for user ", u);
      ps.push_back(&priors[u]);
    }
  }
  return make_feed_rows(model, rows, ps, opts, rng);
}

LossGraph build_loss_graph(const Architecture& a, Mode mode, std::size_t batch, double beta, double gamma) {
  LossGraph lg;
  auto& g = lg.graph;
  const std::size_t b = batch, k = a.latent;
  NodeId x = g.input("x", {b, a.n_items});
  NodeId x_in = g.input("x_in", {b, a.n_items});
  Encoded e = build_encoder(g, x_in, a, is_variational(mode));
  lg.mu = e.mu;
  lg.log_sigma = e.log_sigma;
  if (is_variational(mode)) {
    NodeId eps = g.input("eps", {b, k});
    lg.z = g.add(e.mu, g.mul(g.exp(e.log_sigma), eps));
  } else {
    lg.z = e.mu;
  }
  lg.log_probs = build_decoder(g, lg.z, a);
  lg.recon = g.scale(g.reduce_sum(g.mul(x, lg.log_probs)), -1.0);
  NodeId total = lg.recon;
  if (is_variational(mode)) {
    lg.kl = build_kl(g, e.mu, e.log_sigma, g.input("t", {b, k}), g.input("log_s", {b, k}),
                     g.input("inv_2s2", {b, k}));
    total = g.add(total, g.scale(lg.kl, beta));
  }
  if (mode == Mode::Tr) {
    NodeId diff = g.sub(lg.z, g.input("t_reg", {b, k}));
    lg.dist = g.reduce_sum(g.sqrt(g.row_sum(square(g, diff))));
    total = g.add(total, g.scale(lg.dist, gamma));
  }
  lg.loss = g.scale(total, 1.0 / static_cast<double>(b));
  return lg;
}

StepOutput evaluate_loss(const VaeModel& model, const BatchFeed& feed, double beta, double gamma, bool backward) {
  LossGraph lg = build_loss_graph(model.arch, model.mode, feed.batch, beta, gamma);
  TensorMap inputs{{"x", feed.x}, {"x_in", feed.x_in}};
  if (is_variational(model.mode)) {
    require(feed.eps.size() == feed.batch * model.arch.latent, ErrorKind::Usage,
            "variational loss needs a training feed with noise");
    inputs.emplace("eps", feed.eps);
    inputs.emplace("t", feed.t);
    inputs.emplace("log_s", feed.log_s);
    inputs.emplace("inv_2s2", feed.inv_2s2);
  }
  if (model.mode == Mode::Tr) inputs.emplace("t_reg", feed.t_reg);
  lg.graph.forward(inputs, model.params);
  StepOutput out;
  const double inv_b = 1.0 / static_cast<double>(feed.batch);
  out.terms.loss = lg.graph.value(lg.loss).item();
  out.terms.recon = lg.graph.value(lg.recon).item() * inv_b;
  if (lg.kl.valid()) out.terms.kl = lg.graph.value(lg.kl).item() * inv_b;
  if (lg.dist.valid()) out.terms.dist = lg.graph.value(lg.dist).item() * inv_b;
  out.terms.beta = beta;
  if (backward) out.grads = lg.graph.backward(lg.loss);
  return out;
}

double kl_diag_gaussians(std::span<const double> mu, std::span<const double> log_sigma,
                         const textprior::UserPrior& prior) {
  const std::size_t k = mu.size();
  require(log_sigma.size() == k && prior.dim() == k && prior.std.size() == k, ErrorKind::Argument,
          "KL dimension mismatch: posterior ", k, "/", log_sigma.size(), ", prior ", prior.dim());
  ComputeGraph g;
  NodeId m = g.input("mu", {1, k});
  NodeId ls = g.clamp(g.input("ls", {1, k}), numkit::kLogSigmaMin, numkit::kLogSigmaMax);
  NodeId kl = build_kl(g, m, ls, g.input("t", {1, k}), g.input("log_s", {1, k}), g.input("inv_2s2", {1, k}));
  Tensor t({1, k}), log_s({1, k}), inv({1, k});
  for (std::size_t j = 0; j < k; ++j) {
    t[j] = prior.mean[j];
    log_s[j] = std::log(prior.std[j]);
    inv[j] = 1.0 / (2.0 * prior.std[j] * prior.std[j]);
  }
  Tensor mt({1, k}), lt({1, k});
  std::copy(mu.begin(), mu.end(), mt.values().begin());
  std::copy(log_sigma.begin(), log_sigma.end(), lt.values().begin());
  g.forward({{"mu", mt}, {"ls", lt}, {"t", t}, {"log_s", log_s}, {"inv_2s2", inv}}, {});
  return g.value(kl).item();
}

double multinomial_ll(std::span<const double> x, std::span<const double> log_pi) {
  require(x.size() == log_pi.size(), ErrorKind::Argument, "likelihood length mismatch: ", x.size(), " vs ",
          log_pi.size());
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] != 0.0) s += x[i] * log_pi[i];
  }
  return s;
}

Posterior encode(const VaeModel& model, std::span<const corpus::ItemList> rows, bool normalize_input) {
  Rng unused(0);
  FeedOptions opts{.training = false, .dropout = 0.0, .normalize_input = normalize_input};
  BatchFeed f = make_feed_rows(model, rows, {}, opts, unused);
  ComputeGraph g;
  NodeId x_in = g.input("x_in", f.x_in.shape());
  Encoded e = build_encoder(g, x_in, model.arch, is_variational(model.mode));
  g.forward({{"x_in", f.x_in}}, model.params);
  Posterior p;
  p.mu = g.value(e.mu);
  if (e.log_sigma.valid()) p.log_sigma = g.value(e.log_sigma);
  return p;
}

Tensor decode_log_probs(const VaeModel& model, const Tensor& z) {
  ComputeGraph g;
  NodeId zi = g.input("z", z.shape());
  NodeId out = build_decoder(g, zi, model.arch);
  g.forward({{"z", z}}, model.params);
  return g.value(out);
}

}  // namespace hprior::hpvae
