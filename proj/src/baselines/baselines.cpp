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

#include "baselines/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "json.hpp"

#include "common/error.hpp"
#include "common/log.hpp"
#include "common/rng.hpp"
#include "evalkit/metrics.hpp"

namespace hprior::baselines {

using nlohmann::json;

Ranking rand_rank(std::size_t n_items, std::uint64_t seed) {
  Ranking r(n_items);
  std::iota(r.begin(), r.end(), 0u);
  Rng rng(seed);
  rng.shuffle(r);
  return r;
}

namespace {

void move_excluded_last(Ranking& r, const ItemList& exclude) {
  std::stable_partition(r.begin(), r.end(),
                        [&](std::uint32_t i) { return !std::binary_search(exclude.begin(), exclude.end(), i); });
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorKind::Io, "cannot write '", path, "'");
  out << j.dump() << '\n';
  require(out.good(), ErrorKind::Io, "write to '", path, "' failed");
}

json read_json(const std::string& path, const char* format) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorKind::Io, "cannot read '", path, "'");
  json j = json::parse(in, nullptr, false);
  require(!j.is_discarded() && j.is_object() && j.value("format", "") == format, ErrorKind::Format, "'", path,
          "' is not a ", format, " artifact");
  require(j.value("version", -1) == 1, ErrorKind::Format, "'", path, "' has unsupported version");
  return j;
}

}  // namespace

void RandRanker::rank(std::span<const corpus::EvalUser> users, std::vector<Ranking>& out) {
  for (const auto& u : users) {
    Ranking r = rand_rank(n_items_, derive_seed(seed_, 0x4a4d0000ULL + u.user));
    move_excluded_last(r, u.pair.observed);
    out.push_back(std::move(r));
  }
}

double MfModel::predict(std::uint32_t user, std::uint32_t item) const {
  const double* p = &user_factors[user * factors];
  const double* q = &item_factors[item * factors];
  double s = 0.0;
  for (std::size_t k = 0; k < factors; ++k) s += p[k] * q[k];
  if (biases) s += global_bias + user_bias[user] + item_bias[item];
  return s;
}

MfResult mf_train(std::span<const ItemList> rows, std::size_t n_items, const MfConfig& c) {
  require(c.factors >= 1, ErrorKind::Config, "MF needs at least one factor");
  require(c.lr > 0.0 && c.l2 >= 0.0, ErrorKind::Config, "MF learning rate must be positive and l2 non-negative");
  require(c.batch_users >= 1 && c.epochs >= 1, ErrorKind::Config, "MF batch size and epochs must be positive");
  require(n_items > 0 && !rows.empty(), ErrorKind::Data, "MF needs a non-empty matrix");
  MfResult result;
  MfModel& m = result.model;
  m.n_users = rows.size();
  m.n_items = n_items;
  m.factors = c.factors;
  m.biases = c.biases;
  Rng init(derive_seed(c.seed, 0x3f1));
  m.user_factors.resize(m.n_users * c.factors);
  m.item_factors.resize(n_items * c.factors);
  for (auto& v : m.user_factors) v = c.init_scale * init.normal();
  for (auto& v : m.item_factors) v = c.init_scale * init.normal();
  m.user_bias.assign(c.biases ? m.n_users : 0, 0.0);
  m.item_bias.assign(c.biases ? n_items : 0, 0.0);

  Rng rng(derive_seed(c.seed, 0x3f2));
  std::vector<std::uint32_t> order(m.n_users);
  std::iota(order.begin(), order.end(), 0u);
  struct Entry {
    std::uint32_t user, item;
    double target;
  };
  std::vector<Entry> entries;
  std::vector<double> pu(c.factors);
  for (std::size_t epoch = 1; epoch <= c.epochs; ++epoch) {
    rng.shuffle(order);
    double sq = 0.0;
    std::size_t count = 0;
    for (std::size_t start = 0; start < order.size(); start += c.batch_users) {
      const std::size_t end = std::min(order.size(), start + c.batch_users);
      entries.clear();
      for (std::size_t b = start; b < end; ++b) {
        const std::uint32_t u = order[b];
        const auto& row = rows[u];
        for (auto i : row) {
          require(i < n_items, ErrorKind::Data, "item ", i, " outside ", n_items, " items");
          entries.push_back({u, i, 1.0});
        }
        if (row.size() >= n_items) continue;
        for (std::size_t n = 0; n < row.size() * c.negatives; ++n) {
          std::uint32_t j;
          do {
            j = static_cast<std::uint32_t>(rng.below(n_items));
          } while (std::binary_search(row.begin(), row.end(), j));
          entries.push_back({u, j, 0.0});
        }
      }
      rng.shuffle(entries);
      for (const auto& e : entries) {
        const double err = m.predict(e.user, e.item) - e.target;
        sq += err * err;
        ++count;
        double* p = &m.user_factors[e.user * c.factors];
        double* q = &m.item_factors[e.item * c.factors];
        std::copy(p, p + c.factors, pu.begin());
        for (std::size_t k = 0; k < c.factors; ++k) {
          p[k] -= c.lr * (err * q[k] + c.l2 * p[k]);
          q[k] -= c.lr * (err * pu[k] + c.l2 * q[k]);
        }
        if (c.biases) {
          m.global_bias -= c.lr * err;
          m.user_bias[e.user] -= c.lr * (err + c.l2 * m.user_bias[e.user]);
          m.item_bias[e.item] -= c.lr * (err + c.l2 * m.item_bias[e.item]);
        }
      }
    }
    const double mse = count ? sq / static_cast<double>(count) : 0.0;
    require(std::isfinite(mse) && mse < 1e12, ErrorKind::Numeric, "MF diverged at epoch ", epoch, " (mse ", mse,
            "); try a smaller learning rate than ", c.lr);
    result.epoch_loss.push_back(mse);
    log_info("mf epoch=", epoch, " mse=", mse);
  }
  return result;
}

Ranking mf_rank(const MfModel& m, std::uint32_t user, const ItemList& exclude) {
  require(user < m.n_users, ErrorKind::Argument, "user ", user, " has no MF factors");
  std::vector<double> scores(m.n_items);
  for (std::uint32_t i = 0; i < m.n_items; ++i) scores[i] = m.predict(user, i);
  return evalkit::rank_by_scores(scores, exclude);
}

void MfRanker::rank(std::span<const corpus::EvalUser> users, std::vector<Ranking>& out) {
  for (const auto& u : users) out.push_back(mf_rank(model_, u.user, u.pair.observed));
}

void save_mf(const std::string& path, const MfModel& m, const std::string& config_hash) {
  write_json(path, {{"format", "hprior-mf"},
                    {"version", 1},
                    {"config_hash", config_hash},
                    {"n_users", m.n_users},
                    {"n_items", m.n_items},
                    {"factors", m.factors},
                    {"biases", m.biases},
                    {"global_bias", m.global_bias},
                    {"user_factors", m.user_factors},
                    {"item_factors", m.item_factors},
                    {"user_bias", m.user_bias},
                    {"item_bias", m.item_bias}});
}

MfModel load_mf(const std::string& path, std::string* config_hash) {
  json j = read_json(path, "hprior-mf");
  MfModel m;
  try {
    if (config_hash) *config_hash = j.at("config_hash").get<std::string>();
    m.n_users = j.at("n_users").get<std::size_t>();
    m.n_items = j.at("n_items").get<std::size_t>();
    m.factors = j.at("factors").get<std::size_t>();
    m.biases = j.at("biases").get<bool>();
    m.global_bias = j.at("global_bias").get<double>();
    m.user_factors = j.at("user_factors").get<std::vector<double>>();
    m.item_factors = j.at("item_factors").get<std::vector<double>>();
    m.user_bias = j.at("user_bias").get<std::vector<double>>();
    m.item_bias = j.at("item_bias").get<std::vector<double>>();
  } catch (const json::exception& e) {
    raise(ErrorKind::Format, "'", path, "': ", e.what());
  }
  require(m.user_factors.size() == m.n_users * m.factors && m.item_factors.size() == m.n_items * m.factors,
          ErrorKind::Format, "'", path, "': factor matrices do not match their declared sizes");
  require(!m.biases || (m.user_bias.size() == m.n_users && m.item_bias.size() == m.n_items), ErrorKind::Format,
          "'", path, "': bias vectors do not match their declared sizes");
  return m;
}

namespace {

std::vector<std::vector<double>> mean_vectors(std::size_t n, std::size_t dim,
                                              const std::vector<std::vector<const TextReview*>>& groups) {
  std::vector<std::vector<double>> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (groups[i].empty()) continue;
    out[i].assign(dim, 0.0);
    for (const auto* r : groups[i]) {
      for (std::size_t k = 0; k < dim; ++k) out[i][k] += r->embedding[k];
    }
    for (auto& v : out[i]) v /= static_cast<double>(groups[i].size());
  }
  return out;
}

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

TextKnnIndex build_text_knn(std::size_t n_users, std::size_t n_items, std::size_t dim,
                            std::span<const TextReview> reviews) {
  std::vector<std::vector<const TextReview*>> by_user(n_users), by_item(n_items);
  for (const auto& r : reviews) {
    require(r.user < n_users && r.item < n_items, ErrorKind::Argument, "review (", r.user, ", ", r.item,
            ") outside the matrix");
    require(r.embedding.size() == dim, ErrorKind::Shape, "review embedding has dimension ", r.embedding.size(),
            ", expected ", dim);
    by_user[r.user].push_back(&r);
    by_item[r.item].push_back(&r);
  }
  TextKnnIndex idx;
  idx.dim = dim;
  idx.users = mean_vectors(n_users, dim, by_user);
  idx.items = mean_vectors(n_items, dim, by_item);
  return idx;
}

Ranking text_knn_rank(std::span<const double> user_vector, const TextKnnIndex& index, const ItemList& exclude,
                      bool* no_text) {
  const std::size_t n = index.items.size();
  std::vector<double> scores(n, 0.0);
  const double un = user_vector.empty() ? 0.0 : norm(user_vector);
  if (no_text) *no_text = un == 0.0;
  if (un > 0.0) {
    require(user_vector.size() == index.dim, ErrorKind::Shape, "user vector has dimension ", user_vector.size(),
            ", index has ", index.dim);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& v = index.items[i];
      const double vn = v.empty() ? 0.0 : norm(v);
      if (vn == 0.0) {
        scores[i] = -2.0;
        continue;
      }
      double dot = 0.0;
      for (std::size_t k = 0; k < index.dim; ++k) dot += user_vector[k] * v[k];
      scores[i] = dot / (un * vn);
    }
  }
  return evalkit::rank_by_scores(scores, exclude);
}

void TextKnnRanker::rank(std::span<const corpus::EvalUser> users, std::vector<Ranking>& out) {
  for (const auto& u : users) {
    require(u.user < index_.users.size(), ErrorKind::Argument, "user ", u.user, " outside the text index");
    bool none = false;
    out.push_back(text_knn_rank(index_.users[u.user], index_, u.pair.observed, &none));
    no_text_ += none;
  }
}

void save_text_knn(const std::string& path, const TextKnnIndex& index, const std::string& data_hash) {
  write_json(path, {{"format", "hprior-textknn"},
                    {"version", 1},
                    {"data_hash", data_hash},
                    {"dim", index.dim},
                    {"items", index.items},
                    {"users", index.users}});
}

TextKnnIndex load_text_knn(const std::string& path, std::string* data_hash) {
  json j = read_json(path, "hprior-textknn");
  TextKnnIndex idx;
  try {
    if (data_hash) *data_hash = j.at("data_hash").get<std::string>();
    idx.dim = j.at("dim").get<std::size_t>();
    idx.items = j.at("items").get<std::vector<std::vector<double>>>();
    idx.users = j.at("users").get<std::vector<std::vector<double>>>();
  } catch (const json::exception& e) {
    raise(ErrorKind::Format, "'", path, "': ", e.what());
  }
  for (const auto* group : {&idx.items, &idx.users}) {
    for (const auto& v : *group) {
      require(v.empty() || v.size() == idx.dim, ErrorKind::Format, "'", path, "': vector of wrong dimension");
    }
  }
  return idx;
}

}  // namespace hprior::baselines
