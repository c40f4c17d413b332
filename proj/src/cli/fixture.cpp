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

#include "cli/fixture.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <vector>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "corpus/reviews.hpp"
#include "json.hpp"

namespace hprior::cli {

namespace fs = std::filesystem;

namespace {

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b) {
  double s = 0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

Vec around(const Vec& center, double spread, Rng& rng) {
  Vec v(center.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = center[k] + spread * rng.normal();
  return v;
}

std::string padded(char prefix, std::size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%05zu", prefix, n);
  return buf;
}

// Index drawn from the softmax of `logits`.
std::size_t draw(const Vec& logits, Rng& rng) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double total = 0;
  for (double l : logits) total += std::exp(l - mx);
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    u -= std::exp(logits[i] - mx);
    if (u <= 0) return i;
  }
  return logits.size() - 1;
}

struct Word {
  std::string text;
  Vec vec;
  bool embedded = true;
};

}  // namespace

FixtureTruth write_fixture(const std::string& dir, const FixtureConfig& c) {
  require(c.clusters >= 1 && c.dim >= c.clusters, ErrorKind::Argument, "fixture needs dim >= clusters >= 1");
  require(c.users >= c.clusters && c.items_per_cluster >= 1, ErrorKind::Argument, "fixture is too small");
  require(c.min_positives >= 2 && c.min_positives <= c.max_positives, ErrorKind::Argument,
          "fixture positives range is invalid");
  require(c.max_positives < c.items_per_cluster * c.clusters, ErrorKind::Argument,
          "fixture users cannot rate more items than exist");

  Rng rng(derive_seed(c.seed, 0xf1c5));
  const std::size_t n_items = c.clusters * c.items_per_cluster;

  std::vector<Vec> centroids(c.clusters, Vec(c.dim, 0.0));
  for (std::size_t k = 0; k < c.clusters; ++k) centroids[k][k] = c.centroid_scale;

  std::vector<Vec> item_vec(n_items);
  Vec item_logpop(n_items);
  for (std::size_t i = 0; i < n_items; ++i) {
    item_vec[i] = around(centroids[i / c.items_per_cluster], c.spread, rng);
    item_logpop[i] = 0.7 * rng.normal();
  }

  std::vector<Vec> user_vec(c.users);
  std::vector<std::size_t> user_cluster(c.users);
  for (std::size_t u = 0; u < c.users; ++u) {
    user_cluster[u] = rng.below(c.clusters);
    user_vec[u] = around(centroids[user_cluster[u]], c.spread, rng);
  }

  // Positives: sampling without replacement via Gumbel top-n.
  std::vector<std::vector<std::uint32_t>> positives(c.users);
  for (std::size_t u = 0; u < c.users; ++u) {
    const std::size_t n = c.min_positives + rng.below(c.max_positives - c.min_positives + 1);
    std::vector<std::pair<double, std::uint32_t>> keys(n_items);
    for (std::uint32_t i = 0; i < n_items; ++i) {
      double g = rng.uniform();
      while (g <= 0) g = rng.uniform();
      keys[i] = {c.affinity * dot(user_vec[u], item_vec[i]) + item_logpop[i] - std::log(-std::log(g)), i};
    }
    std::partial_sort(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(n), keys.end(),
                      [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t j = 0; j < n; ++j) positives[u].push_back(keys[j].second);
  }

  // Top up rare items so that activity cutoffs remove nothing.
  std::vector<std::size_t> item_count(n_items, 0);
  for (const auto& p : positives) {
    for (auto i : p) ++item_count[i];
  }
  for (std::uint32_t i = 0; i < n_items; ++i) {
    const std::size_t cluster = i / c.items_per_cluster;
    std::size_t guard = 0;
    while (item_count[i] < c.min_item && guard++ < 100 * c.users) {
      const std::size_t u = rng.below(c.users);
      if (user_cluster[u] != cluster && guard < 50 * c.users) continue;
      auto& p = positives[u];
      if (std::find(p.begin(), p.end(), i) != p.end()) continue;
      p.push_back(i);
      ++item_count[i];
    }
    require(item_count[i] >= c.min_item, ErrorKind::Argument, "fixture cannot give every item ", c.min_item,
            " positives");
  }

  // Vocabulary: topical words per cluster, shared neutral and negative words.
  std::vector<Word> topical, common, negative;
  for (std::size_t k = 0; k < c.clusters; ++k) {
    for (std::size_t j = 0; j < c.words_per_cluster; ++j) {
      Word w{"topic" + std::to_string(k) + "w" + std::to_string(j), around(centroids[k], c.word_noise, rng)};
      w.embedded = rng.uniform() >= c.oov_fraction;
      topical.push_back(std::move(w));
    }
  }
  const Vec origin(c.dim, 0.0);
  for (std::size_t j = 0; j < c.common_words; ++j) {
    common.push_back({"plain" + std::to_string(j), around(origin, c.word_noise, rng)});
  }
  for (std::size_t j = 0; j < std::max<std::size_t>(1, c.common_words / 3); ++j) {
    negative.push_back({"poor" + std::to_string(j), around(origin, c.word_noise, rng)});
  }

  auto review_text = [&](std::size_t u, std::uint32_t item, bool low) {
    Vec mix(c.dim);
    for (std::size_t k = 0; k < c.dim; ++k) mix[k] = c.user_text_weight * user_vec[u][k] + (1 - c.user_text_weight) * item_vec[item][k];
    Vec logits(topical.size());
    for (std::size_t w = 0; w < topical.size(); ++w) logits[w] = c.text_sharpness * dot(topical[w].vec, mix);
    const std::size_t len = 18 + rng.below(15);
    std::string text;
    for (std::size_t t = 0; t < len; ++t) {
      const Word* w;
      if (rng.uniform() < c.common_share) {
        const auto& pool = low && rng.uniform() < 0.5 ? negative : common;
        w = &pool[rng.below(pool.size())];
      } else {
        w = &topical[draw(logits, rng)];
      }
      if (!text.empty()) text += ' ';
      text += w->text;
    }
    return text;
  };

  std::vector<corpus::ReviewRecord> records;
  FixtureTruth truth;
  truth.users = c.users;
  truth.items = n_items;
  for (std::size_t u = 0; u < c.users; ++u) {
    std::vector<std::uint32_t> low;
    const std::size_t n_low = 2 + rng.below(4);
    while (low.size() < n_low) {
      const auto i = static_cast<std::uint32_t>(rng.below(n_items));
      if (std::find(positives[u].begin(), positives[u].end(), i) != positives[u].end()) continue;
      if (std::find(low.begin(), low.end(), i) != low.end()) continue;
      low.push_back(i);
    }
    // Interleave positives and low ratings in a seeded order.
    std::vector<std::pair<std::uint32_t, bool>> rated;
    for (auto i : positives[u]) rated.push_back({i, false});
    for (auto i : low) rated.push_back({i, true});
    rng.shuffle(rated);
    for (const auto& [item, is_low] : rated) {
      const int stars = is_low ? 1 + static_cast<int>(rng.below(3)) : 4 + static_cast<int>(rng.below(2));
      records.push_back({padded('u', u), padded('i', item), stars, review_text(u, item, is_low)});
    }
    truth.positives += positives[u].size();
  }
  truth.reviews = records.size();
  truth.vocabulary = topical.size() + common.size() + negative.size();

  fs::create_directories(dir);
  const fs::path root(dir);
  {
    std::ofstream out(root / "reviews.tsv", std::ios::binary);
    require(out.good(), ErrorKind::Io, "cannot write '", (root / "reviews.tsv").string(), "'");
    out << "user_id\titem_id\tstars\ttext\n";
    for (const auto& r : records) {
      out << r.user_id << '\t' << r.item_id << '\t' << r.rating << '\t' << corpus::escape_tsv_field(r.text) << '\n';
    }
  }
  {
    std::ofstream out(root / "embeddings.txt", std::ios::binary);
    require(out.good(), ErrorKind::Io, "cannot write '", (root / "embeddings.txt").string(), "'");
    char buf[32];
    for (const auto* pool : {&topical, &common, &negative}) {
      for (const auto& w : *pool) {
        if (!w.embedded) continue;
        ++truth.embedded_words;
        out << w.text;
        for (double v : w.vec) {
          std::snprintf(buf, sizeof buf, " %.6f", v);
          out << buf;
        }
        out << '\n';
      }
    }
  }
  {
    nlohmann::json j{{"format", "hprior-fixture-truth"},
                     {"version", 1},
                     {"seed", c.seed},
                     {"users", truth.users},
                     {"items", truth.items},
                     {"positives", truth.positives},
                     {"reviews", truth.reviews},
                     {"vocabulary", truth.vocabulary},
                     {"embedded_words", truth.embedded_words},
                     {"clusters", c.clusters},
                     {"dim", c.dim}};
    nlohmann::json latent = nlohmann::json::object();
    for (std::size_t u = 0; u < c.users; ++u) {
      latent[padded('u', u)] = {{"cluster", user_cluster[u]}, {"vector", user_vec[u]}};
    }
    j["user_latent"] = std::move(latent);
    std::ofstream out(root / "truth.json", std::ios::binary);
    out << j.dump(1) << '\n';
  }
  {
    std::ofstream out(root / "hprior.conf", std::ios::binary);
    out << "# synthetic fixture\n"
        << "data.path = reviews.tsv\n"
        << "data.name = fixture\n"
        << "data.min_user = 5\n"
        << "data.min_item = " << c.min_item << "\n"
        << "prior.source = embedding\n"
        << "prior.embeddings = embeddings.txt\n"
        << "prior.lda.topics = " << c.dim << "\n"
        << "model.latent = " << c.dim << "\n"
        << "model.hidden = 64\n"
        << "train.batch_size = 50\n"
        << "train.epochs = 30\n"
        << "split.test_fraction = 0.2\n"
        << "mf.factors = " << c.dim << "\n"
        << "mf.lr = 0.03\n"
        << "mf.epochs = 40\n"
        << "mf.batch_users = 50\n"
        << "out.dir = run\n";
  }
  return truth;
}

FixtureTruth load_fixture_truth(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorKind::Io, "cannot read '", path, "'");
  nlohmann::json j;
  try {
    in >> j;
    FixtureTruth t;
    t.users = j.at("users");
    t.items = j.at("items");
    t.positives = j.at("positives");
    t.reviews = j.at("reviews");
    t.vocabulary = j.at("vocabulary");
    t.embedded_words = j.at("embedded_words");
    return t;
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorKind::Format, "'", path, "': ", e.what());
  }
}

}  // namespace hprior::cli
