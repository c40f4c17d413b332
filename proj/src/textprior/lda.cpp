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

#include "textprior/lda.hpp"

#include <cmath>

#include "common/error.hpp"
#include "common/log.hpp"
#include "common/rng.hpp"

namespace hprior::textprior {

namespace {

std::size_t sample_discrete(const std::vector<double>& cumulative, Rng& rng) {
  const double u = rng.uniform() * cumulative.back();
  std::size_t lo = 0, hi = cumulative.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (cumulative[mid] > u) hi = mid; else lo = mid + 1;
  }
  return lo;
}

}  // namespace

std::vector<double> LdaModel::topic_distribution(std::size_t t) const {
  const std::size_t v = vocab_size();
  require(t < k, ErrorKind::Argument, "topic ", t, " out of range ", k);
  std::vector<double> out(v);
  const double denom = topic_totals[t] + static_cast<double>(v) * eta;
  double sum = 0.0;
  for (std::size_t w = 0; w < v; ++w) sum += out[w] = (topic_word[t * v + w] + eta) / denom;
  for (auto& x : out) x /= sum;
  return out;
}

std::vector<double> LdaModel::document_distribution(std::size_t d) const {
  require(d < n_docs(), ErrorKind::Argument, "document ", d, " out of range ", n_docs());
  std::vector<double> out(k);
  double sum = 0.0;
  for (std::size_t t = 0; t < k; ++t) sum += out[t] = doc_topic[d * k + t] + alpha;
  for (auto& x : out) x /= sum;
  return out;
}

double lda_log_likelihood(const LdaModel& m) {
  const std::size_t v = m.vocab_size();
  const double veta = static_cast<double>(v) * m.eta;
  double ll = static_cast<double>(m.k) * (std::lgamma(veta) - static_cast<double>(v) * std::lgamma(m.eta));
  for (std::size_t t = 0; t < m.k; ++t) {
    for (std::size_t w = 0; w < v; ++w) {
      const auto c = m.topic_word[t * v + w];
      if (c) ll += std::lgamma(c + m.eta) - std::lgamma(m.eta);
    }
    ll += static_cast<double>(v) * std::lgamma(m.eta) - std::lgamma(m.topic_totals[t] + veta);
  }
  return ll;
}

LdaModel lda_train(const std::vector<Tokens>& docs, const LdaConfig& config) {
  require(config.topics >= 2, ErrorKind::Argument, "LDA needs at least 2 topics, got ", config.topics);
  require(!docs.empty(), ErrorKind::Data, "LDA corpus is empty");
  require(config.eta > 0.0, ErrorKind::Argument, "LDA eta must be positive");

  LdaModel m;
  m.k = config.topics;
  m.alpha = config.resolved_alpha();
  m.eta = config.eta;
  m.seed = config.seed;

  std::vector<std::vector<std::uint32_t>> ids(docs.size());
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (const auto& tok : docs[d]) {
      auto [it, fresh] = m.word_index.try_emplace(tok, static_cast<std::uint32_t>(m.words.size()));
      if (fresh) m.words.push_back(tok);
      ids[d].push_back(it->second);
    }
  }
  require(!m.words.empty(), ErrorKind::Data, "LDA vocabulary is empty after tokenization");

  const std::size_t k = m.k, v = m.vocab_size();
  const double veta = static_cast<double>(v) * m.eta;
  m.topic_word.assign(k * v, 0);
  m.topic_totals.assign(k, 0);
  m.doc_topic.assign(docs.size() * k, 0);

  Rng rng(derive_seed(config.seed, 0x1da));
  std::vector<std::vector<std::uint32_t>> z(docs.size());
  for (std::size_t d = 0; d < ids.size(); ++d) {
    z[d].resize(ids[d].size());
    for (std::size_t n = 0; n < ids[d].size(); ++n) {
      const auto t = static_cast<std::uint32_t>(rng.below(k));
      z[d][n] = t;
      ++m.topic_word[t * v + ids[d][n]];
      ++m.topic_totals[t];
      ++m.doc_topic[d * k + t];
    }
  }

  std::vector<double> cum(k);
  for (std::size_t sweep = 0; sweep < config.sweeps; ++sweep) {
    for (std::size_t d = 0; d < ids.size(); ++d) {
      std::uint32_t* dt = &m.doc_topic[d * k];
      for (std::size_t n = 0; n < ids[d].size(); ++n) {
        const std::uint32_t w = ids[d][n];
        std::uint32_t t = z[d][n];
        --m.topic_word[t * v + w];
        --m.topic_totals[t];
        --dt[t];
        double acc = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
          acc += (dt[j] + m.alpha) * (m.topic_word[j * v + w] + m.eta) / (m.topic_totals[j] + veta);
          cum[j] = acc;
        }
        t = static_cast<std::uint32_t>(sample_discrete(cum, rng));
        z[d][n] = t;
        ++m.topic_word[t * v + w];
        ++m.topic_totals[t];
        ++dt[t];
      }
    }
    m.log_likelihood.push_back(lda_log_likelihood(m));
    log_debug("lda sweep ", sweep + 1, "/", config.sweeps, " log-likelihood ", m.log_likelihood.back());
  }
  return m;
}

TopicEncoding lda_user_encoding(const LdaModel& m, const Tokens& doc, std::uint64_t seed, std::size_t sweeps) {
  const std::size_t k = m.k, v = m.vocab_size();
  std::vector<std::uint32_t> ids;
  for (const auto& tok : doc) {
    auto it = m.word_index.find(tok);
    if (it != m.word_index.end()) ids.push_back(it->second);
  }
  TopicEncoding enc;
  if (ids.empty()) {
    enc.theta.assign(k, 1.0 / static_cast<double>(k));
    enc.fallback = true;
    return enc;
  }

  // Frozen topic-word probabilities for the words in this document.
  const double veta = static_cast<double>(v) * m.eta;
  std::vector<double> phi(ids.size() * k);
  for (std::size_t n = 0; n < ids.size(); ++n) {
    for (std::size_t t = 0; t < k; ++t) {
      phi[n * k + t] = (m.topic_word[t * v + ids[n]] + m.eta) / (m.topic_totals[t] + veta);
    }
  }

  Rng rng(seed);
  std::vector<std::uint32_t> z(ids.size());
  std::vector<std::uint32_t> counts(k, 0);
  for (auto& t : z) {
    t = static_cast<std::uint32_t>(rng.below(k));
    ++counts[t];
  }
  std::vector<double> cum(k);
  for (std::size_t s = 0; s < sweeps; ++s) {
    for (std::size_t n = 0; n < ids.size(); ++n) {
      --counts[z[n]];
      double acc = 0.0;
      for (std::size_t t = 0; t < k; ++t) {
        acc += (counts[t] + m.alpha) * phi[n * k + t];
        cum[t] = acc;
      }
      z[n] = static_cast<std::uint32_t>(sample_discrete(cum, rng));
      ++counts[z[n]];
    }
  }

  enc.theta.resize(k);
  double sum = 0.0;
  for (std::size_t t = 0; t < k; ++t) sum += enc.theta[t] = counts[t] + m.alpha;
  for (auto& x : enc.theta) x /= sum;
  return enc;
}

}  // namespace hprior::textprior
