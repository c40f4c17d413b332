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

#include <string>
#include <vector>

#include "common/rng.hpp"
#include "textprior/lda.hpp"

namespace hprior::testing {

struct TwoClusterCorpus {
  std::vector<textprior::Tokens> docs;
  std::vector<int> labels;  // 0 uses vocabulary A, 1 uses vocabulary B
};

inline std::string cluster_word(int cluster, std::size_t i) {
  return std::string(cluster == 0 ? "alpha" : "beta") + std::to_string(i);
}

/// Documents drawn uniformly from one of two disjoint vocabularies.
inline TwoClusterCorpus two_cluster_corpus(std::size_t n_docs, std::size_t doc_len, std::size_t vocab,
                                           std::uint64_t seed) {
  Rng rng(seed);
  TwoClusterCorpus c;
  for (std::size_t d = 0; d < n_docs; ++d) {
    const int label = static_cast<int>(d % 2);
    textprior::Tokens doc;
    for (std::size_t n = 0; n < doc_len; ++n) doc.push_back(cluster_word(label, rng.below(vocab)));
    c.docs.push_back(std::move(doc));
    c.labels.push_back(label);
  }
  return c;
}

/// Mass of topic `t` that falls on words of vocabulary `cluster`.
inline double topic_mass_on(const textprior::LdaModel& m, std::size_t t, int cluster) {
  const auto dist = m.topic_distribution(t);
  const std::string prefix = cluster == 0 ? "alpha" : "beta";
  double mass = 0.0;
  for (std::size_t w = 0; w < m.vocab_size(); ++w) {
    if (m.words[w].rfind(prefix, 0) == 0) mass += dist[w];
  }
  return mass;
}

/// Each topic's largest single-vocabulary share, minimised over topics.
inline double topic_purity(const textprior::LdaModel& m) {
  double worst = 1.0;
  for (std::size_t t = 0; t < m.k; ++t) {
    const double a = topic_mass_on(m, t, 0);
    worst = std::min(worst, std::max(a, 1.0 - a));
  }
  return worst;
}

/// Topic index whose mass is mostly on `cluster`.
inline std::size_t topic_for(const textprior::LdaModel& m, int cluster) {
  std::size_t best = 0;
  double best_mass = -1.0;
  for (std::size_t t = 0; t < m.k; ++t) {
    const double mass = topic_mass_on(m, t, cluster);
    if (mass > best_mass) best_mass = mass, best = t;
  }
  return best;
}

}  // namespace hprior::testing
