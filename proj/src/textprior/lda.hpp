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
#include <string>
#include <unordered_map>
#include <vector>

#include "textprior/text.hpp"

namespace hprior::textprior {

struct LdaConfig {
  std::size_t topics = 300;
  double alpha = 0.0;  // <= 0 means 50 / topics
  double eta = 0.01;
  std::size_t sweeps = 200;
  std::size_t infer_sweeps = 50;
  std::uint64_t seed = 0;

  double resolved_alpha() const { return alpha > 0.0 ? alpha : 50.0 / static_cast<double>(topics); }
};

struct LdaModel {
  std::size_t k = 0;
  double alpha = 0.0;
  double eta = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::string> words;
  std::unordered_map<std::string, std::uint32_t> word_index;
  std::vector<std::uint32_t> topic_word;    // k x V
  std::vector<std::uint32_t> topic_totals;  // k
  std::vector<std::uint32_t> doc_topic;     // D x k
  std::vector<double> log_likelihood;       // one entry per sweep

  std::size_t vocab_size() const { return words.size(); }
  std::size_t n_docs() const { return k ? doc_topic.size() / k : 0; }
  /// Smoothed word distribution of topic `t`, length V.
  std::vector<double> topic_distribution(std::size_t t) const;
  /// Smoothed topic proportions of training document `d`.
  std::vector<double> document_distribution(std::size_t d) const;
};

LdaModel lda_train(const std::vector<Tokens>& docs, const LdaConfig& config);

/// log p(w | z) under the model's current assignments.
double lda_log_likelihood(const LdaModel& model);

struct TopicEncoding {
  std::vector<double> theta;
  bool fallback = false;  // no in-vocabulary tokens; theta is uniform
};

/// Fold-in Gibbs inference with topic-word counts held fixed.
TopicEncoding lda_user_encoding(const LdaModel& model, const Tokens& doc, std::uint64_t seed,
                                std::size_t sweeps = 50);

}  // namespace hprior::textprior
