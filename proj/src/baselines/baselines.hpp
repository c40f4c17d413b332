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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "corpus/matrix.hpp"
#include "evalkit/report.hpp"

namespace hprior::baselines {

using corpus::ItemList;
using evalkit::Ranking;

/// Seeded uniform permutation of [0, n).
Ranking rand_rank(std::size_t n_items, std::uint64_t seed);

/// Per-user random permutation with observed items moved last.
class RandRanker : public evalkit::Ranker {
 public:
  RandRanker(std::size_t n_items, std::uint64_t seed) : n_items_(n_items), seed_(seed) {}
  void rank(std::span<const corpus::EvalUser> users, std::vector<Ranking>& out) override;

 private:
  std::size_t n_items_;
  std::uint64_t seed_;
};

struct MfConfig {
  std::size_t factors = 100;
  double lr = 0.01;
  double l2 = 1e-4;
  std::size_t negatives = 4;
  std::size_t epochs = 20;
  std::size_t batch_users = 1000;
  bool biases = false;
  double init_scale = 0.1;
  std::uint64_t seed = 0;
};

struct MfModel {
  std::size_t n_users = 0, n_items = 0, factors = 0;
  bool biases = false;
  std::vector<double> user_factors;  // n_users x factors
  std::vector<double> item_factors;  // n_items x factors
  std::vector<double> user_bias, item_bias;
  double global_bias = 0.0;

  double predict(std::uint32_t user, std::uint32_t item) const;
};

struct MfResult {
  MfModel model;
  std::vector<double> epoch_loss;  // mean squared error over sampled entries
};

/// SGD on squared error over positives plus sampled unobserved entries,
/// with L2 regularization. Users are visited in shuffled mini-batches.
MfResult mf_train(std::span<const ItemList> rows, std::size_t n_items, const MfConfig& config);

Ranking mf_rank(const MfModel& model, std::uint32_t user, const ItemList& exclude);

class MfRanker : public evalkit::Ranker {
 public:
  explicit MfRanker(const MfModel& model) : model_(model) {}
  void rank(std::span<const corpus::EvalUser> users, std::vector<Ranking>& out) override;

 private:
  const MfModel& model_;
};

void save_mf(const std::string& path, const MfModel& m, const std::string& config_hash);
MfModel load_mf(const std::string& path, std::string* config_hash = nullptr);

struct TextReview {
  std::uint32_t user = 0;
  std::uint32_t item = 0;
  std::vector<double> embedding;
};

struct TextKnnIndex {
  std::size_t dim = 0;
  std::vector<std::vector<double>> items;  // empty vector = no text
  std::vector<std::vector<double>> users;

  bool item_has_text(std::uint32_t i) const { return !items[i].empty(); }
  bool user_has_text(std::uint32_t u) const { return !users[u].empty(); }
};

/// Item and user vectors are the means of the embeddings of the reviews
/// they are associated with.
TextKnnIndex build_text_knn(std::size_t n_users, std::size_t n_items, std::size_t dim,
                            std::span<const TextReview> reviews);

/// Descending cosine similarity; items without text after all items with
/// text; a user without text gets index order. `no_text` reports the latter.
Ranking text_knn_rank(std::span<const double> user_vector, const TextKnnIndex& index, const ItemList& exclude,
                      bool* no_text = nullptr);

class TextKnnRanker : public evalkit::Ranker {
 public:
  explicit TextKnnRanker(const TextKnnIndex& index) : index_(index) {}
  void rank(std::span<const corpus::EvalUser> users, std::vector<Ranking>& out) override;
  std::size_t users_without_text() const { return no_text_; }

 private:
  const TextKnnIndex& index_;
  std::size_t no_text_ = 0;
};

void save_text_knn(const std::string& path, const TextKnnIndex& index, const std::string& data_hash);
TextKnnIndex load_text_knn(const std::string& path, std::string* data_hash = nullptr);

}  // namespace hprior::baselines
