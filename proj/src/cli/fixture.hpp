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

namespace hprior::cli {

/// Synthetic review corpus with cluster-structured ratings and
/// cluster-specific vocabularies.
struct FixtureConfig {
  std::size_t users = 500;
  std::size_t clusters = 4;
  std::size_t items_per_cluster = 100;
  std::size_t dim = 8;  // latent and embedding dimension; >= clusters
  std::size_t min_positives = 8;
  std::size_t max_positives = 16;
  std::size_t words_per_cluster = 200;
  std::size_t common_words = 30;
  double common_share = 0.1;
  double oov_fraction = 0.1;
  double centroid_scale = 2.5;
  double spread = 0.8;
  double affinity = 1.0;  // weight of a_u . v_i in the rating logits
  double word_noise = 1.0;
  double text_sharpness = 1.5;   // multiplier on word-choice logits
  double user_text_weight = 0.9;  // review topic mix: w * a_u + (1 - w) * v_i
  std::size_t min_item = 5;  // every item gets at least this many positives
  std::uint64_t seed = 1;
};

struct FixtureTruth {
  std::size_t users = 0;
  std::size_t items = 0;
  std::size_t positives = 0;
  std::size_t reviews = 0;  // positives plus low-rated reviews
  std::size_t vocabulary = 0;
  std::size_t embedded_words = 0;
};

/// Writes reviews.tsv, embeddings.txt, truth.json and hprior.conf into
/// `dir` (created if needed).
FixtureTruth write_fixture(const std::string& dir, const FixtureConfig& config);

FixtureTruth load_fixture_truth(const std::string& path);

}  // namespace hprior::cli
