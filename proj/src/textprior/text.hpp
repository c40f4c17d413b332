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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace hprior::textprior {

using Tokens = std::vector<std::string>;

struct TokenizerOptions {
  std::size_t min_length = 2;  // in code points
  const std::unordered_set<std::string>* stop_words = nullptr;
};

/// Lowercased alphanumeric runs of at least `min_length` code points.
Tokens tokenize(std::string_view text, const TokenizerOptions& opts = {});

std::unordered_set<std::string> load_stop_words(const std::string& path);

/// Pretrained word vectors keyed by lowercased word.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }

  /// Returns false (and ignores the vector) if the word is already present.
  bool add(const std::string& word, std::span<const double> vec);
  std::optional<std::span<const double>> lookup(std::string_view word) const;
  const std::vector<std::string>& words() const { return words_; }

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> words_;
  std::vector<double> data_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Text format "word v1 ... vK" per line; an optional leading "count dim"
/// header is skipped. Words are case-folded; the first occurrence wins.
EmbeddingTable load_embeddings(const std::string& path);
void save_embeddings(const std::string& path, const EmbeddingTable& table);

/// Mean of the in-vocabulary token vectors; nullopt if none is known.
std::optional<std::vector<double>> review_embedding(const Tokens& tokens, const EmbeddingTable& table);

}  // namespace hprior::textprior
