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
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "corpus/reviews.hpp"

namespace hprior::corpus {

using ItemList = std::vector<std::uint32_t>;

/// Binarized user x item matrix stored as sorted per-user positive lists.
struct InteractionMatrix {
  std::size_t n_users = 0;
  std::size_t n_items = 0;
  std::vector<ItemList> rows;
  std::vector<std::string> user_ids;
  std::vector<std::string> item_ids;
  std::unordered_map<std::string, std::uint32_t> user_index;
  std::unordered_map<std::string, std::uint32_t> item_index;

  std::size_t nnz() const;
  /// Fraction of non-empty entries, nnz / (U * I).
  double density() const;
  void rebuild_index();
  /// Throws a Data error when an invariant is violated.
  void validate() const;
};

/// Positive (rating == 1) records become entries; ids are indexed in order of
/// first appearance among positives and duplicates collapse.
InteractionMatrix build_matrix(const std::vector<ReviewRecord>& records);

struct DatasetStats {
  std::size_t users = 0;
  std::size_t items = 0;
  std::size_t ratings = 0;
  double sparsity_percent = 0.0;
};

DatasetStats stats_of(const std::vector<ReviewRecord>& records);
DatasetStats stats_of(const InteractionMatrix& m);
/// e.g. "0.104%"
std::string format_sparsity(double percent);

struct SplitSpec {
  std::vector<std::uint32_t> train_users;
  std::vector<std::uint32_t> val_users;
  std::vector<std::uint32_t> test_users;
  double fold_in_fraction = 0.8;
  std::uint64_t seed = 0;
};

/// Seeded shuffle, then the first floor(U * test_fraction) users go to test,
/// the next floor(U * val_fraction) to validation (each at least one) and
/// the rest to training. Each set is returned sorted.
SplitSpec split_users(const InteractionMatrix& m, std::uint64_t seed, double val_fraction = 0.1,
                      double test_fraction = 0.1);

struct FoldInPair {
  ItemList observed;
  ItemList held_out;
};

/// observed gets ceil(fraction * n) items, capped at n - 1 so that held_out
/// is never empty. Throws a Data error ("too-few-items") for n < 2.
FoldInPair fold_in_split(std::span<const std::uint32_t> row, double fraction, std::uint64_t seed);

struct EvalUser {
  std::uint32_t user = 0;
  FoldInPair pair;
};

struct EvalPartition {
  std::vector<EvalUser> users;
  std::size_t excluded = 0;
};

/// Fold-in pairs for every user in `users`, each with its own stream derived
/// from (split seed, user index).
EvalPartition make_eval_partition(const InteractionMatrix& m, const SplitSpec& split,
                                  const std::vector<std::uint32_t>& users);

}  // namespace hprior::corpus
