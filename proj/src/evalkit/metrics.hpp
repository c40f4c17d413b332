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
#include <vector>

#include "corpus/matrix.hpp"

namespace hprior::evalkit {

using Ranking = std::vector<std::uint32_t>;
using corpus::ItemList;

/// |top-k ∩ held_out| / min(k, |held_out|). `held_out` must be sorted.
double recall_at_k(std::span<const std::uint32_t> ranking, const ItemList& held_out, std::size_t k);

/// Binary-relevance DCG@k with 1/log2(r+1) discount, divided by the ideal
/// DCG for |held_out| relevant items. `held_out` must be sorted.
double ndcg_at_k(std::span<const std::uint32_t> ranking, const ItemList& held_out, std::size_t k);

/// Items by descending score; items in `exclude` (sorted) go after all
/// others; ties broken by ascending item index.
Ranking rank_by_scores(std::span<const double> scores, const ItemList& exclude);

/// Throws unless `ranking` is a permutation of [0, n) with every excluded
/// item placed after every other item.
void check_ranking(std::span<const std::uint32_t> ranking, std::size_t n, const ItemList& exclude);

}  // namespace hprior::evalkit
