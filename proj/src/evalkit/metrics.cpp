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

#include "evalkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "common/error.hpp"

namespace hprior::evalkit {

namespace {

bool contains(const ItemList& sorted, std::uint32_t item) {
  return std::binary_search(sorted.begin(), sorted.end(), item);
}

void check_held_out(const ItemList& held_out, std::size_t k) {
  require(!held_out.empty(), ErrorKind::Argument, "metric needs a non-empty held-out set");
  require(k > 0, ErrorKind::Argument, "metric cutoff k must be positive");
}

}  // namespace

double recall_at_k(std::span<const std::uint32_t> ranking, const ItemList& held_out, std::size_t k) {
  check_held_out(held_out, k);
  const std::size_t top = std::min(k, ranking.size());
  std::size_t hits = 0;
  for (std::size_t r = 0; r < top; ++r) hits += contains(held_out, ranking[r]);
  return static_cast<double>(hits) / static_cast<double>(std::min(k, held_out.size()));
}

double ndcg_at_k(std::span<const std::uint32_t> ranking, const ItemList& held_out, std::size_t k) {
  check_held_out(held_out, k);
  const std::size_t top = std::min(k, ranking.size());
  double dcg = 0.0;
  for (std::size_t r = 0; r < top; ++r) {
    if (contains(held_out, ranking[r])) dcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
  }
  double idcg = 0.0;
  const std::size_t ideal = std::min(k, held_out.size());
  for (std::size_t r = 0; r < ideal; ++r) idcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
  return dcg / idcg;
}

Ranking rank_by_scores(std::span<const double> scores, const ItemList& exclude) {
  Ranking order(scores.size());
  std::iota(order.begin(), order.end(), 0u);
  auto excluded = [&](std::uint32_t i) { return contains(exclude, i); };
  auto mid = std::stable_partition(order.begin(), order.end(), [&](std::uint32_t i) { return !excluded(i); });
  std::stable_sort(order.begin(), mid, [&](std::uint32_t a, std::uint32_t b) { return scores[a] > scores[b]; });
  return order;
}

void check_ranking(std::span<const std::uint32_t> ranking, std::size_t n, const ItemList& exclude) {
  require(ranking.size() == n, ErrorKind::Data, "ranking has ", ranking.size(), " entries, expected ", n);
  std::vector<char> seen(n, 0);
  bool in_tail = false;
  for (auto item : ranking) {
    require(item < n && !seen[item], ErrorKind::Data, "ranking is not a permutation (item ", item, ")");
    seen[item] = 1;
    const bool ex = contains(exclude, item);
    require(ex || !in_tail, ErrorKind::Data, "excluded item ranked above item ", item);
    in_tail = in_tail || ex;
  }
}

}  // namespace hprior::evalkit
