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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>
#include <vector>

namespace hprior::testing {

/// DCG of `ranking` truncated at k with binary relevance.
inline double brute_dcg(const std::vector<std::uint32_t>& ranking, const std::set<std::uint32_t>& relevant,
                        std::size_t k) {
  double dcg = 0.0;
  for (std::size_t r = 0; r < std::min(k, ranking.size()); ++r) {
    if (relevant.count(ranking[r])) dcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
  }
  return dcg;
}

/// Largest DCG over every permutation of the universe {0..n-1}.
inline double brute_ideal_dcg(std::size_t n, const std::set<std::uint32_t>& relevant, std::size_t k) {
  std::vector<std::uint32_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0u);
  double best = 0.0;
  do {
    best = std::max(best, brute_dcg(perm, relevant, k));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

inline std::size_t brute_hits(const std::vector<std::uint32_t>& ranking, const std::set<std::uint32_t>& relevant,
                              std::size_t k) {
  std::size_t h = 0;
  for (std::size_t i = 0; i < std::min(k, ranking.size()); ++i) h += relevant.count(ranking[i]);
  return h;
}

/// Largest hit count in the top k over every permutation.
inline std::size_t brute_best_hits(std::size_t n, const std::set<std::uint32_t>& relevant, std::size_t k) {
  std::vector<std::uint32_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0u);
  std::size_t best = 0;
  do {
    best = std::max(best, brute_hits(perm, relevant, k));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

inline double brute_ndcg(const std::vector<std::uint32_t>& ranking, const std::set<std::uint32_t>& relevant,
                         std::size_t k) {
  return brute_dcg(ranking, relevant, k) / brute_ideal_dcg(ranking.size(), relevant, k);
}

/// Recall with the denominator taken as the best hit count over all
/// permutations, which equals min(k, |relevant|).
inline double brute_recall(const std::vector<std::uint32_t>& ranking, const std::set<std::uint32_t>& relevant,
                           std::size_t k) {
  return static_cast<double>(brute_hits(ranking, relevant, k)) /
         static_cast<double>(brute_best_hits(ranking.size(), relevant, k));
}

}  // namespace hprior::testing
