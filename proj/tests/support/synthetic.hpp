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
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "common/rng.hpp"
#include "corpus/matrix.hpp"

namespace hprior::testing {

/// Users draw most of their items from one of `clusters` equal item blocks.
inline corpus::InteractionMatrix cluster_matrix(std::size_t users, std::size_t items, std::size_t clusters,
                                                std::size_t per_user, double in_cluster, std::uint64_t seed,
                                                std::vector<std::size_t>* labels = nullptr) {
  Rng rng(seed);
  corpus::InteractionMatrix m;
  m.n_users = users;
  m.n_items = items;
  m.rows.resize(users);
  const std::size_t block = items / clusters;
  for (std::size_t u = 0; u < users; ++u) {
    const std::size_t c = u % clusters;
    if (labels) labels->push_back(c);
    std::vector<char> taken(items, 0);
    for (std::size_t n = 0; n < per_user; ++n) {
      std::uint32_t item;
      do {
        item = rng.uniform() < in_cluster ? static_cast<std::uint32_t>(c * block + rng.below(block))
                                          : static_cast<std::uint32_t>(rng.below(items));
      } while (taken[item]);
      taken[item] = 1;
      m.rows[u].push_back(item);
    }
    std::sort(m.rows[u].begin(), m.rows[u].end());
    m.user_ids.push_back("u" + std::to_string(u));
  }
  for (std::size_t i = 0; i < items; ++i) m.item_ids.push_back("i" + std::to_string(i));
  m.rebuild_index();
  return m;
}

inline std::vector<std::uint32_t> iota_users(std::size_t n, std::size_t from = 0) {
  std::vector<std::uint32_t> v(n);
  std::iota(v.begin(), v.end(), static_cast<std::uint32_t>(from));
  return v;
}

}  // namespace hprior::testing
