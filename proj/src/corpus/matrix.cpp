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

#include "corpus/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

#include "common/error.hpp"
#include "common/rng.hpp"

namespace hprior::corpus {

std::size_t InteractionMatrix::nnz() const {
  std::size_t n = 0;
  for (const auto& r : rows) n += r.size();
  return n;
}

double InteractionMatrix::density() const {
  if (n_users == 0 || n_items == 0) return 0.0;
  return static_cast<double>(nnz()) / (static_cast<double>(n_users) * static_cast<double>(n_items));
}

void InteractionMatrix::rebuild_index() {
  user_index.clear();
  item_index.clear();
  for (std::size_t u = 0; u < user_ids.size(); ++u) user_index[user_ids[u]] = static_cast<std::uint32_t>(u);
  for (std::size_t i = 0; i < item_ids.size(); ++i) item_index[item_ids[i]] = static_cast<std::uint32_t>(i);
}

void InteractionMatrix::validate() const {
  require(rows.size() == n_users && user_ids.size() == n_users && item_ids.size() == n_items,
          ErrorKind::Data, "matrix dimensions disagree with index maps");
  require(user_index.size() == n_users && item_index.size() == n_items, ErrorKind::Data,
          "duplicate ids in matrix index maps");
  for (std::size_t u = 0; u < n_users; ++u) {
    const auto& r = rows[u];
    require(!r.empty(), ErrorKind::Data, "user '", user_ids[u], "' has an empty row");
    for (std::size_t k = 0; k < r.size(); ++k) {
      require(r[k] < n_items, ErrorKind::Data, "item index out of range in row ", u);
      require(k == 0 || r[k - 1] < r[k], ErrorKind::Data, "row ", u, " is not strictly increasing");
    }
  }
}

InteractionMatrix build_matrix(const std::vector<ReviewRecord>& records) {
  InteractionMatrix m;
  std::vector<std::set<std::uint32_t>> sets;
  for (const auto& r : records) {
    if (r.rating != 1) continue;
    auto [uit, unew] = m.user_index.try_emplace(r.user_id, static_cast<std::uint32_t>(m.user_ids.size()));
    if (unew) {
      m.user_ids.push_back(r.user_id);
      sets.emplace_back();
    }
    auto [iit, inew] = m.item_index.try_emplace(r.item_id, static_cast<std::uint32_t>(m.item_ids.size()));
    if (inew) m.item_ids.push_back(r.item_id);
    sets[uit->second].insert(iit->second);
  }
  m.n_users = m.user_ids.size();
  m.n_items = m.item_ids.size();
  m.rows.reserve(sets.size());
  for (const auto& s : sets) m.rows.emplace_back(s.begin(), s.end());
  return m;
}

DatasetStats stats_of(const std::vector<ReviewRecord>& records) {
  std::set<std::string> users, items;
  for (const auto& r : records) {
    users.insert(r.user_id);
    items.insert(r.item_id);
  }
  DatasetStats s{users.size(), items.size(), records.size(), 0.0};
  if (s.users && s.items) {
    s.sparsity_percent = 100.0 * static_cast<double>(s.ratings) /
                         (static_cast<double>(s.users) * static_cast<double>(s.items));
  }
  return s;
}

DatasetStats stats_of(const InteractionMatrix& m) {
  return {m.n_users, m.n_items, m.nnz(), 100.0 * m.density()};
}

std::string format_sparsity(double percent) {
  std::ostringstream os;
  if (percent != 0.0 && percent < 0.001) {
    os << std::setprecision(3) << std::scientific << percent << '%';
  } else {
    os << std::fixed << std::setprecision(3) << percent << '%';
  }
  return os.str();
}

SplitSpec split_users(const InteractionMatrix& m, std::uint64_t seed, double val_fraction,
                      double test_fraction) {
  const std::size_t n = m.n_users;
  require(n >= 10, ErrorKind::Data, "need at least 10 users to split, have ", n);
  require(val_fraction > 0 && test_fraction > 0 && val_fraction + test_fraction < 1,
          ErrorKind::Config, "invalid split fractions");
  std::vector<std::uint32_t> order(n);
  for (std::size_t u = 0; u < n; ++u) order[u] = static_cast<std::uint32_t>(u);
  Rng rng(derive_seed(seed, 0x5e11));
  rng.shuffle(order);

  auto count = [n](double frac) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(frac * static_cast<double>(n) + 1e-9)));
  };
  const std::size_t n_test = count(test_fraction);
  const std::size_t n_val = count(val_fraction);

  SplitSpec s;
  s.seed = seed;
  s.test_users.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  s.val_users.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test),
                     order.begin() + static_cast<std::ptrdiff_t>(n_test + n_val));
  s.train_users.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test + n_val), order.end());
  std::sort(s.train_users.begin(), s.train_users.end());
  std::sort(s.val_users.begin(), s.val_users.end());
  std::sort(s.test_users.begin(), s.test_users.end());
  return s;
}

FoldInPair fold_in_split(std::span<const std::uint32_t> row, double fraction, std::uint64_t seed) {
  const std::size_t n = row.size();
  require(n >= 2, ErrorKind::Data, "too-few-items: fold-in needs at least 2 positives, row has ", n);
  require(fraction > 0.0 && fraction < 1.0, ErrorKind::Argument, "fold-in fraction ", fraction,
          " outside (0, 1)");
  std::vector<std::uint32_t> items(row.begin(), row.end());
  Rng rng(seed);
  rng.shuffle(items);
  std::size_t n_obs = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
  n_obs = std::clamp<std::size_t>(n_obs, 1, n - 1);
  FoldInPair p;
  p.observed.assign(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(n_obs));
  p.held_out.assign(items.begin() + static_cast<std::ptrdiff_t>(n_obs), items.end());
  std::sort(p.observed.begin(), p.observed.end());
  std::sort(p.held_out.begin(), p.held_out.end());
  return p;
}

EvalPartition make_eval_partition(const InteractionMatrix& m, const SplitSpec& split,
                                  const std::vector<std::uint32_t>& users) {
  EvalPartition part;
  for (auto u : users) {
    require(u < m.n_users, ErrorKind::Data, "evaluation user ", u, " outside matrix");
    if (m.rows[u].size() < 2) {
      ++part.excluded;
      continue;
    }
    part.users.push_back({u, fold_in_split(m.rows[u], split.fold_in_fraction,
                                           derive_seed(split.seed, 0xf01d0000ULL + u))});
  }
  return part;
}

}  // namespace hprior::corpus
