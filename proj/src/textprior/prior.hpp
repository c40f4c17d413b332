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
#include <string>
#include <string_view>
#include <vector>

namespace hprior::textprior {

inline constexpr double kDefaultSigmaFloor = 0.1;

enum class PriorSource { Embedding, Lda, Random, Standard };

const char* source_name(PriorSource s);
PriorSource parse_source(std::string_view name);

/// Diagonal Gaussian N(mean, diag(std^2)).
struct UserPrior {
  std::vector<double> mean;
  std::vector<double> std;
  PriorSource source = PriorSource::Standard;

  std::size_t dim() const { return mean.size(); }
};

UserPrior standard_prior(std::size_t dim);

/// Elementwise mean and population std of `vectors`, std floored at
/// `sigma_floor`. Returns nullopt when `vectors` is empty.
std::optional<UserPrior> gaussian_from_samples(const std::vector<std::vector<double>>& vectors,
                                               PriorSource source, double sigma_floor = kDefaultSigmaFloor);

std::optional<UserPrior> user_prior_embeddings(const std::vector<std::vector<double>>& review_embeddings,
                                               double sigma_floor = kDefaultSigmaFloor);

/// Mean from the concatenated-document encoding, std from the per-review
/// encodings.
UserPrior user_prior_lda(const std::vector<double>& document_topics,
                         const std::vector<std::vector<double>>& review_topics,
                         double sigma_floor = kDefaultSigmaFloor);

UserPrior user_prior_random(std::uint64_t seed, std::uint32_t user, std::size_t dim);

/// Per-dimension z-scoring of the means across all priors whose source is
/// not Standard. Stds are divided by the same per-dimension scale and then
/// floored again. Dimensions with zero spread are only centered.
void z_normalize_users(std::vector<UserPrior>& priors, double sigma_floor = kDefaultSigmaFloor);

/// Throws unless every entry is finite and every std is >= sigma_floor.
void validate_prior(const UserPrior& p, double sigma_floor = kDefaultSigmaFloor);

struct PriorTable {
  std::size_t dim = 0;
  double sigma_floor = kDefaultSigmaFloor;
  std::string source;  // embedding, lda, or random
  std::string data_hash;
  std::string prior_hash;
  std::vector<UserPrior> users;  // indexed by matrix user index

  std::size_t count(PriorSource s) const;
};

inline constexpr int kPriorArtifactVersion = 1;

void save_prior_table(const std::string& path, const PriorTable& t);
PriorTable load_prior_table(const std::string& path);

}  // namespace hprior::textprior
