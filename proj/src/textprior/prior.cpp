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

#include "textprior/prior.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"

#include "common/error.hpp"
#include "common/rng.hpp"

namespace hprior::textprior {

using nlohmann::json;

const char* source_name(PriorSource s) {
  switch (s) {
    case PriorSource::Embedding: return "embedding";
    case PriorSource::Lda: return "lda";
    case PriorSource::Random: return "random";
    case PriorSource::Standard: return "standard";
  }
  return "?";
}

PriorSource parse_source(std::string_view name) {
  if (name == "embedding") return PriorSource::Embedding;
  if (name == "lda") return PriorSource::Lda;
  if (name == "random") return PriorSource::Random;
  if (name == "standard") return PriorSource::Standard;
  raise(ErrorKind::Config, "unknown prior source '", name, "'");
}

UserPrior standard_prior(std::size_t dim) {
  return {std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0), PriorSource::Standard};
}

std::optional<UserPrior> gaussian_from_samples(const std::vector<std::vector<double>>& vectors,
                                               PriorSource source, double sigma_floor) {
  if (vectors.empty()) return std::nullopt;
  const std::size_t d = vectors.front().size();
  const double n = static_cast<double>(vectors.size());
  UserPrior p{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0), source};
  for (const auto& v : vectors) {
    require(v.size() == d, ErrorKind::Shape, "sample vectors disagree in dimension: ", v.size(), " vs ", d);
    for (std::size_t k = 0; k < d; ++k) p.mean[k] += v[k];
  }
  for (auto& m : p.mean) m /= n;
  for (const auto& v : vectors) {
    for (std::size_t k = 0; k < d; ++k) {
      const double dv = v[k] - p.mean[k];
      p.std[k] += dv * dv;
    }
  }
  for (auto& s : p.std) s = std::max(std::sqrt(s / n), sigma_floor);
  return p;
}

std::optional<UserPrior> user_prior_embeddings(const std::vector<std::vector<double>>& review_embeddings,
                                               double sigma_floor) {
  return gaussian_from_samples(review_embeddings, PriorSource::Embedding, sigma_floor);
}

UserPrior user_prior_lda(const std::vector<double>& document_topics,
                         const std::vector<std::vector<double>>& review_topics, double sigma_floor) {
  UserPrior p;
  if (auto g = gaussian_from_samples(review_topics, PriorSource::Lda, sigma_floor)) {
    p = std::move(*g);
    require(p.dim() == document_topics.size(), ErrorKind::Shape, "topic vectors disagree in dimension");
  } else {
    p.std.assign(document_topics.size(), sigma_floor);
    p.source = PriorSource::Lda;
  }
  p.mean = document_topics;
  return p;
}

UserPrior user_prior_random(std::uint64_t seed, std::uint32_t user, std::size_t dim) {
  Rng rng(derive_seed(seed, 0x7a9d000000000000ULL + user));
  UserPrior p{std::vector<double>(dim), std::vector<double>(dim, 1.0), PriorSource::Random};
  for (auto& m : p.mean) m = rng.normal();
  return p;
}

void z_normalize_users(std::vector<UserPrior>& priors, double sigma_floor) {
  std::vector<UserPrior*> active;
  for (auto& p : priors) {
    if (p.source != PriorSource::Standard) active.push_back(&p);
  }
  if (active.size() < 2) return;
  const std::size_t d = active.front()->dim();
  const double n = static_cast<double>(active.size());
  for (std::size_t k = 0; k < d; ++k) {
    double mean = 0.0;
    for (auto* p : active) mean += p->mean[k];
    mean /= n;
    double var = 0.0;
    for (auto* p : active) var += (p->mean[k] - mean) * (p->mean[k] - mean);
    const double sd = std::sqrt(var / n);
    const double scale = sd > 1e-12 ? 1.0 / sd : 1.0;
    for (auto* p : active) {
      p->mean[k] = sd > 1e-12 ? (p->mean[k] - mean) * scale : 0.0;
      p->std[k] = std::max(p->std[k] * scale, sigma_floor);
    }
  }
}

void validate_prior(const UserPrior& p, double sigma_floor) {
  require(p.mean.size() == p.std.size(), ErrorKind::Shape, "prior mean/std dimension mismatch");
  for (std::size_t k = 0; k < p.dim(); ++k) {
    require(std::isfinite(p.mean[k]) && std::isfinite(p.std[k]), ErrorKind::Numeric,
            "non-finite prior entry at dimension ", k);
    require(p.std[k] >= sigma_floor, ErrorKind::Numeric, "prior std ", p.std[k], " below floor ", sigma_floor);
  }
}

std::size_t PriorTable::count(PriorSource s) const {
  return static_cast<std::size_t>(
      std::count_if(users.begin(), users.end(), [s](const UserPrior& p) { return p.source == s; }));
}

void save_prior_table(const std::string& path, const PriorTable& t) {
  json users = json::array();
  for (const auto& p : t.users) {
    users.push_back({{"source", source_name(p.source)}, {"mean", p.mean}, {"std", p.std}});
  }
  json j = {{"format", "hprior-priors"},
            {"version", kPriorArtifactVersion},
            {"dim", t.dim},
            {"sigma_floor", t.sigma_floor},
            {"source", t.source},
            {"data_hash", t.data_hash},
            {"prior_hash", t.prior_hash},
            {"users", users}};
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorKind::Io, "cannot write '", path, "'");
  out << j.dump() << '\n';
  require(out.good(), ErrorKind::Io, "write to '", path, "' failed");
}

PriorTable load_prior_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorKind::Io, "cannot read '", path, "'");
  json j = json::parse(in, nullptr, false);
  require(!j.is_discarded() && j.is_object(), ErrorKind::Format, "'", path, "' is not valid JSON");
  require(j.value("format", "") == "hprior-priors", ErrorKind::Format, "'", path, "' is not a prior table");
  require(j.value("version", -1) == kPriorArtifactVersion, ErrorKind::Format, "'", path,
          "' has unsupported version");
  PriorTable t;
  try {
    t.dim = j.at("dim").get<std::size_t>();
    t.sigma_floor = j.at("sigma_floor").get<double>();
    t.source = j.at("source").get<std::string>();
    t.data_hash = j.at("data_hash").get<std::string>();
    t.prior_hash = j.at("prior_hash").get<std::string>();
    for (const auto& u : j.at("users")) {
      UserPrior p{u.at("mean").get<std::vector<double>>(), u.at("std").get<std::vector<double>>(),
                  parse_source(u.at("source").get<std::string>())};
      require(p.dim() == t.dim, ErrorKind::Format, "'", path, "': prior of dimension ", p.dim(),
              " in a table of dimension ", t.dim);
      validate_prior(p, t.sigma_floor);
      t.users.push_back(std::move(p));
    }
  } catch (const json::exception& e) {
    raise(ErrorKind::Format, "'", path, "': ", e.what());
  }
  return t;
}

}  // namespace hprior::textprior
