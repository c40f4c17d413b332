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
#include <vector>

#include "corpus/matrix.hpp"
#include "evalkit/metrics.hpp"

namespace hprior::evalkit {

/// Produces one ranking per evaluation user from the observed fold-in
/// items. Observed items must be ranked last.
class Ranker {
 public:
  virtual ~Ranker() = default;
  virtual void rank(std::span<const corpus::EvalUser> users, std::vector<Ranking>& out) = 0;
};

struct UserScores {
  std::uint32_t user = 0;
  double ndcg100 = 0.0;
  double recall20 = 0.0;
  double recall50 = 0.0;
};

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;  // population
};

struct EvalReport {
  std::string model;         // rand, mf, text_knn, mult_vae, hprior, rp, tr, dae
  std::string text_feature;  // embedding, lda, random, or "-"
  std::string split;         // test or validation
  std::string config_hash;
  std::size_t n_items = 0;
  std::size_t excluded_users = 0;
  std::vector<UserScores> users;
  MetricSummary ndcg100, recall20, recall50;
};

struct EvalOptions {
  std::size_t chunk = 256;
};

/// Fixed-order evaluation of `ranker` over the partition's users.
EvalReport evaluate(Ranker& ranker, const corpus::EvalPartition& partition, std::size_t n_items,
                    const EvalOptions& options = {});

MetricSummary summarize(std::span<const double> values);
void finalize(EvalReport& report);

std::string report_to_json(const EvalReport& r);
EvalReport report_from_json(const std::string& text);
void save_report(const std::string& path, const EvalReport& r);
EvalReport load_report(const std::string& path);

/// One row per report: model, text feature, NDCG@100, Recall@20, Recall@50
/// as "mean ± std".
std::string format_table(std::span<const EvalReport> reports);
/// `model=... text=... split=... metric=... mean=... std=... users=...`
std::string format_records(std::span<const EvalReport> reports);
std::string metric_definitions();

}  // namespace hprior::evalkit
