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
#include <map>
#include <string>
#include <vector>

#include "baselines/baselines.hpp"
#include "corpus/reviews.hpp"
#include "hpvae/trainer.hpp"
#include "textprior/lda.hpp"

namespace hprior::cli {

/// Flat `key = value` settings. Lines starting with '#' are comments.
class ConfigMap {
 public:
  static ConfigMap parse(const std::string& text, const std::string& origin = "<text>");
  static ConfigMap load(const std::string& path);

  /// "key=value" override; the key must be known.
  void set(const std::string& assignment);
  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const std::string& get(const std::string& key) const;
  const std::map<std::string, std::string>& values() const { return values_; }
  /// Directory that relative paths resolve against.
  const std::string& base_dir() const { return base_dir_; }
  void set_base_dir(std::string dir) { base_dir_ = std::move(dir); }

 private:
  std::map<std::string, std::string> values_;
  std::string base_dir_ = ".";
};

struct KeyInfo {
  const char* key;
  const char* fallback;
  const char* help;
};

const std::vector<KeyInfo>& known_keys();

enum class PriorChoice { None, Embedding, Lda, Random };
const char* prior_choice_name(PriorChoice p);

/// Model families the CLI can train and evaluate.
enum class ModelKind { Vae, Mf, Rand, TextKnn };

struct RunConfig {
  // data
  std::string data_path;
  std::string data_name;
  corpus::FormatSpec format;
  int threshold = 3;
  std::size_t min_user = 5;
  std::size_t min_item = 5;
  bool english_only = false;
  // split
  std::uint64_t split_seed = 1;
  double val_fraction = 0.1;
  double test_fraction = 0.1;
  double fold_in = 0.8;
  // priors
  PriorChoice prior = PriorChoice::None;
  std::string embeddings_path;
  std::string stop_words_path;
  double sigma_floor = 0.1;
  textprior::LdaConfig lda;
  std::uint64_t prior_seed = 1;
  // model
  ModelKind kind = ModelKind::Vae;
  std::string model_mode;  // as written in the config
  std::string model_name;
  hpvae::TrainConfig train;
  baselines::MfConfig mf;
  // evaluation and output
  std::string eval_split = "test";
  std::string out_dir;

  std::map<std::string, std::string> resolved;  // every key with its final value

  static RunConfig from(const ConfigMap& map);

  /// Mode/prior compatibility and value ranges. Throws Config errors.
  void validate() const;

  bool uses_prior_table() const;
  bool uses_text_index() const { return kind == ModelKind::TextKnn; }
  std::string text_feature() const;

  std::string resolved_text() const;
  /// Stage hashes: each covers the keys its stage reads plus upstream.
  std::string data_hash() const;
  std::string prior_hash() const;
  std::string train_hash() const;

  std::string data_dir() const;
  std::string prior_dir() const;
  std::string model_dir() const;
  std::string report_dir() const;
};

}  // namespace hprior::cli
