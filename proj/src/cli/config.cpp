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

#include "cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "common/error.hpp"
#include "common/hash.hpp"

namespace hprior::cli {

namespace fs = std::filesystem;

const std::vector<KeyInfo>& known_keys() {
  static const std::vector<KeyInfo> keys{
      {"data.path", "", "review dump (TSV or JSON lines)"},
      {"data.format", "tsv", "tsv or jsonl"},
      {"data.name", "", "dataset label for the stats table (default: file stem)"},
      {"data.threshold", "3", "ratings strictly above this are positives"},
      {"data.min_star", "1", "lowest valid rating"},
      {"data.max_star", "5", "highest valid rating"},
      {"data.max_malformed", "0.1", "largest tolerated share of malformed lines"},
      {"data.min_user", "5", "minimum positives per user"},
      {"data.min_item", "5", "minimum positive raters per item"},
      {"data.english_only", "false", "drop reviews failing the ASCII-letter heuristic"},
      {"split.seed", "1", "seed for user splits and fold-in partitions"},
      {"split.val_fraction", "0.1", "share of users held out for validation"},
      {"split.test_fraction", "0.1", "share of users held out for testing"},
      {"split.fold_in", "0.8", "share of an evaluation user's items shown to the model"},
      {"prior.source", "none", "none, embedding, lda or random"},
      {"prior.embeddings", "", "word vectors ('word v1 ... vK' per line)"},
      {"prior.stop_words", "", "optional stop-word list"},
      {"prior.sigma_floor", "0.1", "minimum prior standard deviation"},
      {"prior.seed", "1", "seed for LDA and random priors"},
      {"prior.lda.topics", "300", "number of LDA topics"},
      {"prior.lda.alpha", "0", "document-topic concentration (0 = 50/topics)"},
      {"prior.lda.eta", "0.01", "topic-word concentration"},
      {"prior.lda.sweeps", "200", "Gibbs sweeps over the corpus"},
      {"prior.lda.infer_sweeps", "50", "Gibbs sweeps per folded-in document"},
      {"model.mode", "mult_vae", "mult_vae, hprior, rp, tr, dae, mf, rand or text_knn"},
      {"model.name", "", "run label (default: the mode)"},
      {"model.latent", "300", "latent dimension K"},
      {"model.hidden", "600", "hidden layer width"},
      {"train.batch_size", "500", "users per minibatch"},
      {"train.epochs", "50", "passes over the training users"},
      {"train.lr", "0.001", "Adam learning rate"},
      {"train.beta_max", "1.0", "final KL weight"},
      {"train.anneal_fraction", "0.8", "share of steps over which beta ramps up"},
      {"train.anneal_steps", "0", "explicit ramp length in steps (0 = use the fraction)"},
      {"train.gamma", "0.01", "text-distance weight for tr"},
      {"train.dropout", "0.5", "input dropout rate"},
      {"train.normalize_input", "true", "L2-normalize input rows"},
      {"train.sample_at_eval", "false", "rank with a sampled z instead of the mean"},
      {"train.seed", "1", "seed for initialization, batching, dropout and noise"},
      {"mf.factors", "100", "MF latent factors"},
      {"mf.lr", "0.01", "MF SGD learning rate"},
      {"mf.l2", "0.0001", "MF L2 weight"},
      {"mf.negatives", "4", "sampled unobserved entries per positive"},
      {"mf.epochs", "20", "MF passes"},
      {"mf.batch_users", "1000", "users per MF minibatch"},
      {"mf.biases", "false", "learn user and item biases"},
      {"mf.init_scale", "0.1", "std of the initial factors"},
      {"eval.split", "test", "test or validation"},
      {"out.dir", "run", "run directory"},
  };
  return keys;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool known(const std::string& key) {
  const auto& keys = known_keys();
  return std::any_of(keys.begin(), keys.end(), [&](const KeyInfo& k) { return key == k.key; });
}

std::string closest_hint(const std::string& key) {
  std::string best;
  std::size_t best_common = 0;
  for (const auto& k : known_keys()) {
    std::string_view cand = k.key;
    std::size_t common = 0;
    while (common < cand.size() && common < key.size() && cand[common] == key[common]) ++common;
    if (common > best_common) {
      best_common = common;
      best = k.key;
    }
  }
  return best.empty() ? "" : detail::concat(" (did you mean '", best, "'?)");
}

}  // namespace

ConfigMap ConfigMap::parse(const std::string& text, const std::string& origin) {
  ConfigMap m;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    require(eq != std::string::npos, ErrorKind::Config, origin, ":", lineno, ": expected 'key = value'");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    require(known(key), ErrorKind::Config, origin, ":", lineno, ": unknown key '", key, "'", closest_hint(key));
    m.values_[key] = trim(std::string_view(t).substr(eq + 1));
  }
  return m;
}

ConfigMap ConfigMap::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorKind::Io, "cannot read config '", path, "'");
  std::stringstream ss;
  ss << in.rdbuf();
  ConfigMap m = parse(ss.str(), path);
  const auto parent = fs::path(path).parent_path();
  m.base_dir_ = parent.empty() ? "." : parent.string();
  return m;
}

void ConfigMap::set(const std::string& assignment) {
  const auto eq = assignment.find('=');
  require(eq != std::string::npos, ErrorKind::Config, "override '", assignment, "' is not key=value");
  set(trim(std::string_view(assignment).substr(0, eq)), trim(std::string_view(assignment).substr(eq + 1)));
}

void ConfigMap::set(const std::string& key, const std::string& value) {
  require(known(key), ErrorKind::Config, "unknown key '", key, "'", closest_hint(key));
  values_[key] = value;
}

const std::string& ConfigMap::get(const std::string& key) const {
  auto it = values_.find(key);
  require(it != values_.end(), ErrorKind::Config, "missing key '", key, "'");
  return it->second;
}

const char* prior_choice_name(PriorChoice p) {
  switch (p) {
    case PriorChoice::None: return "none";
    case PriorChoice::Embedding: return "embedding";
    case PriorChoice::Lda: return "lda";
    case PriorChoice::Random: return "random";
  }
  return "?";
}

namespace {

struct Reader {
  const std::map<std::string, std::string>& values;

  const std::string& str(const char* key) const { return values.at(key); }

  template <class T>
  T number(const char* key) const {
    const std::string& s = str(key);
    T out{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    require(ec == std::errc() && p == s.data() + s.size(), ErrorKind::Config, "key '", key, "': '", s,
            "' is not a valid number");
    return out;
  }

  bool flag(const char* key) const {
    const std::string& s = str(key);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    raise(ErrorKind::Config, "key '", key, "': '", s, "' is not a boolean");
  }
};

std::string resolve_path(const std::string& base, const std::string& p) {
  if (p.empty()) return p;
  fs::path path(p);
  if (path.is_absolute()) return p;
  return (fs::path(base) / path).lexically_normal().string();
}

std::string hash_keys(const std::map<std::string, std::string>& values, const std::vector<std::string>& prefixes,
                      std::uint64_t seed) {
  std::uint64_t h = seed;
  for (const auto& [k, v] : values) {
    const bool take = std::any_of(prefixes.begin(), prefixes.end(), [&](const std::string& p) {
      return k.rfind(p, 0) == 0;
    });
    if (!take) continue;
    h = fnv1a64(k, h);
    h = fnv1a64("=", h);
    h = fnv1a64(v, h);
    h = fnv1a64("\n", h);
  }
  return hex64(h);
}

std::uint64_t parse_hex(const std::string& s) {
  std::uint64_t v = 0;
  std::from_chars(s.data(), s.data() + s.size(), v, 16);
  return v;
}

}  // namespace

RunConfig RunConfig::from(const ConfigMap& map) {
  std::map<std::string, std::string> values;
  for (const auto& k : known_keys()) values[k.key] = k.fallback;
  for (const auto& [k, v] : map.values()) values[k] = v;
  const Reader r{values};
  RunConfig c;

  c.data_path = resolve_path(map.base_dir(), r.str("data.path"));
  c.format.format = corpus::parse_format(r.str("data.format"));
  c.format.min_star = r.number<int>("data.min_star");
  c.format.max_star = r.number<int>("data.max_star");
  c.format.max_malformed_fraction = r.number<double>("data.max_malformed");
  c.data_name = r.str("data.name");
  if (c.data_name.empty() && !c.data_path.empty()) c.data_name = fs::path(c.data_path).stem().string();
  c.threshold = r.number<int>("data.threshold");
  c.min_user = r.number<std::size_t>("data.min_user");
  c.min_item = r.number<std::size_t>("data.min_item");
  c.english_only = r.flag("data.english_only");

  c.split_seed = r.number<std::uint64_t>("split.seed");
  c.val_fraction = r.number<double>("split.val_fraction");
  c.test_fraction = r.number<double>("split.test_fraction");
  c.fold_in = r.number<double>("split.fold_in");

  const std::string& src = r.str("prior.source");
  if (src == "none") c.prior = PriorChoice::None;
  else if (src == "embedding") c.prior = PriorChoice::Embedding;
  else if (src == "lda") c.prior = PriorChoice::Lda;
  else if (src == "random") c.prior = PriorChoice::Random;
  else raise(ErrorKind::Config, "prior.source must be none, embedding, lda or random, got '", src, "'");
  c.embeddings_path = resolve_path(map.base_dir(), r.str("prior.embeddings"));
  c.stop_words_path = resolve_path(map.base_dir(), r.str("prior.stop_words"));
  c.sigma_floor = r.number<double>("prior.sigma_floor");
  c.prior_seed = r.number<std::uint64_t>("prior.seed");
  c.lda.topics = r.number<std::size_t>("prior.lda.topics");
  c.lda.alpha = r.number<double>("prior.lda.alpha");
  c.lda.eta = r.number<double>("prior.lda.eta");
  c.lda.sweeps = r.number<std::size_t>("prior.lda.sweeps");
  c.lda.infer_sweeps = r.number<std::size_t>("prior.lda.infer_sweeps");
  c.lda.seed = c.prior_seed;

  c.model_mode = r.str("model.mode");
  if (c.model_mode == "mf") c.kind = ModelKind::Mf;
  else if (c.model_mode == "rand") c.kind = ModelKind::Rand;
  else if (c.model_mode == "text_knn") c.kind = ModelKind::TextKnn;
  else {
    c.kind = ModelKind::Vae;
    c.train.mode = hpvae::parse_mode(c.model_mode);
  }
  c.model_name = r.str("model.name").empty() ? c.model_mode : r.str("model.name");
  c.train.latent = r.number<std::size_t>("model.latent");
  c.train.hidden = r.number<std::size_t>("model.hidden");
  c.train.batch_size = r.number<std::size_t>("train.batch_size");
  c.train.epochs = r.number<std::size_t>("train.epochs");
  c.train.adam.lr = r.number<double>("train.lr");
  c.train.beta_max = r.number<double>("train.beta_max");
  c.train.anneal_fraction = r.number<double>("train.anneal_fraction");
  c.train.anneal_steps = r.number<std::size_t>("train.anneal_steps");
  c.train.gamma = r.number<double>("train.gamma");
  c.train.dropout = r.number<double>("train.dropout");
  c.train.normalize_input = r.flag("train.normalize_input");
  c.train.sample_at_eval = r.flag("train.sample_at_eval");
  c.train.seed = r.number<std::uint64_t>("train.seed");

  c.mf.factors = r.number<std::size_t>("mf.factors");
  c.mf.lr = r.number<double>("mf.lr");
  c.mf.l2 = r.number<double>("mf.l2");
  c.mf.negatives = r.number<std::size_t>("mf.negatives");
  c.mf.epochs = r.number<std::size_t>("mf.epochs");
  c.mf.batch_users = r.number<std::size_t>("mf.batch_users");
  c.mf.biases = r.flag("mf.biases");
  c.mf.init_scale = r.number<double>("mf.init_scale");
  c.mf.seed = c.train.seed;

  c.eval_split = r.str("eval.split");
  c.out_dir = resolve_path(map.base_dir(), r.str("out.dir"));

  c.resolved = values;
  c.resolved["data.path"] = c.data_path;
  c.resolved["prior.embeddings"] = c.embeddings_path;
  c.resolved["prior.stop_words"] = c.stop_words_path;
  c.resolved["out.dir"] = c.out_dir;
  return c;
}

bool RunConfig::uses_prior_table() const {
  return kind == ModelKind::Vae && hpvae::needs_prior_table(train.mode);
}

std::string RunConfig::text_feature() const {
  if (kind == ModelKind::TextKnn) return "embedding";
  if (kind == ModelKind::Vae && train.mode == hpvae::Mode::Rp) return "random";
  if (uses_prior_table()) return prior_choice_name(prior);
  return "-";
}

void RunConfig::validate() const {
  require(!data_path.empty(), ErrorKind::Config, "data.path is not set");
  require(fs::is_regular_file(data_path), ErrorKind::Io, "data.path: no such file '", data_path, "'");
  require(format.min_star <= threshold && threshold <= format.max_star, ErrorKind::Config, "data.threshold ",
          threshold, " lies outside the star range [", format.min_star, ", ", format.max_star, "]");
  require(min_user >= 1 && min_item >= 1, ErrorKind::Config, "data.min_user and data.min_item must be >= 1");
  require(val_fraction > 0 && test_fraction > 0 && val_fraction + test_fraction < 1, ErrorKind::Config,
          "split fractions must be positive and sum below 1");
  require(fold_in > 0 && fold_in < 1, ErrorKind::Config, "split.fold_in must lie in (0, 1)");
  require(sigma_floor > 0, ErrorKind::Config, "prior.sigma_floor must be positive");
  require(eval_split == "test" || eval_split == "validation", ErrorKind::Config,
          "eval.split must be test or validation, got '", eval_split, "'");
  require(!out_dir.empty(), ErrorKind::Config, "out.dir is not set");
  if (uses_prior_table()) {
    require(prior != PriorChoice::None, ErrorKind::Config, "model.mode ", model_mode,
            " needs prior.source = embedding, lda or random");
  }
  if (prior == PriorChoice::Embedding || kind == ModelKind::TextKnn) {
    require(!embeddings_path.empty(), ErrorKind::Config, "prior.embeddings is not set");
  }
  if (!embeddings_path.empty()) {
    require(fs::is_regular_file(embeddings_path), ErrorKind::Io, "prior.embeddings: no such file '",
            embeddings_path, "'");
  }
  if (!stop_words_path.empty()) {
    require(fs::is_regular_file(stop_words_path), ErrorKind::Io, "prior.stop_words: no such file '",
            stop_words_path, "'");
  }
  if (prior == PriorChoice::Lda) {
    require(lda.topics >= 2, ErrorKind::Config, "prior.lda.topics must be >= 2");
    require(lda.topics == train.latent, ErrorKind::Config, "prior.lda.topics (", lda.topics,
            ") must equal model.latent (", train.latent, ")");
  }
  if (kind == ModelKind::Vae) {
    require(train.latent > 0 && train.hidden > 0, ErrorKind::Config, "model dimensions must be positive");
    require(train.batch_size > 0 && train.epochs > 0, ErrorKind::Config,
            "train.batch_size and train.epochs must be positive");
    require(train.adam.lr > 0, ErrorKind::Config, "train.lr must be positive");
    require(train.beta_max >= 0 && train.gamma >= 0, ErrorKind::Config, "train.beta_max and train.gamma must be >= 0");
    require(train.dropout >= 0 && train.dropout < 1, ErrorKind::Config, "train.dropout must lie in [0, 1)");
    require(train.anneal_fraction >= 0 && train.anneal_fraction <= 1, ErrorKind::Config,
            "train.anneal_fraction must lie in [0, 1]");
  }
  if (kind == ModelKind::Mf) {
    require(mf.factors >= 1 && mf.lr > 0 && mf.l2 >= 0 && mf.epochs >= 1 && mf.batch_users >= 1, ErrorKind::Config,
            "invalid MF settings");
  }
}

std::string RunConfig::resolved_text() const {
  std::ostringstream out;
  for (const auto& [k, v] : resolved) out << k << " = " << v << '\n';
  return out.str();
}

std::string RunConfig::data_hash() const {
  // The input file contents are part of the data identity.
  std::uint64_t h = kFnvOffset;
  std::ifstream in(data_path, std::ios::binary);
  if (in.good()) {
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
      h = fnv1a64(std::string_view(buf, static_cast<std::size_t>(in.gcount())), h);
    }
  }
  std::map<std::string, std::string> v = resolved;
  v.erase("data.path");
  v.erase("data.name");
  return hash_keys(v, {"data.", "split."}, h);
}

std::string RunConfig::prior_hash() const {
  std::map<std::string, std::string> v = resolved;
  v.erase("prior.embeddings");
  v.erase("prior.stop_words");
  return hash_keys(v, {"prior.", "model.latent"}, parse_hex(data_hash()));
}

std::string RunConfig::train_hash() const {
  const std::uint64_t base = parse_hex(uses_prior_table() ? prior_hash() : data_hash());
  std::vector<std::string> prefixes{"model.mode", "model.latent"};
  if (kind == ModelKind::Vae) {
    prefixes.push_back("model.hidden");
    prefixes.push_back("train.");
  } else if (kind == ModelKind::Mf) {
    prefixes.push_back("mf.");
    prefixes.push_back("train.seed");
  } else if (kind == ModelKind::Rand) {
    prefixes.push_back("train.seed");
  }
  return hash_keys(resolved, prefixes, base);
}

std::string RunConfig::data_dir() const { return (fs::path(out_dir) / "data").string(); }
std::string RunConfig::prior_dir() const { return (fs::path(out_dir) / "priors").string(); }
std::string RunConfig::model_dir() const { return (fs::path(out_dir) / "models" / model_name).string(); }
std::string RunConfig::report_dir() const { return (fs::path(out_dir) / "reports").string(); }

}  // namespace hprior::cli
