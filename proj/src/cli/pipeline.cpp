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

#include "cli/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "baselines/baselines.hpp"
#include "common/error.hpp"
#include "common/log.hpp"
#include "common/rng.hpp"
#include "corpus/artifacts.hpp"
#include "json.hpp"
#include "numkit/checkpoint.hpp"
#include "textprior/lda.hpp"
#include "textprior/prior.hpp"
#include "textprior/text.hpp"

namespace hprior::cli {

namespace fs = std::filesystem;

namespace {

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorKind::Io, "cannot write '", path, "'");
  out << text;
  require(out.good(), ErrorKind::Io, "write to '", path, "' failed");
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorKind::Io, "cannot read '", path, "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_resolved(const RunConfig& c, const std::string& dir) {
  write_text(join(dir, "config.resolved"), c.resolved_text());
}

struct Prepared {
  corpus::MatrixArtifact matrix;
  corpus::SplitArtifact split;
};

Prepared load_prepared(const RunConfig& c) {
  const std::string mpath = join(c.data_dir(), "matrix.json");
  require(fs::exists(mpath), ErrorKind::Config, "no prepared data at '", mpath, "'; run prepare first");
  Prepared p;
  p.matrix = corpus::load_matrix(mpath);
  const std::string want = c.data_hash();
  require(p.matrix.data_hash == want, ErrorKind::Config, "prepared data hash ", p.matrix.data_hash,
          " does not match the current data settings (", want, "); rerun prepare");
  p.split = corpus::load_split(join(c.data_dir(), "split.json"));
  require(p.split.data_hash == want, ErrorKind::Config, "split hash ", p.split.data_hash,
          " does not match the current data settings (", want, "); rerun prepare");
  return p;
}

const corpus::EvalPartition& eval_partition(const RunConfig& c, const Prepared& p) {
  return c.eval_split == "validation" ? p.split.validation : p.split.test;
}

// Reviews whose (user, item) is visible to the models: everything except the
// held-out items of evaluation users.
struct VisibleReview {
  std::uint32_t user;
  std::uint32_t item;
  textprior::Tokens tokens;
};

std::vector<VisibleReview> visible_reviews(const RunConfig& c, const Prepared& p) {
  const auto& m = p.matrix.matrix;
  std::vector<std::unordered_set<std::uint32_t>> hidden(m.n_users);
  for (const auto* part : {&p.split.validation, &p.split.test}) {
    for (const auto& u : part->users) hidden[u.user].insert(u.pair.held_out.begin(), u.pair.held_out.end());
  }
  std::unordered_set<std::string> stop;
  if (!c.stop_words_path.empty()) stop = textprior::load_stop_words(c.stop_words_path);
  textprior::TokenizerOptions opts;
  if (!stop.empty()) opts.stop_words = &stop;

  corpus::FormatSpec spec = c.format;
  spec.format = corpus::InputFormat::Tsv;
  auto loaded = corpus::load_reviews(join(c.data_dir(), "reviews.tsv"), spec);
  std::vector<VisibleReview> out;
  for (const auto& r : loaded.records) {
    auto u = m.user_index.find(r.user_id);
    auto i = m.item_index.find(r.item_id);
    if (u == m.user_index.end() || i == m.item_index.end()) continue;
    if (hidden[u->second].count(i->second)) continue;
    out.push_back({u->second, i->second, textprior::tokenize(r.text, opts)});
  }
  return out;
}

std::string stats_table(const std::string& name, const corpus::DatasetStats& s) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-12s %8s %8s %10s %10s\n%-12s %8zu %8zu %10zu %10s\n", "Dataset", "Users",
                "Items", "Ratings", "Sparsity", name.c_str(), s.users, s.items, s.ratings,
                corpus::format_sparsity(s.sparsity_percent).c_str());
  return buf;
}

void require_prior_table(const RunConfig& c) {
  const std::string path = join(c.prior_dir(), "priors.json");
  require(fs::exists(path), ErrorKind::Config, "model.mode ", c.model_mode, " needs a prior table but '", path,
          "' does not exist; run priors first");
}

textprior::PriorTable load_checked_priors(const RunConfig& c, std::size_t n_users) {
  require_prior_table(c);
  auto t = textprior::load_prior_table(join(c.prior_dir(), "priors.json"));
  const std::string want = c.prior_hash();
  require(t.prior_hash == want, ErrorKind::Config, "prior table hash ", t.prior_hash,
          " does not match the current prior settings (", want, "); rerun priors");
  require(t.dim == c.train.latent, ErrorKind::Config, "prior dimension ", t.dim, " differs from model.latent ",
          c.train.latent);
  require(t.users.size() == n_users, ErrorKind::Config, "prior table covers ", t.users.size(),
          " users but the matrix has ", n_users);
  return t;
}

}  // namespace

std::string cmd_prepare(const RunConfig& c) {
  c.validate();
  const std::string hash = c.data_hash();

  auto loaded = corpus::load_reviews(c.data_path, c.format);
  std::vector<corpus::ReviewRecord> records = std::move(loaded.records);
  std::size_t non_english = 0;
  if (c.english_only) {
    const auto before = records.size();
    std::erase_if(records, [](const corpus::ReviewRecord& r) { return !corpus::looks_english(r.text); });
    non_english = before - records.size();
  }
  const auto deduped = corpus::dedupe_latest(records);
  auto binary = corpus::binarize(deduped, c.threshold);
  std::erase_if(binary, [](const corpus::ReviewRecord& r) { return r.rating != 1; });
  const auto kept = corpus::apply_cutoffs(binary, c.min_user, c.min_item);

  corpus::MatrixArtifact ma{corpus::build_matrix(kept), hash};
  ma.matrix.validate();
  corpus::SplitArtifact sa;
  sa.split = corpus::split_users(ma.matrix, c.split_seed, c.val_fraction, c.test_fraction);
  sa.split.fold_in_fraction = c.fold_in;
  sa.validation = corpus::make_eval_partition(ma.matrix, sa.split, sa.split.val_users);
  sa.test = corpus::make_eval_partition(ma.matrix, sa.split, sa.split.test_users);
  sa.data_hash = hash;

  std::vector<corpus::ReviewRecord> text;
  for (const auto& r : deduped) {
    if (ma.matrix.user_index.count(r.user_id) && ma.matrix.item_index.count(r.item_id)) text.push_back(r);
  }

  const auto stats = corpus::stats_of(ma.matrix);
  fs::create_directories(c.data_dir());
  corpus::save_matrix(join(c.data_dir(), "matrix.json"), ma);
  corpus::save_split(join(c.data_dir(), "split.json"), sa);
  corpus::write_reviews_tsv(join(c.data_dir(), "reviews.tsv"), text);
  write_text(join(c.data_dir(), "stats.txt"), stats_table(c.data_name, stats));
  write_resolved(c, c.data_dir());

  std::ostringstream s;
  s << stats_table(c.data_name, stats);
  s << "lines=" << loaded.lines << " malformed=" << loaded.malformed << " non_english=" << non_english
    << " duplicates=" << records.size() - deduped.size() << " positives_kept=" << kept.size()
    << " text_reviews=" << text.size() << "\n";
  s << "split: train=" << sa.split.train_users.size() << " validation=" << sa.validation.users.size()
    << " test=" << sa.test.users.size() << " excluded=" << sa.validation.excluded + sa.test.excluded << "\n";
  return s.str();
}

std::string cmd_priors(const RunConfig& c) {
  c.validate();
  require(c.prior != PriorChoice::None || !c.embeddings_path.empty(), ErrorKind::Config,
          "nothing to build: set prior.source or prior.embeddings");
  const Prepared p = load_prepared(c);
  const auto& m = p.matrix.matrix;

  textprior::EmbeddingTable table;
  if (!c.embeddings_path.empty()) {
    table = textprior::load_embeddings(c.embeddings_path);
    if (c.prior == PriorChoice::Embedding) {
      require(table.dim() == c.train.latent, ErrorKind::Config, "word vectors have dimension ", table.dim(),
              " but model.latent is ", c.train.latent);
    }
  }
  if (c.prior == PriorChoice::Lda) {
    require(c.lda.topics == c.train.latent, ErrorKind::Config, "prior.lda.topics (", c.lda.topics,
            ") must equal model.latent (", c.train.latent, ")");
  }

  const auto reviews = visible_reviews(c, p);
  std::ostringstream s;
  std::vector<std::string> coverage;

  textprior::PriorTable t;
  t.dim = c.train.latent;
  t.sigma_floor = c.sigma_floor;
  t.source = prior_choice_name(c.prior);
  t.data_hash = p.matrix.data_hash;
  t.prior_hash = c.prior_hash();

  std::vector<std::vector<std::vector<double>>> by_user_vecs;
  if (!table.empty()) {
    by_user_vecs.resize(m.n_users);
    std::vector<baselines::TextReview> tr;
    std::size_t no_vec = 0;
    for (const auto& r : reviews) {
      auto e = textprior::review_embedding(r.tokens, table);
      if (!e) {
        ++no_vec;
        continue;
      }
      by_user_vecs[r.user].push_back(*e);
      tr.push_back({r.user, r.item, std::move(*e)});
    }
    auto index = baselines::build_text_knn(m.n_users, m.n_items, table.dim(), tr);
    std::size_t users_with = 0, items_with = 0;
    for (std::uint32_t u = 0; u < m.n_users; ++u) users_with += index.user_has_text(u);
    for (std::uint32_t i = 0; i < m.n_items; ++i) items_with += index.item_has_text(i);
    fs::create_directories(c.prior_dir());
    baselines::save_text_knn(join(c.prior_dir(), "textknn.json"), index, p.matrix.data_hash);
    std::ostringstream line;
    line << "text_index users_with_text=" << users_with << " items_with_text=" << items_with
         << " reviews_without_vectors=" << no_vec;
    coverage.push_back(line.str());
  }

  if (c.prior == PriorChoice::Embedding) {
    t.users.resize(m.n_users);
    for (std::uint32_t u = 0; u < m.n_users; ++u) {
      auto prior = textprior::user_prior_embeddings(by_user_vecs[u], c.sigma_floor);
      t.users[u] = prior ? std::move(*prior) : textprior::standard_prior(t.dim);
    }
    textprior::z_normalize_users(t.users, c.sigma_floor);
  } else if (c.prior == PriorChoice::Lda) {
    std::vector<textprior::Tokens> docs;
    std::vector<std::uint32_t> doc_user;
    for (const auto& r : reviews) {
      if (r.tokens.empty()) continue;
      docs.push_back(r.tokens);
      doc_user.push_back(r.user);
    }
    require(!docs.empty(), ErrorKind::Data, "no review text to fit topics on");
    textprior::LdaConfig lc = c.lda;
    lc.seed = derive_seed(c.prior_seed, 0x1da);
    log_info("fitting ", lc.topics, " topics on ", docs.size(), " reviews");
    const auto model = textprior::lda_train(docs, lc);
    std::vector<std::vector<std::size_t>> user_docs(m.n_users);
    for (std::size_t d = 0; d < docs.size(); ++d) user_docs[doc_user[d]].push_back(d);
    t.users.resize(m.n_users);
    for (std::uint32_t u = 0; u < m.n_users; ++u) {
      if (user_docs[u].empty()) {
        t.users[u] = textprior::standard_prior(t.dim);
        continue;
      }
      textprior::Tokens all;
      std::vector<std::vector<double>> per_review;
      for (auto d : user_docs[u]) {
        all.insert(all.end(), docs[d].begin(), docs[d].end());
        per_review.push_back(model.document_distribution(d));
      }
      const auto enc = textprior::lda_user_encoding(model, all, derive_seed(c.prior_seed, 0x1da0000 + u),
                                                    lc.infer_sweeps);
      t.users[u] = enc.fallback ? textprior::standard_prior(t.dim)
                                : textprior::user_prior_lda(enc.theta, per_review, c.sigma_floor);
    }
    textprior::z_normalize_users(t.users, c.sigma_floor);
    std::ostringstream line;
    line << "lda topics=" << lc.topics << " final_log_likelihood="
         << (model.log_likelihood.empty() ? 0.0 : model.log_likelihood.back());
    coverage.push_back(line.str());
  } else if (c.prior == PriorChoice::Random) {
    t.users = hpvae::random_priors(m.n_users, t.dim, c.prior_seed);
  }

  if (c.prior != PriorChoice::None) {
    for (const auto& u : t.users) textprior::validate_prior(u, c.sigma_floor);
    const std::size_t fallback = t.count(textprior::PriorSource::Standard);
    std::ostringstream line;
    line << "prior source=" << t.source << " users=" << t.users.size() << " with_text=" << t.users.size() - fallback
         << " fallback=" << fallback;
    coverage.push_back(line.str());
    if (fallback > 0) log_info(fallback, " user(s) have no usable text and keep the standard normal prior");
    fs::create_directories(c.prior_dir());
    textprior::save_prior_table(join(c.prior_dir(), "priors.json"), t);
  }

  std::string cov;
  for (const auto& l : coverage) cov += l + "\n";
  write_text(join(c.prior_dir(), "coverage.txt"), cov);
  write_resolved(c, c.prior_dir());
  s << cov;
  return s.str();
}

std::string cmd_train(const RunConfig& c) {
  c.validate();
  const Prepared p = load_prepared(c);
  const auto& m = p.matrix.matrix;
  textprior::PriorTable priors;
  if (c.uses_prior_table()) priors = load_checked_priors(c, m.n_users);
  const std::string hash = c.train_hash();
  const std::string dir = c.model_dir();
  std::ostringstream s;

  if (c.kind == ModelKind::Vae) {
    hpvae::TrainData data;
    data.matrix = &m;
    data.train_users = p.split.split.train_users;
    data.validation = &p.split.validation;
    data.priors = std::move(priors.users);

    fs::create_directories(dir);
    std::ofstream log(join(dir, "train.log"), std::ios::binary);
    std::ofstream curve(join(dir, "curve.tsv"), std::ios::binary);
    require(log.good() && curve.good(), ErrorKind::Io, "cannot write training logs under '", dir, "'");
    curve << "epoch\tloss\trecon\tkl\tdist\tbeta\tval_ndcg100\n";
    auto result = hpvae::train(data, c.train, [&](const hpvae::EpochLog& e) {
      log << hpvae::format_epoch(e) << '\n';
      log.flush();
      char buf[256];
      std::snprintf(buf, sizeof buf, "%zu\t%.9g\t%.9g\t%.9g\t%.9g\t%.9g\t%.9g\n", e.epoch, e.loss, e.recon, e.kl,
                    e.dist, e.beta, e.has_val ? e.val_ndcg100 : -1.0);
      curve << buf;
    });
    auto ck = hpvae::to_checkpoint(result, c.train, hash);
    ck.meta["data_hash"] = p.matrix.data_hash;
    numkit::save_checkpoint(join(dir, "model.ckpt"), ck);
    write_resolved(c, dir);
    if (result.faulted) {
      raise(ErrorKind::Numeric, "training stopped: ", result.fault, "; the last good parameters (epoch ",
            result.best_epoch, ") were saved to ", join(dir, "model.ckpt"));
    }
    s << "trained " << c.model_name << " for " << result.log.size() << " epoch(s); best epoch " << result.best_epoch;
    if (result.best_val >= 0) s << " with validation NDCG@100 " << result.best_val;
    s << "\n";
  } else if (c.kind == ModelKind::Mf) {
    std::vector<corpus::ItemList> rows(m.n_users);
    for (auto u : p.split.split.train_users) rows[u] = m.rows[u];
    for (const auto* part : {&p.split.validation, &p.split.test}) {
      for (const auto& u : part->users) rows[u.user] = u.pair.observed;
    }
    auto res = baselines::mf_train(rows, m.n_items, c.mf);
    fs::create_directories(dir);
    std::string log, curve = "epoch\tmse\n";
    for (std::size_t e = 0; e < res.epoch_loss.size(); ++e) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "epoch=%zu mse=%.6f\n", e + 1, res.epoch_loss[e]);
      log += buf;
      std::snprintf(buf, sizeof buf, "%zu\t%.9g\n", e + 1, res.epoch_loss[e]);
      curve += buf;
    }
    write_text(join(dir, "train.log"), log);
    write_text(join(dir, "curve.tsv"), curve);
    baselines::save_mf(join(dir, "model.json"), res.model, hash);
    write_resolved(c, dir);
    s << "trained mf for " << res.epoch_loss.size() << " epoch(s); final mse "
      << (res.epoch_loss.empty() ? 0.0 : res.epoch_loss.back()) << "\n";
  } else {
    if (c.kind == ModelKind::TextKnn) {
      require(fs::exists(join(c.prior_dir(), "textknn.json")), ErrorKind::Config,
              "text_knn needs the text index; run priors with prior.embeddings set");
    }
    fs::create_directories(dir);
    write_text(join(dir, "train.log"), "nothing to fit\n");
    write_resolved(c, dir);
    s << c.model_mode << " has no parameters to fit\n";
  }
  return s.str();
}

std::string report_path(const RunConfig& c) {
  return join(c.report_dir(), c.model_name + "-" + c.eval_split + ".json");
}

evalkit::EvalReport eval_report(const RunConfig& c) {
  c.validate();
  const Prepared p = load_prepared(c);
  const auto& m = p.matrix.matrix;
  const auto& part = eval_partition(c, p);
  const std::string hash = c.train_hash();

  evalkit::EvalReport rep;
  if (c.kind == ModelKind::Vae) {
    if (c.uses_prior_table()) load_checked_priors(c, m.n_users);
    const std::string path = join(c.model_dir(), "model.ckpt");
    require(fs::exists(path), ErrorKind::Config, "no checkpoint at '", path, "'; run train first");
    const auto ck = numkit::load_checkpoint(path);
    require(ck.config_hash == hash, ErrorKind::Config, "checkpoint config hash ", ck.config_hash,
            " does not match the current config hash ", hash, "; retrain or restore the settings");
    auto it = ck.meta.find("data_hash");
    require(it != ck.meta.end() && it->second == p.matrix.data_hash, ErrorKind::Config,
            "checkpoint was trained on different prepared data");
    const auto model = hpvae::model_from_checkpoint(ck);
    require(model.arch.n_items == m.n_items, ErrorKind::Config, "checkpoint has ", model.arch.n_items,
            " items but the matrix has ", m.n_items);
    hpvae::VaeRanker ranker(model, c.train.normalize_input, c.train.sample_at_eval, c.train.seed);
    rep = evalkit::evaluate(ranker, part, m.n_items);
  } else if (c.kind == ModelKind::Mf) {
    const std::string path = join(c.model_dir(), "model.json");
    require(fs::exists(path), ErrorKind::Config, "no model at '", path, "'; run train first");
    std::string stored;
    const auto model = baselines::load_mf(path, &stored);
    require(stored == hash, ErrorKind::Config, "model config hash ", stored, " does not match the current config hash ",
            hash, "; retrain or restore the settings");
    require(model.n_users == m.n_users && model.n_items == m.n_items, ErrorKind::Config,
            "model shape does not match the prepared matrix");
    baselines::MfRanker ranker(model);
    rep = evalkit::evaluate(ranker, part, m.n_items);
  } else if (c.kind == ModelKind::Rand) {
    baselines::RandRanker ranker(m.n_items, c.train.seed);
    rep = evalkit::evaluate(ranker, part, m.n_items);
  } else {
    const std::string path = join(c.prior_dir(), "textknn.json");
    require(fs::exists(path), ErrorKind::Config, "text_knn needs '", path,
            "'; run priors with prior.embeddings set");
    std::string stored;
    const auto index = baselines::load_text_knn(path, &stored);
    require(stored == p.matrix.data_hash, ErrorKind::Config, "text index data hash ", stored,
            " does not match the prepared data; rerun priors");
    baselines::TextKnnRanker ranker(index);
    rep = evalkit::evaluate(ranker, part, m.n_items);
    if (ranker.users_without_text() > 0) {
      log_info(ranker.users_without_text(), " evaluation user(s) have no text and get index order");
    }
  }
  rep.model = c.model_name;
  rep.text_feature = c.text_feature();
  rep.split = c.eval_split;
  rep.config_hash = hash;
  rep.excluded_users = part.excluded;
  return rep;
}

std::string cmd_eval(const RunConfig& c) {
  const auto rep = eval_report(c);
  fs::create_directories(c.report_dir());
  evalkit::save_report(report_path(c), rep);
  const std::span<const evalkit::EvalReport> one(&rep, 1);
  const std::string table = evalkit::format_table(one);
  write_text(join(c.report_dir(), c.model_name + "-" + c.eval_split + ".txt"),
             table + "\n" + evalkit::format_records(one));
  return table;
}

std::string cmd_report(const RunConfig& c) {
  c.validate();
  require(fs::is_directory(c.report_dir()), ErrorKind::Config, "no reports under '", c.report_dir(),
          "'; run eval first");
  std::vector<std::string> files;
  const std::string suffix = "-" + c.eval_split + ".json";
  for (const auto& e : fs::directory_iterator(c.report_dir())) {
    const std::string name = e.path().filename().string();
    if (name.size() > suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
      files.push_back(e.path().string());
    }
  }
  std::sort(files.begin(), files.end());
  require(!files.empty(), ErrorKind::Config, "no ", c.eval_split, " reports under '", c.report_dir(), "'");
  std::vector<evalkit::EvalReport> reports;
  for (const auto& f : files) reports.push_back(evalkit::load_report(f));

  const std::string table = evalkit::format_table(reports);
  write_text(join(c.report_dir(), "summary.txt"), table + "\n" + evalkit::metric_definitions());
  write_text(join(c.report_dir(), "summary.records"), evalkit::format_records(reports));

  // Training curves of every model directory, one block per model.
  std::string curves = "model\t";
  bool header = false;
  const fs::path models = fs::path(c.out_dir) / "models";
  if (fs::is_directory(models)) {
    std::vector<fs::path> dirs;
    for (const auto& e : fs::directory_iterator(models)) dirs.push_back(e.path());
    std::sort(dirs.begin(), dirs.end());
    for (const auto& d : dirs) {
      if (!fs::exists(d / "curve.tsv")) continue;
      std::istringstream in(read_text((d / "curve.tsv").string()));
      std::string line;
      std::getline(in, line);
      if (line.rfind("epoch\tloss", 0) != 0) continue;
      if (!header) {
        curves += line + "\n";
        header = true;
      }
      while (std::getline(in, line)) curves += d.filename().string() + "\t" + line + "\n";
    }
  }
  if (header) write_text(join(c.report_dir(), "curves.tsv"), curves);
  return table;
}

}  // namespace hprior::cli
