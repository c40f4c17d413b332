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

#include "hprior/hprior.h"

#include <algorithm>
#include <exception>
#include <memory>
#include <new>
#include <sstream>
#include <string>

#include "cli/config.hpp"
#include "cli/fixture.hpp"
#include "cli/pipeline.hpp"
#include "common/error.hpp"
#include "common/log.hpp"
#include "evalkit/metrics.hpp"
#include "hpvae/trainer.hpp"
#include "numkit/checkpoint.hpp"

struct hp_config {
  hprior::cli::ConfigMap map;
};

struct hp_model {
  hprior::hpvae::VaeModel model;
  bool normalize_input = true;
};

namespace {

thread_local std::string t_error;
thread_local std::string t_output;

hp_status status_of(hprior::ErrorKind kind) {
  using hprior::ErrorKind;
  switch (kind) {
    case ErrorKind::Argument: return HP_ERR_ARGUMENT;
    case ErrorKind::Shape: return HP_ERR_SHAPE;
    case ErrorKind::Numeric: return HP_ERR_NUMERIC;
    case ErrorKind::Usage: return HP_ERR_USAGE;
    case ErrorKind::Io: return HP_ERR_IO;
    case ErrorKind::Format: return HP_ERR_FORMAT;
    case ErrorKind::Data: return HP_ERR_DATA;
    case ErrorKind::Config: return HP_ERR_CONFIG;
  }
  return HP_ERR_INTERNAL;
}

template <class F>
hp_status guarded(F&& f) {
  try {
    t_error.clear();
    f();
    return HP_OK;
  } catch (const hprior::Error& e) {
    t_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    t_error = "out of memory";
    return HP_ERR_INTERNAL;
  } catch (const std::exception& e) {
    t_error = e.what();
    return HP_ERR_INTERNAL;
  } catch (...) {
    t_error = "unknown failure";
    return HP_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  hprior::require(p != nullptr, hprior::ErrorKind::Argument, what, " must not be null");
}

hp_status run_command(const hp_config* config, const char** summary,
                      std::string (*cmd)(const hprior::cli::RunConfig&)) {
  return guarded([&] {
    need(config, "config");
    t_output = cmd(hprior::cli::RunConfig::from(config->map));
    if (summary) *summary = t_output.c_str();
  });
}

hprior::corpus::ItemList item_list(const uint32_t* items, size_t n) {
  if (n > 0) need(items, "item array");
  hprior::corpus::ItemList out(items, items + n);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

extern "C" {

const char* hp_last_error(void) { return t_error.c_str(); }

const char* hp_status_name(hp_status status) {
  switch (status) {
    case HP_OK: return "ok";
    case HP_ERR_ARGUMENT: return "argument";
    case HP_ERR_SHAPE: return "shape";
    case HP_ERR_NUMERIC: return "numeric";
    case HP_ERR_USAGE: return "usage";
    case HP_ERR_IO: return "io";
    case HP_ERR_FORMAT: return "format";
    case HP_ERR_DATA: return "data";
    case HP_ERR_CONFIG: return "config";
    case HP_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* hp_version(void) { return "0.1.0"; }

void hp_set_verbosity(int level) { hprior::set_verbosity(level); }

hp_status hp_config_new(hp_config** out) {
  return guarded([&] {
    need(out, "out");
    *out = new hp_config();
  });
}

hp_status hp_config_load(const char* path, hp_config** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new hp_config{hprior::cli::ConfigMap::load(path)};
  });
}

hp_status hp_config_set(hp_config* config, const char* assignment) {
  return guarded([&] {
    need(config, "config");
    need(assignment, "assignment");
    config->map.set(std::string(assignment));
  });
}

hp_status hp_config_validate(const hp_config* config) {
  return guarded([&] {
    need(config, "config");
    hprior::cli::RunConfig::from(config->map).validate();
  });
}

hp_status hp_config_resolved(const hp_config* config, const char** text) {
  return guarded([&] {
    need(config, "config");
    need(text, "text");
    t_output = hprior::cli::RunConfig::from(config->map).resolved_text();
    *text = t_output.c_str();
  });
}

void hp_config_free(hp_config* config) { delete config; }

const char* hp_config_keys(void) {
  static const std::string text = [] {
    std::ostringstream out;
    for (const auto& k : hprior::cli::known_keys()) {
      out << k.key << " = " << (*k.fallback ? k.fallback : "\"\"") << "  # " << k.help << '\n';
    }
    return out.str();
  }();
  return text.c_str();
}

hp_status hp_cmd_prepare(const hp_config* c, const char** s) { return run_command(c, s, hprior::cli::cmd_prepare); }
hp_status hp_cmd_priors(const hp_config* c, const char** s) { return run_command(c, s, hprior::cli::cmd_priors); }
hp_status hp_cmd_train(const hp_config* c, const char** s) { return run_command(c, s, hprior::cli::cmd_train); }
hp_status hp_cmd_eval(const hp_config* c, const char** s) { return run_command(c, s, hprior::cli::cmd_eval); }
hp_status hp_cmd_report(const hp_config* c, const char** s) { return run_command(c, s, hprior::cli::cmd_report); }

void hp_fixture_defaults(hp_fixture_options* options) {
  if (!options) return;
  const hprior::cli::FixtureConfig d;
  options->users = d.users;
  options->clusters = d.clusters;
  options->items_per_cluster = d.items_per_cluster;
  options->dim = d.dim;
  options->seed = d.seed;
}

hp_status hp_fixture_write(const char* dir, const hp_fixture_options* options, const char** summary) {
  return guarded([&] {
    need(dir, "dir");
    hprior::cli::FixtureConfig fc;
    if (options) {
      fc.users = options->users;
      fc.clusters = options->clusters;
      fc.items_per_cluster = options->items_per_cluster;
      fc.dim = options->dim;
      fc.seed = options->seed;
    }
    const auto t = hprior::cli::write_fixture(dir, fc);
    std::ostringstream out;
    out << "users=" << t.users << " items=" << t.items << " positives=" << t.positives << " reviews=" << t.reviews
        << " vocabulary=" << t.vocabulary << " embedded_words=" << t.embedded_words << '\n';
    t_output = out.str();
    if (summary) *summary = t_output.c_str();
  });
}

hp_status hp_recall_at_k(const uint32_t* ranking, size_t n_ranking, const uint32_t* held_out, size_t n_held_out,
                         size_t k, double* out) {
  return guarded([&] {
    if (n_ranking > 0) need(ranking, "ranking");
    need(out, "out");
    *out = hprior::evalkit::recall_at_k({ranking, n_ranking}, item_list(held_out, n_held_out), k);
  });
}

hp_status hp_ndcg_at_k(const uint32_t* ranking, size_t n_ranking, const uint32_t* held_out, size_t n_held_out,
                       size_t k, double* out) {
  return guarded([&] {
    if (n_ranking > 0) need(ranking, "ranking");
    need(out, "out");
    *out = hprior::evalkit::ndcg_at_k({ranking, n_ranking}, item_list(held_out, n_held_out), k);
  });
}

hp_status hp_model_load(const char* checkpoint_path, hp_model** out) {
  return guarded([&] {
    need(checkpoint_path, "checkpoint_path");
    need(out, "out");
    const auto ck = hprior::numkit::load_checkpoint(checkpoint_path);
    auto m = std::make_unique<hp_model>();
    m->model = hprior::hpvae::model_from_checkpoint(ck);
    auto it = ck.meta.find("normalize_input");
    m->normalize_input = it == ck.meta.end() || it->second != "0";
    *out = m.release();
  });
}

size_t hp_model_items(const hp_model* model) { return model ? model->model.arch.n_items : 0; }
size_t hp_model_latent(const hp_model* model) { return model ? model->model.arch.latent : 0; }

hp_status hp_model_rank(const hp_model* model, const uint32_t* observed, size_t n_observed, uint32_t* ranking,
                        size_t capacity) {
  return guarded([&] {
    need(model, "model");
    need(ranking, "ranking");
    const std::size_t n = model->model.arch.n_items;
    hprior::require(capacity >= n, hprior::ErrorKind::Argument, "ranking capacity ", capacity, " is below ", n,
                    " items");
    const auto obs = item_list(observed, n_observed);
    for (auto i : obs) hprior::require(i < n, hprior::ErrorKind::Argument, "item ", i, " is out of range");
    const hprior::corpus::ItemList rows[] = {obs};
    const auto z = hprior::hpvae::represent_users(model->model, rows, model->normalize_input);
    const auto logp = hprior::hpvae::decode_log_probs(model->model, z);
    const auto r = hprior::hpvae::rank_items(logp.row_view(0), obs);
    std::copy(r.begin(), r.end(), ranking);
  });
}

hp_status hp_model_encode(const hp_model* model, const uint32_t* observed, size_t n_observed, double* z,
                          size_t capacity) {
  return guarded([&] {
    need(model, "model");
    need(z, "z");
    const std::size_t k = model->model.arch.latent;
    hprior::require(capacity >= k, hprior::ErrorKind::Argument, "z capacity ", capacity, " is below ", k);
    const auto obs = item_list(observed, n_observed);
    for (auto i : obs) {
      hprior::require(i < model->model.arch.n_items, hprior::ErrorKind::Argument, "item ", i, " is out of range");
    }
    const hprior::corpus::ItemList rows[] = {obs};
    const auto mu = hprior::hpvae::represent_users(model->model, rows, model->normalize_input);
    std::copy(mu.values().begin(), mu.values().end(), z);
  });
}

void hp_model_free(hp_model* model) { delete model; }

}  // extern "C"
