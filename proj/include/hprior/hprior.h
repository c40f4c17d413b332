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

#ifndef HPRIOR_HPRIOR_H_
#define HPRIOR_HPRIOR_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define HP_API __declspec(dllexport)
#else
#define HP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hp_status {
  HP_OK = 0,
  HP_ERR_ARGUMENT = 1,
  HP_ERR_SHAPE = 2,
  HP_ERR_NUMERIC = 3,
  HP_ERR_USAGE = 4,
  HP_ERR_IO = 5,
  HP_ERR_FORMAT = 6,
  HP_ERR_DATA = 7,
  HP_ERR_CONFIG = 8,
  HP_ERR_INTERNAL = 9
} hp_status;

/* Message of the last failed call on this thread ("" if none). */
HP_API const char* hp_last_error(void);
HP_API const char* hp_status_name(hp_status status);
HP_API const char* hp_version(void);

/* 0 = quiet, 1 = progress, 2 = debug. Messages go to stderr. */
HP_API void hp_set_verbosity(int level);

/* ---- configuration ---- */

typedef struct hp_config hp_config;

HP_API hp_status hp_config_new(hp_config** out);
HP_API hp_status hp_config_load(const char* path, hp_config** out);
/* "key=value"; unknown keys are rejected. */
HP_API hp_status hp_config_set(hp_config* config, const char* assignment);
HP_API hp_status hp_config_validate(const hp_config* config);
/* Every key with its final value, one "key = value" per line. The string
   stays valid until the next call on this thread. */
HP_API hp_status hp_config_resolved(const hp_config* config, const char** text);
HP_API void hp_config_free(hp_config* config);

/* Known keys with defaults and descriptions, one per line. */
HP_API const char* hp_config_keys(void);

/* ---- pipeline commands ----
   Each writes under the configured run directory and sets *summary to a
   human-readable summary valid until the next call on this thread. */

HP_API hp_status hp_cmd_prepare(const hp_config* config, const char** summary);
HP_API hp_status hp_cmd_priors(const hp_config* config, const char** summary);
HP_API hp_status hp_cmd_train(const hp_config* config, const char** summary);
HP_API hp_status hp_cmd_eval(const hp_config* config, const char** summary);
HP_API hp_status hp_cmd_report(const hp_config* config, const char** summary);

/* ---- synthetic fixture ---- */

typedef struct hp_fixture_options {
  size_t users;
  size_t clusters;
  size_t items_per_cluster;
  size_t dim;
  uint64_t seed;
} hp_fixture_options;

HP_API void hp_fixture_defaults(hp_fixture_options* options);
/* Writes reviews.tsv, embeddings.txt, truth.json and hprior.conf. */
HP_API hp_status hp_fixture_write(const char* dir, const hp_fixture_options* options, const char** summary);

/* ---- ranking metrics ----
   ranking: item indices best first; held_out: relevant items. */

HP_API hp_status hp_recall_at_k(const uint32_t* ranking, size_t n_ranking, const uint32_t* held_out,
                                size_t n_held_out, size_t k, double* out);
HP_API hp_status hp_ndcg_at_k(const uint32_t* ranking, size_t n_ranking, const uint32_t* held_out,
                              size_t n_held_out, size_t k, double* out);

/* ---- trained autoencoder models ---- */

typedef struct hp_model hp_model;

HP_API hp_status hp_model_load(const char* checkpoint_path, hp_model** out);
HP_API size_t hp_model_items(const hp_model* model);
HP_API size_t hp_model_latent(const hp_model* model);
/* Writes all n_items item indices, best first, with observed items last. */
HP_API hp_status hp_model_rank(const hp_model* model, const uint32_t* observed, size_t n_observed,
                               uint32_t* ranking, size_t capacity);
/* Posterior mean of the latent user vector; capacity >= latent. */
HP_API hp_status hp_model_encode(const hp_model* model, const uint32_t* observed, size_t n_observed,
                                 double* z, size_t capacity);
HP_API void hp_model_free(hp_model* model);

#ifdef __cplusplus
}
#endif

#endif /* HPRIOR_HPRIOR_H_ */
