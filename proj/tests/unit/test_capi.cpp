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

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"

#include "hprior/hprior.h"

namespace fs = std::filesystem;

namespace {

std::string last_error() { return hp_last_error(); }

}  // namespace

TEST_CASE("status names and version") {
  CHECK(std::string(hp_status_name(HP_OK)) == "ok");
  CHECK(std::string(hp_status_name(HP_ERR_CONFIG)) == "config");
  CHECK(std::string(hp_version()).size() > 0);
  CHECK(std::string(hp_config_keys()).find("model.mode") != std::string::npos);
}

TEST_CASE("metrics through the C interface") {
  const uint32_t ranking[] = {4, 2, 0, 1, 3};
  const uint32_t held[] = {2, 3};
  double r = -1.0;
  REQUIRE(hp_recall_at_k(ranking, 5, held, 2, 2, &r) == HP_OK);
  CHECK(r == doctest::Approx(0.5));
  double n = -1.0;
  REQUIRE(hp_ndcg_at_k(ranking, 5, held, 2, 5, &n) == HP_OK);
  const double dcg = 1.0 / std::log2(3.0) + 1.0 / std::log2(6.0);
  const double idcg = 1.0 + 1.0 / std::log2(3.0);
  CHECK(n == doctest::Approx(dcg / idcg).epsilon(1e-12));

  CHECK(hp_recall_at_k(ranking, 5, held, 2, 2, nullptr) == HP_ERR_ARGUMENT);
  CHECK(last_error().find("out") != std::string::npos);
  CHECK(hp_recall_at_k(ranking, 5, held, 2, 0, &r) != HP_OK);
  REQUIRE(hp_recall_at_k(ranking, 5, held, 2, 2, &r) == HP_OK);
  CHECK(last_error().empty());
}

TEST_CASE("configuration errors carry status and message") {
  hp_config* cfg = nullptr;
  CHECK(hp_config_load("/nonexistent/hprior.conf", &cfg) == HP_ERR_IO);
  CHECK(last_error().find("/nonexistent/hprior.conf") != std::string::npos);
  CHECK(cfg == nullptr);

  REQUIRE(hp_config_new(&cfg) == HP_OK);
  CHECK(hp_config_set(cfg, "train.lrate=1") == HP_ERR_CONFIG);
  CHECK(hp_config_set(cfg, "model.mode=hprior") == HP_OK);
  CHECK(hp_config_validate(cfg) == HP_ERR_CONFIG);
  const char* text = nullptr;
  REQUIRE(hp_config_resolved(cfg, &text) == HP_OK);
  CHECK(std::string(text).find("model.mode = hprior") != std::string::npos);
  hp_config_free(cfg);
  CHECK(hp_config_validate(nullptr) == HP_ERR_ARGUMENT);
}

TEST_CASE("fixture, pipeline commands and model queries") {
  const auto dir = fs::temp_directory_path() / "hprior_capi_tests";
  fs::remove_all(dir);
  hp_fixture_options opts;
  hp_fixture_defaults(&opts);
  opts.users = 200;
  const char* summary = nullptr;
  REQUIRE(hp_fixture_write(dir.string().c_str(), &opts, &summary) == HP_OK);
  CHECK(std::string(summary).find("users=200") != std::string::npos);

  hp_config* cfg = nullptr;
  REQUIRE(hp_config_load((dir / "hprior.conf").string().c_str(), &cfg) == HP_OK);
  REQUIRE(hp_config_set(cfg, "train.epochs=3") == HP_OK);
  REQUIRE(hp_config_set(cfg, "model.mode=hprior") == HP_OK);

  CHECK(hp_cmd_train(cfg, &summary) != HP_OK);
  REQUIRE_MESSAGE(hp_cmd_prepare(cfg, &summary) == HP_OK, last_error());
  REQUIRE_MESSAGE(hp_cmd_priors(cfg, &summary) == HP_OK, last_error());
  REQUIRE_MESSAGE(hp_cmd_train(cfg, &summary) == HP_OK, last_error());
  REQUIRE_MESSAGE(hp_cmd_eval(cfg, &summary) == HP_OK, last_error());
  REQUIRE_MESSAGE(hp_cmd_report(cfg, &summary) == HP_OK, last_error());
  CHECK(std::string(summary).find("hprior") != std::string::npos);
  hp_config_free(cfg);

  hp_model* model = nullptr;
  CHECK(hp_model_load((dir / "nothing.ckpt").string().c_str(), &model) == HP_ERR_IO);
  REQUIRE(hp_model_load((dir / "run" / "models" / "hprior" / "model.ckpt").string().c_str(), &model) == HP_OK);
  const size_t n = hp_model_items(model);
  const size_t k = hp_model_latent(model);
  CHECK(n > 0);
  CHECK(k == 8);

  const uint32_t observed[] = {3, 1, 3};
  std::vector<uint32_t> ranking(n);
  REQUIRE(hp_model_rank(model, observed, 3, ranking.data(), ranking.size()) == HP_OK);
  std::vector<bool> seen(n, false);
  for (auto i : ranking) {
    REQUIRE(i < n);
    seen[i] = true;
  }
  CHECK(std::count(seen.begin(), seen.end(), true) == static_cast<long>(n));
  CHECK(((ranking[n - 1] == 1 && ranking[n - 2] == 3) || (ranking[n - 1] == 3 && ranking[n - 2] == 1)));
  CHECK(hp_model_rank(model, observed, 3, ranking.data(), n - 1) == HP_ERR_ARGUMENT);

  const uint32_t bad[] = {static_cast<uint32_t>(n)};
  CHECK(hp_model_rank(model, bad, 1, ranking.data(), n) == HP_ERR_ARGUMENT);

  std::vector<double> z(k), z2(k);
  REQUIRE(hp_model_encode(model, observed, 3, z.data(), k) == HP_OK);
  REQUIRE(hp_model_encode(model, observed, 2, z2.data(), k) == HP_OK);
  CHECK(z == z2);
  for (double v : z) CHECK(std::isfinite(v));
  hp_model_free(model);
}
