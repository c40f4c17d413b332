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

#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hprior/hprior.h"

namespace {

int fail(hp_status s) {
  std::fprintf(stderr, "error (%s): %s\n", hp_status_name(s), hp_last_error());
  return static_cast<int>(s);
}

struct Common {
  std::string config;
  std::vector<std::string> overrides;
};

int run_stage(const Common& opts, hp_status (*cmd)(const hp_config*, const char**)) {
  hp_config* cfg = nullptr;
  hp_status s = hp_config_load(opts.config.c_str(), &cfg);
  if (s != HP_OK) return fail(s);
  for (const auto& o : opts.overrides) {
    s = hp_config_set(cfg, o.c_str());
    if (s != HP_OK) {
      hp_config_free(cfg);
      return fail(s);
    }
  }
  const char* summary = nullptr;
  s = cmd(cfg, &summary);
  hp_config_free(cfg);
  if (s != HP_OK) return fail(s);
  std::fputs(summary, stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recommendation with text-derived user priors for variational autoencoders"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(hp_version()));

  int verbose = 0;
  bool quiet = false;
  app.add_flag("-v,--verbose", verbose, "more progress output (repeat for debug)");
  app.add_flag("-q,--quiet", quiet, "errors only");

  Common opts;
  struct Stage {
    const char* name;
    const char* help;
    hp_status (*cmd)(const hp_config*, const char**);
  };
  const Stage stages[] = {
      {"prepare", "load, binarize, filter and split the reviews into <out.dir>/data", hp_cmd_prepare},
      {"priors", "build user priors and the text index into <out.dir>/priors", hp_cmd_priors},
      {"train", "fit the configured model into <out.dir>/models/<model.name>", hp_cmd_train},
      {"eval", "rank the evaluation split and write <out.dir>/reports/<model.name>-<split>.*", hp_cmd_eval},
      {"report", "collect reports and training curves into <out.dir>/reports/summary.*", hp_cmd_report},
  };
  std::vector<std::pair<CLI::App*, const Stage*>> subs;
  for (const auto& st : stages) {
    auto* sub = app.add_subcommand(st.name, st.help);
    sub->add_option("-c,--config", opts.config, "configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("-s,--set", opts.overrides, "override a setting, key=value (repeatable)");
    subs.push_back({sub, &st});
  }

  std::string fixture_dir;
  hp_fixture_options fx;
  hp_fixture_defaults(&fx);
  auto* fixture = app.add_subcommand("fixture", "write the synthetic review corpus, word vectors and a config");
  fixture->add_option("dir", fixture_dir, "output directory")->required();
  fixture->add_option("--seed", fx.seed, "generator seed")->capture_default_str();
  fixture->add_option("--users", fx.users, "number of users")->capture_default_str();
  fixture->add_option("--clusters", fx.clusters, "rating clusters")->capture_default_str();
  fixture->add_option("--items-per-cluster", fx.items_per_cluster, "items per cluster")->capture_default_str();
  fixture->add_option("--dim", fx.dim, "latent and word-vector dimension")->capture_default_str();

  auto* keys = app.add_subcommand("keys", "list configuration keys with defaults");

  CLI11_PARSE(app, argc, argv);
  hp_set_verbosity(quiet ? 0 : 1 + verbose);

  for (const auto& [sub, st] : subs) {
    if (sub->parsed()) return run_stage(opts, st->cmd);
  }
  if (fixture->parsed()) {
    const char* summary = nullptr;
    const hp_status s = hp_fixture_write(fixture_dir.c_str(), &fx, &summary);
    if (s != HP_OK) return fail(s);
    std::fputs(summary, stdout);
    return 0;
  }
  if (keys->parsed()) {
    std::fputs(hp_config_keys(), stdout);
    return 0;
  }
  return 0;
}
