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

#include <filesystem>
#include <functional>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

#include "cli/config.hpp"
#include "cli/fixture.hpp"
#include "cli/pipeline.hpp"
#include "common/error.hpp"
#include "corpus/artifacts.hpp"
#include "evalkit/report.hpp"
#include "numkit/checkpoint.hpp"
#include "textprior/prior.hpp"

using namespace hprior;
using namespace hprior::cli;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Fresh fixture directory with a small corpus.
fs::path fixture_dir(const std::string& name, std::size_t users = 200) {
  auto dir = fs::temp_directory_path() / "hprior_cli_tests" / name;
  fs::remove_all(dir);
  FixtureConfig fc;
  fc.users = users;
  write_fixture(dir.string(), fc);
  return dir;
}

RunConfig run_config(const fs::path& dir, std::initializer_list<const char*> overrides = {}) {
  auto map = ConfigMap::load((dir / "hprior.conf").string());
  map.set("train.epochs=5");
  for (const char* o : overrides) map.set(std::string(o));
  return RunConfig::from(map);
}

ErrorKind kind_of(const std::function<void()>& f, std::string* message = nullptr) {
  try {
    f();
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Argument;
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char ch : s) n += ch == '\n';
  return n;
}

}  // namespace

TEST_CASE("config parsing, overrides and unknown keys") {
  auto m = ConfigMap::parse("# comment\nmodel.mode = hprior\n\ntrain.lr=0.01\n");
  CHECK(m.get("model.mode") == "hprior");
  m.set("train.lr=0.02");
  CHECK(m.get("train.lr") == "0.02");

  std::string msg;
  CHECK(kind_of([] { ConfigMap::parse("train.lrate = 1\n", "x.conf"); }, &msg) == ErrorKind::Config);
  CHECK(msg.find("x.conf:1") != std::string::npos);
  CHECK(msg.find("train.lr") != std::string::npos);
  CHECK(kind_of([] { ConfigMap::parse("no equals sign\n"); }) == ErrorKind::Config);
  CHECK(kind_of([&] { m.set("train.lr"); }) == ErrorKind::Config);
}

TEST_CASE("config validation rejects bad values before any output") {
  const auto dir = fixture_dir("validate");
  const auto out = dir / "run";

  SUBCASE("missing input file names the path") {
    auto c = run_config(dir, {"data.path=missing.tsv"});
    std::string msg;
    CHECK(kind_of([&] { cmd_prepare(c); }, &msg) == ErrorKind::Io);
    CHECK(msg.find("missing.tsv") != std::string::npos);
  }
  SUBCASE("prior-requiring mode without a prior source") {
    auto c = run_config(dir, {"model.mode=hprior", "prior.source=none"});
    CHECK(kind_of([&] { cmd_prepare(c); }) == ErrorKind::Config);
  }
  SUBCASE("out of range values") {
    CHECK(kind_of([&] { run_config(dir, {"data.threshold=9"}).validate(); }) == ErrorKind::Config);
    CHECK(kind_of([&] { run_config(dir, {"split.fold_in=1.5"}).validate(); }) == ErrorKind::Config);
    CHECK(kind_of([&] { run_config(dir, {"eval.split=train"}).validate(); }) == ErrorKind::Config);
    CHECK(kind_of([&] { run_config(dir, {"train.lr=abc"}); }) == ErrorKind::Config);
  }
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("prepare matches the fixture counts and is idempotent") {
  const auto dir = fixture_dir("prepare");
  const auto truth = load_fixture_truth((dir / "truth.json").string());
  const auto c = run_config(dir);
  cmd_prepare(c);

  const auto data = fs::path(c.data_dir());
  const auto m = corpus::load_matrix((data / "matrix.json").string()).matrix;
  CHECK(m.n_users == truth.users);
  CHECK(m.n_items == truth.items);
  CHECK(m.nnz() == truth.positives);
  CHECK(slurp(data / "stats.txt").find(std::to_string(truth.positives)) != std::string::npos);

  const char* files[] = {"matrix.json", "split.json", "reviews.tsv", "stats.txt", "config.resolved"};
  std::vector<std::string> first;
  for (auto f : files) first.push_back(slurp(data / f));
  cmd_prepare(c);
  for (std::size_t i = 0; i < std::size(files); ++i) CHECK_MESSAGE(slurp(data / files[i]) == first[i], files[i]);
}

TEST_CASE("priors cover every user and are reproducible") {
  const auto dir = fixture_dir("priors");
  cmd_prepare(run_config(dir));

  for (const char* source : {"prior.source=embedding", "prior.source=random", "prior.source=lda"}) {
    CAPTURE(source);
    auto c = run_config(dir, {source, "prior.lda.sweeps=30", "prior.lda.infer_sweeps=10"});
    cmd_priors(c);
    const auto path = fs::path(c.prior_dir()) / "priors.json";
    const std::string first = slurp(path);
    const auto t = textprior::load_prior_table(path.string());
    CHECK(t.users.size() == 200);
    CHECK(t.dim == 8);
    CHECK(t.prior_hash == c.prior_hash());
    CHECK(t.count(textprior::PriorSource::Standard) + t.count(textprior::PriorSource::Embedding) +
              t.count(textprior::PriorSource::Lda) + t.count(textprior::PriorSource::Random) ==
          200);
    cmd_priors(c);
    CHECK(slurp(path) == first);
  }

  auto wrong_dim = run_config(dir, {"prior.source=embedding", "model.latent=6", "prior.lda.topics=6"});
  CHECK(kind_of([&] { cmd_priors(wrong_dim); }) == ErrorKind::Config);
}

TEST_CASE("training, evaluation and comparison table") {
  const auto dir = fixture_dir("pipeline");
  cmd_prepare(run_config(dir));

  SUBCASE("prior-requiring mode without a prior table refuses to train") {
    auto c = run_config(dir, {"model.mode=hprior"});
    std::string msg;
    CHECK(kind_of([&] { cmd_train(c); }, &msg) == ErrorKind::Config);
    CHECK(msg.find("prior") != std::string::npos);
    CHECK_FALSE(fs::exists(fs::path(c.model_dir()) / "model.ckpt"));
  }

  SUBCASE("checkpoint round trip, log lines and deterministic retraining") {
    auto c = run_config(dir, {"model.mode=mult_vae"});
    cmd_train(c);
    const auto mdir = fs::path(c.model_dir());
    CHECK(count_lines(slurp(mdir / "train.log")) == 5);
    const std::string bytes = slurp(mdir / "model.ckpt");

    const auto ck = numkit::load_checkpoint((mdir / "model.ckpt").string());
    CHECK(ck.mode == "mult_vae");
    CHECK(ck.config_hash == c.train_hash());
    const auto copy = mdir / "copy.ckpt";
    numkit::save_checkpoint(copy.string(), ck);
    CHECK(slurp(copy) == bytes);
    fs::remove(copy);

    cmd_train(c);
    CHECK(slurp(mdir / "model.ckpt") == bytes);

    cmd_eval(c);
    const std::string report = slurp(report_path(c));
    cmd_eval(c);
    CHECK(slurp(report_path(c)) == report);

    SUBCASE("changed training settings are detected at evaluation") {
      auto changed = run_config(dir, {"model.mode=mult_vae", "train.lr=0.005"});
      std::string msg;
      CHECK(kind_of([&] { cmd_eval(changed); }, &msg) == ErrorKind::Config);
      CHECK(msg.find("hash") != std::string::npos);
    }
    SUBCASE("validation split selects validation users") {
      auto v = run_config(dir, {"model.mode=mult_vae", "eval.split=validation"});
      const auto r = eval_report(v);
      const auto split = corpus::load_split((fs::path(c.data_dir()) / "split.json").string());
      REQUIRE(r.users.size() == split.validation.users.size());
      for (std::size_t i = 0; i < r.users.size(); ++i) CHECK(r.users[i].user == split.validation.users[i].user);
      CHECK(r.split == "validation");
    }
  }

  SUBCASE("four-model comparison table") {
    cmd_priors(run_config(dir, {"prior.source=embedding"}));
    for (const char* mode : {"model.mode=rand", "model.mode=mf", "model.mode=mult_vae", "model.mode=hprior"}) {
      auto c = run_config(dir, {mode, "prior.source=embedding", "mf.epochs=3"});
      cmd_train(c);
      cmd_eval(c);
    }
    const auto c = run_config(dir, {"prior.source=embedding"});
    cmd_report(c);
    const auto reports = fs::path(c.report_dir());
    for (const char* name : {"rand", "mf", "mult_vae", "hprior"}) {
      const auto r = evalkit::load_report((reports / (std::string(name) + "-test.json")).string());
      CHECK(r.model == name);
      for (const auto* m : {&r.ndcg100, &r.recall20, &r.recall50}) {
        CHECK(m->mean >= 0.0);
        CHECK(m->mean <= 1.0);
      }
    }
    const std::string table = slurp(reports / "summary.txt");
    for (const char* name : {"rand", "mf", "mult_vae", "hprior"}) CHECK(table.find(name) != std::string::npos);
    CHECK(count_lines(slurp(reports / "summary.records")) == 4 * 3);
  }
}
