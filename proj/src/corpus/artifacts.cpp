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

#include "corpus/artifacts.hpp"

#include <fstream>

#include "json.hpp"

#include "common/error.hpp"

namespace hprior::corpus {

using nlohmann::json;

namespace {

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorKind::Io, "cannot write '", path, "'");
  out << j.dump() << '\n';
  require(out.good(), ErrorKind::Io, "write to '", path, "' failed");
}

json read_json(const std::string& path, const char* format, int version) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorKind::Io, "cannot read '", path, "'");
  json j = json::parse(in, nullptr, false);
  require(!j.is_discarded() && j.is_object(), ErrorKind::Format, "'", path, "' is not valid JSON");
  require(j.value("format", "") == format, ErrorKind::Format, "'", path, "' is not a ", format,
          " artifact");
  require(j.value("version", -1) == version, ErrorKind::Format, "'", path,
          "' has unsupported version ", j.value("version", -1));
  return j;
}

json partition_json(const EvalPartition& p) {
  json users = json::array();
  for (const auto& u : p.users) {
    users.push_back({{"user", u.user}, {"observed", u.pair.observed}, {"held_out", u.pair.held_out}});
  }
  return {{"users", users}, {"excluded", p.excluded}};
}

EvalPartition partition_from(const json& j) {
  EvalPartition p;
  p.excluded = j.at("excluded").get<std::size_t>();
  for (const auto& u : j.at("users")) {
    p.users.push_back({u.at("user").get<std::uint32_t>(),
                       {u.at("observed").get<ItemList>(), u.at("held_out").get<ItemList>()}});
  }
  return p;
}

}  // namespace

void save_matrix(const std::string& path, const MatrixArtifact& a) {
  const auto& m = a.matrix;
  json j = {{"format", "hprior-matrix"},
            {"version", kMatrixArtifactVersion},
            {"data_hash", a.data_hash},
            {"n_users", m.n_users},
            {"n_items", m.n_items},
            {"user_ids", m.user_ids},
            {"item_ids", m.item_ids},
            {"rows", m.rows}};
  write_json(path, j);
}

MatrixArtifact load_matrix(const std::string& path) {
  json j = read_json(path, "hprior-matrix", kMatrixArtifactVersion);
  MatrixArtifact a;
  try {
    a.data_hash = j.at("data_hash").get<std::string>();
    auto& m = a.matrix;
    m.n_users = j.at("n_users").get<std::size_t>();
    m.n_items = j.at("n_items").get<std::size_t>();
    m.user_ids = j.at("user_ids").get<std::vector<std::string>>();
    m.item_ids = j.at("item_ids").get<std::vector<std::string>>();
    m.rows = j.at("rows").get<std::vector<ItemList>>();
  } catch (const json::exception& e) {
    raise(ErrorKind::Format, "'", path, "': ", e.what());
  }
  a.matrix.rebuild_index();
  a.matrix.validate();
  return a;
}

void save_split(const std::string& path, const SplitArtifact& a) {
  json j = {{"format", "hprior-split"},
            {"version", kSplitArtifactVersion},
            {"data_hash", a.data_hash},
            {"seed", a.split.seed},
            {"fold_in_fraction", a.split.fold_in_fraction},
            {"train", a.split.train_users},
            {"validation", a.split.val_users},
            {"test", a.split.test_users},
            {"fold_in", {{"validation", partition_json(a.validation)}, {"test", partition_json(a.test)}}}};
  write_json(path, j);
}

SplitArtifact load_split(const std::string& path) {
  json j = read_json(path, "hprior-split", kSplitArtifactVersion);
  SplitArtifact a;
  try {
    a.data_hash = j.at("data_hash").get<std::string>();
    a.split.seed = j.at("seed").get<std::uint64_t>();
    a.split.fold_in_fraction = j.at("fold_in_fraction").get<double>();
    a.split.train_users = j.at("train").get<std::vector<std::uint32_t>>();
    a.split.val_users = j.at("validation").get<std::vector<std::uint32_t>>();
    a.split.test_users = j.at("test").get<std::vector<std::uint32_t>>();
    a.validation = partition_from(j.at("fold_in").at("validation"));
    a.test = partition_from(j.at("fold_in").at("test"));
  } catch (const json::exception& e) {
    raise(ErrorKind::Format, "'", path, "': ", e.what());
  }
  return a;
}

}  // namespace hprior::corpus
