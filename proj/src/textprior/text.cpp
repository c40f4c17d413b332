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

#include "textprior/text.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "common/error.hpp"
#include "common/utf8.hpp"

namespace hprior::textprior {

Tokens tokenize(std::string_view text, const TokenizerOptions& opts) {
  Tokens out;
  std::string cur;
  std::size_t cur_len = 0;
  auto flush = [&] {
    if (cur_len >= opts.min_length && !(opts.stop_words && opts.stop_words->count(cur))) {
      out.push_back(cur);
    }
    cur.clear();
    cur_len = 0;
  };
  for (char32_t cp : utf8::decode(text)) {
    if (utf8::is_word_char(cp)) {
      utf8::append(cur, utf8::to_lower(cp));
      ++cur_len;
    } else if (cur_len) {
      flush();
    }
  }
  if (cur_len) flush();
  return out;
}

std::unordered_set<std::string> load_stop_words(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::Io, "cannot read stop-word list '", path, "'");
  std::unordered_set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    for (auto& t : tokenize(line, {.min_length = 1})) out.insert(t);
  }
  return out;
}

bool EmbeddingTable::add(const std::string& word, std::span<const double> vec) {
  require(vec.size() == dim_, ErrorKind::Format, "embedding for '", word, "' has dimension ",
          vec.size(), ", table has ", dim_);
  auto [it, fresh] = index_.try_emplace(word, words_.size());
  if (!fresh) return false;
  words_.push_back(word);
  data_.insert(data_.end(), vec.begin(), vec.end());
  return true;
}

std::optional<std::span<const double>> EmbeddingTable::lookup(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return std::span<const double>(data_).subspan(it->second * dim_, dim_);
}

namespace {

bool parse_double(std::string_view s, double& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && !(line[j] == ' ' || line[j] == '\t' || line[j] == '\r')) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string fold_case(std::string_view word) {
  std::string out;
  for (char32_t cp : utf8::decode(word)) utf8::append(out, utf8::to_lower(cp));
  return out;
}

}  // namespace

EmbeddingTable load_embeddings(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorKind::Io, "cannot read embedding file '", path, "'");
  EmbeddingTable table;
  bool have_dim = false;
  std::string line;
  std::size_t lineno = 0;
  std::vector<double> vec;
  while (std::getline(in, line)) {
    ++lineno;
    auto fields = split_ws(line);
    if (fields.empty()) continue;
    if (lineno == 1 && fields.size() == 2) {
      std::size_t count = 0, dim = 0;
      auto r1 = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), count);
      auto r2 = std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), dim);
      if (r1.ec == std::errc() && r2.ec == std::errc() &&
          r1.ptr == fields[0].data() + fields[0].size() && r2.ptr == fields[1].data() + fields[1].size()) {
        table = EmbeddingTable(dim);
        have_dim = true;
        continue;
      }
    }
    const std::size_t dim = fields.size() - 1;
    if (!have_dim) {
      require(dim > 0, ErrorKind::Format, path, ":", lineno, ": embedding line has no vector");
      table = EmbeddingTable(dim);
      have_dim = true;
    }
    require(dim == table.dim(), ErrorKind::Format, path, ":", lineno, ": expected ", table.dim(),
            " values, found ", dim);
    vec.resize(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      require(parse_double(fields[k + 1], vec[k]), ErrorKind::Format, path, ":", lineno,
              ": bad number '", fields[k + 1], "'");
    }
    table.add(fold_case(fields[0]), vec);
  }
  require(!table.empty(), ErrorKind::Format, "embedding file '", path, "' has no vectors");
  return table;
}

void save_embeddings(const std::string& path, const EmbeddingTable& table) {
  std::ofstream out(path);
  require(out.good(), ErrorKind::Io, "cannot write '", path, "'");
  out << table.size() << ' ' << table.dim() << '\n';
  out << std::setprecision(17);
  for (const auto& w : table.words()) {
    out << w;
    const auto vec = *table.lookup(w);
    for (double v : vec) out << ' ' << v;
    out << '\n';
  }
}

std::optional<std::vector<double>> review_embedding(const Tokens& tokens, const EmbeddingTable& table) {
  std::vector<double> sum(table.dim(), 0.0);
  std::size_t hits = 0;
  for (const auto& t : tokens) {
    auto v = table.lookup(t);
    if (!v) continue;
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += (*v)[k];
    ++hits;
  }
  if (hits == 0) return std::nullopt;
  for (auto& s : sum) s /= static_cast<double>(hits);
  return sum;
}

}  // namespace hprior::textprior
