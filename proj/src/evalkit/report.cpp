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

#include "evalkit/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "common/error.hpp"

namespace hprior::evalkit {

using nlohmann::json;

EvalReport evaluate(Ranker& ranker, const corpus::EvalPartition& partition, std::size_t n_items,
                    const EvalOptions& options) {
  EvalReport report;
  report.n_items = n_items;
  report.excluded_users = partition.excluded;
  const auto& users = partition.users;
  std::vector<Ranking> rankings;
  const std::size_t chunk = std::max<std::size_t>(options.chunk, 1);
  for (std::size_t begin = 0; begin < users.size(); begin += chunk) {
    const std::size_t end = std::min(users.size(), begin + chunk);
    std::span<const corpus::EvalUser> batch(users.data() + begin, end - begin);
    rankings.clear();
    ranker.rank(batch, rankings);
    require(rankings.size() == batch.size(), ErrorKind::Data, "ranker returned ", rankings.size(),
            " rankings for ", batch.size(), " users");
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const auto& u = batch[i];
      check_ranking(rankings[i], n_items, u.pair.observed);
      report.users.push_back({u.user, ndcg_at_k(rankings[i], u.pair.held_out, 100),
                              recall_at_k(rankings[i], u.pair.held_out, 20),
                              recall_at_k(rankings[i], u.pair.held_out, 50)});
    }
  }
  finalize(report);
  return report;
}

MetricSummary summarize(std::span<const double> values) {
  MetricSummary s;
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  for (double v : values) s.std += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(s.std / static_cast<double>(values.size()));
  return s;
}

void finalize(EvalReport& r) {
  std::vector<double> n, r20, r50;
  for (const auto& u : r.users) {
    n.push_back(u.ndcg100);
    r20.push_back(u.recall20);
    r50.push_back(u.recall50);
  }
  r.ndcg100 = summarize(n);
  r.recall20 = summarize(r20);
  r.recall50 = summarize(r50);
}

namespace {

json summary_json(const MetricSummary& s) { return {{"mean", s.mean}, {"std", s.std}}; }

}  // namespace

std::string report_to_json(const EvalReport& r) {
  json users = json::array();
  for (const auto& u : r.users) users.push_back({u.user, u.ndcg100, u.recall20, u.recall50});
  json j = {{"format", "hprior-report"},
            {"version", 1},
            {"model", r.model},
            {"text_feature", r.text_feature},
            {"split", r.split},
            {"config_hash", r.config_hash},
            {"n_items", r.n_items},
            {"excluded_users", r.excluded_users},
            {"metrics",
             {{"ndcg@100", summary_json(r.ndcg100)},
              {"recall@20", summary_json(r.recall20)},
              {"recall@50", summary_json(r.recall50)}}},
            {"user_columns", {"user", "ndcg@100", "recall@20", "recall@50"}},
            {"users", users}};
  return j.dump(1) + "\n";
}

EvalReport report_from_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  require(!j.is_discarded() && j.is_object() && j.value("format", "") == "hprior-report",
          ErrorKind::Format, "not an evaluation report");
  require(j.value("version", -1) == 1, ErrorKind::Format, "unsupported report version");
  EvalReport r;
  try {
    r.model = j.at("model").get<std::string>();
    r.text_feature = j.at("text_feature").get<std::string>();
    r.split = j.at("split").get<std::string>();
    r.config_hash = j.at("config_hash").get<std::string>();
    r.n_items = j.at("n_items").get<std::size_t>();
    r.excluded_users = j.at("excluded_users").get<std::size_t>();
    for (const auto& u : j.at("users")) {
      r.users.push_back({u.at(0).get<std::uint32_t>(), u.at(1).get<double>(), u.at(2).get<double>(),
                         u.at(3).get<double>()});
    }
  } catch (const json::exception& e) {
    raise(ErrorKind::Format, "malformed report: ", e.what());
  }
  finalize(r);
  return r;
}

void save_report(const std::string& path, const EvalReport& r) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorKind::Io, "cannot write '", path, "'");
  out << report_to_json(r);
  require(out.good(), ErrorKind::Io, "write to '", path, "' failed");
}

EvalReport load_report(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorKind::Io, "cannot read '", path, "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return report_from_json(ss.str());
}

namespace {

std::string cell(const MetricSummary& s) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f ± %.4f", s.mean, s.std);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  // Width counts code points so the ± sign does not skew columns.
  std::size_t len = 0;
  for (unsigned char c : s) len += (c & 0xC0) != 0x80;
  return s + std::string(width > len ? width - len : 0, ' ');
}

}  // namespace

std::string format_table(std::span<const EvalReport> reports) {
  const std::vector<std::string> head{"Model", "Text", "NDCG@100", "Recall@20", "Recall@50"};
  std::vector<std::vector<std::string>> rows{head};
  for (const auto& r : reports) {
    rows.push_back({r.model, r.text_feature, cell(r.ndcg100), cell(r.recall20), cell(r.recall50)});
  }
  std::vector<std::size_t> width(head.size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::size_t len = 0;
      for (unsigned char ch : row[c]) len += (ch & 0xC0) != 0x80;
      width[c] = std::max(width[c], len);
    }
  }
  std::ostringstream out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < rows[i].size(); ++c) {
      out << (c ? "  " : "") << (c + 1 < rows[i].size() ? pad(rows[i][c], width[c]) : rows[i][c]);
    }
    out << '\n';
    if (i == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w;
      out << std::string(total + 2 * (width.size() - 1), '-') << '\n';
    }
  }
  return out.str();
}

std::string format_records(std::span<const EvalReport> reports) {
  std::ostringstream out;
  char buf[64];
  for (const auto& r : reports) {
    const std::pair<const char*, const MetricSummary*> metrics[] = {
        {"ndcg@100", &r.ndcg100}, {"recall@20", &r.recall20}, {"recall@50", &r.recall50}};
    for (const auto& [name, s] : metrics) {
      out << "model=" << r.model << " text=" << r.text_feature << " split=" << r.split << " metric=" << name;
      std::snprintf(buf, sizeof buf, " mean=%.6f std=%.6f", s->mean, s->std);
      out << buf << " users=" << r.users.size() << '\n';
    }
  }
  return out.str();
}

std::string metric_definitions() {
  return "# Recall@k = |top-k ∩ held-out| / min(k, |held-out|)\n"
         "# NDCG@k   = sum over hits at 1-indexed rank r <= k of 1/log2(r+1), divided by the ideal value\n"
         "# mean ± population std over evaluation users; observed fold-in items are excluded from rankings\n";
}

}  // namespace hprior::evalkit
