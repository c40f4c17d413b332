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

#include "corpus/reviews.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <unordered_map>

#include "json.hpp"

#include "common/error.hpp"
#include "common/log.hpp"
#include "common/utf8.hpp"

namespace hprior::corpus {

InputFormat parse_format(std::string_view name) {
  if (name == "tsv") return InputFormat::Tsv;
  if (name == "jsonl" || name == "json-lines" || name == "jsonlines") return InputFormat::JsonLines;
  raise(ErrorKind::Config, "unknown input format '", name, "' (expected tsv or jsonl)");
}

const char* format_name(InputFormat f) {
  return f == InputFormat::Tsv ? "tsv" : "jsonl";
}

std::string escape_tsv_field(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string unescape_tsv_field(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\' || i + 1 == s.size()) {
      out.push_back(s[i]);
      continue;
    }
    const char n = s[++i];
    switch (n) {
      case 't': out.push_back('\t'); break;
      case 'n': out.push_back('\n'); break;
      case 'r': out.push_back('\r'); break;
      case '\\': out.push_back('\\'); break;
      default:
        out.push_back('\\');
        out.push_back(n);
    }
  }
  return out;
}

namespace {

bool parse_int(std::string_view s, int& out) {
  while (!s.empty() && (s.front() == ' ')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == '\t') {
      out.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

bool parse_tsv_line(std::string_view line, ReviewRecord& rec) {
  auto f = split_tabs(line);
  if (f.size() < 3 || f[0].empty() || f[1].empty()) return false;
  if (!parse_int(f[2], rec.rating)) return false;
  rec.user_id = unescape_tsv_field(f[0]);
  rec.item_id = unescape_tsv_field(f[1]);
  rec.text.clear();
  if (f.size() >= 4) {
    // Unescaped tabs inside the text column are tolerated.
    const std::size_t text_start = static_cast<std::size_t>(f[3].data() - line.data());
    std::string_view text = line.substr(text_start);
    if (!text.empty() && text.back() == '\r') text.remove_suffix(1);
    rec.text = unescape_tsv_field(text);
  }
  return true;
}

std::string json_id(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  return {};
}

bool parse_json_line(std::string_view line, ReviewRecord& rec) {
  auto j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return false;
  rec.user_id = j.contains("user_id") ? json_id(j["user_id"]) : "";
  rec.item_id = j.contains("item_id") ? json_id(j["item_id"])
                : j.contains("business_id") ? json_id(j["business_id"]) : "";
  if (rec.user_id.empty() || rec.item_id.empty()) return false;
  const nlohmann::json* stars = nullptr;
  if (j.contains("stars")) stars = &j["stars"];
  else if (j.contains("rating")) stars = &j["rating"];
  if (!stars || !stars->is_number()) return false;
  const double s = stars->get<double>();
  if (std::floor(s) != s) return false;
  rec.rating = static_cast<int>(s);
  rec.text = (j.contains("text") && j["text"].is_string()) ? j["text"].get<std::string>() : "";
  return true;
}

}  // namespace

LoadResult load_reviews(const std::string& path, const FormatSpec& spec) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorKind::Io, "cannot read review file '", path, "'");
  LoadResult res;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++res.lines;
    ReviewRecord rec;
    bool ok = spec.format == InputFormat::Tsv ? parse_tsv_line(line, rec)
                                              : parse_json_line(line, rec);
    if (first && spec.format == InputFormat::Tsv && !ok) {
      auto f = split_tabs(line);
      int dummy;
      if (f.size() >= 3 && !parse_int(f[2], dummy)) {
        res.header_skipped = true;
        --res.lines;
        first = false;
        continue;
      }
    }
    first = false;
    if (ok && (rec.rating < spec.min_star || rec.rating > spec.max_star)) ok = false;
    if (!ok) {
      ++res.malformed;
      continue;
    }
    res.records.push_back(std::move(rec));
  }
  if (res.lines > 0) {
    const double frac = static_cast<double>(res.malformed) / static_cast<double>(res.lines);
    require(frac <= spec.max_malformed_fraction, ErrorKind::Format, "'", path, "': ",
            res.malformed, " of ", res.lines, " lines are malformed for format ",
            format_name(spec.format), " (limit ", spec.max_malformed_fraction * 100, "%)");
  }
  if (res.malformed > 0) {
    log_info("skipped ", res.malformed, " malformed line(s) in ", path);
  }
  return res;
}

void write_reviews_tsv(const std::string& path, const std::vector<ReviewRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorKind::Io, "cannot write '", path, "'");
  for (const auto& r : records) {
    out << escape_tsv_field(r.user_id) << '\t' << escape_tsv_field(r.item_id) << '\t'
        << r.rating << '\t' << escape_tsv_field(r.text) << '\n';
  }
  require(out.good(), ErrorKind::Io, "write to '", path, "' failed");
}

std::vector<ReviewRecord> binarize(std::vector<ReviewRecord> records, int threshold) {
  for (auto& r : records) r.rating = r.rating > threshold ? 1 : 0;
  return records;
}

std::vector<ReviewRecord> dedupe_latest(const std::vector<ReviewRecord>& records) {
  std::map<std::pair<std::string, std::string>, std::size_t> slot;
  std::vector<ReviewRecord> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    auto [it, fresh] = slot.try_emplace({r.user_id, r.item_id}, out.size());
    if (fresh) {
      out.push_back(r);
    } else {
      out[it->second] = r;
    }
  }
  return out;
}

std::vector<ReviewRecord> apply_cutoffs(const std::vector<ReviewRecord>& records,
                                        std::size_t min_user_reviews,
                                        std::size_t min_item_raters) {
  require(min_user_reviews >= 1 && min_item_raters >= 1, ErrorKind::Argument,
          "cutoff thresholds must be >= 1");
  std::vector<ReviewRecord> cur = records;
  for (;;) {
    std::unordered_map<std::string, std::size_t> per_user;
    for (const auto& r : cur) ++per_user[r.user_id];
    std::vector<ReviewRecord> next;
    next.reserve(cur.size());
    for (const auto& r : cur) {
      if (per_user[r.user_id] >= min_user_reviews) next.push_back(r);
    }

    std::unordered_map<std::string, std::set<std::string>> raters;
    for (const auto& r : next) raters[r.item_id].insert(r.user_id);
    std::vector<ReviewRecord> kept;
    kept.reserve(next.size());
    for (const auto& r : next) {
      if (raters[r.item_id].size() >= min_item_raters) kept.push_back(r);
    }
    const bool stable = kept.size() == cur.size();
    cur = std::move(kept);
    if (stable) break;
  }
  require(!cur.empty(), ErrorKind::Data,
          "empty-after-filtering: no records survive cutoffs (users >= ", min_user_reviews,
          ", item raters >= ", min_item_raters, ")");
  return cur;
}

double ascii_letter_ratio(std::string_view text) {
  std::size_t ascii = 0, total = 0;
  for (char32_t cp : utf8::decode(text)) {
    if (!utf8::is_letter(cp)) continue;
    ++total;
    if (cp < 0x80) ++ascii;
  }
  return total == 0 ? 1.0 : static_cast<double>(ascii) / static_cast<double>(total);
}

}  // namespace hprior::corpus
