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
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "doctest.h"

#include "common/error.hpp"
#include "common/rng.hpp"
#include "corpus/artifacts.hpp"
#include "corpus/matrix.hpp"
#include "corpus/reviews.hpp"

using namespace hprior;
using namespace hprior::corpus;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  auto dir = fs::temp_directory_path() / "hprior_corpus_tests";
  fs::create_directories(dir);
  return dir / name;
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

ReviewRecord rec(std::string u, std::string i, int r, std::string t = "") {
  return {std::move(u), std::move(i), r, std::move(t)};
}

// Naive oracle: remove one violating user or item at a time until no
// violation remains.
std::set<std::pair<std::string, std::string>> brute_force_fixpoint(
    std::vector<ReviewRecord> recs, std::size_t min_user, std::size_t min_item) {
  for (;;) {
    std::map<std::string, std::size_t> uc;
    std::map<std::string, std::set<std::string>> ic;
    for (const auto& r : recs) {
      ++uc[r.user_id];
      ic[r.item_id].insert(r.user_id);
    }
    std::string bad_user, bad_item;
    for (const auto& [u, c] : uc)
      if (c < min_user) { bad_user = u; break; }
    if (bad_user.empty())
      for (const auto& [i, s] : ic)
        if (s.size() < min_item) { bad_item = i; break; }
    if (bad_user.empty() && bad_item.empty()) break;
    std::erase_if(recs, [&](const ReviewRecord& r) {
      return (!bad_user.empty() && r.user_id == bad_user) || (!bad_item.empty() && r.item_id == bad_item);
    });
  }
  std::set<std::pair<std::string, std::string>> out;
  for (const auto& r : recs) out.insert({r.user_id, r.item_id});
  return out;
}

std::set<std::pair<std::string, std::string>> pairs(const std::vector<ReviewRecord>& recs) {
  std::set<std::pair<std::string, std::string>> out;
  for (const auto& r : recs) out.insert({r.user_id, r.item_id});
  return out;
}

}  // namespace

TEST_CASE("load_reviews: well-formed TSV") {
  auto p = temp_file("three.tsv");
  write_text(p, "u1\ti1\t5\tgreat place\nu1\ti2\t2\tmeh\nu2\ti1\t4\t\n");
  auto res = load_reviews(p.string(), {});
  REQUIRE(res.records.size() == 3);
  CHECK(res.malformed == 0);
  CHECK(res.records[0] == rec("u1", "i1", 5, "great place"));
  CHECK(res.records[2].text.empty());
}

TEST_CASE("load_reviews: header line is detected and skipped") {
  auto p = temp_file("header.tsv");
  write_text(p, "user_id\titem_id\trating\ttext\nu1\ti1\t5\tx\n");
  auto res = load_reviews(p.string(), {});
  CHECK(res.header_skipped);
  CHECK(res.records.size() == 1);
  CHECK(res.malformed == 0);
}

TEST_CASE("load_reviews: missing rating column is skipped and counted") {
  std::string body;
  for (int k = 0; k < 10; ++k) body += "u" + std::to_string(k) + "\ti\t3\tok\n";
  body += "u99\ti\n";
  auto p = temp_file("missing.tsv");
  write_text(p, body);
  auto res = load_reviews(p.string(), {});
  CHECK(res.records.size() == 10);
  CHECK(res.malformed == 1);
}

TEST_CASE("load_reviews: too many malformed lines is a format error") {
  auto p = temp_file("bad.tsv");
  write_text(p, "u1\ti1\t5\tok\nu2\ti2\tfive\tbad\nu3\ti3\t9\tout of range\n");
  try {
    load_reviews(p.string(), {});
    FAIL("expected format error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Format);
  }
}

TEST_CASE("load_reviews: unreadable file is an I/O error") {
  try {
    load_reviews("/nonexistent/reviews.tsv", {});
    FAIL("expected I/O error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Io);
  }
}

TEST_CASE("load_reviews: JSON lines in the Yelp layout") {
  auto p = temp_file("yelp.jsonl");
  write_text(p,
             "{\"user_id\":\"a\",\"business_id\":\"b\",\"stars\":4.0,\"text\":\"Tasty\\nfood\"}\n"
             "{\"user_id\":\"a\",\"item_id\":\"c\",\"stars\":2,\"text\":\"no\"}\n");
  FormatSpec spec;
  spec.format = InputFormat::JsonLines;
  auto res = load_reviews(p.string(), spec);
  REQUIRE(res.records.size() == 2);
  CHECK(res.records[0] == rec("a", "b", 4, "Tasty\nfood"));
  CHECK(res.records[1].item_id == "c");
}

TEST_CASE("TSV serialization round-trips arbitrary records") {
  Rng rng(1234);
  const std::string alphabet = "abc XYZ\t\n\\\r,.'\"é漢";
  std::vector<ReviewRecord> recs;
  for (int k = 0; k < 100; ++k) {
    ReviewRecord r;
    r.user_id = "user" + std::to_string(rng.below(1000));
    r.item_id = "item\\" + std::to_string(rng.below(1000));
    r.rating = 1 + static_cast<int>(rng.below(5));
    const std::size_t len = rng.below(40);
    for (std::size_t c = 0; c < len; ++c) r.text.push_back(alphabet[rng.below(alphabet.size())]);
    recs.push_back(r);
  }
  auto p = temp_file("roundtrip.tsv");
  write_reviews_tsv(p.string(), recs);
  auto res = load_reviews(p.string(), {});
  CHECK(res.malformed == 0);
  CHECK(res.records == recs);
}

TEST_CASE("binarize uses a strict threshold") {
  auto yelp = binarize({rec("u", "i", 4), rec("u", "j", 3)}, 3);
  CHECK(yelp[0].rating == 1);
  CHECK(yelp[1].rating == 0);
  auto imdb = binarize({rec("u", "i", 5), rec("u", "j", 6)}, 5);
  CHECK(imdb[0].rating == 0);
  CHECK(imdb[1].rating == 1);
}

TEST_CASE("all ratings at the threshold leave nothing after filtering") {
  std::vector<ReviewRecord> recs;
  for (int u = 0; u < 6; ++u)
    for (int i = 0; i < 6; ++i) recs.push_back(rec("u" + std::to_string(u), "i" + std::to_string(i), 3));
  auto bin = binarize(recs, 3);
  std::vector<ReviewRecord> positives;
  for (auto& r : bin)
    if (r.rating == 1) positives.push_back(r);
  CHECK(positives.empty());
  try {
    apply_cutoffs(positives, 5, 5);
    FAIL("expected empty-after-filtering");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Data);
    CHECK(std::string(e.what()).find("empty-after-filtering") != std::string::npos);
  }
}

TEST_CASE("apply_cutoffs: thresholds (1,1) are the identity") {
  std::vector<ReviewRecord> recs = {rec("a", "x", 1), rec("b", "y", 1), rec("a", "y", 1)};
  CHECK(apply_cutoffs(recs, 1, 1) == recs);
}

TEST_CASE("apply_cutoffs: one pass suffices") {
  std::vector<ReviewRecord> recs;
  for (int u = 0; u < 3; ++u)
    for (int i = 0; i < 3; ++i) recs.push_back(rec("u" + std::to_string(u), "i" + std::to_string(i), 1));
  recs.push_back(rec("lonely", "i0", 1));
  auto out = apply_cutoffs(recs, 2, 2);
  CHECK(out.size() == 9);
  CHECK(pairs(out) == brute_force_fixpoint(recs, 2, 2));
}

TEST_CASE("apply_cutoffs: chain removal reaches the fixed point") {
  // Item X has two raters (A, B) and is dropped; A then has 4 reviews and is
  // dropped; item Y loses A and falls to 2 raters; B then drops below 5.
  std::vector<ReviewRecord> recs;
  auto add = [&](const std::string& u, const std::string& i) { recs.push_back(rec(u, i, 1)); };
  for (const char* i : {"X", "Y", "p", "q", "r"}) add("A", i);
  for (const char* i : {"X", "Y", "p", "q", "r"}) add("B", i);
  add("C", "Y");
  for (const char* u : {"D", "E", "F"})
    for (const char* i : {"p", "q", "r", "s", "t"}) add(u, i);
  for (const char* i : {"p", "q", "r", "s"}) add("C", i);

  auto out = apply_cutoffs(recs, 5, 3);
  auto oracle = brute_force_fixpoint(recs, 5, 3);
  CHECK(pairs(out) == oracle);
  for (const auto& r : out) {
    CHECK(r.user_id != "A");
    CHECK(r.user_id != "B");
    CHECK(r.item_id != "X");
    CHECK(r.item_id != "Y");
  }
  CHECK(apply_cutoffs(out, 5, 3) == out);
}

TEST_CASE("apply_cutoffs agrees with the brute-force oracle on random corpora") {
  Rng rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<ReviewRecord> recs;
    const std::size_t users = 5 + rng.below(20), items = 3 + rng.below(15);
    for (std::size_t u = 0; u < users; ++u)
      for (std::size_t i = 0; i < items; ++i)
        if (rng.uniform() < 0.35) recs.push_back(rec("u" + std::to_string(u), "i" + std::to_string(i), 1));
    const std::size_t mu = 1 + rng.below(5), mi = 1 + rng.below(5);
    auto oracle = brute_force_fixpoint(recs, mu, mi);
    if (oracle.empty()) {
      CHECK_THROWS_AS(apply_cutoffs(recs, mu, mi), Error);
      continue;
    }
    auto out = apply_cutoffs(recs, mu, mi);
    CHECK(pairs(out) == oracle);
    CHECK(apply_cutoffs(out, mu, mi) == out);
  }
}

TEST_CASE("dedupe keeps the latest record") {
  auto out = dedupe_latest({rec("u", "i", 2, "old"), rec("u", "j", 5), rec("u", "i", 4, "new")});
  REQUIRE(out.size() == 2);
  CHECK(out[0] == rec("u", "i", 4, "new"));
}

TEST_CASE("build_matrix") {
  SUBCASE("density of a 2x2 with three positives") {
    auto m = build_matrix({rec("a", "x", 1), rec("a", "y", 1), rec("b", "x", 1), rec("b", "z", 0)});
    CHECK(m.n_users == 2);
    CHECK(m.n_items == 2);
    CHECK(m.density() == doctest::Approx(0.75));
    m.validate();
  }
  SUBCASE("duplicate positives collapse") {
    auto m = build_matrix({rec("a", "x", 1), rec("a", "x", 1), rec("a", "y", 1)});
    CHECK(m.nnz() == 2);
    CHECK(m.rows[0] == ItemList{0, 1});
  }
  SUBCASE("hand-counted 10x10 fixture") {
    // user u has positives on items u, u+1, u+3 (mod 10) except user 0, which
    // additionally has item 5: 10 * 3 + 1 = 31 positives.
    std::vector<ReviewRecord> recs;
    for (int u = 0; u < 10; ++u)
      for (int d : {0, 1, 3})
        recs.push_back(rec("u" + std::to_string(u), "i" + std::to_string((u + d) % 10), 1));
    recs.push_back(rec("u0", "i5", 1));
    auto m = build_matrix(recs);
    CHECK(m.nnz() == 31);
    CHECK(stats_of(m).sparsity_percent == doctest::Approx(31.0));
    CHECK(format_sparsity(stats_of(m).sparsity_percent) == "31.000%");
    m.validate();
    for (std::size_t u = 0; u < m.n_users; ++u) CHECK(std::is_sorted(m.rows[u].begin(), m.rows[u].end()));
  }
}

TEST_CASE("sparsity formatting matches the dataset table style") {
  CHECK(format_sparsity(0.104) == "0.104%");
  CHECK(format_sparsity(0.248) == "0.248%");
}

namespace {
InteractionMatrix square_matrix(std::size_t users) {
  std::vector<ReviewRecord> recs;
  for (std::size_t u = 0; u < users; ++u)
    for (int i = 0; i < 3; ++i) recs.push_back(rec("u" + std::to_string(u), "i" + std::to_string((u + i) % 7), 1));
  return build_matrix(recs);
}
}  // namespace

TEST_CASE("split_users") {
  SUBCASE("100 users -> 80/10/10") {
    auto s = split_users(square_matrix(100), 7);
    CHECK(s.train_users.size() == 80);
    CHECK(s.val_users.size() == 10);
    CHECK(s.test_users.size() == 10);
    std::set<std::uint32_t> all;
    for (auto* v : {&s.train_users, &s.val_users, &s.test_users}) all.insert(v->begin(), v->end());
    CHECK(all.size() == 100);
  }
  SUBCASE("10 users -> 8/1/1") {
    auto s = split_users(square_matrix(10), 7);
    CHECK(s.train_users.size() == 8);
    CHECK(s.val_users.size() == 1);
    CHECK(s.test_users.size() == 1);
  }
  SUBCASE("deterministic under a fixed seed") {
    auto m = square_matrix(57);
    auto a = split_users(m, 3), b = split_users(m, 3), c = split_users(m, 4);
    CHECK(a.train_users == b.train_users);
    CHECK(a.test_users == b.test_users);
    CHECK(a.test_users != c.test_users);
  }
  SUBCASE("too few users") {
    CHECK_THROWS_AS(split_users(square_matrix(9), 1), Error);
  }
}

TEST_CASE("fold_in_split") {
  std::vector<std::uint32_t> ten{1, 3, 5, 7, 9, 11, 13, 15, 17, 19};
  auto p = fold_in_split(ten, 0.8, 11);
  CHECK(p.observed.size() == 8);
  CHECK(p.held_out.size() == 2);

  std::vector<std::uint32_t> two{4, 8};
  auto q = fold_in_split(two, 0.8, 11);
  CHECK(q.observed.size() == 1);
  CHECK(q.held_out.size() == 1);

  std::vector<std::uint32_t> one{4};
  try {
    fold_in_split(one, 0.8, 1);
    FAIL("expected too-few-items");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("too-few-items") != std::string::npos);
  }
  CHECK(fold_in_split(ten, 0.8, 5).observed == fold_in_split(ten, 0.8, 5).observed);
}

TEST_CASE("fold_in_split partitions random rows") {
  Rng rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    std::set<std::uint32_t> s;
    const std::size_t n = 2 + rng.below(60);
    while (s.size() < n) s.insert(static_cast<std::uint32_t>(rng.below(500)));
    std::vector<std::uint32_t> row(s.begin(), s.end());
    auto p = fold_in_split(row, 0.8, rng.next_u64());
    std::vector<std::uint32_t> uni;
    std::set_union(p.observed.begin(), p.observed.end(), p.held_out.begin(), p.held_out.end(),
                   std::back_inserter(uni));
    std::vector<std::uint32_t> inter;
    std::set_intersection(p.observed.begin(), p.observed.end(), p.held_out.begin(), p.held_out.end(),
                          std::back_inserter(inter));
    CHECK(uni == row);
    CHECK(inter.empty());
    CHECK(!p.held_out.empty());
  }
}

TEST_CASE("english heuristic") {
  CHECK(looks_english("The food was great!"));
  CHECK(looks_english(""));
  CHECK_FALSE(looks_english("Это было очень вкусно"));
  CHECK(ascii_letter_ratio("café") == doctest::Approx(0.75));
}

TEST_CASE("matrix and split artifacts round-trip") {
  auto m = square_matrix(30);
  auto split = split_users(m, 5);
  SplitArtifact sa{split, make_eval_partition(m, split, split.val_users),
                   make_eval_partition(m, split, split.test_users), "abc"};
  auto mp = temp_file("matrix.json"), sp = temp_file("split.json");
  save_matrix(mp.string(), {m, "abc"});
  save_split(sp.string(), sa);
  auto ml = load_matrix(mp.string());
  CHECK(ml.data_hash == "abc");
  CHECK(ml.matrix.rows == m.rows);
  CHECK(ml.matrix.user_ids == m.user_ids);
  CHECK(ml.matrix.item_index == m.item_index);
  auto sl = load_split(sp.string());
  CHECK(sl.split.train_users == split.train_users);
  REQUIRE(sl.test.users.size() == sa.test.users.size());
  CHECK(sl.test.users[0].pair.held_out == sa.test.users[0].pair.held_out);

  write_text(mp, "{\"format\":\"other\"}");
  CHECK_THROWS_AS(load_matrix(mp.string()), Error);
}
