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

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace hprior::corpus {

struct ReviewRecord {
  std::string user_id;
  std::string item_id;
  int rating = 0;
  std::string text;

  friend bool operator==(const ReviewRecord&, const ReviewRecord&) = default;
};

enum class InputFormat { Tsv, JsonLines };

InputFormat parse_format(std::string_view name);
const char* format_name(InputFormat f);

struct FormatSpec {
  InputFormat format = InputFormat::Tsv;
  int min_star = 1;
  int max_star = 5;
  // Inputs with a larger share of malformed lines are rejected outright.
  double max_malformed_fraction = 0.10;
};

struct LoadResult {
  std::vector<ReviewRecord> records;
  std::size_t lines = 0;
  std::size_t malformed = 0;
  bool header_skipped = false;
};

/// Reads a review dump. Malformed lines (missing columns, non-integer or
/// out-of-range ratings, bad JSON) are skipped and counted.
LoadResult load_reviews(const std::string& path, const FormatSpec& spec);

/// Writes records in the TSV layout accepted by load_reviews (no header).
void write_reviews_tsv(const std::string& path, const std::vector<ReviewRecord>& records);

std::string escape_tsv_field(std::string_view s);
std::string unescape_tsv_field(std::string_view s);

/// rating > threshold -> 1, otherwise 0.
std::vector<ReviewRecord> binarize(std::vector<ReviewRecord> records, int threshold);

/// Collapses repeated (user, item) pairs to the record that appears last,
/// keeping the position of the first occurrence.
std::vector<ReviewRecord> dedupe_latest(const std::vector<ReviewRecord>& records);

/// Drops users with fewer than `min_user_reviews` records and items with
/// fewer than `min_item_raters` distinct users, repeating until neither
/// rule removes anything. Throws a Data error if nothing survives.
std::vector<ReviewRecord> apply_cutoffs(const std::vector<ReviewRecord>& records,
                                        std::size_t min_user_reviews,
                                        std::size_t min_item_raters);

/// Share of ASCII letters among all letter-like code points; texts with no
/// letters score 1.
double ascii_letter_ratio(std::string_view text);
inline bool looks_english(std::string_view text, double min_ratio = 0.9) {
  return ascii_letter_ratio(text) >= min_ratio;
}

}  // namespace hprior::corpus
