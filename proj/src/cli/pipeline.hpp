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

#include <string>

#include "cli/config.hpp"
#include "evalkit/report.hpp"

namespace hprior::cli {

/// Each command validates the whole config before touching the run
/// directory and returns a short human-readable summary.

/// Load, binarize, filter and split the reviews; writes data/.
std::string cmd_prepare(const RunConfig& config);

/// Per-user priors and, when word vectors are configured, the text-kNN
/// index; writes priors/.
std::string cmd_priors(const RunConfig& config);

/// Fits the configured model; writes models/<name>/.
std::string cmd_train(const RunConfig& config);

/// Ranks the evaluation split; writes reports/<name>-<split>.{json,txt}.
std::string cmd_eval(const RunConfig& config);

/// Collects every report of the evaluation split and every training curve
/// into reports/summary.txt, reports/summary.records and reports/curves.tsv.
std::string cmd_report(const RunConfig& config);

std::string report_path(const RunConfig& config);
evalkit::EvalReport eval_report(const RunConfig& config);

}  // namespace hprior::cli
