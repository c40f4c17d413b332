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

#include "corpus/matrix.hpp"

namespace hprior::corpus {

inline constexpr int kMatrixArtifactVersion = 1;
inline constexpr int kSplitArtifactVersion = 1;

struct MatrixArtifact {
  InteractionMatrix matrix;
  std::string data_hash;
};

struct SplitArtifact {
  SplitSpec split;
  EvalPartition validation;
  EvalPartition test;
  std::string data_hash;
};

void save_matrix(const std::string& path, const MatrixArtifact& a);
MatrixArtifact load_matrix(const std::string& path);

void save_split(const std::string& path, const SplitArtifact& a);
SplitArtifact load_split(const std::string& path);

}  // namespace hprior::corpus
