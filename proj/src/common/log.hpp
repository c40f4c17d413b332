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

#include "common/error.hpp"

namespace hprior {

// 0 = quiet, 1 = info, 2 = debug
void set_verbosity(int level);
int verbosity();
void log_line(int level, const std::string& msg);

template <class... Args>
void log_info(Args&&... args) {
  if (verbosity() >= 1) log_line(1, detail::concat(std::forward<Args>(args)...));
}

template <class... Args>
void log_debug(Args&&... args) {
  if (verbosity() >= 2) log_line(2, detail::concat(std::forward<Args>(args)...));
}

}  // namespace hprior
