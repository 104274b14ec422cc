// Copyright (c) 2026 The nadasim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nada/log.hpp"

#include <cstdlib>
#include <cstring>
#include <iostream>

namespace nada::logging {

Level level() {
  static Level lv = [] {
    const char* env = std::getenv("NADA_LOG");
    if (env == nullptr) return Level::Off;
    if (std::strcmp(env, "trace") == 0) return Level::Trace;
    if (std::strcmp(env, "info") == 0) return Level::Info;
    return Level::Off;
  }();
  return lv;
}

void emit(Level lv, const std::string& msg) {
  if (static_cast<int>(lv) <= static_cast<int>(level())) {
    std::cerr << (lv == Level::Trace ? "[trace] " : "[info] ") << msg << "\n";
  }
}

}  // namespace nada::logging
