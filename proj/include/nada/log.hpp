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

#ifndef NADA_LOG_HPP
#define NADA_LOG_HPP

#include <string>

namespace nada::logging {

enum class Level { Off = 0, Info = 1, Trace = 2 };

// Controlled by NADA_LOG=info|trace; anything else is off.
Level level();
void emit(Level lv, const std::string& msg);

inline void info(const std::string& msg) { emit(Level::Info, msg); }
inline void trace(const std::string& msg) { emit(Level::Trace, msg); }

}  // namespace nada::logging

#endif  // NADA_LOG_HPP
