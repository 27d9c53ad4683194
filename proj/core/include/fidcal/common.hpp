// Copyright 2026 The fidcal Authors
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

#pragma once

#include <cstdarg>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace fidcal {

/// Error type thrown by every fidcal component for contract violations
/// (bad arguments, malformed files, unusable datasets).
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {
inline int& log_level_ref() {
  static int level = 1;  // 0 = silent, 1 = progress, 2 = verbose
  return level;
}
}  // namespace detail

inline void set_log_level(int level) { detail::log_level_ref() = level; }
inline int log_level() { return detail::log_level_ref(); }

/// printf-style progress logging to stderr, gated by log level.
inline void logf(int level, const char* fmt, ...) {
  if (detail::log_level_ref() < level) return;
  std::va_list args;
  va_start(args, fmt);
  std::fprintf(stderr, "[fidcal] ");
  std::vfprintf(stderr, fmt, args);
  std::fprintf(stderr, "\n");
  va_end(args);
}

#define FIDCAL_CHECK(cond, msg)                 \
  do {                                          \
    if (!(cond)) throw ::fidcal::Error((msg));  \
  } while (0)

}  // namespace fidcal
