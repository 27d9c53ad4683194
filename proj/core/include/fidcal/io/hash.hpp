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

#include <cstddef>
#include <string>

namespace fidcal::io {

/// SHA-256 of a byte buffer, returned as lowercase hex.
std::string sha256_hex(const void* data, std::size_t len);

/// SHA-256 of a file's contents, returned as lowercase hex.
std::string sha256_file(const std::string& path);

/// Incremental SHA-256, for hashing checkpoint payloads while writing.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(const void* data, std::size_t len);
  std::string hex();  // finalizes; the object must not be updated afterwards

 private:
  void* ctx_ = nullptr;
};

}  // namespace fidcal::io
