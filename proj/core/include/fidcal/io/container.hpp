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
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "fidcal/tensor.hpp"

namespace fidcal::io {

/// Binary array container used for checkpoints, sigma-field sidecars, and
/// cached tensors. Layout:
///
///   [0..7]   magic "FIDC0001"
///   [8..15]  little-endian u64: byte length of the JSON header
///   [16..)   JSON header {kind, meta, arrays:[{name,dtype,shape,offset,bytes}]}
///   then the concatenated raw little-endian array payloads.
///
/// Files are written atomically (temp file in the target directory, then
/// rename), and content_hash() gives the SHA-256 of the serialized bytes.
class Container {
 public:
  Container() = default;
  explicit Container(std::string kind) : kind_(std::move(kind)) {}

  const std::string& kind() const { return kind_; }
  void set_kind(std::string kind) { kind_ = std::move(kind); }

  nlohmann::json& meta() { return meta_; }
  const nlohmann::json& meta() const { return meta_; }

  void add(const std::string& name, const TensorT<float>& t);
  void add(const std::string& name, const TensorT<double>& t);
  void add(const std::string& name, const std::vector<int>& shape,
           const std::vector<std::int32_t>& values);

  bool has(const std::string& name) const;
  std::vector<std::string> names() const;
  const std::vector<int>& shape(const std::string& name) const;
  const std::string& dtype(const std::string& name) const;

  TensorT<float> get_f32(const std::string& name) const;
  TensorT<double> get_f64(const std::string& name) const;
  std::vector<std::int32_t> get_i32(const std::string& name) const;

  std::vector<std::uint8_t> serialize() const;
  void write(const std::string& path) const;
  static Container read(const std::string& path);

  /// SHA-256 hex of the serialized container bytes.
  std::string content_hash() const;

 private:
  struct Record {
    std::string name;
    std::string dtype;  // "f32" | "f64" | "i32"
    std::vector<int> shape;
    std::vector<std::uint8_t> bytes;
  };

  const Record& find(const std::string& name) const;

  std::string kind_;
  nlohmann::json meta_ = nlohmann::json::object();
  std::vector<Record> records_;
};

}  // namespace fidcal::io
