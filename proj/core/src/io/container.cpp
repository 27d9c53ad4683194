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

#include "fidcal/io/container.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>

#include "fidcal/common.hpp"
#include "fidcal/io/hash.hpp"

namespace fidcal::io {

namespace {

constexpr char kMagic[8] = {'F', 'I', 'D', 'C', '0', '0', '0', '1'};

template <typename T>
std::vector<std::uint8_t> to_bytes(const std::vector<T>& v) {
  std::vector<std::uint8_t> out(v.size() * sizeof(T));
  if (!out.empty()) std::memcpy(out.data(), v.data(), out.size());
  return out;
}

template <typename T>
std::vector<T> from_bytes(const std::vector<std::uint8_t>& b) {
  FIDCAL_CHECK(b.size() % sizeof(T) == 0, "container: payload size mismatch");
  std::vector<T> out(b.size() / sizeof(T));
  if (!out.empty()) std::memcpy(out.data(), b.data(), b.size());
  return out;
}

}  // namespace

void Container::add(const std::string& name, const TensorT<float>& t) {
  FIDCAL_CHECK(!has(name), "container: duplicate array name: " + name);
  records_.push_back({name, "f32", t.shape(), to_bytes(t.values())});
}

void Container::add(const std::string& name, const TensorT<double>& t) {
  FIDCAL_CHECK(!has(name), "container: duplicate array name: " + name);
  records_.push_back({name, "f64", t.shape(), to_bytes(t.values())});
}

void Container::add(const std::string& name, const std::vector<int>& shape,
                    const std::vector<std::int32_t>& values) {
  FIDCAL_CHECK(!has(name), "container: duplicate array name: " + name);
  FIDCAL_CHECK(TensorT<float>::count(shape) == values.size(),
               "container: i32 values do not match shape");
  records_.push_back({name, "i32", shape, to_bytes(values)});
}

bool Container::has(const std::string& name) const {
  for (const auto& r : records_)
    if (r.name == name) return true;
  return false;
}

std::vector<std::string> Container::names() const {
  std::vector<std::string> out;
  out.reserve(records_.size());
  for (const auto& r : records_) out.push_back(r.name);
  return out;
}

const Container::Record& Container::find(const std::string& name) const {
  for (const auto& r : records_)
    if (r.name == name) return r;
  throw Error("container: missing array: " + name);
}

const std::vector<int>& Container::shape(const std::string& name) const {
  return find(name).shape;
}

const std::string& Container::dtype(const std::string& name) const {
  return find(name).dtype;
}

TensorT<float> Container::get_f32(const std::string& name) const {
  const Record& r = find(name);
  FIDCAL_CHECK(r.dtype == "f32", "container: array " + name + " is not f32");
  return TensorT<float>(r.shape, from_bytes<float>(r.bytes));
}

TensorT<double> Container::get_f64(const std::string& name) const {
  const Record& r = find(name);
  FIDCAL_CHECK(r.dtype == "f64", "container: array " + name + " is not f64");
  return TensorT<double>(r.shape, from_bytes<double>(r.bytes));
}

std::vector<std::int32_t> Container::get_i32(const std::string& name) const {
  const Record& r = find(name);
  FIDCAL_CHECK(r.dtype == "i32", "container: array " + name + " is not i32");
  return from_bytes<std::int32_t>(r.bytes);
}

std::vector<std::uint8_t> Container::serialize() const {
  nlohmann::json header;
  header["kind"] = kind_;
  header["endianness"] = "little";
  header["meta"] = meta_;
  nlohmann::json arrays = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& r : records_) {
    arrays.push_back({{"name", r.name},
                      {"dtype", r.dtype},
                      {"shape", r.shape},
                      {"offset", offset},
                      {"bytes", r.bytes.size()}});
    offset += r.bytes.size();
  }
  header["arrays"] = std::move(arrays);

  const std::string hs = header.dump();
  std::vector<std::uint8_t> out;
  out.reserve(16 + hs.size() + offset);
  out.insert(out.end(), kMagic, kMagic + 8);
  std::uint64_t hlen = hs.size();
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>((hlen >> (8 * i)) & 0xff));
  out.insert(out.end(), hs.begin(), hs.end());
  for (const auto& r : records_) out.insert(out.end(), r.bytes.begin(), r.bytes.end());
  return out;
}

void Container::write(const std::string& path) const {
  const std::vector<std::uint8_t> bytes = serialize();
  const std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  const std::filesystem::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    FIDCAL_CHECK(out.good(), "container: cannot open for write: " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    FIDCAL_CHECK(out.good(), "container: short write: " + tmp.string());
  }
  std::filesystem::rename(tmp, target);
}

Container Container::read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  FIDCAL_CHECK(in.good(), "container: cannot open: " + path);

  char magic[8];
  in.read(magic, 8);
  FIDCAL_CHECK(in.gcount() == 8 && std::memcmp(magic, kMagic, 8) == 0,
               "container: bad magic in " + path);

  std::uint8_t lenb[8];
  in.read(reinterpret_cast<char*>(lenb), 8);
  FIDCAL_CHECK(in.gcount() == 8, "container: truncated header length in " + path);
  std::uint64_t hlen = 0;
  for (int i = 0; i < 8; ++i) hlen |= static_cast<std::uint64_t>(lenb[i]) << (8 * i);

  std::string hs(hlen, '\0');
  in.read(hs.data(), static_cast<std::streamsize>(hlen));
  FIDCAL_CHECK(static_cast<std::uint64_t>(in.gcount()) == hlen,
               "container: truncated header in " + path);

  nlohmann::json header = nlohmann::json::parse(hs, nullptr, false);
  FIDCAL_CHECK(!header.is_discarded(), "container: malformed header JSON in " + path);

  Container c;
  c.kind_ = header.value("kind", "");
  c.meta_ = header.value("meta", nlohmann::json::object());
  for (const auto& a : header.value("arrays", nlohmann::json::array())) {
    Record r;
    r.name = a.at("name").get<std::string>();
    r.dtype = a.at("dtype").get<std::string>();
    r.shape = a.at("shape").get<std::vector<int>>();
    const std::uint64_t nbytes = a.at("bytes").get<std::uint64_t>();
    r.bytes.resize(nbytes);
    in.read(reinterpret_cast<char*>(r.bytes.data()), static_cast<std::streamsize>(nbytes));
    FIDCAL_CHECK(static_cast<std::uint64_t>(in.gcount()) == nbytes,
                 "container: truncated payload for array " + r.name + " in " + path);
    c.records_.push_back(std::move(r));
  }
  return c;
}

std::string Container::content_hash() const {
  const std::vector<std::uint8_t> bytes = serialize();
  return sha256_hex(bytes.data(), bytes.size());
}

}  // namespace fidcal::io
