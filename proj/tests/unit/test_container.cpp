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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "fidcal/io/container.hpp"
#include "fidcal/io/hash.hpp"
#include "test_util.hpp"

using fidcal::Error;
using fidcal::Tensor;
using fidcal::TensorT;
using fidcal::io::Container;

namespace {

Tensor sample_tensor() {
  Tensor t({2, 3});
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = 0.5f * static_cast<float>(i) - 1.0f;
  return t;
}

}  // namespace

TEST_CASE("sha256 matches a known vector") {
  // "abc" -> well-known digest.
  CHECK(fidcal::io::sha256_hex("abc", 3) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(fidcal::io::sha256_hex("", 0) ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("sha256_file equals in-memory hash") {
  testutil::TempDir tmp;
  const std::string path = tmp.file("blob.bin");
  {
    std::ofstream out(path, std::ios::binary);
    out << "fidelity";
  }
  CHECK(fidcal::io::sha256_file(path) == fidcal::io::sha256_hex("fidelity", 8));
}

TEST_CASE("container roundtrips arrays, meta, and kind") {
  testutil::TempDir tmp;
  Container c("checkpoint");
  c.meta()["epoch"] = 7;
  c.meta()["note"] = "unit";

  c.add("weights", sample_tensor());
  TensorT<double> d({4});
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = 1.0 / (1.0 + static_cast<double>(i));
  c.add("precise", d);
  c.add("labels", {3}, {5, -2, 9});

  const std::string path = tmp.file("roundtrip.fidc");
  c.write(path);
  const Container r = Container::read(path);

  CHECK(r.kind() == "checkpoint");
  CHECK(r.meta().at("epoch").get<int>() == 7);
  CHECK(r.meta().at("note").get<std::string>() == "unit");
  CHECK(r.names() == std::vector<std::string>{"weights", "precise", "labels"});

  const Tensor w = r.get_f32("weights");
  CHECK(w.shape() == std::vector<int>{2, 3});
  for (std::size_t i = 0; i < w.size(); ++i) CHECK(w[i] == sample_tensor()[i]);

  const TensorT<double> p = r.get_f64("precise");
  for (std::size_t i = 0; i < p.size(); ++i) CHECK(p[i] == d[i]);

  CHECK(r.get_i32("labels") == std::vector<std::int32_t>{5, -2, 9});
}

TEST_CASE("content hash is stable and content-sensitive") {
  Container a("k"), b("k");
  a.add("x", sample_tensor());
  b.add("x", sample_tensor());
  CHECK(a.content_hash() == b.content_hash());

  Container c("k");
  Tensor t = sample_tensor();
  t[0] += 1.0f;
  c.add("x", t);
  CHECK(a.content_hash() != c.content_hash());
}

TEST_CASE("file hash equals serialized hash") {
  testutil::TempDir tmp;
  Container c("k");
  c.add("x", sample_tensor());
  const std::string path = tmp.file("c.fidc");
  c.write(path);
  CHECK(fidcal::io::sha256_file(path) == c.content_hash());
}

TEST_CASE("write is atomic: no temp file remains") {
  testutil::TempDir tmp;
  Container c("k");
  c.add("x", sample_tensor());
  c.write(tmp.file("out.fidc"));
  int entries = 0;
  for (const auto& e : std::filesystem::directory_iterator(tmp.path())) {
    (void)e;
    ++entries;
  }
  CHECK(entries == 1);
}

TEST_CASE("duplicate names are rejected") {
  Container c("k");
  c.add("x", sample_tensor());
  CHECK_THROWS_AS(c.add("x", sample_tensor()), Error);
}

TEST_CASE("missing array and dtype mismatch are rejected") {
  Container c("k");
  c.add("x", sample_tensor());
  CHECK_THROWS_AS(c.get_f32("y"), Error);
  CHECK_THROWS_AS(c.get_f64("x"), Error);
  CHECK_THROWS_AS(c.get_i32("x"), Error);
}

TEST_CASE("corrupt files are rejected") {
  testutil::TempDir tmp;

  SUBCASE("bad magic") {
    const std::string path = tmp.file("bad.fidc");
    std::ofstream(path, std::ios::binary) << "NOTAFIDCFILE....????";
    CHECK_THROWS_AS(Container::read(path), Error);
  }

  SUBCASE("truncated payload") {
    Container c("k");
    c.add("x", sample_tensor());
    const std::string path = tmp.file("trunc.fidc");
    c.write(path);
    const std::string bytes = testutil::read_file(path);
    std::ofstream(path, std::ios::binary | std::ios::trunc)
        << bytes.substr(0, bytes.size() - 4);
    CHECK_THROWS_AS(Container::read(path), Error);
  }

  SUBCASE("missing file") { CHECK_THROWS_AS(Container::read(tmp.file("nope.fidc")), Error); }
}
