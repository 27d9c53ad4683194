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

#include "fidcal/imaging/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "fidcal/imaging/codec.hpp"
#include "fidcal/rng.hpp"

namespace fidcal::imaging {

namespace fs = std::filesystem;

DatasetSplit make_split(const std::string& root, std::uint64_t seed, const SplitConfig& cfg) {
  FIDCAL_CHECK(cfg.train_per_class > 0, "make_split: train_per_class must be positive");
  FIDCAL_CHECK(cfg.val_fraction >= 0.0 && cfg.val_fraction < 1.0,
               "make_split: val_fraction must be in [0, 1)");
  FIDCAL_CHECK(fs::is_directory(root), "make_split: corpus root not found: " + root);

  std::vector<std::string> class_dirs;
  for (const auto& entry : fs::directory_iterator(root))
    if (entry.is_directory()) class_dirs.push_back(entry.path().filename().string());
  std::sort(class_dirs.begin(), class_dirs.end());
  FIDCAL_CHECK(class_dirs.size() >= 2,
               "make_split: corpus must contain at least two class directories");

  DatasetSplit split;
  split.class_names = class_dirs;

  for (int cid = 0; cid < static_cast<int>(class_dirs.size()); ++cid) {
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(fs::path(root) / class_dirs[cid]))
      if (entry.is_regular_file() && is_image_file(entry.path().string()))
        files.push_back(entry.path().filename().string());
    std::sort(files.begin(), files.end());
    FIDCAL_CHECK(!files.empty(),
                 "make_split: class directory has no images: " + class_dirs[cid]);

    Rng rng = Rng::stream(seed, {stream_tag::kSplit, static_cast<std::uint64_t>(cid)});
    rng.shuffle(files.begin(), files.end());

    const int pool = std::min<int>(cfg.train_per_class, static_cast<int>(files.size()));
    const int n_val = static_cast<int>(std::llround(pool * cfg.val_fraction));
    for (int i = 0; i < static_cast<int>(files.size()); ++i) {
      SplitEntry e{class_dirs[cid] + "/" + files[i], cid};
      if (i < n_val)
        split.val.push_back(std::move(e));
      else if (i < pool)
        split.train.push_back(std::move(e));
      else
        split.test.push_back(std::move(e));
    }
  }

  auto canonical = [](std::vector<SplitEntry>& v) {
    std::sort(v.begin(), v.end(), [](const SplitEntry& a, const SplitEntry& b) {
      return a.class_id != b.class_id ? a.class_id < b.class_id : a.rel_path < b.rel_path;
    });
  };
  canonical(split.train);
  canonical(split.val);
  canonical(split.test);
  return split;
}

void write_manifest(const DatasetSplit& split, const std::string& path) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  std::ofstream out(path, std::ios::trunc);
  FIDCAL_CHECK(out.good(), "write_manifest: cannot open " + path);
  auto dump = [&out](const std::vector<SplitEntry>& v, const char* name) {
    for (const auto& e : v) out << e.rel_path << '\t' << e.class_id << '\t' << name << '\n';
  };
  dump(split.train, "train");
  dump(split.val, "val");
  dump(split.test, "test");
  FIDCAL_CHECK(out.good(), "write_manifest: short write to " + path);
}

DatasetSplit read_manifest(const std::string& path) {
  std::ifstream in(path);
  FIDCAL_CHECK(in.good(), "read_manifest: cannot open " + path);

  DatasetSplit split;
  std::map<int, std::string> names;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string rel, split_name;
    int cid = -1;
    if (!std::getline(ss, rel, '\t') || !(ss >> cid) || !(ss >> split_name))
      throw Error("read_manifest: malformed line " + std::to_string(line_no) + " in " + path);

    const auto slash = rel.find('/');
    FIDCAL_CHECK(slash != std::string::npos,
                 "read_manifest: path without class directory on line " + std::to_string(line_no));
    const std::string cname = rel.substr(0, slash);
    auto [it, inserted] = names.emplace(cid, cname);
    FIDCAL_CHECK(inserted || it->second == cname,
                 "read_manifest: class id " + std::to_string(cid) + " maps to two directories");

    SplitEntry e{rel, cid};
    if (split_name == "train")
      split.train.push_back(std::move(e));
    else if (split_name == "val")
      split.val.push_back(std::move(e));
    else if (split_name == "test")
      split.test.push_back(std::move(e));
    else
      throw Error("read_manifest: unknown split '" + split_name + "' on line " +
                  std::to_string(line_no));
  }
  FIDCAL_CHECK(!names.empty(), "read_manifest: empty manifest " + path);
  const int max_id = names.rbegin()->first;
  FIDCAL_CHECK(static_cast<int>(names.size()) == max_id + 1,
               "read_manifest: class ids are not contiguous in " + path);
  split.class_names.resize(names.size());
  for (const auto& [cid, cname] : names) split.class_names[cid] = cname;
  return split;
}

LoadedDataset load_dataset(const std::string& root, const DatasetSplit& split) {
  LoadedDataset ds;
  ds.class_names = split.class_names;
  auto load = [&root](const std::vector<SplitEntry>& entries, std::vector<Image>& images,
                      std::vector<int>& labels) {
    images.reserve(entries.size());
    labels.reserve(entries.size());
    for (const auto& e : entries) {
      images.push_back(decode_image((fs::path(root) / e.rel_path).string()));
      labels.push_back(e.class_id);
    }
  };
  load(split.train, ds.train_images, ds.train_labels);
  load(split.val, ds.val_images, ds.val_labels);
  load(split.test, ds.test_images, ds.test_labels);
  return ds;
}

}  // namespace fidcal::imaging
