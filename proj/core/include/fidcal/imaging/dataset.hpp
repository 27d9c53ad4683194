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

#include <cstdint>
#include <string>
#include <vector>

#include "fidcal/imaging/image.hpp"

namespace fidcal::imaging {

struct SplitEntry {
  std::string rel_path;  // "<class_dir>/<file>"
  int class_id = 0;
};

/// Train/val/test membership over a directory-per-class corpus.
/// class_id is the index of the class directory in sorted order.
struct DatasetSplit {
  std::vector<std::string> class_names;
  std::vector<SplitEntry> train, val, test;
  int num_classes() const { return static_cast<int>(class_names.size()); }
};

struct SplitConfig {
  int train_per_class = 60;   // images drawn per class before the val carve-out
  double val_fraction = 0.2;  // fraction of the drawn pool held out for validation
};

/// Splits a corpus laid out as root/<class>/<image files>. Per class, a pool
/// of up to train_per_class images is drawn without replacement from a
/// deterministic shuffle keyed by (seed, class_id); val_fraction of the pool
/// becomes validation, the rest of the pool trains, and every remaining
/// image tests. Entries are stored sorted by (class_id, rel_path), so
/// identical inputs always produce byte-identical manifests.
DatasetSplit make_split(const std::string& root, std::uint64_t seed,
                        const SplitConfig& cfg = {});

/// Writes one line per entry: "<relative_path>\t<class_id>\t<split>\n"
/// with split in {train, val, test}, train lines first, then val, then test.
void write_manifest(const DatasetSplit& split, const std::string& path);

DatasetSplit read_manifest(const std::string& path);

/// Every split image decoded into memory, in manifest order.
struct LoadedDataset {
  std::vector<std::string> class_names;
  std::vector<Image> train_images, val_images, test_images;
  std::vector<int> train_labels, val_labels, test_labels;
  int num_classes() const { return static_cast<int>(class_names.size()); }
};

LoadedDataset load_dataset(const std::string& root, const DatasetSplit& split);

}  // namespace fidcal::imaging
