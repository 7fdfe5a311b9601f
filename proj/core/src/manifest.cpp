// Copyright 2026 The octsynth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include <nlohmann/json.hpp>

#include "octsynth/error.hpp"
#include "octsynth/tensor_io.hpp"

namespace octsynth {

using nlohmann::json;

std::filesystem::path DatasetManifest::resolve(const ManifestEntry& e,
                                               const std::string& stage) const {
  auto it = e.paths.find(stage);
  if (it == e.paths.end()) {
    throw ValidationError("manifest entry (" + std::to_string(e.identity_id) +
                          "," + std::to_string(e.impression_id) +
                          ") has no '" + stage + "' path");
  }
  std::filesystem::path p(it->second);
  return p.is_absolute() ? p : root / p;
}

bool DatasetManifest::has_stage(const std::string& stage) const {
  if (entries.empty()) return false;
  for (const auto& e : entries) {
    if (!e.paths.contains(stage)) return false;
  }
  return true;
}

std::string manifest_to_json(const DatasetManifest& m) {
  json entries = json::array();
  for (const auto& e : m.entries) {
    entries.push_back({{"identity_id", e.identity_id},
                       {"impression_id", e.impression_id},
                       {"category", std::string(to_string(e.category))},
                       {"paths", e.paths},
                       {"seed", e.seed}});
  }
  json doc = {{"entries", entries}};
  return doc.dump(2) + "\n";
}

DatasetManifest manifest_from_json(const std::string& text,
                                   const std::filesystem::path& root) {
  DatasetManifest m;
  m.root = root;
  try {
    const json doc = json::parse(text);
    for (const auto& j : doc.at("entries")) {
      ManifestEntry e;
      e.identity_id = j.at("identity_id").get<int>();
      e.impression_id = j.at("impression_id").get<int>();
      e.category = parse_category(j.at("category").get<std::string>());
      e.paths = j.at("paths").get<std::map<std::string, std::string>>();
      e.seed = j.at("seed").get<std::uint64_t>();
      m.entries.push_back(std::move(e));
    }
  } catch (const json::exception& ex) {
    throw FormatError("bad manifest", ex.what());
  }
  std::set<std::pair<int, int>> seen;
  for (const auto& e : m.entries) {
    if (!seen.emplace(e.identity_id, e.impression_id).second) {
      throw ValidationError("duplicate manifest entry (" +
                            std::to_string(e.identity_id) + "," +
                            std::to_string(e.impression_id) + ")");
    }
  }
  return m;
}

void save_manifest(const DatasetManifest& m, const std::filesystem::path& path) {
  const std::string text = manifest_to_json(m);
  write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                                   text.size()));
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  auto bytes = read_file_bytes(path);
  DatasetManifest m = manifest_from_json(std::string(bytes.begin(), bytes.end()),
                                         path.parent_path());
  for (const auto& e : m.entries) {
    for (const auto& [stage, rel] : e.paths) {
      auto p = m.resolve(e, stage);
      if (!std::filesystem::exists(p)) {
        throw IoError("manifest references missing file " + p.string());
      }
    }
  }
  return m;
}

}  // namespace octsynth
