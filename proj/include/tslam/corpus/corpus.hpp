#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tslam/corpus/shapes.hpp"

namespace ts {

struct CorpusEntry {
  std::string id;
  ShapeFamily family = ShapeFamily::box;
  bool held_out = false;
  std::uint64_t seed = 0;
  std::map<std::string, double> params;
  std::uint64_t grid_digest = 0;
  std::string obj_path;   // relative to the corpus directory
  std::string tvox_path;  // relative to the corpus directory
};

struct CorpusManifest {
  std::uint64_t seed = 0;
  int resolution = 32;
  std::uint64_t config_digest = 0;  // run configuration that produced the corpus
  std::string directory;  // set on load/creation, not serialized
  std::vector<CorpusEntry> entries;

  std::vector<const CorpusEntry*> split(bool held_out) const;
};

/// Generates count shapes cycling through family_mix, writes OBJ + TVOX
/// pairs plus a manifest under dir, and returns the manifest. Deterministic
/// for fixed arguments, including the on-disk bytes.
CorpusManifest make_corpus(const std::string& dir, int count,
                           const std::vector<ShapeFamily>& family_mix,
                           std::uint64_t seed,
                           double held_out_fraction = 0.2, int n = 32);

void save_manifest(const CorpusManifest& manifest, const std::string& path);
CorpusManifest load_manifest(const std::string& path);

}  // namespace ts
