#include "tslam/corpus/corpus.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "tslam/geom/mesh_io.hpp"
#include "tslam/util/rng.hpp"

namespace ts {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_params(const std::map<std::string, double>& params) {
  std::string out;
  for (const auto& [k, v] : params) {
    if (!out.empty()) out += ",";
    out += k + ":" + format_double(v);
  }
  return out.empty() ? "-" : out;
}

std::map<std::string, double> parse_params(const std::string& text) {
  std::map<std::string, double> out;
  if (text == "-") return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      throw std::runtime_error("manifest: bad params token '" + item + "'");
    }
    out[item.substr(0, colon)] = std::strtod(item.c_str() + colon + 1, nullptr);
  }
  return out;
}

std::map<std::string, std::string> parse_kv_line(const std::string& line) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(line);
  std::string token;
  ss >> token;  // record tag, already consumed by caller
  while (ss >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("manifest: bad token '" + token + "'");
    }
    kv[token.substr(0, eq)] = token.substr(eq + 1);
  }
  return kv;
}

}  // namespace

std::vector<const CorpusEntry*> CorpusManifest::split(bool held) const {
  std::vector<const CorpusEntry*> out;
  for (const auto& e : entries) {
    if (e.held_out == held) out.push_back(&e);
  }
  return out;
}

CorpusManifest make_corpus(const std::string& dir, int count,
                           const std::vector<ShapeFamily>& family_mix,
                           std::uint64_t seed, double held_out_fraction,
                           int n) {
  if (count < 1) throw std::invalid_argument("corpus count must be >= 1");
  if (family_mix.empty()) {
    throw std::invalid_argument("corpus family mix is empty");
  }
  if (held_out_fraction < 0.0 || held_out_fraction >= 1.0) {
    throw std::invalid_argument("held-out fraction must be in [0, 1)");
  }
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(dir) / "shapes");

  // deterministic split: shuffle ids, last chunk is held out
  std::vector<int> order(count);
  for (int i = 0; i < count; ++i) order[i] = i;
  Rng split_rng(derive_seed(seed, "corpus-split"));
  split_rng.shuffle(order.begin(), order.end());
  const int held = static_cast<int>(std::lround(count * held_out_fraction));
  std::set<int> held_ids(order.end() - held, order.end());

  CorpusManifest manifest;
  manifest.seed = seed;
  manifest.resolution = n;
  manifest.directory = dir;
  for (int i = 0; i < count; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "shape_%03d", i);
    const ShapeFamily family = family_mix[i % family_mix.size()];
    ShapeRecipe recipe =
        sample_recipe(family, derive_seed(seed, std::string("corpus-") + id));
    GeneratedShape shape = generate_shape(recipe, n);

    CorpusEntry e;
    e.id = id;
    e.family = family;
    e.held_out = held_ids.count(i) > 0;
    e.seed = recipe.seed;
    e.params = recipe.params;
    e.grid_digest = shape.grid.content_digest();
    e.obj_path = std::string("shapes/") + id + ".obj";
    e.tvox_path = std::string("shapes/") + id + ".tvox";
    save_obj(shape.mesh, (fs::path(dir) / e.obj_path).string());
    shape.grid.save_tvox((fs::path(dir) / e.tvox_path).string());
    manifest.entries.push_back(std::move(e));
  }
  save_manifest(manifest, (fs::path(dir) / "manifest.txt").string());
  return manifest;
}

void save_manifest(const CorpusManifest& manifest, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write manifest: " + path);
  os << "tslam-corpus 1\n";
  os << "seed " << manifest.seed << "\n";
  os << "resolution " << manifest.resolution << "\n";
  {
    char digest[20];
    std::snprintf(digest, sizeof(digest), "%016" PRIx64, manifest.config_digest);
    os << "config " << digest << "\n";
  }
  for (const auto& e : manifest.entries) {
    char digest[20];
    std::snprintf(digest, sizeof(digest), "%016" PRIx64, e.grid_digest);
    os << "shape id=" << e.id << " family=" << to_string(e.family)
       << " split=" << (e.held_out ? "held" : "train") << " seed=" << e.seed
       << " digest=" << digest << " obj=" << e.obj_path
       << " tvox=" << e.tvox_path << " params=" << format_params(e.params)
       << "\n";
  }
  if (!os) throw std::runtime_error("manifest write failed: " + path);
}

CorpusManifest load_manifest(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open manifest: " + path);
  CorpusManifest manifest;
  manifest.directory =
      std::filesystem::path(path).parent_path().string();
  std::string line;
  if (!std::getline(is, line) || line.rfind("tslam-corpus 1", 0) != 0) {
    throw std::runtime_error("manifest: bad header in " + path);
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "seed") {
      ss >> manifest.seed;
    } else if (tag == "resolution") {
      ss >> manifest.resolution;
    } else if (tag == "config") {
      std::string hex;
      ss >> hex;
      manifest.config_digest = std::strtoull(hex.c_str(), nullptr, 16);
    } else if (tag == "shape") {
      auto kv = parse_kv_line(line);
      CorpusEntry e;
      e.id = kv.at("id");
      e.family = family_from_string(kv.at("family"));
      e.held_out = kv.at("split") == "held";
      e.seed = std::strtoull(kv.at("seed").c_str(), nullptr, 10);
      e.grid_digest = std::strtoull(kv.at("digest").c_str(), nullptr, 16);
      e.obj_path = kv.at("obj");
      e.tvox_path = kv.at("tvox");
      e.params = parse_params(kv.at("params"));
      manifest.entries.push_back(std::move(e));
    } else {
      throw std::runtime_error("manifest: unknown record '" + tag + "'");
    }
  }
  return manifest;
}

}  // namespace ts
