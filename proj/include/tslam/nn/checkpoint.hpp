#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tslam/nn/graph.hpp"

namespace ts::nn {

struct NamedTensor {
  std::string name;
  std::vector<int> shape;
  std::vector<float> data;
};

// Binary tensor container shared by policy ("TPOL") and reconstruction
// ("TREC") checkpoints: magic, u16 version, u64 config digest, u32 tensor
// count, then per tensor a length-prefixed name, dims, and f32 payload.
// All integers and floats little-endian.
void save_tensor_file(const std::string& path, const char magic[4], std::uint64_t config_digest,
                      const std::vector<NamedTensor>& tensors);

struct TensorFile {
  std::string magic;
  std::uint16_t version = 0;
  std::uint64_t config_digest = 0;
  std::vector<NamedTensor> tensors;

  const NamedTensor& find(const std::string& name) const;
};

TensorFile load_tensor_file(const std::string& path, const char expect_magic[4]);

template <typename T>
std::vector<NamedTensor> export_params(const std::vector<Param<T>*>& params) {
  std::vector<NamedTensor> out;
  out.reserve(params.size());
  for (const Param<T>* p : params) {
    NamedTensor nt;
    nt.name = p->name;
    nt.shape = p->w.shape;
    nt.data.reserve(p->w.v.size());
    for (T x : p->w.v) nt.data.push_back(static_cast<float>(x));
    out.push_back(std::move(nt));
  }
  return out;
}

template <typename T>
void import_params(const TensorFile& file, const std::vector<Param<T>*>& params) {
  for (Param<T>* p : params) {
    const NamedTensor& nt = file.find(p->name);
    if (nt.shape != p->w.shape)
      throw std::runtime_error("checkpoint: shape mismatch for tensor " + p->name);
    for (std::size_t i = 0; i < nt.data.size(); ++i) p->w.v[i] = static_cast<T>(nt.data[i]);
  }
}

}  // namespace ts::nn
