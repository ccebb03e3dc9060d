#include "tslam/nn/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace ts::nn {

namespace {

template <typename U>
void put(std::ostream& os, U value) {
  unsigned char buf[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) buf[i] = static_cast<unsigned char>(value >> (8 * i));
  os.write(reinterpret_cast<const char*>(buf), sizeof(U));
}

template <typename U>
U get(std::istream& is) {
  unsigned char buf[sizeof(U)];
  is.read(reinterpret_cast<char*>(buf), sizeof(U));
  if (!is) throw std::runtime_error("checkpoint: truncated file");
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(buf[i]) << (8 * i);
  return value;
}

void put_f32(std::ostream& os, float x) {
  std::uint32_t bits;
  std::memcpy(&bits, &x, 4);
  put<std::uint32_t>(os, bits);
}

float get_f32(std::istream& is) {
  const std::uint32_t bits = get<std::uint32_t>(is);
  float x;
  std::memcpy(&x, &bits, 4);
  return x;
}

}  // namespace

void save_tensor_file(const std::string& path, const char magic[4], std::uint64_t config_digest,
                      const std::vector<NamedTensor>& tensors) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("checkpoint: cannot open for writing: " + path);
  os.write(magic, 4);
  put<std::uint16_t>(os, 1);
  put<std::uint64_t>(os, config_digest);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(tensors.size()));
  for (const NamedTensor& t : tensors) {
    if (t.name.size() > 0xffff) throw std::runtime_error("checkpoint: tensor name too long");
    put<std::uint16_t>(os, static_cast<std::uint16_t>(t.name.size()));
    os.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    put<std::uint8_t>(os, static_cast<std::uint8_t>(t.shape.size()));
    std::size_t n = 1;
    for (int d : t.shape) {
      put<std::uint32_t>(os, static_cast<std::uint32_t>(d));
      n *= static_cast<std::size_t>(d);
    }
    if (n != t.data.size()) throw std::runtime_error("checkpoint: tensor size mismatch: " + t.name);
    for (float x : t.data) put_f32(os, x);
  }
  if (!os) throw std::runtime_error("checkpoint: write failed: " + path);
}

TensorFile load_tensor_file(const std::string& path, const char expect_magic[4]) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint: cannot open: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, expect_magic, 4) != 0)
    throw std::runtime_error("checkpoint: bad magic in " + path);
  TensorFile f;
  f.magic.assign(magic, 4);
  f.version = get<std::uint16_t>(is);
  if (f.version != 1) throw std::runtime_error("checkpoint: unsupported version");
  f.config_digest = get<std::uint64_t>(is);
  const std::uint32_t count = get<std::uint32_t>(is);
  f.tensors.resize(count);
  for (NamedTensor& t : f.tensors) {
    const std::uint16_t len = get<std::uint16_t>(is);
    t.name.resize(len);
    is.read(t.name.data(), len);
    const int nd = get<std::uint8_t>(is);
    std::size_t n = 1;
    for (int i = 0; i < nd; ++i) {
      const auto d = static_cast<int>(get<std::uint32_t>(is));
      t.shape.push_back(d);
      n *= static_cast<std::size_t>(d);
    }
    t.data.resize(n);
    for (float& x : t.data) x = get_f32(is);
  }
  return f;
}

const NamedTensor& TensorFile::find(const std::string& name) const {
  for (const NamedTensor& t : tensors)
    if (t.name == name) return t;
  throw std::runtime_error("checkpoint: missing tensor " + name);
}

}  // namespace ts::nn
