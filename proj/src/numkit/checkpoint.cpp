// Copyright 2026 The hprior Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "numkit/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

#include "common/error.hpp"

namespace hprior::numkit {

namespace {

constexpr std::array<char, 8> kMagic = {'H', 'P', 'C', 'K', 'P', 'T', '\0', '\n'};

class Writer {
 public:
  explicit Writer(const std::string& path) : os_(path, std::ios::binary), path_(path) {
    require(os_.good(), ErrorKind::Io, "cannot open '", path, "' for writing");
  }
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    os_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void raw(const char* p, std::size_t n) { os_.write(p, static_cast<std::streamsize>(n)); }
  void tensor(const std::string& name, const Tensor& t) {
    str(name);
    u32(static_cast<std::uint32_t>(t.rank()));
    for (auto d : t.shape()) u64(d);
    for (double v : t.values()) f64(v);
  }
  void tensors(const TensorMap& m) {
    u32(static_cast<std::uint32_t>(m.size()));
    for (const auto& [k, t] : m) tensor(k, t);
  }
  void finish() {
    os_.flush();
    require(os_.good(), ErrorKind::Io, "write to '", path_, "' failed");
  }

 private:
  void le(std::uint64_t v, int bytes) {
    char buf[8];
    for (int i = 0; i < bytes; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os_.write(buf, bytes);
  }
  std::ofstream os_;
  std::string path_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : is_(path, std::ios::binary), path_(path) {
    require(is_.good(), ErrorKind::Io, "cannot open checkpoint '", path, "'");
  }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64() { return le(8); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const auto n = u32();
    require(n < (1u << 28), ErrorKind::Format, "corrupt string length in '", path_, "'");
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
  }
  void bytes(char* p, std::size_t n) {
    is_.read(p, static_cast<std::streamsize>(n));
    require(static_cast<std::size_t>(is_.gcount()) == n, ErrorKind::Format,
            "truncated checkpoint '", path_, "'");
  }
  std::pair<std::string, Tensor> tensor() {
    std::string name = str();
    const auto rank = u32();
    require(rank <= 8, ErrorKind::Format, "corrupt tensor rank in '", path_, "'");
    Shape shape(rank);
    for (auto& d : shape) d = u64();
    std::vector<double> data(shape_size(shape));
    for (auto& v : data) v = f64();
    return {std::move(name), Tensor(std::move(shape), std::move(data))};
  }
  TensorMap tensors() {
    TensorMap m;
    const auto n = u32();
    for (std::uint32_t i = 0; i < n; ++i) m.insert(tensor());
    return m;
  }

 private:
  std::uint64_t le(int n) {
    unsigned char buf[8];
    bytes(reinterpret_cast<char*>(buf), static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
  }
  std::ifstream is_;
  std::string path_;
};

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  Writer w(path);
  w.raw(kMagic.data(), kMagic.size());
  w.u32(kCheckpointVersion);
  w.str(ckpt.mode);
  w.str(ckpt.config_hash);
  w.u32(static_cast<std::uint32_t>(ckpt.meta.size()));
  for (const auto& [k, v] : ckpt.meta) {
    w.str(k);
    w.str(v);
  }
  w.tensors(ckpt.params);
  w.u64(ckpt.adam.step);
  w.f64(ckpt.adam.config.lr);
  w.f64(ckpt.adam.config.beta1);
  w.f64(ckpt.adam.config.beta2);
  w.f64(ckpt.adam.config.eps);
  w.tensors(ckpt.adam.m);
  w.tensors(ckpt.adam.v);
  w.str(ckpt.rng_state);
  w.finish();
}

Checkpoint load_checkpoint(const std::string& path) {
  Reader r(path);
  std::array<char, 8> magic{};
  r.bytes(magic.data(), magic.size());
  require(magic == kMagic, ErrorKind::Format, "'", path, "' is not a checkpoint file");
  const auto version = r.u32();
  require(version == kCheckpointVersion, ErrorKind::Format, "checkpoint '", path,
          "' has unsupported version ", version);
  Checkpoint c;
  c.mode = r.str();
  c.config_hash = r.str();
  const auto n_meta = r.u32();
  for (std::uint32_t i = 0; i < n_meta; ++i) {
    std::string k = r.str();
    c.meta[k] = r.str();
  }
  c.params = r.tensors();
  c.adam.step = r.u64();
  c.adam.config.lr = r.f64();
  c.adam.config.beta1 = r.f64();
  c.adam.config.beta2 = r.f64();
  c.adam.config.eps = r.f64();
  c.adam.m = r.tensors();
  c.adam.v = r.tensors();
  c.rng_state = r.str();
  return c;
}

}  // namespace hprior::numkit
