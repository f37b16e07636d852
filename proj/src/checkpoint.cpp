/*
 * Copyright 2026 The ANRS Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "anrs/checkpoint.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "anrs/errors.hpp"

namespace anrs {
namespace {

constexpr std::array<char, 8> kCheckpointMagic = {'A', 'N', 'R', 'S',
                                                  'C', 'K', 'P', 'T'};
constexpr std::array<char, 8> kTensorMagic = {'A', 'N', 'R', 'S',
                                              'T', 'N', 'S', 'R'};

template <typename T>
void Put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

void PutString(std::ostream& out, const std::string& s) {
  Put<std::uint64_t>(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <typename T>
T Get(std::istream& in) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw InputError("truncated binary file");
  }
  return value;
}

std::string GetString(std::istream& in) {
  const auto n = Get<std::uint64_t>(in);
  if (n > (1ULL << 32)) throw InputError("corrupt string length in binary file");
  std::string s(n, '\0');
  if (n > 0 && !in.read(s.data(), static_cast<std::streamsize>(n))) {
    throw InputError("truncated binary file");
  }
  return s;
}

void PutTensor(std::ostream& out, const Tensor& t) {
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
  for (std::size_t d : t.shape()) Put<std::uint64_t>(out, d);
  out.write(reinterpret_cast<const char*>(t.data()),
            static_cast<std::streamsize>(t.size() * sizeof(double)));
}

Tensor GetTensor(std::istream& in) {
  const auto rank = Get<std::uint32_t>(in);
  if (rank > 8) throw InputError("corrupt tensor rank in binary file");
  Shape shape(rank);
  for (auto& d : shape) d = Get<std::uint64_t>(in);
  Tensor t(shape);
  if (t.size() > 0 &&
      !in.read(reinterpret_cast<char*>(t.data()),
               static_cast<std::streamsize>(t.size() * sizeof(double)))) {
    throw InputError("truncated binary file");
  }
  return t;
}

void CheckMagic(std::istream& in, const std::array<char, 8>& magic,
                const char* what) {
  std::array<char, 8> got{};
  if (!in.read(got.data(), got.size()) || got != magic) {
    throw CompatibilityError(std::string("not an ANRS ") + what + " file");
  }
}

}  // namespace

void WriteCheckpoint(std::ostream& out, const Config& config,
                     std::uint64_t vocab_hash, const ModelShape& shape,
                     ModelParams& params) {
  out.write(kCheckpointMagic.data(), kCheckpointMagic.size());
  Put<std::uint32_t>(out, kCheckpointVersion);
  Put<std::uint64_t>(out, vocab_hash);
  Put<std::uint64_t>(out, shape.vocab);
  Put<std::uint64_t>(out, shape.categories);
  Put<std::uint64_t>(out, shape.subcategories);
  PutString(out, DumpConfig(config));
  const NamedParams named = params.Named();
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(named.size()));
  for (const auto& [name, tensor] : named) {
    PutString(out, name);
    PutTensor(out, *tensor);
  }
}

void SaveCheckpoint(const std::filesystem::path& path, const Config& config,
                    std::uint64_t vocab_hash, const ModelShape& shape,
                    ModelParams& params) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw InputError("cannot write " + tmp.string());
    WriteCheckpoint(out, config, vocab_hash, shape, params);
    if (!out) throw InputError("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint ReadCheckpoint(std::istream& in) {
  CheckMagic(in, kCheckpointMagic, "checkpoint");
  const auto version = Get<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw CompatibilityError("checkpoint version " + std::to_string(version) +
                             ", expected " +
                             std::to_string(kCheckpointVersion));
  }
  Checkpoint ckpt;
  ckpt.vocab_hash = Get<std::uint64_t>(in);
  ckpt.shape.vocab = Get<std::uint64_t>(in);
  ckpt.shape.categories = Get<std::uint64_t>(in);
  ckpt.shape.subcategories = Get<std::uint64_t>(in);
  ckpt.config = ParseConfig(GetString(in));

  std::map<std::string, Tensor> stored;
  const auto count = Get<std::uint32_t>(in);
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = GetString(in);
    stored.emplace(std::move(name), GetTensor(in));
  }
  ckpt.params = InitParams(ckpt.config, ckpt.shape, 0);
  for (const auto& [name, tensor] : ckpt.params.Named()) {
    auto it = stored.find(name);
    if (it == stored.end()) {
      throw CompatibilityError("checkpoint lacks tensor " + name);
    }
    if (it->second.shape() != tensor->shape()) {
      throw CompatibilityError("checkpoint tensor " + name + " has shape " +
                               ShapeToString(it->second.shape()) +
                               ", config implies " +
                               ShapeToString(tensor->shape()));
    }
    *tensor = std::move(it->second);
    stored.erase(it);
  }
  if (!stored.empty()) {
    throw CompatibilityError("checkpoint has unknown tensor " +
                             stored.begin()->first);
  }
  return ckpt;
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open checkpoint " + path.string());
  return ReadCheckpoint(in);
}

void SaveTensor(const std::filesystem::path& path, const Tensor& tensor) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out.write(kTensorMagic.data(), kTensorMagic.size());
  Put<std::uint32_t>(out, kCheckpointVersion);
  PutTensor(out, tensor);
  if (!out) throw InputError("failed writing " + path.string());
}

Tensor LoadTensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  CheckMagic(in, kTensorMagic, "tensor");
  const auto version = Get<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw CompatibilityError("tensor file version " + std::to_string(version));
  }
  return GetTensor(in);
}

}  // namespace anrs
